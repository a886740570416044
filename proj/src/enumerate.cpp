// Copyright 2026 The lsfc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsfc/enumerate.hpp"

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace lsfc {

namespace {

void mark_term(const TermPtr& t, VarProfile& p) {
  if (!t) return;
  // A frame-field projection touches just that field; a bare frame variable
  // (whole-frame equality, arp argument) touches all of them.
  if (t->kind == TermKind::Field && t->a && t->a->kind == TermKind::Var &&
      t->a->sort == Sort::Frame) {
    const bool s = t->a->snap;
    switch (t->field) {
      case FieldId::Da: (s ? p.x_f_da : p.f_da) = true; break;
      case FieldId::Sa: (s ? p.x_f_sa : p.f_sa) = true; break;
      case FieldId::Proto: (s ? p.x_f_proto : p.f_proto) = true; break;
      default: break;
    }
    return;
  }
  if (t->kind == TermKind::Var) {
    switch (t->var) {
      case VarId::Time: (t->snap ? p.x_t : p.t) = true; break;
      case VarId::Frame:
        if (t->snap) {
          p.x_f_da = p.x_f_sa = p.x_f_proto = true;
        } else {
          p.f_da = p.f_sa = p.f_proto = true;
        }
        break;
      case VarId::Loc: (t->snap ? p.x_loc : p.loc) = true; break;
      case VarId::Port: (t->snap ? p.x_port : p.port) = true; break;
      case VarId::Self: p.self = true; break;
      case VarId::Uplink: break;  // context constant
      case VarId::Mto: break;     // context constant
      case VarId::Mlt: (t->snap ? p.x_mlt : p.mlt) = true; break;
    }
    return;
  }
  mark_term(t->a, p);
  mark_term(t->b, p);
  for (const TermPtr& k : t->fields) mark_term(k, p);
}

void mark_formula(const Formula& f, VarProfile& p,
                  std::set<std::string>& props) {
  const FormulaNode& n = f.node();
  switch (n.kind) {
    case FKind::True:
    case FKind::False:
      return;
    case FKind::IsIngress:
      p.loc = true;
      return;
    case FKind::Prop:
      props.insert(n.name);
      return;
    case FKind::Eq:
    case FKind::Le:
    case FKind::Member:
    case FKind::SubsetEg:
    case FKind::Ucast:
    case FKind::Bcast:
    case FKind::ArpReqRx:
      mark_term(n.t1, p);
      mark_term(n.t2, p);
      return;
    case FKind::Not:
    case FKind::And:
    case FKind::Or:
    case FKind::Implies:
    case FKind::Exists:
    case FKind::Lambda:
      for (const Formula& k : n.kids) mark_formula(k, p, props);
      return;
  }
}

// One enumerable axis: `count` choices, `set` applies choice i to the
// environment under construction.
struct Dim {
  std::size_t count = 1;
  std::function<void(Env&, std::size_t)> set;
};

// Location shapes a real event can have: an ingress singleton binds the
// port, an egress set (the empty set included) leaves it unbound.
struct LocChoice {
  std::optional<IfaceSet> loc;
  std::optional<int> port;
};

std::vector<LocChoice> loc_choices(bool loc_occurs, bool port_occurs,
                                   int num_ports) {
  std::vector<LocChoice> out;
  if (loc_occurs) {
    for (int p = 1; p <= num_ports; ++p)
      out.push_back({IfaceSet::ingress(p), p});
    for (std::size_t bits = 0; bits < (std::size_t{1} << num_ports); ++bits) {
      std::vector<int> ports;
      for (int p = 1; p <= num_ports; ++p)
        if (bits & (std::size_t{1} << (p - 1))) ports.push_back(p);
      out.push_back({IfaceSet::egress(std::move(ports)), std::nullopt});
    }
  } else if (port_occurs) {
    // Location itself is never read: one representative per bound port plus
    // one egress-shaped environment where the port stays unbound.
    for (int p = 1; p <= num_ports; ++p)
      out.push_back({IfaceSet::ingress(p), p});
    out.push_back({IfaceSet::egress({}), std::nullopt});
  } else {
    out.push_back({std::nullopt, std::nullopt});
  }
  return out;
}

void collect_arp_atoms(const Formula& f, std::vector<const FormulaNode*>& out) {
  const FormulaNode& n = f.node();
  if (n.kind == FKind::ArpReqRx) {
    out.push_back(&n);
    return;
  }
  for (const Formula& k : f.node().kids) collect_arp_atoms(k, out);
}

std::string tuple_key(const Frame& fr, int port) {
  return mac_str(fr.da) + "|" + mac_str(fr.sa) + "|" + fr.proto + "|" +
         std::to_string(port);
}

struct Space {
  std::vector<Dim> dims;
  VarProfile profile;
  std::set<std::string> props;
};

Space build_space(const Formula& f, const DomainConfig& cfg) {
  cfg.validate();
  Space s;
  mark_formula(f, s.profile, s.props);
  const VarProfile& p = s.profile;
  const std::size_t macs = cfg.mac_universe.size();
  const std::size_t tags = cfg.proto_tags.size();
  const std::size_t times = static_cast<std::size_t>(cfg.time_bound + 1);
  const std::size_t stamps =
      static_cast<std::size_t>(cfg.time_bound - cfg.time_min() + 1);

  if (p.self) {
    s.dims.push_back({static_cast<std::size_t>(cfg.num_ports),
                      [](Env& e, std::size_t i) {
                        e.self = static_cast<int>(i) + 1;
                      }});
  }
  if (p.t) {
    s.dims.push_back({times, [](Env& e, std::size_t i) {
                        e.cur.time = static_cast<std::int64_t>(i);
                      }});
  }
  // Frame: bound whenever any field occurs; unread fields are pinned.
  if (p.f_da || p.f_sa || p.f_proto) {
    s.dims.push_back({1, [&cfg](Env& e, std::size_t) {
                        e.cur.frame = Frame{cfg.mac_universe.front(),
                                            cfg.mac_universe.front(),
                                            cfg.proto_tags.front()};
                      }});
    if (p.f_da)
      s.dims.push_back({macs, [&cfg](Env& e, std::size_t i) {
                          e.cur.frame->da = cfg.mac_universe[i];
                        }});
    if (p.f_sa)
      s.dims.push_back({macs, [&cfg](Env& e, std::size_t i) {
                          e.cur.frame->sa = cfg.mac_universe[i];
                        }});
    if (p.f_proto)
      s.dims.push_back({tags, [&cfg](Env& e, std::size_t i) {
                          e.cur.frame->proto = cfg.proto_tags[i];
                        }});
  }
  {
    auto locs = std::make_shared<std::vector<LocChoice>>(
        loc_choices(p.loc, p.port, cfg.num_ports));
    if (locs->size() > 1 || (*locs)[0].loc) {
      s.dims.push_back({locs->size(), [locs](Env& e, std::size_t i) {
                          e.cur.loc = (*locs)[i].loc;
                          e.cur.port = (*locs)[i].port;
                        }});
    }
  }
  if (p.mlt) {
    const int n = cfg.mlt_size;
    s.dims.push_back({1, [n, &cfg](Env& e, std::size_t) {
                        e.cur.mlt = initial_table(static_cast<std::size_t>(n),
                                                  cfg.mto);
                      }});
    for (int d = 0; d < n; ++d) {
      s.dims.push_back({macs, [d, &cfg](Env& e, std::size_t i) {
                          e.cur.mlt->entries[d].mac = cfg.mac_universe[i];
                        }});
      s.dims.push_back({stamps, [d, &cfg](Env& e, std::size_t i) {
                          e.cur.mlt->entries[d].ts =
                              cfg.time_min() + static_cast<std::int64_t>(i);
                        }});
      s.dims.push_back({static_cast<std::size_t>(cfg.num_ports),
                        [d](Env& e, std::size_t i) {
                          e.cur.mlt->entries[d].port =
                              static_cast<int>(i) + 1;
                        }});
    }
  }
  if (p.any_snapshot()) {
    s.dims.push_back({1, [](Env& e, std::size_t) { e.snap = EnvCore{}; }});
    if (p.x_t)
      s.dims.push_back({times, [](Env& e, std::size_t i) {
                          e.snap->time = static_cast<std::int64_t>(i);
                        }});
    if (p.x_mlt) {
      const int n = cfg.mlt_size;
      s.dims.push_back({1, [n, &cfg](Env& e, std::size_t) {
                          e.snap->mlt = initial_table(
                              static_cast<std::size_t>(n), cfg.mto);
                        }});
      for (int d = 0; d < n; ++d) {
        s.dims.push_back({macs, [d, &cfg](Env& e, std::size_t i) {
                            e.snap->mlt->entries[d].mac = cfg.mac_universe[i];
                          }});
        s.dims.push_back({stamps, [d, &cfg](Env& e, std::size_t i) {
                            e.snap->mlt->entries[d].ts =
                                cfg.time_min() + static_cast<std::int64_t>(i);
                          }});
        s.dims.push_back({static_cast<std::size_t>(cfg.num_ports),
                          [d](Env& e, std::size_t i) {
                            e.snap->mlt->entries[d].port =
                                static_cast<int>(i) + 1;
                          }});
      }
    }
    // Frame/location shape of the snapshot. A world snapshot binds the frame
    // and location; the initial snapshot leaves frame, loc and port unbound.
    if (p.x_f_da || p.x_f_sa || p.x_f_proto || p.x_loc || p.x_port) {
      const bool any_xf = p.x_f_da || p.x_f_sa || p.x_f_proto;
      auto locs = std::make_shared<std::vector<LocChoice>>(
          loc_choices(p.x_loc, p.x_port, cfg.num_ports));
      // Choice 0 is the initial-snapshot shape; the rest pair a bound frame
      // with each location shape.
      s.dims.push_back(
          {1 + locs->size(), [locs, any_xf, &cfg](Env& e, std::size_t i) {
             if (i == 0) {
               e.snap->frame = std::nullopt;
               e.snap->loc = std::nullopt;
               e.snap->port = std::nullopt;
             } else {
               if (any_xf)
                 e.snap->frame = Frame{cfg.mac_universe.front(),
                                       cfg.mac_universe.front(),
                                       cfg.proto_tags.front()};
               e.snap->loc = (*locs)[i - 1].loc;
               e.snap->port = (*locs)[i - 1].port;
             }
           }});
      if (p.x_f_da)
        s.dims.push_back({macs, [&cfg](Env& e, std::size_t i) {
                            if (e.snap->frame)
                              e.snap->frame->da = cfg.mac_universe[i];
                          }});
      if (p.x_f_sa)
        s.dims.push_back({macs, [&cfg](Env& e, std::size_t i) {
                            if (e.snap->frame)
                              e.snap->frame->sa = cfg.mac_universe[i];
                          }});
      if (p.x_f_proto)
        s.dims.push_back({tags, [&cfg](Env& e, std::size_t i) {
                            if (e.snap->frame)
                              e.snap->frame->proto = cfg.proto_tags[i];
                          }});
    }
  }
  for (const std::string& name : s.props) {
    s.dims.push_back({2, [name](Env& e, std::size_t i) {
                        e.props[name] = (i == 1);
                      }});
  }
  return s;
}

}  // namespace

VarProfile var_profile(const Formula& f) {
  VarProfile p;
  std::set<std::string> props;
  mark_formula(f, p, props);
  return p;
}

bool for_each_env(const Formula& f, const DomainConfig& cfg,
                  const std::function<bool(const Env&)>& fn) {
  Space space = build_space(f, cfg);
  NetContext base_net = cfg.context();
  std::vector<const FormulaNode*> arp_atoms;
  collect_arp_atoms(f, arp_atoms);

  Env env;
  env.net = &base_net;

  std::function<bool(std::size_t)> rec = [&](std::size_t d) -> bool {
    if (d == space.dims.size()) {
      // Range the opaque predicate over every argument tuple the formula
      // actually reaches under this environment.
      std::vector<std::pair<Frame, int>> tuples;
      std::set<std::string> seen;
      for (const FormulaNode* a : arp_atoms) {
        std::optional<Frame> fr;
        std::optional<int> pt;
        try {
          fr = eval_frame_term(a->t1, env);
          pt = eval_port_term(a->t2, env);
        } catch (const FormulaError&) {
          continue;
        }
        if (!fr || !pt) continue;
        if (seen.insert(tuple_key(*fr, *pt)).second)
          tuples.emplace_back(*fr, *pt);
      }
      const std::size_t combos = std::size_t{1} << tuples.size();
      for (std::size_t bits = 0; bits < combos; ++bits) {
        NetContext net = base_net;
        if (!tuples.empty()) {
          auto table = std::make_shared<std::map<std::string, bool>>();
          for (std::size_t i = 0; i < tuples.size(); ++i)
            (*table)[tuple_key(tuples[i].first, tuples[i].second)] =
                (bits >> i) & 1;
          net.arp = [table](const Frame& fr, int p) {
            auto it = table->find(tuple_key(fr, p));
            return it != table->end() && it->second;
          };
        }
        env.net = &net;
        const bool stop = fn(env);
        env.net = &base_net;
        if (stop) return true;
      }
      return false;
    }
    for (std::size_t i = 0; i < space.dims[d].count; ++i) {
      space.dims[d].set(env, i);
      if (rec(d + 1)) return true;
    }
    return false;
  };
  return rec(0);
}

bool enumerate_is_satisfiable(const Formula& f, const DomainConfig& cfg) {
  return for_each_env(
      f, cfg, [&f](const Env& e) { return eval3(f, e) == Tri::True; });
}

std::uint64_t enumeration_size(const Formula& f, const DomainConfig& cfg) {
  Space space = build_space(f, cfg);
  std::uint64_t n = 1;
  for (const Dim& d : space.dims) {
    if (n > (std::uint64_t{1} << 62) / (d.count ? d.count : 1))
      return ~std::uint64_t{0};  // saturate
    n *= static_cast<std::uint64_t>(d.count);
  }
  return n;
}

}  // namespace lsfc
