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
//
// Internal satisfiability backend. The search assigns semantic cells (frame
// fields, location shape, table entry fields, times, abstract propositions,
// arp-reqrx tuples) in a fixed order and prunes with a four-valued partial
// evaluator: False under a partial assignment means false under every
// extension, True means true under every extension, so branches close early.
// Cell domains are exactly the ones the exhaustive enumerator ranges over;
// tests cross-check the two on every formula family.

#include "lsfc/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lsfc/enumerate.hpp"

namespace lsfc {

// ---------------------------------------------------------------------------
// DomainConfig.

void DomainConfig::validate() const {
  auto bad = [](const std::string& msg) {
    throw OracleError(OracleError::Kind::bad_config, msg);
  };
  if (num_ports < 2) bad("need at least two ports (uplink plus one)");
  if (uplink_port < 1 || uplink_port > num_ports)
    bad("uplink port out of range");
  if (mlt_size < 1) bad("learning table needs at least one entry");
  if (mac_universe.empty() ||
      std::find(mac_universe.begin(), mac_universe.end(), broadcast_addr()) ==
          mac_universe.end())
    bad("mac universe must contain the broadcast address");
  if (proto_tags.empty()) bad("need at least one protocol tag");
  if (time_bound < 1) bad("time bound must be positive");
  if (mto < 1) bad("mto must be positive");
}

DomainConfig DomainConfig::desk() {
  DomainConfig cfg;
  cfg.mac_universe.push_back(broadcast_addr());
  for (int i = 1; i <= 4; ++i)
    cfg.mac_universe.push_back(
        parse_mac("0a:00:00:00:00:0" + std::to_string(i)));
  NetContext net = cfg.context();
  for (int p = 1; p <= cfg.num_ports; ++p)
    cfg.mac_universe.push_back(net.haddr(p));
  return cfg;
}

NetContext DomainConfig::context() const {
  return default_context(num_ports, uplink_port, mto,
                         static_cast<std::size_t>(mlt_size));
}

// ---------------------------------------------------------------------------
// Preprocessing: quantifier expansion plus structural-equality rewriting.

namespace {

[[noreturn]] void unsupported(const std::string& msg) {
  throw OracleError(OracleError::Kind::unsupported_construct, msg);
}

int update_index(const TermPtr& upd) {
  const TermPtr& idx = upd->b;
  if (idx->sort == Sort::Index && idx->kind == TermKind::PortLit)
    return idx->port_lit;
  unsupported("table update index is not a literal: " + render(upd));
}

Formula entry_fields_equal(const TermPtr& e1, const TermPtr& e2) {
  return fml::and_({fml::eq(trm::ent_mac(e1), trm::ent_mac(e2)),
                    fml::eq(trm::ent_ts(e1), trm::ent_ts(e2)),
                    fml::eq(trm::ent_port(e1), trm::ent_port(e2))});
}

Formula rewrite_eq(const TermPtr& t1, const TermPtr& t2, int mlt_size) {
  if (t1->kind == TermKind::Update)
    unsupported("update term on the left of an equality: " + render(t1));
  if (t1->sort == Sort::Frame && t2->kind != TermKind::Update) {
    return fml::and_({fml::eq(trm::da(t1), trm::da(t2)),
                      fml::eq(trm::sa(t1), trm::sa(t2)),
                      fml::eq(trm::proto(t1), trm::proto(t2))});
  }
  if (t1->sort == Sort::Entry && t2->kind != TermKind::Update)
    return entry_fields_equal(t1, t2);
  if (t1->sort == Sort::Table) {
    FormulaVec parts;
    if (t2->kind == TermKind::Update) {
      const int k = update_index(t2);
      const TermPtr& base = t2->a;
      if (base->kind == TermKind::Update)
        unsupported("nested table update: " + render(t2));
      for (int j = 0; j < mlt_size; ++j) {
        TermPtr lhs = trm::entry(t1, trm::idx_lit(j));
        if (j == k) {
          parts.push_back(fml::eq(trm::ent_mac(lhs), t2->fields[0]));
          parts.push_back(fml::eq(trm::ent_ts(lhs), t2->fields[1]));
          parts.push_back(fml::eq(trm::ent_port(lhs), t2->fields[2]));
        } else {
          parts.push_back(
              entry_fields_equal(lhs, trm::entry(base, trm::idx_lit(j))));
        }
      }
    } else {
      for (int j = 0; j < mlt_size; ++j)
        parts.push_back(entry_fields_equal(trm::entry(t1, trm::idx_lit(j)),
                                           trm::entry(t2, trm::idx_lit(j))));
    }
    return fml::and_(std::move(parts));
  }
  return Formula();  // not a structural equality: keep the atom as-is
}

Formula rewrite_structural(const Formula& f, int mlt_size) {
  const FormulaNode& n = f.node();
  switch (n.kind) {
    case FKind::Eq: {
      Formula r = rewrite_eq(n.t1, n.t2, mlt_size);
      return r.valid() ? r : f;
    }
    case FKind::Not:
      return fml::not_(rewrite_structural(n.kids[0], mlt_size));
    case FKind::And:
    case FKind::Or: {
      FormulaVec kids;
      kids.reserve(n.kids.size());
      for (const Formula& k : n.kids)
        kids.push_back(rewrite_structural(k, mlt_size));
      return n.kind == FKind::And ? fml::and_(std::move(kids))
                                  : fml::or_(std::move(kids));
    }
    case FKind::Implies:
      return fml::implies(rewrite_structural(n.kids[0], mlt_size),
                          rewrite_structural(n.kids[1], mlt_size));
    case FKind::Exists:
      return fml::exists(n.name, rewrite_structural(n.kids[0], mlt_size));
    case FKind::Lambda:
      return rewrite_structural(n.kids[0], mlt_size);
    default:
      return f;
  }
}

}  // namespace

Formula oracle_preprocess(const Formula& f, const DomainConfig& cfg) {
  cfg.validate();
  Formula g = strip_lambda(f);
  g = expand_quantifiers(g, static_cast<std::size_t>(cfg.mlt_size));
  return rewrite_structural(g, cfg.mlt_size);
}

// ---------------------------------------------------------------------------
// Four-valued partial evaluation over a cell assignment.

namespace {

// Truth under a partial assignment, abstracted as the set of three-valued
// verdicts (true / false / undefined) the formula can still take in full
// extensions of the assignment. Undefined enters only through ports the
// current location shape leaves permanently unbound, so once present it is
// as stable as a concrete value. The set combinators treat subformulas as
// independent, which over-approximates: a spurious member only delays
// pruning, while a missing True would lose witnesses and never occurs.
using TSet = std::uint8_t;
constexpr TSet kT = 1, kF = 2, kU = 4;

struct CVal {
  Sort sort = Sort::Time;
  std::int64_t num = 0;  // Time, Port, Index
  MacAddr mac{};
  std::string str;  // Proto
  IfaceSet set{};   // Loc
  Iface ifc{};
  Frame frame{};
};

struct PVal {
  enum class St : std::uint8_t { val, unknown, undef } st = St::unknown;
  CVal v;
  static PVal unknown() { return PVal{St::unknown, {}}; }
  static PVal undef() { return PVal{St::undef, {}}; }
  static PVal of(CVal v) { return PVal{St::val, std::move(v)}; }
};

struct EntCells {
  std::optional<MacAddr> mac;
  std::optional<std::int64_t> ts;
  std::optional<int> port;
};

// The partial assignment. optional-empty means "not yet assigned"; the
// *_never flags mark cells a real environment leaves unbound (the search
// only explores shapes where that can happen for ports).
struct Assign {
  std::optional<std::int64_t> t, x_t;
  std::optional<MacAddr> f_da, f_sa, x_f_da, x_f_sa;
  std::optional<std::string> f_proto, x_f_proto;
  std::optional<IfaceSet> loc, x_loc;
  std::optional<int> port, x_port;
  bool port_never = false, x_port_never = false;
  std::optional<int> self;
  std::vector<EntCells> mlt, x_mlt;
  std::map<std::string, std::optional<bool>> props;
  std::map<std::string, std::optional<bool>> arps;
};

struct SearchCtx {
  const DomainConfig& cfg;
  NetContext net;
};

PVal num_val(Sort s, std::int64_t n) {
  CVal v;
  v.sort = s;
  v.num = n;
  return PVal::of(std::move(v));
}

PVal mac_val(const MacAddr& m) {
  CVal v;
  v.sort = Sort::Mac;
  v.mac = m;
  return PVal::of(std::move(v));
}

PVal ev_term(const TermPtr& t, const Assign& a, const SearchCtx& c);

PVal ev_opt_mac(const std::optional<MacAddr>& m) {
  return m ? mac_val(*m) : PVal::unknown();
}

PVal ev_opt_num(Sort s, const std::optional<std::int64_t>& n) {
  return n ? num_val(s, *n) : PVal::unknown();
}

PVal ev_port_cell(const std::optional<int>& p, bool never) {
  if (never) return PVal::undef();
  if (!p) return PVal::unknown();
  return num_val(Sort::Port, *p);
}

PVal ev_frame_cells(const std::optional<MacAddr>& da,
                    const std::optional<MacAddr>& sa,
                    const std::optional<std::string>& proto) {
  if (!da || !sa || !proto) return PVal::unknown();
  CVal v;
  v.sort = Sort::Frame;
  v.frame = Frame{*da, *sa, *proto};
  return PVal::of(std::move(v));
}

PVal ev_var(const TermPtr& t, const Assign& a, const SearchCtx& c) {
  const bool s = t->snap;
  switch (t->var) {
    case VarId::Time:
      return ev_opt_num(Sort::Time, s ? a.x_t : a.t);
    case VarId::Frame:
      return s ? ev_frame_cells(a.x_f_da, a.x_f_sa, a.x_f_proto)
               : ev_frame_cells(a.f_da, a.f_sa, a.f_proto);
    case VarId::Loc: {
      const auto& l = s ? a.x_loc : a.loc;
      if (!l) return PVal::unknown();
      CVal v;
      v.sort = Sort::Loc;
      v.set = *l;
      return PVal::of(std::move(v));
    }
    case VarId::Port:
      return s ? ev_port_cell(a.x_port, a.x_port_never)
               : ev_port_cell(a.port, a.port_never);
    case VarId::Self:
      return a.self ? num_val(Sort::Port, *a.self) : PVal::unknown();
    case VarId::Uplink:
      return num_val(Sort::Port, c.net.uplink_port);
    case VarId::Mto:
      return num_val(Sort::Time, c.net.mto);
    case VarId::Mlt:
      unsupported("whole-table reference survived preprocessing");
  }
  return PVal::unknown();
}

const EntCells* entry_cells(const TermPtr& entry, const Assign& a,
                            const SearchCtx& c) {
  const TermPtr& tbl = entry->a;
  const TermPtr& idx = entry->b;
  if (tbl->kind != TermKind::Var || tbl->var != VarId::Mlt)
    unsupported("entry of a non-variable table: " + render(entry));
  if (idx->kind != TermKind::PortLit || idx->sort != Sort::Index)
    throw FormulaError(FormulaError::Kind::malformed_projection,
                       "unexpanded entry index: " + render(entry));
  const auto& tab = tbl->snap ? a.x_mlt : a.mlt;
  const int k = idx->port_lit;
  if (k < 0 || k >= static_cast<int>(tab.size()))
    throw FormulaError(FormulaError::Kind::malformed_projection,
                       "entry index out of range: " + render(entry));
  (void)c;
  return &tab[static_cast<std::size_t>(k)];
}

PVal ev_term(const TermPtr& t, const Assign& a, const SearchCtx& c) {
  switch (t->kind) {
    case TermKind::Var:
      return ev_var(t, a, c);
    case TermKind::Field: {
      const TermPtr& base = t->a;
      if (base->kind == TermKind::Var && base->sort == Sort::Frame) {
        const bool s = base->snap;
        switch (t->field) {
          case FieldId::Da: return ev_opt_mac(s ? a.x_f_da : a.f_da);
          case FieldId::Sa: return ev_opt_mac(s ? a.x_f_sa : a.f_sa);
          case FieldId::Proto: {
            const auto& p = s ? a.x_f_proto : a.f_proto;
            if (!p) return PVal::unknown();
            CVal v;
            v.sort = Sort::Proto;
            v.str = *p;
            return PVal::of(std::move(v));
          }
          default: break;
        }
      }
      if (base->kind == TermKind::Entry) {
        const EntCells* e = entry_cells(base, a, c);
        switch (t->field) {
          case FieldId::EntMac: return ev_opt_mac(e->mac);
          case FieldId::EntTs: return ev_opt_num(Sort::Time, e->ts);
          case FieldId::EntPort:
            return e->port ? num_val(Sort::Port, *e->port) : PVal::unknown();
          default: break;
        }
      }
      unsupported("field projection survived preprocessing: " + render(t));
    }
    case TermKind::Entry:
      unsupported("bare entry term survived preprocessing: " + render(t));
    case TermKind::HAddr: {
      PVal p = ev_term(t->a, a, c);
      if (p.st != PVal::St::val) return p;
      return mac_val(c.net.haddr(static_cast<int>(p.v.num)));
    }
    case TermKind::Diff: {
      PVal x = ev_term(t->a, a, c);
      PVal y = ev_term(t->b, a, c);
      if (x.st == PVal::St::undef || y.st == PVal::St::undef)
        return PVal::undef();
      if (x.st == PVal::St::unknown || y.st == PVal::St::unknown)
        return PVal::unknown();
      return num_val(Sort::Time, x.v.num - y.v.num);
    }
    case TermKind::Iface: {
      PVal p = ev_term(t->a, a, c);
      if (p.st != PVal::St::val) return p;
      CVal v;
      v.sort = Sort::Iface;
      v.ifc = Iface{static_cast<int>(p.v.num), t->iface_egress};
      return PVal::of(std::move(v));
    }
    case TermKind::IfaceSet: {
      CVal v;
      v.sort = Sort::Loc;
      v.set = t->set_lit;
      return PVal::of(std::move(v));
    }
    case TermKind::EgressAll: {
      std::vector<int> ports;
      for (int p = 1; p <= c.net.num_ports; ++p) ports.push_back(p);
      CVal v;
      v.sort = Sort::Loc;
      v.set = IfaceSet::egress(std::move(ports));
      return PVal::of(std::move(v));
    }
    case TermKind::Update:
      unsupported("update term survived preprocessing: " + render(t));
    case TermKind::IdxVar:
      throw FormulaError(FormulaError::Kind::malformed_projection,
                         "free entry index: " + render(t));
    case TermKind::MacLit:
      return mac_val(t->mac_lit);
    case TermKind::PortLit:
      return num_val(t->sort, t->port_lit);
    case TermKind::TimeLit:
      return num_val(Sort::Time, t->time_lit);
    case TermKind::ProtoLit: {
      CVal v;
      v.sort = Sort::Proto;
      v.str = t->proto_lit;
      return PVal::of(std::move(v));
    }
  }
  return PVal::unknown();
}

// Verdict set of an atom whose arguments are not all concrete: an undefined
// argument pins the atom to undefined forever; otherwise the pending cells
// can still drive it either way.
TSet lift2(const PVal& x, const PVal& y) {
  if (x.st == PVal::St::undef || y.st == PVal::St::undef) return kU;
  return kT | kF;
}

bool cvals_equal(const CVal& a, const CVal& b) {
  switch (a.sort) {
    case Sort::Time:
    case Sort::Port:
    case Sort::Index:
      return a.num == b.num;
    case Sort::Mac:
      return a.mac == b.mac;
    case Sort::Proto:
      return a.str == b.str;
    case Sort::Loc:
      return a.set == b.set;
    case Sort::Iface:
      return a.ifc == b.ifc;
    case Sort::Frame:
      return a.frame == b.frame;
    default:
      unsupported("structural equality survived preprocessing");
  }
}

constexpr TSet tset_not(TSet s) {
  return static_cast<TSet>(((s & kT) ? kF : 0) | ((s & kF) ? kT : 0) |
                           (s & kU));
}

// Pointwise Kleene conjunction over verdict sets: false absorbs, undefined
// survives anything that is not false.
constexpr TSet tset_and(TSet a, TSet b) {
  TSet r = 0;
  if ((a & kF) || (b & kF)) r |= kF;
  if ((a & kT) && (b & kT)) r |= kT;
  if (((a & kU) && (b & (kT | kU))) || ((b & kU) && (a & (kT | kU)))) r |= kU;
  return r;
}

constexpr TSet tset_or(TSet a, TSet b) {
  TSet r = 0;
  if ((a & kT) || (b & kT)) r |= kT;
  if ((a & kF) && (b & kF)) r |= kF;
  if (((a & kU) && (b & (kF | kU))) || ((b & kU) && (a & (kF | kU)))) r |= kU;
  return r;
}

constexpr TSet tset_bool(bool b) { return b ? kT : kF; }

TSet ev_formula(const Formula& f, const Assign& a, const SearchCtx& c) {
  const FormulaNode& n = f.node();
  switch (n.kind) {
    case FKind::True:
      return kT;
    case FKind::False:
      return kF;
    case FKind::Eq: {
      PVal x = ev_term(n.t1, a, c);
      PVal y = ev_term(n.t2, a, c);
      if (x.st != PVal::St::val || y.st != PVal::St::val) return lift2(x, y);
      return tset_bool(cvals_equal(x.v, y.v));
    }
    case FKind::Le: {
      PVal x = ev_term(n.t1, a, c);
      PVal y = ev_term(n.t2, a, c);
      if (x.st != PVal::St::val || y.st != PVal::St::val) return lift2(x, y);
      return tset_bool(x.v.num <= y.v.num);
    }
    case FKind::Member: {
      PVal i = ev_term(n.t1, a, c);
      PVal s = ev_term(n.t2, a, c);
      if (i.st != PVal::St::val || s.st != PVal::St::val) return lift2(i, s);
      return tset_bool(s.v.set.contains(i.v.ifc));
    }
    case FKind::SubsetEg: {
      PVal s = ev_term(n.t1, a, c);
      if (s.st != PVal::St::val)
        return s.st == PVal::St::undef ? kU : (kT | kF);
      return tset_bool(s.v.set.subset_of_egress());
    }
    case FKind::IsIngress: {
      if (!a.loc) return kT | kF;
      return tset_bool(a.loc->ingress_port().has_value());
    }
    case FKind::Ucast: {
      PVal m = ev_term(n.t1, a, c);
      if (m.st != PVal::St::val)
        return m.st == PVal::St::undef ? kU : (kT | kF);
      return tset_bool(is_ucast(m.v.mac));
    }
    case FKind::Bcast: {
      PVal m = ev_term(n.t1, a, c);
      if (m.st != PVal::St::val)
        return m.st == PVal::St::undef ? kU : (kT | kF);
      return tset_bool(is_bcast(m.v.mac));
    }
    case FKind::ArpReqRx: {
      PVal fr = ev_term(n.t1, a, c);
      PVal p = ev_term(n.t2, a, c);
      if (fr.st == PVal::St::undef || p.st == PVal::St::undef) return kU;
      auto it = a.arps.find(render(f));
      if (it == a.arps.end() || !it->second) return kT | kF;
      if (fr.st != PVal::St::val || p.st != PVal::St::val) return kT | kF;
      return tset_bool(*it->second);
    }
    case FKind::Prop: {
      auto it = a.props.find(n.name);
      if (it == a.props.end() || !it->second) return kT | kF;
      return tset_bool(*it->second);
    }
    case FKind::Not:
      return tset_not(ev_formula(n.kids[0], a, c));
    case FKind::And: {
      TSet r = kT;
      for (const Formula& k : n.kids) {
        r = tset_and(r, ev_formula(k, a, c));
        if (r == kF) return r;
      }
      return r;
    }
    case FKind::Or: {
      TSet r = kF;
      for (const Formula& k : n.kids) {
        r = tset_or(r, ev_formula(k, a, c));
        if (r == kT) return r;
      }
      return r;
    }
    case FKind::Implies:
      return tset_or(tset_not(ev_formula(n.kids[0], a, c)),
                     ev_formula(n.kids[1], a, c));
    case FKind::Exists:
      unsupported("quantifier survived preprocessing: " + render(f));
    case FKind::Lambda:
      unsupported("lambda survived preprocessing: " + render(f));
  }
  return kT | kF | kU;
}

// ---------------------------------------------------------------------------
// Search.

struct Branch {
  std::size_t count = 1;
  std::function<void(Assign&, std::size_t)> apply;
  std::function<void(Assign&)> clear;
};

void collect_props_arps(const Formula& f, std::set<std::string>& props,
                        std::map<std::string, Formula>& arps) {
  const FormulaNode& n = f.node();
  if (n.kind == FKind::Prop) {
    props.insert(n.name);
    return;
  }
  if (n.kind == FKind::ArpReqRx) {
    arps.emplace(render(f), f);
    return;
  }
  for (const Formula& k : f.node().kids) collect_props_arps(k, props, arps);
}

struct Searcher {
  const DomainConfig& cfg;
  SearchCtx ctx;
  Formula g;  // preprocessed formula
  std::vector<Branch> order;
  std::map<std::string, Formula> arp_atoms;  // render key -> atom
  Assign a;
  std::uint64_t local_nodes = 0;  // this query only; the budget is per query

  Searcher(const Formula& f, const DomainConfig& dc)
      : cfg(dc), ctx{dc, dc.context()}, g(oracle_preprocess(f, dc)) {
    std::set<std::string> props;
    collect_props_arps(g, props, arp_atoms);
    const VarProfile p = var_profile(g);
    build_order(p, props);
  }

  void build_order(const VarProfile& p, const std::set<std::string>& props);
  bool arp_consistent() const;
  bool run();
  bool rec(std::size_t d);
};

// A port-bound location shape per port, plus (when the location itself is
// read) every egress subset with the port permanently unbound. Environments
// where the port is unbound but the location is never read are redundant for
// satisfiability: truth is preserved when the port gets bound, and the bound
// environment is explored.
void add_loc_branch(std::vector<Branch>& order, bool loc_occurs,
                    bool port_occurs, int num_ports, bool snap) {
  if (!loc_occurs && !port_occurs) return;
  struct Shape {
    std::optional<IfaceSet> loc;
    std::optional<int> port;
    bool never;
  };
  auto shapes = std::make_shared<std::vector<Shape>>();
  for (int p = 1; p <= num_ports; ++p)
    shapes->push_back({IfaceSet::ingress(p), p, false});
  if (loc_occurs) {
    for (std::size_t bits = 0; bits < (std::size_t{1} << num_ports); ++bits) {
      std::vector<int> ports;
      for (int p = 1; p <= num_ports; ++p)
        if (bits & (std::size_t{1} << (p - 1))) ports.push_back(p);
      shapes->push_back({IfaceSet::egress(std::move(ports)), std::nullopt,
                         true});
    }
  }
  order.push_back(
      {shapes->size(),
       [shapes, snap](Assign& a, std::size_t i) {
         const Shape& s = (*shapes)[i];
         (snap ? a.x_loc : a.loc) = s.loc;
         (snap ? a.x_port : a.port) = s.port;
         (snap ? a.x_port_never : a.port_never) = s.never;
       },
       [snap](Assign& a) {
         (snap ? a.x_loc : a.loc).reset();
         (snap ? a.x_port : a.port).reset();
         (snap ? a.x_port_never : a.port_never) = false;
       }});
}

void Searcher::build_order(const VarProfile& p,
                           const std::set<std::string>& props) {
  const std::size_t macs = cfg.mac_universe.size();
  const std::size_t tags = cfg.proto_tags.size();
  const std::size_t ports = static_cast<std::size_t>(cfg.num_ports);
  const std::size_t times = static_cast<std::size_t>(cfg.time_bound + 1);
  const std::size_t stamps =
      static_cast<std::size_t>(cfg.time_bound - cfg.time_min() + 1);
  const DomainConfig& dc = cfg;

  add_loc_branch(order, p.loc, p.port, cfg.num_ports, false);
  add_loc_branch(order, p.x_loc, p.x_port, cfg.num_ports, true);
  if (p.self)
    order.push_back({ports,
                     [](Assign& a, std::size_t i) {
                       a.self = static_cast<int>(i) + 1;
                     },
                     [](Assign& a) { a.self.reset(); }});

  auto add_proto = [&](std::optional<std::string> Assign::* cell) {
    order.push_back({tags,
                     [cell, &dc](Assign& a, std::size_t i) {
                       a.*cell = dc.proto_tags[i];
                     },
                     [cell](Assign& a) { (a.*cell).reset(); }});
  };
  auto add_mac = [&](std::optional<MacAddr> Assign::* cell) {
    order.push_back({macs,
                     [cell, &dc](Assign& a, std::size_t i) {
                       a.*cell = dc.mac_universe[i];
                     },
                     [cell](Assign& a) { (a.*cell).reset(); }});
  };
  if (p.f_proto) add_proto(&Assign::f_proto);
  if (p.x_f_proto) add_proto(&Assign::x_f_proto);
  if (p.f_da) add_mac(&Assign::f_da);
  if (p.f_sa) add_mac(&Assign::f_sa);
  if (p.x_f_da) add_mac(&Assign::x_f_da);
  if (p.x_f_sa) add_mac(&Assign::x_f_sa);

  auto add_table = [&](std::vector<EntCells> Assign::* tab) {
    (a.*tab).resize(static_cast<std::size_t>(cfg.mlt_size));
    for (int d = 0; d < cfg.mlt_size; ++d) {
      order.push_back({macs,
                       [tab, d, &dc](Assign& a, std::size_t i) {
                         (a.*tab)[d].mac = dc.mac_universe[i];
                       },
                       [tab, d](Assign& a) { (a.*tab)[d].mac.reset(); }});
      order.push_back({ports,
                       [tab, d](Assign& a, std::size_t i) {
                         (a.*tab)[d].port = static_cast<int>(i) + 1;
                       },
                       [tab, d](Assign& a) { (a.*tab)[d].port.reset(); }});
    }
  };
  if (p.mlt) add_table(&Assign::mlt);
  if (p.x_mlt) add_table(&Assign::x_mlt);

  auto add_time = [&](std::optional<std::int64_t> Assign::* cell) {
    order.push_back({times,
                     [cell](Assign& a, std::size_t i) {
                       a.*cell = static_cast<std::int64_t>(i);
                     },
                     [cell](Assign& a) { (a.*cell).reset(); }});
  };
  if (p.t) add_time(&Assign::t);
  if (p.x_t) add_time(&Assign::x_t);

  auto add_stamps = [&](std::vector<EntCells> Assign::* tab) {
    for (int d = 0; d < cfg.mlt_size; ++d)
      order.push_back({stamps,
                       [tab, d, &dc](Assign& a, std::size_t i) {
                         (a.*tab)[d].ts =
                             dc.time_min() + static_cast<std::int64_t>(i);
                       },
                       [tab, d](Assign& a) { (a.*tab)[d].ts.reset(); }});
  };
  if (p.mlt) add_stamps(&Assign::mlt);
  if (p.x_mlt) add_stamps(&Assign::x_mlt);

  for (const std::string& name : props) {
    a.props[name] = std::nullopt;
    order.push_back({2,
                     [name](Assign& a, std::size_t i) {
                       a.props[name] = (i == 1);
                     },
                     [name](Assign& a) { a.props[name].reset(); }});
  }
  for (const auto& [key, atom] : arp_atoms) {
    (void)atom;
    a.arps[key] = std::nullopt;
    order.push_back({2,
                     [key](Assign& a, std::size_t i) {
                       a.arps[key] = (i == 1);
                     },
                     [key](Assign& a) { a.arps[key].reset(); }});
  }
}

// Two arp atoms whose argument tuples coincide under the current assignment
// must carry the same truth value; the per-atom branching is only free up to
// that identification.
bool Searcher::arp_consistent() const {
  std::map<std::string, bool> by_tuple;
  for (const auto& [key, atom] : arp_atoms) {
    const auto& val = a.arps.at(key);
    if (!val) continue;
    PVal fr = ev_term(atom.node().t1, a, ctx);
    PVal p = ev_term(atom.node().t2, a, ctx);
    if (fr.st != PVal::St::val || p.st != PVal::St::val) continue;
    std::string tk = mac_str(fr.v.frame.da) + "|" + mac_str(fr.v.frame.sa) +
                     "|" + fr.v.frame.proto + "|" + std::to_string(p.v.num);
    auto [it, inserted] = by_tuple.emplace(tk, *val);
    if (!inserted && it->second != *val) return false;
  }
  return true;
}

bool Searcher::rec(std::size_t d) {
  const TSet v = ev_formula(g, a, ctx);
  // No reachable True means no extension of this assignment is a witness;
  // that covers plain falsity and the subtler case where a port the location
  // shape never binds leaves the formula permanently undefined. Cutting on
  // the latter is what keeps queries whose refutation rests on "port is
  // unbound at egress" from walking the whole table space.
  if (!(v & kT)) return false;
  if (v == kT && arp_consistent()) return true;
  if (d == order.size()) return false;
  for (std::size_t i = 0; i < order[d].count; ++i) {
    ++local_nodes;
    if (local_nodes > cfg.budget)
      throw OracleError(OracleError::Kind::domain_too_large,
                        "internal search budget exceeded after " +
                            std::to_string(local_nodes) + " assignments on " +
                            (render(g).size() > 160
                                 ? render(g).substr(0, 160) + "..."
                                 : render(g)));
    order[d].apply(a, i);
    if (rec(d + 1)) return true;
  }
  order[d].clear(a);
  return false;
}

// Propositional refutation ahead of the environment search: abstract every
// non-logical leaf of the expanded formula to an independent boolean and
// search that space for an assignment that leaves True reachable. Proving
// there is none refutes the query outright -- theory models only constrain
// the leaves further -- and disposes of structurally contradictory queries
// (an atom conjoined with its own negation, a lookup hit conjoined with an
// all-miss sweep) that the environment search would refute by walking the
// table space once per location shape. Finding an assignment proves
// nothing, so the environment search still runs. Undefinedness needs no
// branch of its own: a formula true under an undefined leaf stays true when
// that leaf is forced either way, so boolean branching covers it.
namespace {

bool is_atom_kind(FKind k) {
  switch (k) {
    case FKind::True:
    case FKind::False:
    case FKind::And:
    case FKind::Or:
    case FKind::Not:
    case FKind::Implies:
      return false;
    default:
      return true;
  }
}

class PropRefuter {
 public:
  explicit PropRefuter(const Formula& f) { index(f); }

  // True iff no boolean leaf assignment can make f true, established within
  // the node cap. The cap keeps the pass a fixed small cost; past it the
  // pass abstains rather than answers.
  bool refuted(const Formula& f) { return !reachable_true(f, 0) && !bailed_; }

 private:
  void index(const Formula& f) {
    const FormulaNode& n = f.node();
    if (is_atom_kind(n.kind)) {
      std::string key = render(f);
      if (seen_.insert(key).second) order_.push_back(key);
      keys_.emplace(&n, std::move(key));
      return;
    }
    for (const Formula& k : n.kids) index(k);
  }

  TSet eval(const Formula& f) const {
    const FormulaNode& n = f.node();
    switch (n.kind) {
      case FKind::True:
        return kT;
      case FKind::False:
        return kF;
      case FKind::Not:
        return tset_not(eval(n.kids[0]));
      case FKind::And: {
        TSet r = kT;
        for (const Formula& k : n.kids) {
          r = tset_and(r, eval(k));
          if (r == kF) return r;
        }
        return r;
      }
      case FKind::Or: {
        TSet r = kF;
        for (const Formula& k : n.kids) {
          r = tset_or(r, eval(k));
          if (r == kT) return r;
        }
        return r;
      }
      case FKind::Implies:
        return tset_or(tset_not(eval(n.kids[0])), eval(n.kids[1]));
      default: {
        auto it = assign_.find(keys_.at(&n));
        if (it != assign_.end()) return tset_bool(it->second);
        return kT | kF | kU;
      }
    }
  }

  bool reachable_true(const Formula& f, std::size_t d) {
    if (++nodes_ > kNodeCap) {
      bailed_ = true;
      return true;
    }
    const TSet v = eval(f);
    if (!(v & kT)) return false;
    if (v == kT || d == order_.size()) return true;
    for (bool val : {true, false}) {
      assign_[order_[d]] = val;
      if (reachable_true(f, d + 1)) return true;
    }
    assign_.erase(order_[d]);
    return false;
  }

  static constexpr std::uint64_t kNodeCap = 1 << 16;
  std::set<std::string> seen_;
  std::vector<std::string> order_;           // branch order: first occurrence
  std::map<const FormulaNode*, std::string> keys_;
  std::map<std::string, bool> assign_;
  std::uint64_t nodes_ = 0;
  bool bailed_ = false;
};

}  // namespace

bool Searcher::run() {
  if (PropRefuter(g).refuted(g)) return false;
  return rec(0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points.

SatOracle::SatOracle(DomainConfig cfg, Backend backend,
                     std::string solver_command)
    : cfg_(std::move(cfg)),
      backend_(backend),
      solver_command_(std::move(solver_command)) {
  cfg_.validate();
  if (backend_ == Backend::external_process && solver_command_.empty())
    throw OracleError(OracleError::Kind::bad_config,
                      "external backend needs a solver command");
}

bool SatOracle::is_satisfiable(const Formula& f) {
  ++queries_;
  if (backend_ == Backend::external_process) {
    return run_external_solver(solver_command_,
                               to_smtlib(oracle_preprocess(f, cfg_), cfg_));
  }
  Searcher s(f, cfg_);
  try {
    const bool sat = s.run();
    nodes_ += s.local_nodes;
    return sat;
  } catch (...) {
    nodes_ += s.local_nodes;
    throw;
  }
}

bool is_satisfiable(const Formula& f, const DomainConfig& cfg) {
  Searcher s(f, cfg);
  return s.run();
}

}  // namespace lsfc
