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

#include "lsfc/netsim.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>
#include <utility>

#include "lsfc/dnf.hpp"

namespace lsfc {

namespace {

using NK = NetsimError::Kind;

// Every ingress is followed by its induced egress at time + 1, so
// consecutive ingress times must leave that slot free.
void validate_workload(const std::vector<IngressEvent>& w,
                       const NetContext& net) {
  std::int64_t prev = -1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const IngressEvent& e = w[i];
    if (e.time < 1)
      throw NetsimError(NK::bad_workload,
                        "ingress " + std::to_string(i) + " at time " +
                            std::to_string(e.time) + ": times start at 1");
    if (i > 0 && e.time <= prev + 1)
      throw NetsimError(
          NK::bad_workload,
          "ingress " + std::to_string(i) + " at time " +
              std::to_string(e.time) + ": needs time > " +
              std::to_string(prev + 1) +
              " to leave room for the induced egress event");
    if (e.port < 1 || e.port > net.num_ports)
      throw NetsimError(NK::bad_workload,
                        "ingress " + std::to_string(i) + ": port " +
                            std::to_string(e.port) + " outside 1.." +
                            std::to_string(net.num_ports));
    prev = e.time;
  }
}

// The world every instance snapshots before the first event: one tick
// before it, with the all-expired table and nothing else bound.
EnvCore initial_world(std::int64_t first_time, const NetContext& net) {
  EnvCore w;
  w.time = first_time - 1;
  w.mlt = initial_table(net.mlt_size, net.mto);
  return w;
}

// Key of the egress-membership constraint `(in (egr self) loc)`; a port
// joins the egress set exactly when it can realize a disjunct carrying this
// atom positively.
const std::string& member_key() {
  static const std::string k =
      render(fml::member(trm::iface(trm::self(), true), trm::loc()));
  return k;
}

bool has_positive_member(const Disjunct& dj) {
  for (const Literal& l : dj.lits)
    if (!l.negated && l.key() == member_key()) return true;
  return false;
}

// One recognizer instance per port; they share the learning table but each
// binds its own `self` and keeps its own snapshot.
struct Instance {
  std::string state;
  std::optional<EnvCore> snap;
};

std::string stuck_msg(int self, const std::string& state, const TraceEvent& ev,
                      const IngressEvent& cause) {
  return "instance self=" + std::to_string(self) + " stuck in state " + state +
         " at event [" + trace_line(ev) + "] induced by ingress [" +
         workload_line(cause) + "]";
}

void step_instances(const LambdaSFA& m, std::vector<Instance>& inst,
                    const TraceEvent& ev, const MacTable& table,
                    const NetContext& net, const IngressEvent& cause) {
  for (int p = 1; p <= net.num_ports; ++p) {
    Instance& in = inst[static_cast<std::size_t>(p - 1)];
    Env env = Env::at_event(ev, table, p, net);
    env.snap = in.snap;
    StepOutcome o = step(m, in.state, env);
    if (o.stuck)
      throw NetsimError(NK::stuck_executable, stuck_msg(p, in.state, ev, cause));
    in.state = o.state;
    in.snap = o.snapshot;
  }
}

// Decides the egress set under trial environments: port p is offered the
// frame at time t+1 with loc = {p e}; it joins when some disjunct of a
// transition out of its instance's state holds and contains the membership
// atom positively. Truth transfers from the trial set {p} to the final set
// because labels reference the location only through the port's own
// membership and the all-egress subset test, both monotone under widening
// an egress set that already contains p.
IfaceSet decide_egress(const LambdaSFA& m,
                       const std::vector<DisjunctSet>& label_dnf,
                       const std::vector<Instance>& inst,
                       const IngressEvent& ing, const MacTable& table,
                       const NetContext& net) {
  std::vector<int> ports;
  for (int p = 1; p <= net.num_ports; ++p) {
    const Instance& in = inst[static_cast<std::size_t>(p - 1)];
    TraceEvent trial{ing.time + 1, ing.frame, IfaceSet::egress({p})};
    Env env = Env::at_event(trial, table, p, net);
    env.snap = in.snap;
    bool member = false;
    for (std::size_t ti = 0; ti < m.transitions.size() && !member; ++ti) {
      if (m.transitions[ti].from != in.state) continue;
      for (const Disjunct& dj : label_dnf[ti]) {
        if (!has_positive_member(dj)) continue;
        if (eval3(dj.formula(), env) == Tri::True) {
          member = true;
          break;
        }
      }
    }
    if (member) ports.push_back(p);
  }
  return IfaceSet::egress(std::move(ports));
}

}  // namespace

std::vector<TraceEvent> simulate(const LambdaSFA& product,
                                 const std::vector<IngressEvent>& workload,
                                 const NetContext& net) {
  validate_shape(product);
  validate_workload(workload, net);
  std::vector<TraceEvent> out;
  if (workload.empty()) return out;

  std::vector<DisjunctSet> label_dnf;
  label_dnf.reserve(product.transitions.size());
  for (const Transition& tr : product.transitions)
    label_dnf.push_back(to_dnf(tr.label));

  std::vector<Instance> inst(
      static_cast<std::size_t>(net.num_ports),
      Instance{product.start,
               initial_world(workload.front().time, net)});
  MacTable table = initial_table(net.mlt_size, net.mto);

  out.reserve(workload.size() * 2);
  for (const IngressEvent& ing : workload) {
    TraceEvent ein{ing.time, ing.frame, IfaceSet::ingress(ing.port)};
    // Runs see the post-event table, so learn before stepping.
    if (auto upd = learned_update(table, ing.time, ing.frame, ing.port,
                                  net.uplink_port, net.mto))
      table = std::move(*upd);
    step_instances(product, inst, ein, table, net, ing);
    out.push_back(ein);

    TraceEvent eout{ing.time + 1, ing.frame,
                    decide_egress(product, label_dnf, inst, ing, table, net)};
    step_instances(product, inst, eout, table, net, ing);
    out.push_back(eout);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decision-program mode.

namespace {

// Walks one compiled guard tree. A test whose atom cannot be evaluated
// takes the else branch (counts as false); with total labels and fully
// bound trial environments this case never arises on real traffic, but the
// walk must be total regardless.
std::optional<std::size_t> walk_guards(const GuardNode& root, const Env& env) {
  const GuardNode* cur = &root;
  for (;;) {
    switch (cur->kind) {
      case GuardNode::Kind::no_match:
        return std::nullopt;
      case GuardNode::Kind::match:
        return cur->action;
      case GuardNode::Kind::test:
        cur = (eval3(cur->atom, env) == Tri::True) ? cur->then_branch.get()
                                                   : cur->else_branch.get();
        break;
    }
  }
}

struct ProgInstance {
  std::string state;
  std::optional<EnvCore> snap;
};

struct ProgMatch {
  std::size_t transition = 0;
  std::size_t action = 0;
};

// First transition out of the instance's state whose guard tree reaches a
// match leaf. Transitions are tried in machine source order.
std::optional<ProgMatch> prog_select(const DecisionProgram& prog,
                                     const std::string& state,
                                     const Env& env) {
  for (std::size_t ti = 0; ti < prog.transitions.size(); ++ti) {
    const TransitionProgram& tp = prog.transitions[ti];
    if (tp.from != state) continue;
    if (auto act = walk_guards(tp.logic.root, env))
      return ProgMatch{ti, *act};
  }
  return std::nullopt;
}

void prog_step_instances(const DecisionProgram& prog,
                         std::vector<ProgInstance>& inst, const TraceEvent& ev,
                         const MacTable& table, const NetContext& net,
                         const IngressEvent& cause) {
  for (int p = 1; p <= net.num_ports; ++p) {
    ProgInstance& in = inst[static_cast<std::size_t>(p - 1)];
    Env env = Env::at_event(ev, table, p, net);
    env.snap = in.snap;
    auto sel = prog_select(prog, in.state, env);
    if (!sel)
      throw NetsimError(NK::stuck_executable,
                        stuck_msg(p, in.state, ev, cause));
    const TransitionProgram& tp = prog.transitions[sel->transition];
    if (tp.binds_snapshot) in.snap = env.cur;
    in.state = tp.to;
  }
}

IfaceSet prog_decide_egress(const DecisionProgram& prog,
                            const std::vector<ProgInstance>& inst,
                            const IngressEvent& ing, const MacTable& table,
                            const NetContext& net) {
  std::vector<int> ports;
  for (int p = 1; p <= net.num_ports; ++p) {
    const ProgInstance& in = inst[static_cast<std::size_t>(p - 1)];
    TraceEvent trial{ing.time + 1, ing.frame, IfaceSet::egress({p})};
    Env env = Env::at_event(trial, table, p, net);
    env.snap = in.snap;
    auto sel = prog_select(prog, in.state, env);
    if (!sel) continue;
    const LoweredTree& logic = prog.transitions[sel->transition].logic;
    const ActionBlock& act = logic.actions[sel->action];
    for (const Literal& l : act.enforce)
      if (l.key() == member_key()) {
        ports.push_back(p);
        break;
      }
  }
  return IfaceSet::egress(std::move(ports));
}

}  // namespace

std::vector<TraceEvent> simulate(const DecisionProgram& prog,
                                 const std::vector<IngressEvent>& workload,
                                 const NetContext& net) {
  validate_workload(workload, net);
  std::vector<TraceEvent> out;
  if (workload.empty()) return out;

  std::vector<ProgInstance> inst(
      static_cast<std::size_t>(net.num_ports),
      ProgInstance{prog.start, initial_world(workload.front().time, net)});
  MacTable table = initial_table(net.mlt_size, net.mto);

  out.reserve(workload.size() * 2);
  for (const IngressEvent& ing : workload) {
    TraceEvent ein{ing.time, ing.frame, IfaceSet::ingress(ing.port)};
    if (auto upd = learned_update(table, ing.time, ing.frame, ing.port,
                                  net.uplink_port, net.mto))
      table = std::move(*upd);
    prog_step_instances(prog, inst, ein, table, net, ing);
    out.push_back(ein);

    TraceEvent eout{ing.time + 1, ing.frame,
                    prog_decide_egress(prog, inst, ing, table, net)};
    prog_step_instances(prog, inst, eout, table, net, ing);
    out.push_back(eout);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Arrival-view histories and invariant monitors.

History arrival_history(const std::vector<TraceEvent>& trace,
                        const NetContext& net) {
  History h;
  h.initial = initial_table(net.mlt_size, net.mto);
  MacTable cur = h.initial;
  for (const TraceEvent& e : trace) {
    h.steps.push_back(HistoryStep{e, cur});
    if (auto ip = e.loc.ingress_port()) {
      if (auto upd = learned_update(cur, e.time, e.frame, *ip,
                                    net.uplink_port, net.mto))
        cur = std::move(*upd);
    }
  }
  return h;
}

namespace {

// A learning opportunity: unicast source seen at an ingress port with room
// in the arrival-view table (an expired slot or a slot already holding the
// address). The learning invariant quantifies over exactly these events.
bool qualifying_ingress(const HistoryStep& s, const NetContext& net) {
  auto ip = s.event.loc.ingress_port();
  if (!ip || *ip == net.uplink_port) return false;
  const Frame& f = s.event.frame;
  if (!is_ucast(f.sa)) return false;
  for (const MacEntry& en : s.table.entries)
    if (s.event.time - en.ts > net.mto || en.mac == f.sa) return true;
  return false;
}

std::string entry_str(std::size_t d, const MacEntry& en) {
  return "entry " + std::to_string(d) + " (mac " + mac_str(en.mac) +
         ", t=" + std::to_string(en.ts) + ", port=" + std::to_string(en.port) +
         ")";
}

InvariantReport violation(std::string id, std::size_t step, std::string clause,
                          std::string detail) {
  InvariantReport r;
  r.id = std::move(id);
  r.holds = false;
  r.first_violation =
      InvariantViolation{step, std::move(clause), std::move(detail)};
  return r;
}

}  // namespace

InvariantReport check_phi_ml(const History& h, const NetContext& net) {
  InvariantReport r;
  r.id = "phi-ml";
  const auto& steps = h.steps;

  // Times are strictly increasing on well-formed histories, so an entry's
  // timestamp identifies at most one earlier event. Keep the first carrier
  // of each time so tampered histories still get a deterministic answer.
  std::map<std::int64_t, std::size_t> by_time;
  for (std::size_t j = 0; j < steps.size(); ++j)
    by_time.emplace(steps[j].event.time, j);

  for (std::size_t k = 0; k < steps.size(); ++k) {
    const MacTable& tbl = steps[k].table;
    const std::int64_t tk = steps[k].event.time;
    for (std::size_t d = 0; d < tbl.entries.size(); ++d) {
      const MacEntry& en = tbl.entries[d];
      auto it = by_time.find(en.ts);
      bool have_j = it != by_time.end() && it->second < k;

      // Forward clause: an unexpired entry must have been learned from a
      // strictly earlier qualifying ingress stamped with its timestamp,
      // carrying exactly its address at exactly its port.
      if (tk - en.ts <= net.mto) {
        if (!have_j)
          return violation(r.id, k, "forward",
                           entry_str(d, en) +
                               " is unexpired but no earlier event carries "
                               "its timestamp");
        const HistoryStep& sj = steps[it->second];
        auto ip = sj.event.loc.ingress_port();
        if (!ip || !qualifying_ingress(sj, net) ||
            !(sj.event.frame.sa == en.mac) || *ip != en.port)
          return violation(r.id, k, "forward",
                           entry_str(d, en) + " does not match event [" +
                               trace_line(sj.event) +
                               "] at its timestamp (needs a qualifying "
                               "ingress of its address at its port)");
      }

      // Backward clause: if the entry's timestamp names a qualifying
      // ingress within the timeout, the entry must be exactly that event's
      // (source address, port) pair.
      if (have_j) {
        const HistoryStep& sj = steps[it->second];
        if (qualifying_ingress(sj, net) && tk - sj.event.time <= net.mto) {
          auto ip = sj.event.loc.ingress_port();
          if (!(en.mac == sj.event.frame.sa) || en.port != *ip)
            return violation(r.id, k, "backward",
                             entry_str(d, en) +
                                 " carries the timestamp of qualifying "
                                 "ingress [" +
                                 trace_line(sj.event) +
                                 "] but not its address/port");
        }
      }
    }
  }
  return r;
}

InvariantReport check_phi_ml(const std::vector<TraceEvent>& trace,
                             const NetContext& net) {
  return check_phi_ml(arrival_history(trace, net), net);
}

InvariantReport check_phi_b1(const History& h, const NetContext& net) {
  InvariantReport r;
  r.id = "phi-b1";
  const auto& steps = h.steps;
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    const TraceEvent& ei = steps[i].event;
    auto ip = ei.loc.ingress_port();
    if (!ip) continue;
    // Only switched ingress (not to the uplink, not addressed to the
    // switch itself) constrains the following event.
    if (*ip == net.uplink_port) continue;
    if (ei.frame.da == net.haddr(*ip)) continue;
    const TraceEvent& en = steps[i + 1].event;
    if (!is_ucast(en.frame.da)) continue;
    const MacTable& tbl = steps[i + 1].table;
    for (int self = 1; self <= net.num_ports; ++self) {
      if (!en.loc.contains(Iface{self, true})) continue;
      bool at_self = false;
      bool all_miss = true;
      for (const MacEntry& entry : tbl.entries) {
        if (!(entry.mac == en.frame.da)) continue;
        if (en.time - entry.ts > net.mto) continue;
        all_miss = false;
        if (entry.port == self) at_self = true;
      }
      if (!at_self && !all_miss)
        return violation(
            r.id, i + 1, "consequent",
            "port " + std::to_string(self) + " forwards " +
                mac_str(en.frame.da) +
                " although the table holds an unexpired entry for it at "
                "another port");
    }
  }
  return r;
}

InvariantReport check_phi_b1(const std::vector<TraceEvent>& trace,
                             const NetContext& net) {
  return check_phi_b1(arrival_history(trace, net), net);
}

std::string invariant_report_str(const InvariantReport& r) {
  std::ostringstream os;
  os << r.id << ": " << (r.holds ? "holds" : "violated");
  if (r.first_violation) {
    const InvariantViolation& v = *r.first_violation;
    os << " at step " << v.step << " (" << v.clause << " clause): "
       << v.detail;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Profile estimation.

DistributionProfile estimate_profile(const std::vector<TraceEvent>& events,
                                     const std::vector<Formula>& atoms,
                                     const NetContext& net,
                                     const EstimateOptions& opts) {
  // Truth of every atom on every event, under the arrival-view table with
  // the previous event as snapshot. Unevaluable counts as not holding.
  std::vector<std::vector<bool>> val(atoms.size());
  EnvCore prev = initial_world(events.empty() ? 1 : events.front().time, net);
  MacTable table = initial_table(net.mlt_size, net.mto);
  for (const TraceEvent& e : events) {
    Env env = Env::at_event(e, table, std::nullopt, net);
    env.snap = prev;
    for (std::size_t ai = 0; ai < atoms.size(); ++ai)
      val[ai].push_back(eval3(atoms[ai], env) == Tri::True);
    prev = env.cur;
    if (auto ip = e.loc.ingress_port()) {
      if (auto upd = learned_update(table, e.time, e.frame, *ip,
                                    net.uplink_port, net.mto))
        table = std::move(*upd);
    }
  }

  DistributionProfile p;
  const std::int64_t total = static_cast<std::int64_t>(events.size());
  for (std::size_t ai = 0; ai < atoms.size(); ++ai) {
    const std::string key = render(atoms[ai]);
    std::int64_t count = 0;
    for (bool b : val[ai]) count += b ? 1 : 0;
    p.base[key] = Rat(count + 1, total + 2);

    // Conditional rows keyed by the full co-assignment of the other atoms,
    // kept only where the context was observed often enough to trust.
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> rows;
    for (std::size_t k = 0; k < events.size(); ++k) {
      Assignment a;
      for (std::size_t bi = 0; bi < atoms.size(); ++bi)
        if (bi != ai) a[render(atoms[bi])] = val[bi][k];
      auto& row = rows[assignment_key(a)];
      row.first += 1;
      if (val[ai][k]) row.second += 1;
    }
    for (const auto& [akey, row] : rows) {
      if (akey.empty()) continue;  // single-atom case: base already covers it
      if (row.first < static_cast<std::int64_t>(opts.support)) continue;
      p.conditional[key][akey] = Rat(row.second + 1, row.first + 2);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Differential equivalence.

namespace {

std::string outcome_str(const RunResult& r) {
  if (r.outcome == RunResult::Outcome::accepted_prefix)
    return "accepted in state " + r.final_state;
  return "stuck at event index " +
         (r.stuck_index ? std::to_string(*r.stuck_index) : std::string("?"));
}

}  // namespace

EquivalenceReport equivalence_check(
    const LambdaSFA& product, const std::vector<LambdaSFA>& components,
    const std::vector<std::vector<TraceEvent>>& traces, const NetContext& net) {
  EquivalenceReport rep;
  for (std::size_t tix = 0; tix < traces.size(); ++tix) {
    const auto& trace = traces[tix];
    ++rep.traces_checked;
    if (trace.empty()) continue;
    bool diverged = false;
    for (int self = 1; self <= net.num_ports && !diverged; ++self) {
      RunResult pr = run(product, trace, self, net);

      std::optional<std::size_t> first_stuck;
      std::string joint_state;
      for (const LambdaSFA& c : components) {
        RunResult cr = run(c, trace, self, net);
        if (cr.outcome == RunResult::Outcome::stuck) {
          if (!first_stuck || *cr.stuck_index < *first_stuck)
            first_stuck = cr.stuck_index;
        } else {
          joint_state += cr.final_state;
        }
      }

      std::string want =
          first_stuck ? "stuck at event index " + std::to_string(*first_stuck)
                      : "accepted in state " + joint_state;
      std::string got = outcome_str(pr);
      bool match;
      if (first_stuck)
        match = pr.outcome == RunResult::Outcome::stuck &&
                pr.stuck_index == first_stuck;
      else
        match = pr.outcome == RunResult::Outcome::accepted_prefix &&
                pr.final_state == joint_state;
      if (!match) {
        rep.divergences.push_back(
            {tix, "self=" + std::to_string(self) + ": factors " + want +
                      ", product " + got});
        diverged = true;
      }
    }
  }
  return rep;
}

EquivalenceReport program_equivalence_check(
    const LambdaSFA& product, const DecisionProgram& prog,
    const std::vector<std::vector<IngressEvent>>& workloads,
    const NetContext& net) {
  EquivalenceReport rep;
  for (std::size_t wix = 0; wix < workloads.size(); ++wix) {
    const auto& w = workloads[wix];
    ++rep.traces_checked;

    std::optional<std::vector<TraceEvent>> ta, tb;
    std::string ea, eb;
    try {
      ta = simulate(product, w, net);
    } catch (const NetsimError& e) {
      ea = e.what();
    }
    try {
      tb = simulate(prog, w, net);
    } catch (const NetsimError& e) {
      eb = e.what();
    }

    if (ta.has_value() != tb.has_value()) {
      rep.divergences.push_back(
          {wix, ta ? "program failed where the product ran: " + eb
                   : "product failed where the program ran: " + ea});
      continue;
    }
    if (!ta) {
      // Both failed; they must fail identically (messages name the event).
      if (ea != eb)
        rep.divergences.push_back(
            {wix, "different failures: product [" + ea + "] vs program [" +
                      eb + "]"});
      continue;
    }
    if (*ta != *tb) {
      std::size_t k = 0;
      while (k < ta->size() && k < tb->size() && (*ta)[k] == (*tb)[k]) ++k;
      std::string lhs = k < ta->size() ? trace_line((*ta)[k]) : "<end>";
      std::string rhs = k < tb->size() ? trace_line((*tb)[k]) : "<end>";
      rep.divergences.push_back(
          {wix, "traces differ at event " + std::to_string(k) + ": product [" +
                    lhs + "] vs program [" + rhs + "]"});
    }
  }
  return rep;
}

std::string equivalence_report_str(const EquivalenceReport& r) {
  std::ostringstream os;
  os << "checked " << r.traces_checked << " trace(s): ";
  if (r.ok()) {
    os << "equivalent";
  } else {
    os << r.divergences.size() << " divergence(s)";
    for (const Divergence& d : r.divergences)
      os << "\n  trace " << d.trace_index << ": " << d.detail;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Seeded generators.

namespace {

// Host addresses live in a pool disjoint from the switch ports' own
// hardware addresses (which start with byte 0x02).
MacAddr pool_mac(int k) {
  MacAddr m;
  m.b = {0x0a, 0x00, 0x00, 0x00, 0x00, static_cast<std::uint8_t>(k)};
  return m;
}

class Dice {
 public:
  explicit Dice(std::uint64_t seed) : rng_(seed) {}
  // Uniform draw from 0..n-1 (n small; modulo bias is irrelevant here and
  // keeps the stream identical across platforms).
  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool percent(int p) { return pick(100) < p; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

std::vector<IngressEvent> random_workload(const TraceGenOptions& o) {
  Dice d(o.seed);
  NetContext net = default_context(o.num_ports, o.uplink_port, 5, 4);
  std::vector<IngressEvent> out;
  out.reserve(o.events);
  std::int64_t t = 1 + d.pick(o.max_gap + 1);
  for (std::size_t i = 0; i < o.events; ++i) {
    IngressEvent e;
    e.time = t;
    e.port = 1 + d.pick(o.num_ports);
    e.frame.sa = pool_mac(1 + d.pick(o.mac_pool));
    if (d.percent(o.to_switch_percent)) {
      e.frame.da = net.haddr(e.port);
      e.frame.proto = "data";
    } else if (d.percent(o.bcast_percent)) {
      e.frame.da = broadcast_addr();
      e.frame.proto = d.percent(o.arp_percent) ? "arpreq" : "data";
    } else {
      e.frame.da = pool_mac(1 + d.pick(o.mac_pool));
      e.frame.proto = d.percent(20) ? "arpreply" : "data";
    }
    out.push_back(e);
    t += 2 + d.pick(o.max_gap + 1);  // leave the induced-egress slot free
  }
  return out;
}

std::vector<TraceEvent> random_trace(const TraceGenOptions& o) {
  Dice d(o.seed);
  NetContext net = default_context(o.num_ports, o.uplink_port, 5, 4);
  auto any_mac = [&](bool allow_bcast, bool allow_port) {
    if (allow_bcast && d.percent(25)) return broadcast_addr();
    if (allow_port && d.percent(15)) return net.haddr(1 + d.pick(o.num_ports));
    return pool_mac(1 + d.pick(o.mac_pool));
  };
  static const char* kProtos[] = {"data", "arpreq", "arpreply"};

  std::vector<TraceEvent> out;
  out.reserve(o.events);
  std::int64_t t = 1;
  for (std::size_t i = 0; i < o.events; ++i) {
    TraceEvent e;
    e.time = t;
    e.frame.da = any_mac(true, true);
    e.frame.sa = any_mac(d.percent(10), false);
    e.frame.proto = kProtos[d.pick(3)];
    if (d.percent(55)) {
      e.loc = IfaceSet::ingress(1 + d.pick(o.num_ports));
    } else {
      std::vector<int> ports;
      for (int p = 1; p <= o.num_ports; ++p)
        if (d.percent(40)) ports.push_back(p);
      e.loc = IfaceSet::egress(std::move(ports));
    }
    out.push_back(e);
    t += 1 + d.pick(o.max_gap + 1);
  }
  return out;
}

std::string trace_gen_params_str(const TraceGenOptions& o) {
  std::ostringstream os;
  os << "seed=" << o.seed << " events=" << o.events
     << " ports=" << o.num_ports << " uplink=" << o.uplink_port
     << " macs=" << o.mac_pool << " bcast%=" << o.bcast_percent
     << " arp%=" << o.arp_percent << " switch%=" << o.to_switch_percent
     << " gap=" << o.max_gap;
  return os.str();
}

}  // namespace lsfc
