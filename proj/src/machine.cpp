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

#include "lsfc/machine.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace lsfc {

namespace {

[[noreturn]] void invalid(const std::string& msg) {
  throw MachineError(MachineError::Kind::validation, msg);
}

bool lists_state(const LambdaSFA& m, const std::string& s) {
  return std::find(m.states.begin(), m.states.end(), s) != m.states.end();
}

}  // namespace

void validate_shape(const LambdaSFA& m) {
  if (m.name.empty()) invalid("machine needs a name");
  if (m.states.empty()) invalid(m.name + ": no states");
  if (m.transitions.empty()) invalid(m.name + ": no transitions");
  {
    std::set<std::string> seen;
    for (const std::string& s : m.states)
      if (!seen.insert(s).second) invalid(m.name + ": duplicate state " + s);
  }
  if (!lists_state(m, m.start))
    invalid(m.name + ": start state " + m.start + " is not listed");
  if (m.transitions.front().from != m.start)
    invalid(m.name + ": first transition leaves " +
            m.transitions.front().from + ", not the start state " + m.start);
  for (const Transition& t : m.transitions) {
    if (!lists_state(m, t.from))
      invalid(m.name + ": transition from unknown state " + t.from);
    if (!lists_state(m, t.to))
      invalid(m.name + ": transition to unknown state " + t.to);
    if (!t.label.valid())
      invalid(m.name + ": transition " + t.from + " -> " + t.to +
              " has no label");
  }
}

void validate_determinism(const LambdaSFA& m, SatOracle& oracle) {
  validate_shape(m);
  for (std::size_t i = 0; i < m.transitions.size(); ++i) {
    for (std::size_t j = i + 1; j < m.transitions.size(); ++j) {
      const Transition& a = m.transitions[i];
      const Transition& b = m.transitions[j];
      if (a.from != b.from) continue;
      if (oracle.is_satisfiable(fml::and_({a.label, b.label})))
        throw MachineError(
            MachineError::Kind::nondeterminism,
            m.name + ": transitions " + a.from + " -> " + a.to + " and " +
                b.from + " -> " + b.to + " can fire on one event");
    }
  }
}

// ---------------------------------------------------------------------------
// Trace-run semantics.

StepOutcome step(const LambdaSFA& m, const std::string& state,
                 const Env& env) {
  int fired = -1;
  for (std::size_t i = 0; i < m.transitions.size(); ++i) {
    const Transition& t = m.transitions[i];
    if (t.from != state) continue;
    if (eval3(t.label, env) != Tri::True) continue;
    if (fired >= 0) {
      const Transition& prev = m.transitions[static_cast<std::size_t>(fired)];
      throw MachineError(MachineError::Kind::nondeterminism,
                         m.name + ": transitions " + prev.from + " -> " +
                             prev.to + " and " + t.from + " -> " + t.to +
                             " both fire");
    }
    fired = static_cast<int>(i);
  }
  StepOutcome o;
  if (fired < 0) {
    o.stuck = true;
    o.state = state;
    o.snapshot = env.snap;
    return o;
  }
  const Transition& t = m.transitions[static_cast<std::size_t>(fired)];
  o.state = t.to;
  o.fired = fired;
  // A lambda transition rebinds x to the step's own bindings; any other
  // firing leaves the previous snapshot in force.
  o.snapshot = t.binds_snapshot ? std::optional<EnvCore>(env.cur) : env.snap;
  return o;
}

WorldSeq build_worlds(const std::vector<TraceEvent>& trace,
                      const NetContext& net) {
  if (trace.empty()) invalid("empty trace");
  if (trace.front().time < 1)
    invalid("first event time must be at least 1, got " +
            std::to_string(trace.front().time));
  for (std::size_t k = 1; k < trace.size(); ++k)
    if (trace[k].time <= trace[k - 1].time)
      invalid("event times must be strictly increasing at index " +
              std::to_string(k));

  WorldSeq ws;
  MacTable table = initial_table(net.mlt_size, net.mto);
  ws.initial.time = trace.front().time - 1;
  ws.initial.mlt = table;

  for (const TraceEvent& e : trace) {
    if (const std::optional<int> ip = e.loc.ingress_port()) {
      if (auto upd = learned_update(table, e.time, e.frame, *ip,
                                    net.uplink_port, net.mto))
        table = *upd;
    }
    EnvCore w;
    w.time = e.time;
    w.frame = e.frame;
    w.loc = e.loc;
    w.port = e.loc.ingress_port();
    w.mlt = table;  // the table in force after this event's learning
    ws.worlds.push_back(std::move(w));
  }
  return ws;
}

RunResult run(const LambdaSFA& m, const std::vector<TraceEvent>& trace,
              std::optional<int> self, const NetContext& net) {
  validate_shape(m);
  const WorldSeq ws = build_worlds(trace, net);

  Env env;
  env.self = self;
  env.net = &net;
  env.snap = ws.initial;

  RunResult rr;
  std::string state = m.start;
  for (std::size_t k = 0; k < ws.worlds.size(); ++k) {
    env.cur = ws.worlds[k];
    BindingRow row;
    row.time = trace[k].time;
    row.state_before = state;
    row.env = env;
    const StepOutcome o = step(m, state, env);
    if (o.stuck) {
      row.fired = -1;
      rr.binding_history.push_back(std::move(row));
      rr.outcome = RunResult::Outcome::stuck;
      rr.final_state = state;
      rr.stuck_at = trace[k].time;
      rr.stuck_index = k;
      return rr;
    }
    row.state_after = o.state;
    row.fired = o.fired;
    rr.binding_history.push_back(std::move(row));
    env.snap = o.snapshot;
    state = o.state;
  }
  rr.outcome = RunResult::Outcome::accepted_prefix;
  rr.final_state = state;
  return rr;
}

MultistepResult run_multistep(const LambdaSFA& m,
                              const std::vector<EnvCore>& seq,
                              std::optional<EnvCore> sigma0,
                              std::optional<int> self, const NetContext& net) {
  validate_shape(m);
  if (seq.empty()) invalid("empty world sequence");

  MultistepResult r;
  r.state = m.start;
  r.snapshot = std::move(sigma0);  // the base case fires nothing
  for (std::size_t k = 1; k < seq.size(); ++k) {
    Env env;
    env.cur = seq[k];
    env.snap = r.snapshot;
    env.self = self;
    env.net = &net;
    const StepOutcome o = step(m, r.state, env);
    if (o.stuck) {
      std::string at = env.cur.time ? std::to_string(*env.cur.time)
                                    : std::string("?");
      throw MachineError(MachineError::Kind::stuck,
                         m.name + ": no transition enabled in state " +
                             r.state + " at time " + at);
    }
    r.state = o.state;
    r.snapshot = o.snapshot;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Tensor product.

namespace {

std::string joined(const std::vector<std::string>& parts) {
  std::string s;
  for (const std::string& p : parts) s += p;
  return s;
}

// Internal tuple key; states are identified by their name tuple, not the
// concatenation (which could collide).
std::string tuple_key(const std::vector<std::string>& parts) {
  std::string s;
  for (const std::string& p : parts) {
    s += p;
    s += '\x1f';
  }
  return s;
}

}  // namespace

ProductResult product(const std::vector<LambdaSFA>& machines,
                      SatOracle& oracle) {
  if (machines.empty()) invalid("product of no machines");
  for (const LambdaSFA& m : machines) validate_shape(m);

  // Every pair of factors must speak about at least one common trace
  // variable; otherwise the product cannot synchronize them.
  std::vector<std::set<std::string>> vocab(machines.size());
  for (std::size_t i = 0; i < machines.size(); ++i) {
    for (const Transition& t : machines[i].transitions) {
      const std::set<std::string> fv = free_vars(t.label);
      vocab[i].insert(fv.begin(), fv.end());
    }
  }
  for (std::size_t i = 0; i < machines.size(); ++i) {
    for (std::size_t j = i + 1; j < machines.size(); ++j) {
      std::vector<std::string> common;
      std::set_intersection(vocab[i].begin(), vocab[i].end(),
                            vocab[j].begin(), vocab[j].end(),
                            std::back_inserter(common));
      if (common.empty())
        throw MachineError(MachineError::Kind::vocabulary_mismatch,
                           machines[i].name + " and " + machines[j].name +
                               " share no trace variable");
    }
  }

  ProductResult res;
  LambdaSFA& prod = res.machine;
  for (const LambdaSFA& m : machines) {
    prod.name += m.name;
    for (const std::string& p : m.params)
      if (std::find(prod.params.begin(), prod.params.end(), p) ==
          prod.params.end())
        prod.params.push_back(p);
  }

  std::vector<std::string> start_tuple;
  for (const LambdaSFA& m : machines) start_tuple.push_back(m.start);
  prod.start = joined(start_tuple);

  std::map<std::string, std::size_t> seen;  // tuple key -> state order
  std::deque<std::vector<std::string>> queue;
  seen.emplace(tuple_key(start_tuple), 0);
  prod.states.push_back(prod.start);
  queue.push_back(start_tuple);

  while (!queue.empty()) {
    const std::vector<std::string> tuple = queue.front();
    queue.pop_front();
    const std::string from_name = joined(tuple);

    // Out-transition indices per factor.
    std::vector<std::vector<std::size_t>> outs(machines.size());
    bool dead = false;
    for (std::size_t i = 0; i < machines.size(); ++i) {
      for (std::size_t k = 0; k < machines[i].transitions.size(); ++k)
        if (machines[i].transitions[k].from == tuple[i]) outs[i].push_back(k);
      if (outs[i].empty()) dead = true;
    }
    if (dead) continue;  // some factor cannot move: no product transitions

    // Walk the candidate combinations in mixed-radix order, last factor
    // fastest, so the output is deterministic.
    std::vector<std::size_t> pick(machines.size(), 0);
    while (true) {
      FormulaVec labels;
      std::vector<std::string> to_tuple;
      bool binds = false;
      for (std::size_t i = 0; i < machines.size(); ++i) {
        const Transition& t = machines[i].transitions[outs[i][pick[i]]];
        labels.push_back(t.label);
        to_tuple.push_back(t.to);
        binds = binds || t.binds_snapshot;
      }
      const Formula label = fml::and_(std::move(labels));
      const std::string to_name = joined(to_tuple);

      if (oracle.is_satisfiable(label)) {
        Transition t;
        t.from = from_name;
        t.to = to_name;
        t.label = label;
        t.binds_snapshot = binds;
        prod.transitions.push_back(std::move(t));
        const std::string key = tuple_key(to_tuple);
        if (seen.emplace(key, prod.states.size()).second) {
          prod.states.push_back(to_name);
          queue.push_back(to_tuple);
        }
      } else {
        res.pruned.push_back(PrunedTransition{from_name, to_name, label});
      }

      std::size_t i = machines.size();
      while (i > 0) {
        --i;
        if (++pick[i] < outs[i].size()) break;
        pick[i] = 0;
        if (i == 0) {
          i = machines.size() + 1;  // signal: wrapped around completely
          break;
        }
      }
      if (i == machines.size() + 1) break;
    }
  }
  return res;
}

}  // namespace lsfc
