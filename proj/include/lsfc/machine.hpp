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
// Deterministic symbolic finite automata with lambda-binding transitions,
// their trace-run semantics (stutter steps, stuck runs), the multistep
// transition function, and the tensor-product construction.

#ifndef LSFC_MACHINE_HPP_
#define LSFC_MACHINE_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsfc/formula.hpp"
#include "lsfc/net.hpp"
#include "lsfc/oracle.hpp"

namespace lsfc {

class MachineError : public std::runtime_error {
 public:
  enum class Kind {
    validation,        // shape rules broken (start state, unknown state, ...)
    nondeterminism,    // two labels from one state simultaneously true/sat
    vocabulary_mismatch,
    stuck,             // surfaced only by the multistep function
  };
  MachineError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

struct Transition {
  std::string from;
  std::string to;
  Formula label;                 // lambda-stripped body
  bool binds_snapshot = false;   // true iff the source text carried λx.
};

struct LambdaSFA {
  std::string name;
  std::vector<std::string> params;  // formal parameters, e.g. {"self"}
  std::vector<std::string> states;
  std::string start;
  std::vector<Transition> transitions;
};

// Structural validation: nonempty states/transitions, start state listed and
// equal to the first transition's source, every endpoint a listed state.
// Throws MachineError{validation}.
void validate_shape(const LambdaSFA& m);

// Semantic determinism: for every pair of distinct transitions out of one
// state, the conjunction of their labels is unsatisfiable over cfg (snapshot
// variables treated as free). Throws MachineError{nondeterminism} naming the
// two transitions.
void validate_determinism(const LambdaSFA& m, SatOracle& oracle);

// ---------------------------------------------------------------------------
// Trace-run semantics.

struct StepOutcome {
  bool stuck = false;
  std::string state;                     // unchanged when stuck
  std::optional<EnvCore> snapshot;       // snapshot after the step
  int fired = -1;                        // transition index, -1 when stuck
};

// Fires the unique transition out of `state` whose label evaluates true
// under env (current bindings + persistent snapshot). A fired λ transition
// stores env.cur as the new snapshot; other firings keep env.snap. Two true
// labels raise MachineError{nondeterminism}; none true reports stuck.
StepOutcome step(const LambdaSFA& m, const std::string& state, const Env& env);

// One world per trace event, carrying the table in force after the event's
// learning (the M component's update stamps the current time, so the run-time
// view is post-event). worlds[k] corresponds to trace[k]; `initial` is the
// pre-trace world w0 (all-expired table, time = first event time − 1, no
// frame bindings) used as the initial snapshot σ0(x).
struct WorldSeq {
  EnvCore initial;
  std::vector<EnvCore> worlds;
};

WorldSeq build_worlds(const std::vector<TraceEvent>& trace,
                      const NetContext& net);

struct BindingRow {
  std::int64_t time = 0;
  std::string state_before;
  std::string state_after;   // empty when stuck
  Env env;                   // env the label was evaluated under
  int fired = -1;
};

struct RunResult {
  enum class Outcome { accepted_prefix, stuck };
  Outcome outcome = Outcome::accepted_prefix;
  std::string final_state;
  std::vector<BindingRow> binding_history;
  std::optional<std::int64_t> stuck_at;      // event time
  std::optional<std::size_t> stuck_index;    // event index
};

// Folds step over every trace event from the start state with the initial
// world as snapshot. Requires nonempty trace with strictly increasing times
// and first event time ≥ 1 (so the all-expired initial table is expired at
// τ0 = first time − 1). `self` binds the machine's self parameter if any.
RunResult run(const LambdaSFA& m, const std::vector<TraceEvent>& trace,
              std::optional<int> self, const NetContext& net);

// Multistep transition function δ̂ over a timed state sequence (w0…wn): the
// base case consumes (w0, τ0) without firing — it returns (start, σ0) for a
// one-element sequence — and each later element composes one δ step. σ0 is
// the initial snapshot mapping (σ0(x) = w0 by the invariant-proof setup).
// Throws MachineError{stuck} when some step has no enabled transition.
struct MultistepResult {
  std::string state;
  std::optional<EnvCore> snapshot;
};
MultistepResult run_multistep(const LambdaSFA& m,
                              const std::vector<EnvCore>& seq,
                              std::optional<EnvCore> sigma0,
                              std::optional<int> self, const NetContext& net);

// ---------------------------------------------------------------------------
// Tensor product.

struct PrunedTransition {
  std::string from;
  std::string to;
  Formula label;  // the unsatisfiable conjunction, for independent re-checks
};

struct ProductResult {
  LambdaSFA machine;
  // Raw reachable-tuple transitions removed because their conjunction label
  // is unsatisfiable. Retained so tests can confirm the pruning independently.
  std::vector<PrunedTransition> pruned;
};

// States are reachable tuples (names concatenated, e.g. H1B1I1ML); labels are
// conjunctions of factor labels (flattened, deduplicated, true dropped);
// a product transition binds the single shared snapshot iff any factor
// transition binds one. Transitions with unsatisfiable labels are pruned and
// only states reachable through satisfiable transitions are kept. Every pair
// of factors must share at least one free variable.
ProductResult product(const std::vector<LambdaSFA>& machines,
                      SatOracle& oracle);

}  // namespace lsfc

#endif  // LSFC_MACHINE_HPP_
