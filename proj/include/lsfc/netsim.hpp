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

// Trace-level simulation: drive a product machine (or its compiled decision
// program) over an ingress workload with per-port instances, monitor the
// state invariants over arrival-view histories, estimate distribution
// profiles from traffic, and differentially compare implementations.

#ifndef LSFC_NETSIM_HPP_
#define LSFC_NETSIM_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsfc/emit.hpp"
#include "lsfc/formula.hpp"
#include "lsfc/machine.hpp"
#include "lsfc/net.hpp"
#include "lsfc/synth.hpp"

namespace lsfc {

class NetsimError : public std::runtime_error {
 public:
  enum class Kind {
    bad_workload,      // times not strictly increasing / no room for egress
    stuck_executable,  // some per-port instance has no enabled transition
  };
  NetsimError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

// ---------------------------------------------------------------------------
// Simulation.
//
// One recognizer instance runs per port (self = 1..num_ports); all share one
// learning table, maintained with the deterministic witness policy. Each
// ingress event is followed by the induced egress event at time + 1: a port
// joins the egress set exactly when some transition out of its instance's
// state has a disjunct that contains the egress-membership constraint
// positively and holds under that port's trial environment. Frames the
// switch keeps to itself yield an empty egress set (the event still
// appears). A stuck instance raises stuck_executable naming the ingress
// event that caused it.

std::vector<TraceEvent> simulate(const LambdaSFA& product,
                                 const std::vector<IngressEvent>& workload,
                                 const NetContext& net);

// Decision-program mode: transition choice walks the compiled guard trees
// (a guard that cannot be evaluated counts as false) and egress membership
// comes from the matched leaf's action block. Byte-identical traces to the
// interpreted product are the differential gate, not an assumption.
std::vector<TraceEvent> simulate(const DecisionProgram& prog,
                                 const std::vector<IngressEvent>& workload,
                                 const NetContext& net);

// ---------------------------------------------------------------------------
// Arrival-view histories and invariant monitors.
//
// Monitors quantify over the table as it stood when each event ARRIVED
// (before that event's learning). The learning invariant needs this view:
// its witness clause requires a strictly earlier learning event, so the
// post-event view would falsify it at the learning step itself.

struct HistoryStep {
  TraceEvent event;
  MacTable table;  // table in force on arrival (before this event's update)
};

struct History {
  MacTable initial;  // all-expired table ahead of the trace
  std::vector<HistoryStep> steps;
};

History arrival_history(const std::vector<TraceEvent>& trace,
                        const NetContext& net);

struct InvariantViolation {
  std::size_t step = 0;     // index of the event where the check failed
  std::string clause;       // "forward" / "backward" / "consequent"
  std::string detail;       // bindings that witness the failure
};

struct InvariantReport {
  std::string id;           // "phi-ml" / "phi-b1"
  bool holds = true;
  std::optional<InvariantViolation> first_violation;
};

// Learning-table soundness/completeness: every unexpired entry traces back
// to a unique qualifying ingress event stamped with its timestamp
// (forward), and a qualifying ingress within the timeout pins the entry
// carrying its stamp to exactly its (address, port) pair (backward).
// Monitors take the history as given so corrupted world sequences can be
// checked; a violation is a result, not an error.
InvariantReport check_phi_ml(const History& h, const NetContext& net);
InvariantReport check_phi_ml(const std::vector<TraceEvent>& trace,
                             const NetContext& net);

// Bridging soundness: when a switched ingress is followed by a unicast
// egress, every port in the egress set either holds the unexpired entry for
// the destination or the destination is unknown/expired everywhere.
InvariantReport check_phi_b1(const History& h, const NetContext& net);
InvariantReport check_phi_b1(const std::vector<TraceEvent>& trace,
                             const NetContext& net);

std::string invariant_report_str(const InvariantReport& r);

// ---------------------------------------------------------------------------
// Profile estimation.

struct EstimateOptions {
  // Minimum number of observations of a full co-assignment before a
  // conditional probability row is emitted for it.
  std::size_t support = 8;
};

// Add-one smoothed relative frequencies over the trace: base probability
// (count + 1) / (total + 2) for each atom, exact rationals. Conditional
// rows are keyed by the full truth assignment of the other atoms and
// emitted only at or above the support threshold. Atoms are evaluated per
// event under the arrival-view table with the previous event as snapshot;
// an atom that cannot be evaluated on an event counts as not holding.
DistributionProfile estimate_profile(const std::vector<TraceEvent>& events,
                                     const std::vector<Formula>& atoms,
                                     const NetContext& net,
                                     const EstimateOptions& opts = {});

// ---------------------------------------------------------------------------
// Differential equivalence.

struct Divergence {
  std::size_t trace_index = 0;
  std::string detail;
};

struct EquivalenceReport {
  std::size_t traces_checked = 0;
  std::vector<Divergence> divergences;
  bool ok() const { return divergences.empty(); }
};

// Product-vs-factors over raw traces, for every port binding: the product
// run must accept exactly when all factor runs accept, get stuck at the
// earliest factor's stuck index otherwise, and reach the state tuple named
// by the factor states when all accept.
EquivalenceReport equivalence_check(const LambdaSFA& product,
                                    const std::vector<LambdaSFA>& components,
                                    const std::vector<std::vector<TraceEvent>>& traces,
                                    const NetContext& net);

// Interpreted-product-vs-decision-program over ingress workloads: the two
// simulators must produce identical traces (or fail on the same ingress).
EquivalenceReport program_equivalence_check(
    const LambdaSFA& product, const DecisionProgram& prog,
    const std::vector<std::vector<IngressEvent>>& workloads,
    const NetContext& net);

std::string equivalence_report_str(const EquivalenceReport& r);

// ---------------------------------------------------------------------------
// Seeded generators. All parameters are recorded alongside any report
// produced from generated traffic (see trace_gen_params_str).

struct TraceGenOptions {
  std::uint64_t seed = 1;
  std::size_t events = 20;      // ingress events (workloads) / rows (traces)
  int num_ports = 4;
  int uplink_port = 1;
  int mac_pool = 4;             // distinct host addresses
  int bcast_percent = 30;       // chance the destination is broadcast
  int arp_percent = 40;         // chance a broadcast frame is an ARP request
  int to_switch_percent = 10;   // chance the destination is the port's own
  int max_gap = 3;              // extra time between successive events
};

// Ingress-only workloads for the simulator (times leave room for the
// induced egress events).
std::vector<IngressEvent> random_workload(const TraceGenOptions& o);

// Raw adversarial traces for machine-level differentials: arbitrary
// ingress/egress interleavings, occasional non-unicast source addresses.
std::vector<TraceEvent> random_trace(const TraceGenOptions& o);

std::string trace_gen_params_str(const TraceGenOptions& o);

}  // namespace lsfc

#endif  // LSFC_NETSIM_HPP_
