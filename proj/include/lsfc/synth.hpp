// Copyright 2026 The lsfc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LSFC_SYNTH_HPP_
#define LSFC_SYNTH_HPP_

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsfc/dnf.hpp"
#include "lsfc/formula.hpp"
#include "lsfc/oracle.hpp"
#include "lsfc/rational.hpp"

namespace lsfc {

// Branch synthesis: turns a minimized DNF into branching logic ordered by
// expected residual under a traffic distribution, or into a minimum-size
// decision tree.  All probability arithmetic is exact rational.

struct SynthError : std::runtime_error {
  enum class Kind {
    missing_probability,  // no conditional, no base, and no default policy
    bad_profile,          // malformed profile text
  };
  SynthError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

// Truth assignment over atoms, keyed by canonical atom rendering.
using Assignment = std::map<std::string, bool>;

// Canonical one-line form, e.g. "(prop B)=1;(prop C)=0" (sorted by atom).
std::string assignment_key(const Assignment& a);

// Traffic distribution over atoms.  Lookup order for Pr[p|A]: an exact
// conditional entry for (p, A), then the base entry for p, then the default
// policy; with the default disabled a miss raises missing_probability.
struct DistributionProfile {
  std::map<std::string, Rat> base;
  // atom key → (assignment key → probability)
  std::map<std::string, std::map<std::string, Rat>> conditional;
  std::optional<Rat> default_prob = Rat(1, 2);

  Rat probability(const std::string& atom_key, const Assignment& a) const;
  Rat probability(const Formula& atom, const Assignment& a) const {
    return probability(render(atom), a);
  }
};

// Line-based profile text:
//   default|<p/q>        (or "default|none" to disable the fallback)
//   base|<atom>|<p/q>
//   cond|<atom>|<assignment key>|<p/q>
// '#' lines and blank lines are ignored.  Probabilities must lie in [0,1].
DistributionProfile parse_profile(const std::string& text);
std::string profile_str(const DistributionProfile& p);

// Decision tree over atoms.  A test node records the assignment
// accumulated on the path to it (its own atom not yet assigned); a leaf
// either selects one disjunct of the original DNF (every literal of which
// the path assignment satisfies) or reports no-match.
struct BranchTree {
  enum class Kind { test, leaf, no_match };
  Kind kind = Kind::no_match;

  // test nodes
  Formula atom;
  Assignment assignment;  // assignment-so-far, before this node's test
  std::unique_ptr<BranchTree> then_branch;
  std::unique_ptr<BranchTree> else_branch;

  // leaf nodes
  Disjunct chosen;

  // Set on the root no-match leaf synthesized from an empty DNF.
  bool empty_input = false;
};

enum class Objective { expected_time, min_size };

// Residual of a literal p relative to DNF d: empty if p alone is a disjunct
// of d; otherwise every atom other than p's that occurs in some disjunct dj
// with dj ∧ p satisfiable.  Atoms are returned in canonical (positive)
// form, so each complementary pair contributes at most one element.
std::set<std::string> residual(const Literal& p, const DisjunctSet& d,
                               SatOracle& oracle);

// Pr[p|A]·|res(p,d)| + (1−Pr[p|A])·|res(¬p,d)|, exactly.
Rat expected_residual(const Formula& atom, const DisjunctSet& d,
                      const Assignment& a, const DistributionProfile& profile,
                      SatOracle& oracle);

// Synthesizes branching logic for d.  expected_time picks, at each node,
// the unassigned atom with the least expected residual relative to the
// current restriction of d (ties broken by atom order); min_size searches
// all test orders for the fewest test nodes.  Restriction under a literal
// drops falsified disjuncts and deletes satisfied literals; a leaf is
// reached when some disjunct is fully satisfied or all are falsified.  An
// empty d yields a single no-match leaf with empty_input set.
//
// `priorities`, when non-empty, ranks d's disjuncts (aligned by index;
// larger is more urgent) and delays completion: a satisfied disjunct
// becomes a leaf only once no disjunct of strictly higher priority is
// still satisfiable on the path.  Code generation ranks disjuncts by how
// many actions they carry, so a do-nothing branch cannot shadow a live
// acting branch merely by being cheaper to confirm.  Equal-priority
// disjuncts keep the plain rule: the first satisfied one wins.
BranchTree synthesize(const DisjunctSet& d, const DistributionProfile& profile,
                      Objective objective, SatOracle& oracle,
                      const std::vector<std::size_t>& priorities = {});

struct TreeMetrics {
  std::size_t size = 0;  // number of test nodes
  Rat expected_tests;    // probability-weighted path length
};
TreeMetrics tree_metrics(const BranchTree& t,
                         const DistributionProfile& profile);

// Fresh expected-time synthesis of the same DNF under a new profile.  The
// result selects a satisfied disjunct for exactly the assignments the old
// tree does (checkable with trees_equivalent).
BranchTree resynthesize(const BranchTree& old_tree,
                        const DistributionProfile& new_profile,
                        const DisjunctSet& d, SatOracle& oracle,
                        const std::vector<std::size_t>& priorities = {});

// Walks to a leaf under a full assignment; nullptr means no-match.  Throws
// std::out_of_range if the tree tests an atom the assignment leaves open.
const Disjunct* walk_tree(const BranchTree& t, const Assignment& a);

// Exhaustive leaf-decision equivalence over every full assignment of d's
// atoms (plus any extra atoms either tree tests): both trees match the same
// assignments, each selected disjunct is satisfied by the assignment, and a
// match is reported exactly when the assignment satisfies d.
bool trees_equivalent(const BranchTree& a, const BranchTree& b,
                      const DisjunctSet& d);

// Indented s-expression rendering, deterministic across runs.
std::string tree_str(const BranchTree& t);

}  // namespace lsfc

#endif  // LSFC_SYNTH_HPP_
