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

#ifndef LSFC_DNF_HPP_
#define LSFC_DNF_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "lsfc/formula.hpp"
#include "lsfc/oracle.hpp"

namespace lsfc {

// Disjunctive normal form over atomic predicates.  Atoms are compared by
// their canonical rendering; whole quantified subformulas and table-update
// equalities count as single atoms, so conversion never multiplies out
// table indices.

// One atom, possibly negated.
struct Literal {
  Formula atom;
  bool negated = false;

  // Identity of the underlying atom (canonical rendering).
  std::string key() const { return render(atom); }
  // The literal as a formula (atom or its negation).
  Formula formula() const;

  friend bool operator==(const Literal& a, const Literal& b) {
    return a.negated == b.negated && a.key() == b.key();
  }
};

// A conjunction of literals with at most one literal per atom.  Literals are
// kept sorted by atom key (negated after positive, though both never
// coexist) so equal disjuncts render identically.
struct Disjunct {
  std::vector<Literal> lits;

  // Inserts a literal, keeping the sorted-unique invariant.  Returns false
  // if the complementary literal is already present (the conjunction would
  // be syntactically contradictory); duplicates are absorbed silently.
  bool insert(const Literal& l);
  // True if this disjunct contains exactly this literal (same polarity).
  bool contains(const Literal& l) const;
  // Subsumption: this disjunct's literals are a subset of other's, so this
  // (weaker, more general) disjunct absorbs other.
  bool subsumes(const Disjunct& other) const;
  // The conjunction as a formula (truth() when empty).
  Formula formula() const;
  // Canonical rendering of the conjunction, used for ordering and equality.
  std::string key() const { return render(formula()); }

  friend bool operator==(const Disjunct& a, const Disjunct& b) {
    return a.lits == b.lits;
  }
};

// A DNF: disjunction of disjuncts.  Invariants maintained by to_dnf and
// minimize_dnf: no disjunct contains complementary literals, and no disjunct
// subsumes another (absorption is applied).
using DisjunctSet = std::vector<Disjunct>;

// The whole DNF as a formula (falsity() when empty).
Formula dnf_formula(const DisjunctSet& d);

struct DnfOptions {
  // Hard cap on the number of disjuncts ever held during conversion; the
  // distributive step fails with FormulaError{size_explosion} beyond it
  // rather than degrade into an unusable blowup.
  std::size_t max_disjuncts = 4096;
  // When set, implications whose consequent contains no atom this
  // predicate admits expand as plain ¬a ∨ b instead of disjointly.  Code
  // generation passes "is enforceable" here: an implication that only
  // constrains (its consequent is all tests) then never spills its
  // antecedent into positive disjuncts, which would otherwise offer the
  // program pointless realization targets — e.g. joining an egress set
  // just because a lookup happens to succeed, with no frame to send.
  std::function<bool(const Formula&)> action_atom;
};

// Converts a formula to DNF.  Implications expand disjointly
// (a => b  ~>  ¬a ∨ (a ∧ b)) so each resulting disjunct carries its full
// enabling context (see DnfOptions::action_atom for the exception);
// negation is pushed to literals; conjunction distributes over
// disjunction.  Quantified subformulas and update equalities are treated
// as atoms.  Disjuncts with complementary literals are dropped and
// absorption is applied.  Preserves two-valued evaluation: for every
// environment that fully defines the formula, eval(dnf) == eval(input).
DisjunctSet to_dnf(const Formula& f, const DnfOptions& opts = {});

// Minimizes a DNF:
//   (a) drops disjuncts the oracle proves unsatisfiable,
//   (b) removes subsumed disjuncts,
//   (c) applies pairwise consensus to a fixpoint, keeping a consensus term
//       only when it subsumes one of its parents (that restriction keeps
//       the loop terminating and is what merges {a∧b, a∧¬b} into {a}).
// The result is semantically equivalent to the input and introduces no new
// atoms.  `context`, when valid, conjoins into every satisfiability query:
// disjuncts impossible under that context are pruned even if satisfiable
// on their own.  `resolvable`, when given, restricts consensus pivots to
// atoms it admits: a disjunct then never loses a literal whose atom the
// predicate rejects.  Code generation relies on this to keep action
// literals inside their enabling disjunct — folding {¬a, a∧act} into
// {¬a, act} preserves truth but detaches the action from the conditions
// under which it may run.
DisjunctSet minimize_dnf(
    DisjunctSet d, SatOracle& oracle, const Formula& context = Formula(),
    const std::function<bool(const Formula&)>& resolvable = {});

}  // namespace lsfc

#endif  // LSFC_DNF_HPP_
