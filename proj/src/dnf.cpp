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

#include "lsfc/dnf.hpp"

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace lsfc {

Formula Literal::formula() const {
  return negated ? fml::not_(atom) : atom;
}

bool Disjunct::insert(const Literal& l) {
  const std::string k = l.key();
  auto it = std::lower_bound(
      lits.begin(), lits.end(), k,
      [](const Literal& a, const std::string& key) { return a.key() < key; });
  if (it != lits.end() && it->key() == k) {
    return it->negated == l.negated;  // duplicate ok, complement contradicts
  }
  lits.insert(it, l);
  return true;
}

bool Disjunct::contains(const Literal& l) const {
  const std::string k = l.key();
  auto it = std::lower_bound(
      lits.begin(), lits.end(), k,
      [](const Literal& a, const std::string& key) { return a.key() < key; });
  return it != lits.end() && it->key() == k && it->negated == l.negated;
}

bool Disjunct::subsumes(const Disjunct& other) const {
  if (lits.size() > other.lits.size()) return false;
  for (const Literal& l : lits)
    if (!other.contains(l)) return false;
  return true;
}

Formula Disjunct::formula() const {
  FormulaVec kids;
  kids.reserve(lits.size());
  for (const Literal& l : lits) kids.push_back(l.formula());
  return fml::and_(std::move(kids));
}

Formula dnf_formula(const DisjunctSet& d) {
  FormulaVec kids;
  kids.reserve(d.size());
  for (const Disjunct& dj : d) kids.push_back(dj.formula());
  return fml::or_(std::move(kids));
}

namespace {

// Removes duplicates and subsumed disjuncts, keeping the first (most
// general) representative of each family in input order.
DisjunctSet absorb(DisjunctSet d) {
  // Process weaker (shorter) disjuncts first so the survivor of any
  // subsumption chain is the most general one.
  std::vector<std::size_t> order(d.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return d[a].lits.size() < d[b].lits.size();
                   });
  std::vector<bool> keep(d.size(), true);
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool covered = false;
    for (std::size_t j : kept) {
      if (d[j].subsumes(d[i])) {
        covered = true;
        break;
      }
    }
    if (covered) {
      keep[i] = false;
    } else {
      kept.push_back(i);
    }
  }
  DisjunctSet out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    if (keep[i]) out.push_back(std::move(d[i]));
  return out;
}

void check_cap(std::size_t n, const DnfOptions& opts) {
  if (n > opts.max_disjuncts) {
    throw FormulaError(
        FormulaError::Kind::size_explosion,
        "DNF conversion exceeded " + std::to_string(opts.max_disjuncts) +
            " disjuncts");
  }
}

// Disjunction of two DNFs: concatenation (absorption happens at the end).
DisjunctSet dnf_union(DisjunctSet a, DisjunctSet b, const DnfOptions& opts) {
  check_cap(a.size() + b.size(), opts);
  a.insert(a.end(), std::make_move_iterator(b.begin()),
           std::make_move_iterator(b.end()));
  return a;
}

// Conjunction of two DNFs: pairwise merge, dropping syntactically
// contradictory combinations.
DisjunctSet dnf_product(const DisjunctSet& a, const DisjunctSet& b,
                        const DnfOptions& opts) {
  DisjunctSet out;
  for (const Disjunct& da : a) {
    for (const Disjunct& db : b) {
      Disjunct merged = da;
      bool consistent = true;
      for (const Literal& l : db.lits) {
        if (!merged.insert(l)) {
          consistent = false;
          break;
        }
      }
      if (!consistent) continue;
      out.push_back(std::move(merged));
      check_cap(out.size(), opts);
    }
  }
  return out;
}

DisjunctSet dnf_true() { return DisjunctSet{Disjunct{}}; }
DisjunctSet dnf_false() { return DisjunctSet{}; }

// Whether the formula contains an atom the predicate admits, looking
// through the boolean connectives only (atoms here are whatever convert
// treats atomically, so quantified subformulas count whole).
bool contains_action(const Formula& f,
                     const std::function<bool(const Formula&)>& pred) {
  switch (f.kind()) {
    case FKind::True:
    case FKind::False:
      return false;
    case FKind::Not:
    case FKind::Lambda:
    case FKind::And:
    case FKind::Or:
    case FKind::Implies: {
      for (const Formula& kid : f.node().kids)
        if (contains_action(kid, pred)) return true;
      return false;
    }
    default:
      return pred(f);
  }
}

// DNF of f when pos, of ¬f when !pos.
DisjunctSet convert(const Formula& f, bool pos, const DnfOptions& opts) {
  switch (f.kind()) {
    case FKind::True:
      return pos ? dnf_true() : dnf_false();
    case FKind::False:
      return pos ? dnf_false() : dnf_true();
    case FKind::Not:
      return convert(f.node().kids[0], !pos, opts);
    case FKind::Lambda:
      // The binder carries no propositional content of its own.
      return convert(f.node().kids[0], pos, opts);
    case FKind::And:
    case FKind::Or: {
      // And behaves as a product when positive, a union when negated;
      // Or the other way around.
      const bool product = (f.kind() == FKind::And) == pos;
      DisjunctSet acc = product ? dnf_true() : dnf_false();
      for (const Formula& kid : f.node().kids) {
        DisjunctSet k = convert(kid, pos, opts);
        acc = product ? dnf_product(acc, k, opts)
                      : dnf_union(std::move(acc), std::move(k), opts);
      }
      return acc;
    }
    case FKind::Implies: {
      const Formula& a = f.node().kids[0];
      const Formula& b = f.node().kids[1];
      if (pos) {
        // Disjoint expansion ¬a ∨ (a ∧ b): the consequent's disjuncts keep
        // their full enabling context instead of floating free.  When the
        // consequent carries nothing to do, the plain ¬a ∨ b form keeps
        // the antecedent out of positive disjuncts entirely.
        DisjunctSet no = convert(a, false, opts);
        const bool constraint_only =
            opts.action_atom && !contains_action(b, opts.action_atom);
        DisjunctSet yes =
            constraint_only
                ? convert(b, true, opts)
                : dnf_product(convert(a, true, opts), convert(b, true, opts),
                              opts);
        return dnf_union(std::move(no), std::move(yes), opts);
      }
      // ¬(a => b) = a ∧ ¬b
      return dnf_product(convert(a, true, opts), convert(b, false, opts),
                         opts);
    }
    default:
      break;
  }
  // Atomic: equalities, memberships, predicates, props, and whole
  // quantified subformulas.
  Disjunct d;
  d.insert(Literal{f, !pos});
  return DisjunctSet{std::move(d)};
}

// A disjunct whose literals include a complementary pair can never hold;
// Disjunct::insert maintains that invariant, but minimize_dnf accepts
// arbitrary caller-built disjuncts.
bool syntactically_contradictory(const Disjunct& d) {
  for (std::size_t i = 0; i + 1 < d.lits.size(); ++i) {
    if (d.lits[i].key() == d.lits[i + 1].key() &&
        d.lits[i].negated != d.lits[i + 1].negated) {
      return true;
    }
  }
  return false;
}

}  // namespace

DisjunctSet to_dnf(const Formula& f, const DnfOptions& opts) {
  if (!f.valid()) {
    throw FormulaError(FormulaError::Kind::parse_error,
                       "to_dnf: invalid formula");
  }
  return absorb(convert(f, true, opts));
}

DisjunctSet minimize_dnf(DisjunctSet d, SatOracle& oracle,
                         const Formula& context,
                         const std::function<bool(const Formula&)>& resolvable) {
  // Syntactic cleanup first so the oracle only sees plausible disjuncts.
  DisjunctSet cleaned;
  for (Disjunct& dj : d) {
    std::stable_sort(dj.lits.begin(), dj.lits.end(),
                     [](const Literal& a, const Literal& b) {
                       return a.key() < b.key();
                     });
    dj.lits.erase(std::unique(dj.lits.begin(), dj.lits.end()), dj.lits.end());
    if (!syntactically_contradictory(dj)) cleaned.push_back(std::move(dj));
  }
  cleaned = absorb(std::move(cleaned));

  // Oracle pruning, under the ambient context when one is given.
  DisjunctSet live;
  for (Disjunct& dj : cleaned) {
    Formula query = dj.formula();
    if (context.valid()) query = fml::and_({context, query});
    if (oracle.is_satisfiable(query)) live.push_back(std::move(dj));
  }

  // Pairwise consensus to a fixpoint.  The consensus of p∧R1 and ¬p∧R2 is
  // R1∧R2, which the disjunction already implies, so adding it preserves
  // equivalence; we add it only when it subsumes a parent, which both keeps
  // the loop terminating (total literal count strictly drops) and keeps
  // every kept disjunct satisfiable (it is implied by a pruned-sat parent).
  for (;;) {
    bool found = false;
    Disjunct next;
    for (std::size_t i = 0; i < live.size() && !found; ++i) {
      for (std::size_t j = 0; j < live.size() && !found; ++j) {
        if (i == j) continue;
        for (const Literal& l : live[i].lits) {
          if (resolvable && !resolvable(l.atom)) continue;
          if (!live[j].contains(Literal{l.atom, !l.negated})) continue;
          Disjunct cons;
          bool consistent = true;
          for (const Literal& a : live[i].lits) {
            if (a.key() == l.key()) continue;
            if (!cons.insert(a)) {
              consistent = false;
              break;
            }
          }
          for (const Literal& b : live[j].lits) {
            if (!consistent) break;
            if (b.key() == l.key()) continue;
            if (!cons.insert(b)) consistent = false;
          }
          if (!consistent) continue;
          if (!cons.subsumes(live[i]) && !cons.subsumes(live[j])) continue;
          next = std::move(cons);
          found = true;
          break;
        }
      }
    }
    if (!found) break;
    // Absorption removes the parent(s) the consensus subsumes, so each
    // round strictly shrinks the total literal count.
    live.push_back(std::move(next));
    live = absorb(std::move(live));
  }
  return live;
}

}  // namespace lsfc
