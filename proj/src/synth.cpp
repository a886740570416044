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

#include "lsfc/synth.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace lsfc {

std::string assignment_key(const Assignment& a) {
  std::string out;
  for (const auto& [atom, val] : a) {
    if (!out.empty()) out += ';';
    out += atom;
    out += '=';
    out += val ? '1' : '0';
  }
  return out;
}

Rat DistributionProfile::probability(const std::string& atom_key,
                                     const Assignment& a) const {
  if (auto it = conditional.find(atom_key); it != conditional.end()) {
    if (auto jt = it->second.find(assignment_key(a)); jt != it->second.end())
      return jt->second;
  }
  if (auto it = base.find(atom_key); it != base.end()) return it->second;
  if (default_prob) return *default_prob;
  throw SynthError(SynthError::Kind::missing_probability,
                   "no probability for atom " + atom_key +
                       " under assignment {" + assignment_key(a) + "}");
}

namespace {

Rat parse_prob(const std::string& s, const std::string& line) {
  Rat r;
  try {
    r = Rat::parse(s);
  } catch (const std::exception&) {
    throw SynthError(SynthError::Kind::bad_profile,
                     "bad probability '" + s + "' in line: " + line);
  }
  if (r < Rat(0) || r > Rat(1)) {
    throw SynthError(SynthError::Kind::bad_profile,
                     "probability out of [0,1] in line: " + line);
  }
  return r;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    std::size_t bar = line.find('|', pos);
    if (bar == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, bar - pos));
    pos = bar + 1;
  }
}

}  // namespace

DistributionProfile parse_profile(const std::string& text) {
  DistributionProfile p;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = split_fields(line);
    if (f[0] == "default" && f.size() == 2) {
      if (f[1] == "none") {
        p.default_prob.reset();
      } else {
        p.default_prob = parse_prob(f[1], line);
      }
    } else if (f[0] == "base" && f.size() == 3) {
      p.base[f[1]] = parse_prob(f[2], line);
    } else if (f[0] == "cond" && f.size() == 4) {
      p.conditional[f[1]][f[2]] = parse_prob(f[3], line);
    } else {
      throw SynthError(SynthError::Kind::bad_profile,
                       "unrecognized profile line: " + line);
    }
  }
  return p;
}

std::string profile_str(const DistributionProfile& p) {
  std::string out;
  out += "default|" + (p.default_prob ? p.default_prob->str() : "none") + "\n";
  for (const auto& [atom, pr] : p.base)
    out += "base|" + atom + "|" + pr.str() + "\n";
  for (const auto& [atom, conds] : p.conditional)
    for (const auto& [key, pr] : conds)
      out += "cond|" + atom + "|" + key + "|" + pr.str() + "\n";
  return out;
}

std::set<std::string> residual(const Literal& p, const DisjunctSet& d,
                               SatOracle& oracle) {
  const std::string pk = p.key();
  for (const Disjunct& dj : d) {
    if (dj.lits.size() == 1 && dj.lits[0] == p) return {};
  }
  std::set<std::string> out;
  for (const Disjunct& dj : d) {
    if (dj.contains(Literal{p.atom, !p.negated})) continue;
    if (!oracle.is_satisfiable(fml::and_({dj.formula(), p.formula()})))
      continue;
    for (const Literal& l : dj.lits)
      if (l.key() != pk) out.insert(l.key());
  }
  return out;
}

Rat expected_residual(const Formula& atom, const DisjunctSet& d,
                      const Assignment& a, const DistributionProfile& profile,
                      SatOracle& oracle) {
  Rat pr = profile.probability(atom, a);
  Rat yes(static_cast<std::int64_t>(residual(Literal{atom, false}, d, oracle).size()));
  Rat no(static_cast<std::int64_t>(residual(Literal{atom, true}, d, oracle).size()));
  return pr * yes + (Rat(1) - pr) * no;
}

namespace {

// A disjunct of the original DNF together with what is left of it under the
// path assignment.  The original index makes leaf decisions deterministic
// (lowest original index wins when several disjuncts complete at once).
struct RItem {
  std::size_t orig = 0;
  Disjunct rest;
};
using RSet = std::vector<RItem>;

RSet restrict_set(const RSet& rs, const std::string& atom_key, bool val) {
  RSet out;
  for (const RItem& r : rs) {
    Disjunct nd;
    bool falsified = false;
    for (const Literal& l : r.rest.lits) {
      if (l.key() == atom_key) {
        if (l.negated == val) {
          falsified = true;
          break;
        }
        continue;  // satisfied literal: delete it
      }
      nd.lits.push_back(l);
    }
    if (!falsified) out.push_back(RItem{r.orig, std::move(nd)});
  }
  return out;
}

// Atoms still live in the restriction, in canonical order.
std::map<std::string, Formula> candidate_atoms(const RSet& rs) {
  std::map<std::string, Formula> out;
  for (const RItem& r : rs)
    for (const Literal& l : r.rest.lits) out.emplace(l.key(), l.atom);
  return out;
}

// Priority of a disjunct by original index; an empty ranking means all
// disjuncts rank equally.
std::size_t prio_of(const std::vector<std::size_t>& prio, std::size_t orig) {
  return prio.empty() ? 0 : prio.at(orig);
}

// Whether the restriction is decided: some disjunct is fully satisfied and
// none of strictly higher priority is still live.  The winning disjunct is
// the satisfied one of highest priority (lowest original index on ties).
const RItem* decided(const RSet& rs, const std::vector<std::size_t>& prio) {
  const RItem* done = nullptr;
  std::size_t live_max = 0;
  for (const RItem& r : rs) {
    if (r.rest.lits.empty()) {
      if (!done || prio_of(prio, r.orig) > prio_of(prio, done->orig))
        done = &r;
    } else {
      live_max = std::max(live_max, prio_of(prio, r.orig));
    }
  }
  if (done && prio_of(prio, done->orig) >= live_max) return done;
  return nullptr;
}

// Returns the completed leaf or no-match node if rs calls for one.
std::unique_ptr<BranchTree> try_leaf(const DisjunctSet& orig, const RSet& rs,
                                     const std::vector<std::size_t>& prio) {
  if (const RItem* r = decided(rs, prio)) {
    auto t = std::make_unique<BranchTree>();
    t->kind = BranchTree::Kind::leaf;
    t->chosen = orig[r->orig];
    return t;
  }
  if (rs.empty()) {
    auto t = std::make_unique<BranchTree>();
    t->kind = BranchTree::Kind::no_match;
    return t;
  }
  return nullptr;
}

std::unique_ptr<BranchTree> synth_greedy(const DisjunctSet& orig,
                                         const RSet& rs, const Assignment& a,
                                         const DistributionProfile& profile,
                                         SatOracle& oracle,
                                         const std::vector<std::size_t>& prio) {
  if (auto leaf = try_leaf(orig, rs, prio)) return leaf;
  DisjunctSet cur;
  cur.reserve(rs.size());
  for (const RItem& r : rs) cur.push_back(r.rest);
  std::string best_key;
  Formula best_atom;
  Rat best_er;
  for (const auto& [key, atom] : candidate_atoms(rs)) {
    Rat er = expected_residual(atom, cur, a, profile, oracle);
    if (best_key.empty() || er < best_er) {
      best_key = key;
      best_atom = atom;
      best_er = er;
    }
  }
  auto t = std::make_unique<BranchTree>();
  t->kind = BranchTree::Kind::test;
  t->atom = best_atom;
  t->assignment = a;
  Assignment then_a = a, else_a = a;
  then_a[best_key] = true;
  else_a[best_key] = false;
  t->then_branch = synth_greedy(orig, restrict_set(rs, best_key, true), then_a,
                                profile, oracle, prio);
  t->else_branch = synth_greedy(orig, restrict_set(rs, best_key, false),
                                else_a, profile, oracle, prio);
  return t;
}

// Minimum-size search.  The cost of a restriction depends only on the
// surviving disjunct bodies and their priorities, so states memoize on
// those; the stored choice makes reconstruction deterministic.
struct MinCtx {
  std::vector<std::size_t> prio;
  std::map<std::string, std::pair<std::size_t, std::string>> memo;
};

std::string state_key(const RSet& rs, const MinCtx& ctx) {
  std::vector<std::string> keys;
  keys.reserve(rs.size());
  for (const RItem& r : rs)
    keys.push_back(std::to_string(prio_of(ctx.prio, r.orig)) + ':' +
                   r.rest.key());
  std::sort(keys.begin(), keys.end());
  std::string out;
  for (const std::string& k : keys) {
    out += k;
    out += '\x1f';
  }
  return out;
}

std::size_t min_cost(const RSet& rs, MinCtx& ctx) {
  if (decided(rs, ctx.prio) || rs.empty()) return 0;
  const std::string key = state_key(rs, ctx);
  if (auto it = ctx.memo.find(key); it != ctx.memo.end())
    return it->second.first;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::string best_atom;
  for (const auto& [akey, atom] : candidate_atoms(rs)) {
    (void)atom;
    std::size_t c = 1 + min_cost(restrict_set(rs, akey, true), ctx) +
                    min_cost(restrict_set(rs, akey, false), ctx);
    if (c < best) {
      best = c;
      best_atom = akey;
    }
  }
  ctx.memo[key] = {best, best_atom};
  return best;
}

std::unique_ptr<BranchTree> build_min(const DisjunctSet& orig, const RSet& rs,
                                      const Assignment& a, MinCtx& ctx) {
  if (auto leaf = try_leaf(orig, rs, ctx.prio)) return leaf;
  min_cost(rs, ctx);  // ensure the memo entry exists
  const std::string chosen_key = ctx.memo.at(state_key(rs, ctx)).second;
  auto cands = candidate_atoms(rs);
  auto t = std::make_unique<BranchTree>();
  t->kind = BranchTree::Kind::test;
  t->atom = cands.at(chosen_key);
  t->assignment = a;
  Assignment then_a = a, else_a = a;
  then_a[chosen_key] = true;
  else_a[chosen_key] = false;
  t->then_branch =
      build_min(orig, restrict_set(rs, chosen_key, true), then_a, ctx);
  t->else_branch =
      build_min(orig, restrict_set(rs, chosen_key, false), else_a, ctx);
  return t;
}

}  // namespace

BranchTree synthesize(const DisjunctSet& d, const DistributionProfile& profile,
                      Objective objective, SatOracle& oracle,
                      const std::vector<std::size_t>& priorities) {
  if (!priorities.empty() && priorities.size() != d.size())
    throw FormulaError(FormulaError::Kind::parse_error,
                       "synthesize: priority ranking does not cover the DNF");
  if (d.empty()) {
    BranchTree t;
    t.kind = BranchTree::Kind::no_match;
    t.empty_input = true;
    return t;
  }
  RSet rs;
  rs.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) rs.push_back(RItem{i, d[i]});
  std::unique_ptr<BranchTree> t;
  if (objective == Objective::expected_time) {
    t = synth_greedy(d, rs, Assignment{}, profile, oracle, priorities);
  } else {
    MinCtx ctx;
    ctx.prio = priorities;
    t = build_min(d, rs, Assignment{}, ctx);
  }
  return std::move(*t);
}

TreeMetrics tree_metrics(const BranchTree& t,
                         const DistributionProfile& profile) {
  TreeMetrics m;
  std::function<void(const BranchTree&, Rat)> walk = [&](const BranchTree& n,
                                                         Rat reach) {
    if (n.kind != BranchTree::Kind::test) return;
    m.size += 1;
    m.expected_tests += reach;
    Rat pr = profile.probability(n.atom, n.assignment);
    walk(*n.then_branch, reach * pr);
    walk(*n.else_branch, reach * (Rat(1) - pr));
  };
  walk(t, Rat(1));
  return m;
}

BranchTree resynthesize(const BranchTree& old_tree,
                        const DistributionProfile& new_profile,
                        const DisjunctSet& d, SatOracle& oracle,
                        const std::vector<std::size_t>& priorities) {
  // The old tree and the fresh one are both exactly equivalent to d, so the
  // rebuild needs nothing from the old structure; callers verify with
  // trees_equivalent when they want the cross-check.
  (void)old_tree;
  return synthesize(d, new_profile, Objective::expected_time, oracle,
                    priorities);
}

const Disjunct* walk_tree(const BranchTree& t, const Assignment& a) {
  const BranchTree* cur = &t;
  while (cur->kind == BranchTree::Kind::test) {
    cur = a.at(render(cur->atom)) ? cur->then_branch.get()
                                  : cur->else_branch.get();
  }
  return cur->kind == BranchTree::Kind::leaf ? &cur->chosen : nullptr;
}

namespace {

void collect_test_atoms(const BranchTree& t, std::set<std::string>& keys) {
  if (t.kind != BranchTree::Kind::test) return;
  keys.insert(render(t.atom));
  collect_test_atoms(*t.then_branch, keys);
  collect_test_atoms(*t.else_branch, keys);
}

bool disjunct_satisfied(const Disjunct& dj, const Assignment& a) {
  for (const Literal& l : dj.lits) {
    auto it = a.find(l.key());
    if (it == a.end() || it->second == l.negated) return false;
  }
  return true;
}

}  // namespace

bool trees_equivalent(const BranchTree& a, const BranchTree& b,
                      const DisjunctSet& d) {
  std::set<std::string> keys;
  for (const Disjunct& dj : d)
    for (const Literal& l : dj.lits) keys.insert(l.key());
  collect_test_atoms(a, keys);
  collect_test_atoms(b, keys);
  std::vector<std::string> atom_list(keys.begin(), keys.end());
  const std::size_t n = atom_list.size();
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    Assignment asg;
    for (std::size_t i = 0; i < n; ++i)
      asg[atom_list[i]] = ((bits >> i) & 1) != 0;
    bool sat = false;
    for (const Disjunct& dj : d) sat = sat || disjunct_satisfied(dj, asg);
    const Disjunct* ra = walk_tree(a, asg);
    const Disjunct* rb = walk_tree(b, asg);
    if ((ra != nullptr) != sat || (rb != nullptr) != sat) return false;
    if (ra && !disjunct_satisfied(*ra, asg)) return false;
    if (rb && !disjunct_satisfied(*rb, asg)) return false;
  }
  return true;
}

namespace {

void tree_str_rec(const BranchTree& t, std::string indent, std::string& out) {
  switch (t.kind) {
    case BranchTree::Kind::no_match:
      out += indent + (t.empty_input ? "(no-match empty-dnf)" : "(no-match)");
      return;
    case BranchTree::Kind::leaf:
      out += indent + "(leaf " + render(t.chosen.formula()) + ")";
      return;
    case BranchTree::Kind::test: {
      out += indent + "(test " + render(t.atom) + "\n";
      tree_str_rec(*t.then_branch, indent + "  ", out);
      out += "\n";
      tree_str_rec(*t.else_branch, indent + "  ", out);
      out += ")";
      return;
    }
  }
}

}  // namespace

std::string tree_str(const BranchTree& t) {
  std::string out;
  tree_str_rec(t, "", out);
  out += "\n";
  return out;
}

}  // namespace lsfc
