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

// Code emission: classify label atoms by how the target realizes them
// (checkable / enforceable / harness-guaranteed), lower branch trees to
// guard trees with action blocks, and discharge whole machines to C source
// through a pattern -> template table.

#ifndef LSFC_EMIT_HPP_
#define LSFC_EMIT_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsfc/dnf.hpp"
#include "lsfc/formula.hpp"
#include "lsfc/machine.hpp"
#include "lsfc/oracle.hpp"
#include "lsfc/synth.hpp"

namespace lsfc {

inline constexpr char kToolchainVersion[] = "0.1.0";

class EmitError : public std::runtime_error {
 public:
  enum class Kind {
    unclassifiable_atom,        // no classification rule matches an atom
    classification_conflict,    // an atom lands where its class can't go
    wrapper_not_implied,        // harness context does not imply the atom
    missing_template,           // no discharge entry matches
    ambiguous_template,         // more than one discharge entry matches
    placeholder_arity_mismatch, // template references an unbound {N}
    bad_table,                  // malformed discharge-table text
    bad_config,                 // malformed classification config
  };
  EmitError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

// ---------------------------------------------------------------------------
// Patterns.
//
// A pattern is a formula or term shape in which an index-variable whose name
// starts with '?' matches any subterm; repeated occurrences of one wildcard
// must match render-identical subterms. An exists binder written '?N'
// matches any binder name and binds the wildcard to that index variable.
// Patterns are shapes, not evaluable formulas, so they bypass the sort
// checks of the ordinary builders; parse_pattern/parse_term_pattern accept
// the same S-expression surface syntax render() emits.

using MatchBindings = std::map<std::string, TermPtr>;

Formula parse_pattern(const std::string& text);
TermPtr parse_term_pattern(const std::string& text);

bool match_term(const TermPtr& pattern, const TermPtr& subject,
                MatchBindings& b);
bool match_formula(const Formula& pattern, const Formula& subject,
                   MatchBindings& b);

// ---------------------------------------------------------------------------
// Predicate classification.

// How the target run-time realizes an atomic constraint: by testing it on
// the dispatched event (checkable), by acting so that it becomes true
// (enforceable), or by relying on the execution harness, which guarantees
// it by construction (wrapper -- a sub-case of enforceable that costs no
// emitted code once verified).
enum class PredicateClass { checkable, enforceable, wrapper };

std::string predicate_class_str(PredicateClass c);

struct ClassRule {
  Formula pattern;
  PredicateClass cls = PredicateClass::checkable;
};

struct ClassificationConfig {
  std::vector<ClassRule> rules;  // first matching rule wins
  // Conjunction of facts the execution harness guarantees around every
  // dispatch. Wrapper-classified atoms must be implied by it.
  Formula wrapper_context;
};

// Built-in rule set for the switch vocabulary and abstract propositions.
ClassificationConfig default_classification();

// JSON form: {"rules": [{"pattern": "<sexpr>", "class": "checkable"}, ...],
//             "wrapper_context": ["<sexpr>", ...]}.
// Throws EmitError{bad_config} on malformed input.
ClassificationConfig parse_classification(const std::string& json_text);

// First matching rule's class. Throws EmitError{unclassifiable_atom} when
// nothing matches: silent misclassification must be impossible.
PredicateClass classify(const Formula& atom, const ClassificationConfig& c);

// ---------------------------------------------------------------------------
// Label preparation: minimized DNF split into what the guard logic tests,
// what the action blocks make true, and what the harness already gives.

struct PreparedLabel {
  // Minimized DNF with every literal retained, ordered so that disjuncts
  // carrying more positive enforceable literals come first. When two
  // disjuncts admit the same checkable assignment the executable takes the
  // first, so acting branches must precede vacuous ones.  Minimization
  // never merges across an enforceable atom: an action literal stays tied
  // to the conditions that enable it.
  DisjunctSet full;
  // Checkable-only projection of each full disjunct, aligned by index.
  DisjunctSet guards;
  // Positive-enforceable-literal count per disjunct, aligned by index;
  // synthesize() takes it as the priority ranking so branch trees keep
  // testing while a disjunct that does more is still in play.
  std::vector<std::size_t> priorities;
  // Distinct wrapper atoms removed from the guard view, each verified
  // implied by the wrapper context (first-occurrence order).
  std::vector<Formula> eliminated;
};

PreparedLabel prepare_label(const Formula& label, const ClassificationConfig& c,
                            SatOracle& oracle, const DnfOptions& opts = {});

// ---------------------------------------------------------------------------
// Lowering: a synthesized branch tree over the guard projections becomes a
// guard tree whose leaves name action blocks.

struct ActionBlock {
  Disjunct full;                 // the complete disjunct the leaf realizes
  std::vector<Literal> enforce;  // its positive enforceable literals
};

struct GuardNode {
  enum class Kind { test, match, no_match };
  Kind kind = Kind::no_match;
  Formula atom;  // test only; always a checkable atom
  std::unique_ptr<GuardNode> then_branch, else_branch;
  std::size_t action = 0;  // match only: index into LoweredTree::actions
};

struct LoweredTree {
  GuardNode root;
  std::vector<ActionBlock> actions;  // aligned with PreparedLabel::full
};

// Checks that every test atom is checkable and maps each leaf to the first
// full disjunct whose checkable projection matches the leaf's choice.
// Negative enforceable literals are realized by omission (the harness
// starts every dispatch with no output and an empty egress set), so they
// produce no action. A negated wrapper literal cannot be realized at all
// and raises classification_conflict.
LoweredTree lower(const BranchTree& tree, const PreparedLabel& label,
                  const ClassificationConfig& c);

// Runs the guard tree over a concrete truth assignment of checkable atoms
// (keyed by render). Returns the matched action index, or nullopt at a
// no-match leaf. Throws std::out_of_range when a tested atom is unassigned.
std::optional<std::size_t> interpret(const LoweredTree& t, const Assignment& a);

// ---------------------------------------------------------------------------
// Whole-machine decision programs.

struct TransitionProgram {
  std::string from, to;
  bool binds_snapshot = false;
  PreparedLabel label;
  BranchTree tree;     // branch tree over the guard projections
  LoweredTree logic;
};

struct DecisionProgram {
  std::string name;
  std::vector<std::string> states;
  std::string start;
  std::vector<TransitionProgram> transitions;  // machine source order
  std::string profile_hash;  // fnv1a-64 hex of the profile text used
};

DecisionProgram build_program(const LambdaSFA& m, const ClassificationConfig& c,
                              const DistributionProfile& profile, Objective obj,
                              SatOracle& oracle, const DnfOptions& opts = {});

// Neutral textual listing (guard trees, action blocks, eliminated atoms).
// Deterministic; used by reports and tests.
std::string program_str(const DecisionProgram& p);

// ---------------------------------------------------------------------------
// Discharge tables: pattern -> target-text templates.
//
// Text format, one record per block:
//   guard <pattern>        -- expression template for a checkable atom
//   statement <pattern>    -- statement template for an enforceable atom
//   term <term pattern>    -- expression template for a subterm
//   prelude                -- verbatim block emitted before generated code
// followed by template lines, terminated by a line reading 'end'.
// '#' starts a comment line between records. Templates refer to wildcard
// bindings positionally: {0} is the subterm bound by ?0, discharged
// recursively through the term entries. Integer literals discharge to
// their decimal text without an entry.

struct DischargeEntry {
  enum class Kind { guard, statement, term, prelude };
  Kind kind = Kind::guard;
  Formula pattern;       // guard / statement
  TermPtr term_pattern;  // term
  std::string text;      // template body ('\n'-joined lines)
};

struct DischargeTable {
  std::vector<DischargeEntry> entries;
};

// Throws EmitError{bad_table} on malformed text.
DischargeTable parse_discharge_table(const std::string& text);

// Expression text for one checkable atom / statement text for one
// enforceable atom / expression text for one term. Exactly one entry of the
// right kind must match (missing_template / ambiguous_template otherwise).
std::string discharge_guard(const Formula& atom, const DischargeTable& dt);
std::string discharge_statement(const Formula& atom, const DischargeTable& dt);
std::string discharge_term(const TermPtr& t, const DischargeTable& dt);

// Full C translation unit for a decision program: provenance header
// (product name, profile hash, toolchain version -- never a timestamp),
// prelude blocks in table order, a state enumeration, one match function
// per transition (nested conditionals; a matched leaf runs its action
// statements, rebinding transitions then capture the snapshot), and one
// step function per state trying its transitions in order. Output is
// deterministic byte for byte. A nonempty provenance_extra is appended to
// the header (the driver records its seed there).
std::string discharge(const DecisionProgram& p, const DischargeTable& dt,
                      const std::string& provenance_extra = "");

// ---------------------------------------------------------------------------
// Small utilities shared with the CLI.

std::uint64_t fnv1a64(const std::string& s);
std::string hash_hex(std::uint64_t h);

}  // namespace lsfc

#endif  // LSFC_EMIT_HPP_
