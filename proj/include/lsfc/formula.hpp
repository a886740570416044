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

// Transition-label formulas: predicates over trace variables (t, f, loc,
// port), component parameters (self, uplink-port, mto), the MAC learning
// table (mlt) and an optional snapshot environment x captured by a lambda
// binder. Formulas are immutable trees with value semantics; identity of
// atomic predicates is syntactic equality of their canonical rendering.

#ifndef LSFC_FORMULA_HPP_
#define LSFC_FORMULA_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsfc/net.hpp"

namespace lsfc {

// ---------------------------------------------------------------------------
// Errors. Each carries a stable kind tag so tests can pin the taxonomy.

struct FormulaError : std::runtime_error {
  enum class Kind {
    unbound_variable,      // e.g. port referenced at an egress event
    malformed_projection,  // field applied to a term of the wrong sort
    size_explosion,        // DNF grew past the configured disjunct cap
    parse_error,
  };
  FormulaError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

// ---------------------------------------------------------------------------
// Terms.

enum class Sort { Time, Mac, Port, Proto, Frame, Loc, Table, Entry, Iface, Index };

enum class VarId { Time, Frame, Loc, Port, Self, Uplink, Mto, Mlt };

enum class FieldId { Da, Sa, Proto, EntMac, EntTs, EntPort };

enum class TermKind {
  Var,       // trace variable / parameter, optionally under the snapshot x
  Field,     // frame or table-entry projection
  Entry,     // mlt(i): table entry selection
  HAddr,     // haddr(p): the hardware address of port p
  Diff,      // t1 - t2, over times
  Iface,     // (p, i) or (p, e): an interface value
  IfaceSet,  // literal set of concrete interfaces
  EgressAll, // the set of all egress interfaces
  Update,    // tbl(i){mac=, t=, port=}: functional entry overwrite
  IdxVar,    // quantifier-bound entry index
  MacLit, PortLit, TimeLit, ProtoLit,
};

struct TermNode;
using TermPtr = std::shared_ptr<const TermNode>;

struct TermNode {
  TermKind kind = TermKind::Var;
  Sort sort = Sort::Time;
  // Var
  VarId var{};
  bool snap = false;
  // Field
  FieldId field{};
  // Children: Field/HAddr/Iface use a; Entry uses a (table), b (index);
  // Diff uses a,b; Update uses a (table), b (index) and fields[0..2]
  // (mac, ts, port).
  TermPtr a, b;
  std::vector<TermPtr> fields;
  // Iface direction / IfaceSet members
  bool iface_egress = false;
  IfaceSet set_lit;
  // Literals
  MacAddr mac_lit{};
  int port_lit = 0;
  std::int64_t time_lit = 0;
  std::string proto_lit;
  std::string idx_name;
};

// Term factories. Sorts are checked at construction; a projection applied to
// the wrong sort throws FormulaError{malformed_projection}.
namespace trm {
TermPtr time_var(bool snap = false);
TermPtr frame(bool snap = false);
TermPtr loc(bool snap = false);
TermPtr port(bool snap = false);
TermPtr self();
TermPtr uplink();
TermPtr mto();
TermPtr mlt(bool snap = false);
TermPtr field(TermPtr base, FieldId f);
TermPtr da(TermPtr frame);
TermPtr sa(TermPtr frame);
TermPtr proto(TermPtr frame);
TermPtr entry(TermPtr table, TermPtr idx);
TermPtr ent_mac(TermPtr entry);
TermPtr ent_ts(TermPtr entry);
TermPtr ent_port(TermPtr entry);
TermPtr haddr(TermPtr port);
TermPtr diff(TermPtr a, TermPtr b);
TermPtr iface(TermPtr port, bool egress);
TermPtr iface_set(IfaceSet s);
TermPtr egress_all();
TermPtr update(TermPtr table, TermPtr idx, TermPtr mac, TermPtr ts, TermPtr port);
TermPtr idx_var(const std::string& name);
TermPtr mac_lit(const MacAddr& a);
TermPtr port_lit(int p);
TermPtr time_lit(std::int64_t t);
TermPtr idx_lit(int i);  // entry index literal (Index sort, stored as PortLit shape)
TermPtr proto_lit(const std::string& tag);
}  // namespace trm

// Canonical S-expression rendering; also the identity for comparisons.
std::string render(const TermPtr& t);

// ---------------------------------------------------------------------------
// Formulas.

enum class FKind {
  True, False,
  Eq,        // t1 = t2 (sort-homogeneous)
  Le,        // t1 <= t2 over times (t1 may be a difference)
  Member,    // iface ∈ loc
  SubsetEg,  // loc ⊆ egress
  IsIngress, // loc = {port i}: the event is a singleton ingress
  Ucast, Bcast,
  ArpReqRx,  // opaque binary predicate over (frame, port)
  Prop,      // named propositional atom (abstract examples and tests)
  Not, And, Or, Implies,
  Exists,    // bounded over dom(mlt); ∀ is parsed as ¬∃¬
  Lambda,    // marks that firing captures the pre-step env as x
};

class Formula;
using FormulaVec = std::vector<Formula>;

struct FormulaNode {
  FKind kind = FKind::True;
  TermPtr t1, t2;
  std::string name;  // Prop name / Exists index name
  FormulaVec kids;
};

class Formula {
 public:
  Formula() : n_(nullptr) {}
  explicit Formula(std::shared_ptr<const FormulaNode> n) : n_(std::move(n)) {}
  const FormulaNode& node() const { return *n_; }
  FKind kind() const { return n_->kind; }
  bool valid() const { return n_ != nullptr; }
  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator<(const Formula& a, const Formula& b);

 private:
  std::shared_ptr<const FormulaNode> n_;
};

namespace fml {
Formula truth();
Formula falsity();
// Eq canonicalizes operand order (updates always end up on the right).
Formula eq(TermPtr a, TermPtr b);
Formula neq(TermPtr a, TermPtr b);  // ¬(a = b)
Formula le(TermPtr a, TermPtr b);
Formula gt(TermPtr a, TermPtr b);   // ¬(a <= b)
Formula member(TermPtr iface, TermPtr loc);
Formula subset_egress(TermPtr loc);
Formula is_ingress();
Formula ucast(TermPtr mac);
Formula bcast(TermPtr mac);
Formula arp_reqrx(TermPtr frame, TermPtr port);
Formula prop(const std::string& name);
Formula not_(Formula f);
Formula and_(FormulaVec kids);
Formula or_(FormulaVec kids);
Formula implies(Formula a, Formula b);
Formula exists(const std::string& idx, Formula body);
Formula forall(const std::string& idx, Formula body);  // ¬∃¬ normal form
Formula lambda(Formula body);
}  // namespace fml

std::string render(const Formula& f);

// True for the node kinds that the DNF/branching layers treat as atomic
// predicates: the relational kinds, Prop, and whole quantified subformulas
// (which evaluation and the satisfiability backends expand over dom(mlt)).
bool is_atom(const Formula& f);

// The set of atomic predicates occurring in f (positive form, canonically
// ordered by rendering). Lambda binders are transparent.
std::set<std::string> atom_keys(const Formula& f);
std::vector<Formula> atoms(const Formula& f);

// Free trace variables / parameters / prop names mentioned by f, as canonical
// tokens ("f", "loc", "port", "self", "uplink-port", "mto", "mlt", "t",
// prop:NAME). Snapshot references count as their base variable.
std::set<std::string> free_vars(const Formula& f);

// Structural helpers used by the product construction and DNF layers.
Formula strip_lambda(const Formula& f);
bool has_lambda(const Formula& f);

// Expands bounded quantifiers over entry indices 0..bound-1. The result is
// quantifier-free; update atoms remain atomic.
Formula expand_quantifiers(const Formula& f, std::size_t bound);

// ---------------------------------------------------------------------------
// Environments and evaluation.

// One step's variable bindings. `port` is bound iff loc is an ingress
// singleton; `snap` is the x binding (the environment captured when the
// current machine state was entered through a lambda transition, or the
// initial world for the first step).
struct EnvCore {
  std::optional<std::int64_t> time;
  std::optional<Frame> frame;
  std::optional<IfaceSet> loc;
  std::optional<int> port;
  std::optional<MacTable> mlt;
};

struct Env {
  EnvCore cur;
  std::optional<EnvCore> snap;
  std::optional<int> self;
  const NetContext* net = nullptr;
  // Assignment for abstract Prop atoms (profiles/synthesis tests).
  std::map<std::string, bool> props;

  // Builds the env for a trace event: binds t, f, loc and (when ingress)
  // port; the table is supplied by the caller (post-event view during runs).
  static Env at_event(const TraceEvent& e, MacTable mlt,
                      std::optional<int> self, const NetContext& net);
};

enum class Tri : std::uint8_t { False = 0, True = 1, Undef = 2 };
Tri tri_not(Tri a);
Tri tri_and(Tri a, Tri b);
Tri tri_or(Tri a, Tri b);

// Three-valued evaluation: atoms whose terms reference an unbound variable
// (port at egress, x without a snapshot) are Undef; connectives are Kleene.
// This keeps vacuous implications total regardless of literal order.
Tri eval3(const Formula& f, const Env& env);

// Two-valued front end: throws FormulaError{unbound_variable} when the truth
// value genuinely depends on an unbound variable.
bool eval(const Formula& f, const Env& env);

// Term evaluation for frame- and port-sorted terms (no quantifier index in
// scope); nullopt when the term references an unbound variable. Used by the
// enumeration backend to range the opaque arp-reqrx predicate over the
// concrete argument tuples a formula can mention.
std::optional<Frame> eval_frame_term(const TermPtr& t, const Env& env);
std::optional<int> eval_port_term(const TermPtr& t, const Env& env);

}  // namespace lsfc

#endif  // LSFC_FORMULA_HPP_
