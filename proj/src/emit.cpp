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

#include "lsfc/emit.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lsfc/dsl.hpp"

namespace lsfc {

namespace {

using EK = EmitError::Kind;

// ---------------------------------------------------------------------------
// Pattern construction. Patterns are shapes, never evaluated, so the nodes
// are built directly instead of through the sort-checked builders: a
// wildcard may sit in any operand position.

std::shared_ptr<TermNode> raw_term(TermKind k) {
  auto n = std::make_shared<TermNode>();
  n->kind = k;
  return n;
}

TermPtr pat_var(VarId v, bool snap) {
  auto n = raw_term(TermKind::Var);
  n->var = v;
  n->snap = snap;
  return n;
}

TermPtr pat_idx(const std::string& name) {
  auto n = raw_term(TermKind::IdxVar);
  n->idx_name = name;
  return n;
}

Formula raw_formula(FormulaNode n) {
  return Formula(std::make_shared<const FormulaNode>(std::move(n)));
}

[[noreturn]] void pat_fail(const SExpr& e, const std::string& msg) {
  throw FormulaError(FormulaError::Kind::parse_error,
                     "pattern:" + std::to_string(e.line) + ":" +
                         std::to_string(e.col) + ": " + msg);
}

bool looks_like_int(const std::string& s) {
  std::size_t i = (s.size() > 1 && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

std::optional<VarId> var_id_of(const std::string& s) {
  if (s == "t") return VarId::Time;
  if (s == "f") return VarId::Frame;
  if (s == "loc") return VarId::Loc;
  if (s == "port") return VarId::Port;
  if (s == "self") return VarId::Self;
  if (s == "uplink-port") return VarId::Uplink;
  if (s == "mto") return VarId::Mto;
  if (s == "mlt") return VarId::Mlt;
  return std::nullopt;
}

TermPtr parse_tpat(const SExpr& e);

TermPtr parse_tpat_atom(const SExpr& e) {
  const std::string& s = e.atom;
  if (auto v = var_id_of(s)) return pat_var(*v, false);
  if (s == "egress") return raw_term(TermKind::EgressAll);
  if (!s.empty() && s[0] == '?') return pat_idx(s);
  if (looks_like_int(s)) {
    auto n = raw_term(TermKind::TimeLit);
    n->time_lit = std::stoll(s);
    return n;
  }
  if (s.find(':') != std::string::npos) {
    try {
      auto n = raw_term(TermKind::MacLit);
      n->mac_lit = parse_mac(s);
      return n;
    } catch (const std::invalid_argument&) {
      pat_fail(e, "malformed address literal '" + s + "'");
    }
  }
  // A bound index name (the binder spells it out) or similar bare symbol.
  return pat_idx(s);
}

TermPtr parse_tpat(const SExpr& e) {
  if (e.is_atom) return parse_tpat_atom(e);
  if (e.items.empty() || !e.items[0].is_atom)
    pat_fail(e, "term operator must be an identifier");
  const std::string& op = e.items[0].atom;
  auto need = [&](std::size_t n) {
    if (e.items.size() != n + 1)
      pat_fail(e, "'" + op + "' takes " + std::to_string(n) + " operands");
  };
  if (op == "x") {
    need(1);
    const SExpr& a = e.items[1];
    if (!a.is_atom) pat_fail(a, "snapshot of a non-variable");
    auto v = var_id_of(a.atom);
    if (!v) pat_fail(a, "unknown snapshot variable '" + a.atom + "'");
    return pat_var(*v, true);
  }
  if (op == "fld") {
    need(2);
    const SExpr& fe = e.items[2];
    if (!fe.is_atom) pat_fail(fe, "field name must be an identifier");
    FieldId fid;
    if (fe.atom == "da") fid = FieldId::Da;
    else if (fe.atom == "sa") fid = FieldId::Sa;
    else if (fe.atom == "proto") fid = FieldId::Proto;
    else if (fe.atom == "mac") fid = FieldId::EntMac;
    else if (fe.atom == "t") fid = FieldId::EntTs;
    else if (fe.atom == "port") fid = FieldId::EntPort;
    else pat_fail(fe, "unknown field '" + fe.atom + "'");
    auto n = raw_term(TermKind::Field);
    n->field = fid;
    n->a = parse_tpat(e.items[1]);
    return n;
  }
  if (op == "ent") {
    need(2);
    auto n = raw_term(TermKind::Entry);
    n->a = parse_tpat(e.items[1]);
    n->b = parse_tpat(e.items[2]);
    return n;
  }
  if (op == "haddr") {
    need(1);
    auto n = raw_term(TermKind::HAddr);
    n->a = parse_tpat(e.items[1]);
    return n;
  }
  if (op == "-") {
    need(2);
    auto n = raw_term(TermKind::Diff);
    n->a = parse_tpat(e.items[1]);
    n->b = parse_tpat(e.items[2]);
    return n;
  }
  if (op == "ing" || op == "egr") {
    need(1);
    auto n = raw_term(TermKind::Iface);
    n->iface_egress = (op == "egr");
    n->a = parse_tpat(e.items[1]);
    return n;
  }
  if (op == "set") {
    auto n = raw_term(TermKind::IfaceSet);
    IfaceSet s;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      const SExpr& it = e.items[i];
      if (it.is_atom || it.items.size() != 2 || !it.items[0].is_atom ||
          !it.items[1].is_atom || !looks_like_int(it.items[1].atom))
        pat_fail(it, "set members must be concrete interfaces");
      const std::string& dir = it.items[0].atom;
      if (dir != "ing" && dir != "egr") pat_fail(it, "unknown interface kind");
      s.insert(Iface{static_cast<int>(std::stol(it.items[1].atom)),
                     dir == "egr"});
    }
    n->set_lit = std::move(s);
    return n;
  }
  if (op == "upd") {
    need(5);
    auto n = raw_term(TermKind::Update);
    n->a = parse_tpat(e.items[1]);
    n->b = parse_tpat(e.items[2]);
    n->fields = {parse_tpat(e.items[3]), parse_tpat(e.items[4]),
                 parse_tpat(e.items[5])};
    return n;
  }
  pat_fail(e, "unknown term operator '" + op + "'");
}

// True when the S-expression is exactly (set (ing port)): the surface form
// of the ingress-singleton atom.
bool is_ingress_set_shape(const SExpr& e) {
  return !e.is_atom && e.items.size() == 2 && e.items[0].is_atom &&
         e.items[0].atom == "set" && !e.items[1].is_atom &&
         e.items[1].items.size() == 2 && e.items[1].items[0].is_atom &&
         e.items[1].items[0].atom == "ing" && e.items[1].items[1].is_atom &&
         e.items[1].items[1].atom == "port";
}

Formula parse_fpat(const SExpr& e) {
  if (e.is_atom) {
    if (e.atom == "true") return fml::truth();
    if (e.atom == "false") return fml::falsity();
    pat_fail(e, "expected a formula pattern");
  }
  if (e.items.empty() || !e.items[0].is_atom)
    pat_fail(e, "formula operator must be an identifier");
  const std::string& op = e.items[0].atom;
  auto need = [&](std::size_t n) {
    if (e.items.size() != n + 1)
      pat_fail(e, "'" + op + "' takes " + std::to_string(n) + " operands");
  };
  FormulaNode n;
  if (op == "=") {
    need(2);
    if (e.items[1].is_atom && e.items[1].atom == "loc" &&
        is_ingress_set_shape(e.items[2])) {
      n.kind = FKind::IsIngress;
      return raw_formula(std::move(n));
    }
    n.kind = FKind::Eq;
    n.t1 = parse_tpat(e.items[1]);
    n.t2 = parse_tpat(e.items[2]);
    return raw_formula(std::move(n));
  }
  if (op == "<=") {
    need(2);
    n.kind = FKind::Le;
    n.t1 = parse_tpat(e.items[1]);
    n.t2 = parse_tpat(e.items[2]);
    return raw_formula(std::move(n));
  }
  if (op == "in") {
    need(2);
    n.kind = FKind::Member;
    n.t1 = parse_tpat(e.items[1]);
    n.t2 = parse_tpat(e.items[2]);
    return raw_formula(std::move(n));
  }
  if (op == "subset") {
    need(2);
    n.kind = FKind::SubsetEg;
    n.t1 = parse_tpat(e.items[1]);
    return raw_formula(std::move(n));
  }
  if (op == "ucast" || op == "bcast") {
    need(1);
    n.kind = (op == "ucast") ? FKind::Ucast : FKind::Bcast;
    n.t1 = parse_tpat(e.items[1]);
    return raw_formula(std::move(n));
  }
  if (op == "arp-reqrx") {
    need(2);
    n.kind = FKind::ArpReqRx;
    n.t1 = parse_tpat(e.items[1]);
    n.t2 = parse_tpat(e.items[2]);
    return raw_formula(std::move(n));
  }
  if (op == "prop") {
    need(1);
    if (!e.items[1].is_atom) pat_fail(e.items[1], "proposition name expected");
    n.kind = FKind::Prop;
    n.name = e.items[1].atom;
    return raw_formula(std::move(n));
  }
  if (op == "not" || op == "lambda") {
    need(1);
    n.kind = (op == "not") ? FKind::Not : FKind::Lambda;
    n.kids = {parse_fpat(e.items[1])};
    return raw_formula(std::move(n));
  }
  if (op == "and" || op == "or") {
    if (e.items.size() < 3) pat_fail(e, "'" + op + "' takes two or more operands");
    n.kind = (op == "and") ? FKind::And : FKind::Or;
    for (std::size_t i = 1; i < e.items.size(); ++i)
      n.kids.push_back(parse_fpat(e.items[i]));
    return raw_formula(std::move(n));
  }
  if (op == "=>") {
    need(2);
    n.kind = FKind::Implies;
    n.kids = {parse_fpat(e.items[1]), parse_fpat(e.items[2])};
    return raw_formula(std::move(n));
  }
  if (op == "exists") {
    need(2);
    if (!e.items[1].is_atom) pat_fail(e.items[1], "index name expected");
    n.kind = FKind::Exists;
    n.name = e.items[1].atom;
    n.kids = {parse_fpat(e.items[2])};
    return raw_formula(std::move(n));
  }
  pat_fail(e, "unknown formula operator '" + op + "'");
}

const SExpr& single_sexpr(const std::vector<SExpr>& v, const std::string& what) {
  if (v.size() != 1)
    throw FormulaError(FormulaError::Kind::parse_error,
                       "expected exactly one " + what);
  return v[0];
}

bool is_wild_name(const std::string& s) { return !s.empty() && s[0] == '?'; }

bool is_wild(const TermPtr& t) {
  return t && t->kind == TermKind::IdxVar && is_wild_name(t->idx_name);
}

bool bind_or_check(MatchBindings& b, const std::string& name,
                   const TermPtr& subject) {
  auto it = b.find(name);
  if (it != b.end()) return render(it->second) == render(subject);
  b.emplace(name, subject);
  return true;
}

}  // namespace

Formula parse_pattern(const std::string& text) {
  return parse_fpat(single_sexpr(parse_sexprs(text), "formula pattern"));
}

TermPtr parse_term_pattern(const std::string& text) {
  return parse_tpat(single_sexpr(parse_sexprs(text), "term pattern"));
}

bool match_term(const TermPtr& pattern, const TermPtr& subject,
                MatchBindings& b) {
  if (!pattern || !subject) return static_cast<bool>(pattern) == static_cast<bool>(subject);
  if (is_wild(pattern)) return bind_or_check(b, pattern->idx_name, subject);
  if (pattern->kind != subject->kind) {
    // Entry-index literals are stored in the port-literal slot; allow a
    // numeric pattern to match either numeric shape.
    if (pattern->kind == TermKind::TimeLit && subject->kind == TermKind::PortLit)
      return pattern->time_lit == subject->port_lit;
    return false;
  }
  switch (pattern->kind) {
    case TermKind::Var:
      return pattern->var == subject->var && pattern->snap == subject->snap;
    case TermKind::Field:
      return pattern->field == subject->field &&
             match_term(pattern->a, subject->a, b);
    case TermKind::Entry:
    case TermKind::Diff:
      return match_term(pattern->a, subject->a, b) &&
             match_term(pattern->b, subject->b, b);
    case TermKind::HAddr:
      return match_term(pattern->a, subject->a, b);
    case TermKind::Iface:
      return pattern->iface_egress == subject->iface_egress &&
             match_term(pattern->a, subject->a, b);
    case TermKind::IfaceSet:
      return pattern->set_lit == subject->set_lit;
    case TermKind::EgressAll:
      return true;
    case TermKind::Update: {
      if (!match_term(pattern->a, subject->a, b) ||
          !match_term(pattern->b, subject->b, b))
        return false;
      if (pattern->fields.size() != subject->fields.size()) return false;
      for (std::size_t i = 0; i < pattern->fields.size(); ++i)
        if (!match_term(pattern->fields[i], subject->fields[i], b)) return false;
      return true;
    }
    case TermKind::IdxVar:
      return pattern->idx_name == subject->idx_name;
    case TermKind::MacLit:
      return pattern->mac_lit == subject->mac_lit;
    case TermKind::PortLit:
      return pattern->port_lit == subject->port_lit;
    case TermKind::TimeLit:
      return pattern->time_lit == subject->time_lit;
    case TermKind::ProtoLit:
      return pattern->proto_lit == subject->proto_lit;
  }
  return false;
}

bool match_formula(const Formula& pattern, const Formula& subject,
                   MatchBindings& b) {
  if (!pattern.valid() || !subject.valid())
    return pattern.valid() == subject.valid();
  const FormulaNode& p = pattern.node();
  const FormulaNode& s = subject.node();
  if (p.kind != s.kind) return false;
  switch (p.kind) {
    case FKind::True:
    case FKind::False:
    case FKind::IsIngress:
      return true;
    case FKind::Eq: {
      // Equality subjects carry builder-canonicalized argument order, so a
      // pattern must match either orientation; bindings from a failed
      // orientation must not leak into the retry.
      MatchBindings saved = b;
      if (match_term(p.t1, s.t1, b) && match_term(p.t2, s.t2, b)) return true;
      b = saved;
      if (match_term(p.t1, s.t2, b) && match_term(p.t2, s.t1, b)) return true;
      b = saved;
      return false;
    }
    case FKind::Le:
    case FKind::Member:
    case FKind::ArpReqRx:
      return match_term(p.t1, s.t1, b) && match_term(p.t2, s.t2, b);
    case FKind::SubsetEg:
    case FKind::Ucast:
    case FKind::Bcast:
      return match_term(p.t1, s.t1, b);
    case FKind::Prop:
      if (is_wild_name(p.name)) return bind_or_check(b, p.name, trm::idx_var(s.name));
      return p.name == s.name;
    case FKind::Exists:
      if (is_wild_name(p.name)) {
        if (!bind_or_check(b, p.name, trm::idx_var(s.name))) return false;
      } else if (p.name != s.name) {
        return false;
      }
      return match_formula(p.kids[0], s.kids[0], b);
    case FKind::Not:
    case FKind::Lambda:
      return match_formula(p.kids[0], s.kids[0], b);
    case FKind::And:
    case FKind::Or:
    case FKind::Implies: {
      if (p.kids.size() != s.kids.size()) return false;
      for (std::size_t i = 0; i < p.kids.size(); ++i)
        if (!match_formula(p.kids[i], s.kids[i], b)) return false;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Classification.

std::string predicate_class_str(PredicateClass c) {
  switch (c) {
    case PredicateClass::checkable: return "checkable";
    case PredicateClass::enforceable: return "enforceable";
    case PredicateClass::wrapper: return "wrapper";
  }
  return "?";
}

namespace {

PredicateClass class_of_str(const std::string& s) {
  if (s == "checkable") return PredicateClass::checkable;
  if (s == "enforceable") return PredicateClass::enforceable;
  if (s == "wrapper") return PredicateClass::wrapper;
  throw EmitError(EK::bad_config, "unknown predicate class '" + s + "'");
}

struct DefaultRule {
  const char* pattern;
  PredicateClass cls;
};

// First match wins; specific equalities precede the wildcard haddr form.
constexpr PredicateClass kCheck = PredicateClass::checkable;
constexpr PredicateClass kEnf = PredicateClass::enforceable;
constexpr PredicateClass kWrap = PredicateClass::wrapper;

const DefaultRule kDefaultRules[] = {
    // Checkable: tests over the dispatched event, the snapshot, and the
    // learning table.
    {"(= loc (set (ing port)))", kCheck},
    {"(= port uplink-port)", kCheck},
    {"(= self uplink-port)", kCheck},
    {"(= self (x port))", kCheck},
    {"(= ?0 (haddr ?1))", kCheck},
    {"(ucast ?0)", kCheck},
    {"(bcast ?0)", kCheck},
    {"(arp-reqrx ?0 ?1)", kCheck},
    {"(prop ?0)", kCheck},
    {"(exists ?0 (= (fld (ent (x mlt) ?0) mac) (fld f sa)))", kCheck},
    {"(exists ?0 (not (<= (- t (fld (ent (x mlt) ?0) t)) mto)))", kCheck},
    {"(exists ?0 (and (= (fld (ent mlt ?0) mac) (fld f da)) "
     "(<= (- t (fld (ent mlt ?0) t)) mto) (= (fld (ent mlt ?0) port) self)))",
     kCheck},
    {"(exists ?0 (not (or (not (= (fld (ent mlt ?0) mac) (fld f da))) "
     "(not (<= (- t (fld (ent mlt ?0) t)) mto)))))",
     kCheck},
    // Enforceable: the executable makes these true by acting.
    {"(= f (x f))", kEnf},
    {"(in (egr self) loc)", kEnf},
    {"(exists ?0 (= mlt (upd (x mlt) ?0 (fld f sa) t port)))", kEnf},
    // Harness-guaranteed: the dispatch loop only ever presents egress
    // locations to egress logic and never mutates the table on its own.
    {"(subset loc egress)", kWrap},
    {"(= mlt (x mlt))", kWrap},
};

const char* kDefaultWrapperContext[] = {
    "(subset loc egress)",
    "(= mlt (x mlt))",
};

}  // namespace

ClassificationConfig default_classification() {
  ClassificationConfig c;
  for (const DefaultRule& r : kDefaultRules)
    c.rules.push_back(ClassRule{parse_pattern(r.pattern), r.cls});
  FormulaVec ctx;
  for (const char* s : kDefaultWrapperContext) ctx.push_back(parse_formula(s));
  c.wrapper_context = fml::and_(std::move(ctx));
  return c;
}

ClassificationConfig parse_classification(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw EmitError(EK::bad_config, std::string("classification JSON: ") + e.what());
  }
  ClassificationConfig c;
  try {
    if (!j.is_object()) throw EmitError(EK::bad_config, "classification root must be an object");
    for (const auto& r : j.at("rules")) {
      ClassRule cr;
      cr.pattern = parse_pattern(r.at("pattern").get<std::string>());
      cr.cls = class_of_str(r.at("class").get<std::string>());
      c.rules.push_back(std::move(cr));
    }
    FormulaVec ctx;
    if (j.contains("wrapper_context"))
      for (const auto& s : j.at("wrapper_context"))
        ctx.push_back(parse_formula(s.get<std::string>()));
    c.wrapper_context = fml::and_(std::move(ctx));
  } catch (const nlohmann::json::exception& e) {
    throw EmitError(EK::bad_config, std::string("classification JSON: ") + e.what());
  } catch (const FormulaError& e) {
    throw EmitError(EK::bad_config, std::string("classification pattern: ") + e.what());
  }
  return c;
}

PredicateClass classify(const Formula& atom, const ClassificationConfig& c) {
  for (const ClassRule& r : c.rules) {
    MatchBindings b;
    if (match_formula(r.pattern, atom, b)) return r.cls;
  }
  throw EmitError(EK::unclassifiable_atom,
                  "no classification rule matches atom " + render(atom));
}

// ---------------------------------------------------------------------------
// Label preparation.

PreparedLabel prepare_label(const Formula& label, const ClassificationConfig& c,
                            SatOracle& oracle, const DnfOptions& opts) {
  const Formula body = strip_lambda(label);
  // Constraint-only implications expand as ¬a ∨ b so their antecedents
  // never become realization targets, and consensus may pivot only on
  // checkable atoms: folding an enforceable atom out of a disjunct would
  // leave its action without the conditions that enable it (truth is
  // preserved, the generated behavior is not).
  DnfOptions dopts = opts;
  dopts.action_atom = [&c](const Formula& atom) {
    return classify(atom, c) == PredicateClass::enforceable;
  };
  const auto checkable_only = [&c](const Formula& atom) {
    return classify(atom, c) == PredicateClass::checkable;
  };
  DisjunctSet full =
      minimize_dnf(to_dnf(body, dopts), oracle, Formula(), checkable_only);

  struct Row {
    Disjunct full, guard;
    std::size_t actions = 0;
  };
  std::vector<Row> rows;
  std::vector<Formula> eliminated;
  std::set<std::string> elim_seen;

  for (const Disjunct& dj : full) {
    Row r;
    r.full = dj;
    for (const Literal& l : dj.lits) {
      switch (classify(l.atom, c)) {
        case PredicateClass::checkable:
          r.guard.lits.push_back(l);  // dj.lits is key-sorted; a filtered
          break;                      // subsequence stays sorted
        case PredicateClass::enforceable:
          // A positive literal becomes an action; a negative one is
          // realized by omission (every dispatch starts with no output
          // frame and an empty egress set).
          if (!l.negated) ++r.actions;
          break;
        case PredicateClass::wrapper: {
          if (l.negated)
            throw EmitError(EK::classification_conflict,
                            "negated harness-guaranteed atom cannot be "
                            "realized: (not " + render(l.atom) + ")");
          if (elim_seen.insert(l.key()).second) {
            if (!c.wrapper_context.valid())
              throw EmitError(EK::wrapper_not_implied,
                              "no wrapper context configured, cannot eliminate " +
                                  render(l.atom));
            if (oracle.is_satisfiable(
                    fml::and_({c.wrapper_context, fml::not_(l.atom)})))
              throw EmitError(EK::wrapper_not_implied,
                              "wrapper context does not imply " + render(l.atom));
            eliminated.push_back(l.atom);
          }
          break;
        }
      }
    }
    rows.push_back(std::move(r));
  }

  // Acting branches first: when one checkable assignment satisfies several
  // disjuncts the executable takes the first, and it must prefer to act.
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.actions > b.actions; });

  PreparedLabel out;
  for (Row& r : rows) {
    out.full.push_back(std::move(r.full));
    out.guards.push_back(std::move(r.guard));
    out.priorities.push_back(r.actions);
  }
  out.eliminated = std::move(eliminated);
  return out;
}

// ---------------------------------------------------------------------------
// Lowering.

namespace {

void lower_rec(const BranchTree& n, const PreparedLabel& label,
               const ClassificationConfig& c, GuardNode& out) {
  switch (n.kind) {
    case BranchTree::Kind::no_match:
      out.kind = GuardNode::Kind::no_match;
      return;
    case BranchTree::Kind::leaf: {
      out.kind = GuardNode::Kind::match;
      const std::string key = n.chosen.key();
      for (std::size_t i = 0; i < label.guards.size(); ++i) {
        if (label.guards[i].key() == key) {
          out.action = i;
          return;
        }
      }
      throw EmitError(EK::bad_config,
                      "leaf disjunct has no counterpart in the prepared label: " +
                          key);
    }
    case BranchTree::Kind::test: {
      if (classify(n.atom, c) != PredicateClass::checkable)
        throw EmitError(EK::classification_conflict,
                        "guard tree tests a non-checkable atom: " + render(n.atom));
      out.kind = GuardNode::Kind::test;
      out.atom = n.atom;
      out.then_branch = std::make_unique<GuardNode>();
      out.else_branch = std::make_unique<GuardNode>();
      lower_rec(*n.then_branch, label, c, *out.then_branch);
      lower_rec(*n.else_branch, label, c, *out.else_branch);
      return;
    }
  }
}

}  // namespace

LoweredTree lower(const BranchTree& tree, const PreparedLabel& label,
                  const ClassificationConfig& c) {
  LoweredTree out;
  for (const Disjunct& dj : label.full) {
    ActionBlock ab;
    ab.full = dj;
    for (const Literal& l : dj.lits)
      if (!l.negated && classify(l.atom, c) == PredicateClass::enforceable)
        ab.enforce.push_back(l);
    out.actions.push_back(std::move(ab));
  }
  lower_rec(tree, label, c, out.root);
  return out;
}

std::optional<std::size_t> interpret(const LoweredTree& t, const Assignment& a) {
  const GuardNode* n = &t.root;
  for (;;) {
    switch (n->kind) {
      case GuardNode::Kind::no_match: return std::nullopt;
      case GuardNode::Kind::match: return n->action;
      case GuardNode::Kind::test:
        n = a.at(render(n->atom)) ? n->then_branch.get() : n->else_branch.get();
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// Whole-machine programs.

DecisionProgram build_program(const LambdaSFA& m, const ClassificationConfig& c,
                              const DistributionProfile& profile, Objective obj,
                              SatOracle& oracle, const DnfOptions& opts) {
  validate_shape(m);
  DecisionProgram p;
  p.name = m.name;
  p.states = m.states;
  p.start = m.start;
  p.profile_hash = hash_hex(fnv1a64(profile_str(profile)));
  for (const Transition& tr : m.transitions) {
    TransitionProgram tp;
    tp.from = tr.from;
    tp.to = tr.to;
    tp.binds_snapshot = tr.binds_snapshot;
    tp.label = prepare_label(tr.label, c, oracle, opts);
    tp.tree = synthesize(tp.label.guards, profile, obj, oracle,
                         tp.label.priorities);
    tp.logic = lower(tp.tree, tp.label, c);
    p.transitions.push_back(std::move(tp));
  }
  return p;
}

namespace {

void indent_lines(const std::string& text, const std::string& prefix,
                  std::ostringstream& out) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out << prefix << line << "\n";
}

}  // namespace

std::string program_str(const DecisionProgram& p) {
  std::ostringstream out;
  out << "program " << p.name << "\n";
  out << "toolchain " << kToolchainVersion << "\n";
  out << "profile " << p.profile_hash << "\n";
  out << "start " << p.start << "\n";
  out << "states";
  for (const std::string& s : p.states) out << " " << s;
  out << "\n";
  for (std::size_t i = 0; i < p.transitions.size(); ++i) {
    const TransitionProgram& tp = p.transitions[i];
    out << "\ntransition " << i << " " << tp.from << " -> " << tp.to
        << (tp.binds_snapshot ? " binds" : "") << "\n";
    out << "  disjuncts:\n";
    for (std::size_t d = 0; d < tp.label.full.size(); ++d) {
      out << "    " << d << ": " << tp.label.full[d].key() << "\n";
      out << "       guard view: " << tp.label.guards[d].key() << "\n";
      const ActionBlock& ab = tp.logic.actions[d];
      out << "       actions:";
      if (ab.enforce.empty()) out << " (none)";
      for (const Literal& l : ab.enforce) out << " " << render(l.atom);
      out << "\n";
    }
    out << "  eliminated:";
    if (tp.label.eliminated.empty()) out << " (none)";
    out << "\n";
    for (const Formula& g : tp.label.eliminated)
      out << "    " << render(g) << "\n";
    out << "  branch tree:\n";
    indent_lines(tree_str(tp.tree), "    ", out);
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Discharge tables.

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Removes the longest common leading run of spaces/tabs from the nonempty
// lines so template files can indent their bodies freely.
std::string dedent(const std::vector<std::string>& lines) {
  std::size_t common = std::string::npos;
  for (const std::string& l : lines) {
    if (trim(l).empty()) continue;
    std::size_t ind = l.find_first_not_of(" \t");
    common = std::min(common, ind);
  }
  if (common == std::string::npos) common = 0;
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& l = lines[i];
    if (i) out += "\n";
    out += (trim(l).empty()) ? "" : l.substr(common);
  }
  return out;
}

}  // namespace

DischargeTable parse_discharge_table(const std::string& text) {
  DischargeTable dt;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw EmitError(EK::bad_table,
                    "discharge table line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t sp = s.find_first_of(" \t");
    std::string kind = (sp == std::string::npos) ? s : s.substr(0, sp);
    std::string rest = (sp == std::string::npos) ? "" : trim(s.substr(sp));
    DischargeEntry e;
    if (kind == "guard") e.kind = DischargeEntry::Kind::guard;
    else if (kind == "statement") e.kind = DischargeEntry::Kind::statement;
    else if (kind == "term") e.kind = DischargeEntry::Kind::term;
    else if (kind == "prelude") e.kind = DischargeEntry::Kind::prelude;
    else fail("unknown record kind '" + kind + "'");
    if (e.kind == DischargeEntry::Kind::prelude) {
      if (!rest.empty()) fail("prelude records take no pattern");
    } else {
      if (rest.empty()) fail("missing pattern");
      try {
        if (e.kind == DischargeEntry::Kind::term)
          e.term_pattern = parse_term_pattern(rest);
        else
          e.pattern = parse_pattern(rest);
      } catch (const FormulaError& fe) {
        fail(fe.what());
      }
    }
    std::vector<std::string> body;
    bool closed = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line) == "end") {
        closed = true;
        break;
      }
      body.push_back(line);
    }
    if (!closed) fail("record not terminated by 'end'");
    e.text = dedent(body);
    dt.entries.push_back(std::move(e));
  }
  return dt;
}

namespace {

std::string instantiate(const std::string& tmpl, const MatchBindings& b,
                        const DischargeTable& dt);

const DischargeEntry* find_unique_formula(const DischargeTable& dt,
                                          DischargeEntry::Kind k,
                                          const Formula& atom,
                                          MatchBindings& b,
                                          const char* what) {
  const DischargeEntry* hit = nullptr;
  for (const DischargeEntry& e : dt.entries) {
    if (e.kind != k) continue;
    MatchBindings trial;
    if (!match_formula(e.pattern, atom, trial)) continue;
    if (hit)
      throw EmitError(EK::ambiguous_template,
                      std::string(what) + " atom matches more than one entry: " +
                          render(atom));
    hit = &e;
    b = std::move(trial);
  }
  if (!hit)
    throw EmitError(EK::missing_template,
                    std::string("no ") + what + " template for atom " + render(atom));
  return hit;
}

}  // namespace

std::string discharge_term(const TermPtr& t, const DischargeTable& dt) {
  const DischargeEntry* hit = nullptr;
  MatchBindings bind;
  for (const DischargeEntry& e : dt.entries) {
    if (e.kind != DischargeEntry::Kind::term) continue;
    MatchBindings trial;
    if (!match_term(e.term_pattern, t, trial)) continue;
    if (hit)
      throw EmitError(EK::ambiguous_template,
                      "term matches more than one entry: " + render(t));
    hit = &e;
    bind = std::move(trial);
  }
  if (hit) return instantiate(hit->text, bind, dt);
  switch (t->kind) {
    case TermKind::TimeLit: return std::to_string(t->time_lit);
    case TermKind::PortLit: return std::to_string(t->port_lit);
    case TermKind::IdxVar: return t->idx_name;  // bound names (e.g. props)
    default:
      throw EmitError(EK::missing_template,
                      "no term template for " + render(t));
  }
}

std::string discharge_guard(const Formula& atom, const DischargeTable& dt) {
  MatchBindings b;
  const DischargeEntry* e =
      find_unique_formula(dt, DischargeEntry::Kind::guard, atom, b, "guard");
  return instantiate(e->text, b, dt);
}

std::string discharge_statement(const Formula& atom, const DischargeTable& dt) {
  MatchBindings b;
  const DischargeEntry* e = find_unique_formula(
      dt, DischargeEntry::Kind::statement, atom, b, "statement");
  return instantiate(e->text, b, dt);
}

namespace {

std::string instantiate(const std::string& tmpl, const MatchBindings& b,
                        const DischargeTable& dt) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() && std::isdigit(static_cast<unsigned char>(tmpl[j])))
        ++j;
      if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
        const std::string name = "?" + tmpl.substr(i + 1, j - i - 1);
        auto it = b.find(name);
        if (it == b.end())
          throw EmitError(EK::placeholder_arity_mismatch,
                          "template references {" + tmpl.substr(i + 1, j - i - 1) +
                              "} but the pattern binds no " + name);
        out += discharge_term(it->second, dt);
        i = j;
        continue;
      }
    }
    out += tmpl[i];
  }
  return out;
}

std::string c_ident(const std::string& s) {
  std::string out;
  if (!s.empty() && std::isdigit(static_cast<unsigned char>(s[0]))) out += "S_";
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

void emit_statements(const std::string& text, const std::string& ind,
                     std::ostringstream& out) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out << ind << line << "\n";
}

void emit_guard_node(const GuardNode& n, const TransitionProgram& tp,
                     const DischargeTable& dt, int depth,
                     std::ostringstream& out) {
  const std::string ind(static_cast<std::size_t>(depth) * 4, ' ');
  switch (n.kind) {
    case GuardNode::Kind::no_match:
      out << ind << "return 0;\n";
      return;
    case GuardNode::Kind::match: {
      const ActionBlock& ab = tp.logic.actions[n.action];
      for (const Literal& l : ab.enforce)
        emit_statements(discharge_statement(l.atom, dt), ind, out);
      if (tp.binds_snapshot) {
        out << ind << "x_buf = buf;\n";
        out << ind << "x_port = is_ingress ? port : -1;\n";
      }
      out << ind << "return 1;\n";
      return;
    }
    case GuardNode::Kind::test:
      out << ind << "if (" << discharge_guard(n.atom, dt) << ") {\n";
      emit_guard_node(*n.then_branch, tp, dt, depth + 1, out);
      out << ind << "} else {\n";
      emit_guard_node(*n.else_branch, tp, dt, depth + 1, out);
      out << ind << "}\n";
      return;
  }
}

}  // namespace

std::string discharge(const DecisionProgram& p, const DischargeTable& dt,
                      const std::string& provenance_extra) {
  std::ostringstream out;
  out << "/* lsfc " << kToolchainVersion << " | product: " << p.name
      << " | profile: " << p.profile_hash;
  if (!provenance_extra.empty()) out << " | " << provenance_extra;
  out << " */\n";
  out << "/* Generated decision program; do not edit. */\n";
  for (const DischargeEntry& e : dt.entries) {
    if (e.kind != DischargeEntry::Kind::prelude) continue;
    out << "\n" << e.text << "\n";
  }
  out << "\nenum lsfc_state {\n";
  for (std::size_t i = 0; i < p.states.size(); ++i)
    out << "    LSFC_STATE_" << c_ident(p.states[i]) << " = " << i << ",\n";
  out << "    LSFC_STUCK = -1\n};\n";
  for (std::size_t i = 0; i < p.transitions.size(); ++i) {
    const TransitionProgram& tp = p.transitions[i];
    out << "\n/* " << tp.from << " -> " << tp.to << " */\n";
    out << "static int lsfc_match_t" << i << "(void)\n{\n";
    emit_guard_node(tp.logic.root, tp, dt, 1, out);
    out << "}\n";
  }
  for (const std::string& s : p.states) {
    out << "\nstatic int lsfc_step_" << c_ident(s) << "(void)\n{\n";
    for (std::size_t i = 0; i < p.transitions.size(); ++i) {
      const TransitionProgram& tp = p.transitions[i];
      if (tp.from != s) continue;
      out << "    if (lsfc_match_t" << i << "())\n";
      out << "        return LSFC_STATE_" << c_ident(tp.to) << ";\n";
    }
    out << "    return LSFC_STUCK;\n}\n";
  }
  out << "\nint lsfc_step(int state);\n";
  out << "\nint lsfc_step(int state)\n{\n    switch (state) {\n";
  for (const std::string& s : p.states) {
    out << "    case LSFC_STATE_" << c_ident(s) << ":\n";
    out << "        return lsfc_step_" << c_ident(s) << "();\n";
  }
  out << "    default:\n        return LSFC_STUCK;\n    }\n}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Utilities.

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace lsfc
