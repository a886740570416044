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

#include "lsfc/formula.hpp"

#include <algorithm>
#include <functional>

namespace lsfc {

namespace {

[[noreturn]] void malformed(const std::string& msg) {
  throw FormulaError(FormulaError::Kind::malformed_projection, msg);
}

TermPtr mk(TermNode n) { return std::make_shared<const TermNode>(std::move(n)); }

TermPtr var(VarId v, bool snap, Sort s) {
  TermNode n;
  n.kind = TermKind::Var;
  n.sort = s;
  n.var = v;
  n.snap = snap;
  return mk(std::move(n));
}

std::shared_ptr<const FormulaNode> fnode(FormulaNode n) {
  return std::make_shared<const FormulaNode>(std::move(n));
}

Formula wrap(FormulaNode n) { return Formula(fnode(std::move(n))); }

Formula wrap_kind(FKind k) {
  FormulaNode n;
  n.kind = k;
  return wrap(std::move(n));
}

}  // namespace

// ---------------------------------------------------------------------------
// Term factories.

namespace trm {

TermPtr time_var(bool snap) { return var(VarId::Time, snap, Sort::Time); }
TermPtr frame(bool snap) { return var(VarId::Frame, snap, Sort::Frame); }
TermPtr loc(bool snap) { return var(VarId::Loc, snap, Sort::Loc); }
TermPtr port(bool snap) { return var(VarId::Port, snap, Sort::Port); }
TermPtr self() { return var(VarId::Self, false, Sort::Port); }
TermPtr uplink() { return var(VarId::Uplink, false, Sort::Port); }
TermPtr mto() { return var(VarId::Mto, false, Sort::Time); }
TermPtr mlt(bool snap) { return var(VarId::Mlt, snap, Sort::Table); }

TermPtr field(TermPtr base, FieldId f) {
  TermNode n;
  n.kind = TermKind::Field;
  n.field = f;
  switch (f) {
    case FieldId::Da:
    case FieldId::Sa:
      if (base->sort != Sort::Frame) malformed("frame field on non-frame term");
      n.sort = Sort::Mac;
      break;
    case FieldId::Proto:
      if (base->sort != Sort::Frame) malformed("frame field on non-frame term");
      n.sort = Sort::Proto;
      break;
    case FieldId::EntMac:
      if (base->sort != Sort::Entry) malformed("entry field on non-entry term");
      n.sort = Sort::Mac;
      break;
    case FieldId::EntTs:
      if (base->sort != Sort::Entry) malformed("entry field on non-entry term");
      n.sort = Sort::Time;
      break;
    case FieldId::EntPort:
      if (base->sort != Sort::Entry) malformed("entry field on non-entry term");
      n.sort = Sort::Port;
      break;
  }
  n.a = std::move(base);
  return mk(std::move(n));
}

TermPtr da(TermPtr f) { return field(std::move(f), FieldId::Da); }
TermPtr sa(TermPtr f) { return field(std::move(f), FieldId::Sa); }
TermPtr proto(TermPtr f) { return field(std::move(f), FieldId::Proto); }

TermPtr entry(TermPtr table, TermPtr idx) {
  if (table->sort != Sort::Table) malformed("entry selection on non-table term");
  if (idx->sort != Sort::Index) malformed("entry index must have index sort");
  TermNode n;
  n.kind = TermKind::Entry;
  n.sort = Sort::Entry;
  n.a = std::move(table);
  n.b = std::move(idx);
  return mk(std::move(n));
}

TermPtr ent_mac(TermPtr e) { return field(std::move(e), FieldId::EntMac); }
TermPtr ent_ts(TermPtr e) { return field(std::move(e), FieldId::EntTs); }
TermPtr ent_port(TermPtr e) { return field(std::move(e), FieldId::EntPort); }

TermPtr haddr(TermPtr p) {
  if (p->sort != Sort::Port) malformed("haddr of non-port term");
  TermNode n;
  n.kind = TermKind::HAddr;
  n.sort = Sort::Mac;
  n.a = std::move(p);
  return mk(std::move(n));
}

TermPtr diff(TermPtr a, TermPtr b) {
  if (a->sort != Sort::Time || b->sort != Sort::Time)
    malformed("difference of non-time terms");
  TermNode n;
  n.kind = TermKind::Diff;
  n.sort = Sort::Time;
  n.a = std::move(a);
  n.b = std::move(b);
  return mk(std::move(n));
}

TermPtr iface(TermPtr port, bool egress) {
  if (port->sort != Sort::Port) malformed("interface of non-port term");
  TermNode n;
  n.kind = TermKind::Iface;
  n.sort = Sort::Iface;
  n.a = std::move(port);
  n.iface_egress = egress;
  return mk(std::move(n));
}

TermPtr iface_set(IfaceSet s) {
  TermNode n;
  n.kind = TermKind::IfaceSet;
  n.sort = Sort::Loc;
  n.set_lit = std::move(s);
  return mk(std::move(n));
}

TermPtr egress_all() {
  TermNode n;
  n.kind = TermKind::EgressAll;
  n.sort = Sort::Loc;
  return mk(std::move(n));
}

TermPtr update(TermPtr table, TermPtr idx, TermPtr mac, TermPtr ts, TermPtr port) {
  if (table->sort != Sort::Table) malformed("update of non-table term");
  if (idx->sort != Sort::Index) malformed("update index must have index sort");
  if (mac->sort != Sort::Mac || ts->sort != Sort::Time || port->sort != Sort::Port)
    malformed("update field terms have wrong sorts");
  TermNode n;
  n.kind = TermKind::Update;
  n.sort = Sort::Table;
  n.a = std::move(table);
  n.b = std::move(idx);
  n.fields = {std::move(mac), std::move(ts), std::move(port)};
  return mk(std::move(n));
}

TermPtr idx_var(const std::string& name) {
  TermNode n;
  n.kind = TermKind::IdxVar;
  n.sort = Sort::Index;
  n.idx_name = name;
  return mk(std::move(n));
}

TermPtr mac_lit(const MacAddr& a) {
  TermNode n;
  n.kind = TermKind::MacLit;
  n.sort = Sort::Mac;
  n.mac_lit = a;
  return mk(std::move(n));
}

TermPtr port_lit(int p) {
  TermNode n;
  n.kind = TermKind::PortLit;
  n.sort = Sort::Port;
  n.port_lit = p;
  return mk(std::move(n));
}

TermPtr time_lit(std::int64_t t) {
  TermNode n;
  n.kind = TermKind::TimeLit;
  n.sort = Sort::Time;
  n.time_lit = t;
  return mk(std::move(n));
}

TermPtr idx_lit(int i) {
  TermNode n;
  n.kind = TermKind::PortLit;  // same payload shape, Index sort
  n.sort = Sort::Index;
  n.port_lit = i;
  return mk(std::move(n));
}

TermPtr proto_lit(const std::string& tag) {
  TermNode n;
  n.kind = TermKind::ProtoLit;
  n.sort = Sort::Proto;
  n.proto_lit = tag;
  return mk(std::move(n));
}

}  // namespace trm

// ---------------------------------------------------------------------------
// Rendering. The canonical S-expression doubles as structural identity.

std::string render(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Var: {
      std::string base;
      switch (t->var) {
        case VarId::Time: base = "t"; break;
        case VarId::Frame: base = "f"; break;
        case VarId::Loc: base = "loc"; break;
        case VarId::Port: base = "port"; break;
        case VarId::Self: base = "self"; break;
        case VarId::Uplink: base = "uplink-port"; break;
        case VarId::Mto: base = "mto"; break;
        case VarId::Mlt: base = "mlt"; break;
      }
      return t->snap ? "(x " + base + ")" : base;
    }
    case TermKind::Field: {
      std::string f;
      switch (t->field) {
        case FieldId::Da: f = "da"; break;
        case FieldId::Sa: f = "sa"; break;
        case FieldId::Proto: f = "proto"; break;
        case FieldId::EntMac: f = "mac"; break;
        case FieldId::EntTs: f = "t"; break;
        case FieldId::EntPort: f = "port"; break;
      }
      return "(fld " + render(t->a) + " " + f + ")";
    }
    case TermKind::Entry:
      return "(ent " + render(t->a) + " " + render(t->b) + ")";
    case TermKind::HAddr:
      return "(haddr " + render(t->a) + ")";
    case TermKind::Diff:
      return "(- " + render(t->a) + " " + render(t->b) + ")";
    case TermKind::Iface:
      return std::string("(") + (t->iface_egress ? "egr" : "ing") + " " +
             render(t->a) + ")";
    case TermKind::IfaceSet: {
      std::string out = "(set";
      for (const Iface& i : t->set_lit.members)
        out += std::string(" (") + (i.egress ? "egr" : "ing") + " " +
               std::to_string(i.port) + ")";
      return out + ")";
    }
    case TermKind::EgressAll:
      return "egress";
    case TermKind::Update:
      return "(upd " + render(t->a) + " " + render(t->b) + " " +
             render(t->fields[0]) + " " + render(t->fields[1]) + " " +
             render(t->fields[2]) + ")";
    case TermKind::IdxVar:
      return t->idx_name;
    case TermKind::MacLit:
      return mac_str(t->mac_lit);
    case TermKind::PortLit:
      return std::to_string(t->port_lit);
    case TermKind::TimeLit:
      return std::to_string(t->time_lit);
    case TermKind::ProtoLit:
      return t->proto_lit;
  }
  return "?";
}

std::string render(const Formula& f) {
  const FormulaNode& n = f.node();
  switch (n.kind) {
    case FKind::True: return "true";
    case FKind::False: return "false";
    case FKind::Eq: return "(= " + render(n.t1) + " " + render(n.t2) + ")";
    case FKind::Le: return "(<= " + render(n.t1) + " " + render(n.t2) + ")";
    case FKind::Member:
      return "(in " + render(n.t1) + " " + render(n.t2) + ")";
    case FKind::SubsetEg:
      return "(subset " + render(n.t1) + " egress)";
    case FKind::IsIngress:
      return "(= loc (set (ing port)))";
    case FKind::Ucast: return "(ucast " + render(n.t1) + ")";
    case FKind::Bcast: return "(bcast " + render(n.t1) + ")";
    case FKind::ArpReqRx:
      return "(arp-reqrx " + render(n.t1) + " " + render(n.t2) + ")";
    case FKind::Prop: return "(prop " + n.name + ")";
    case FKind::Not: return "(not " + render(n.kids[0]) + ")";
    case FKind::And:
    case FKind::Or: {
      std::string out = n.kind == FKind::And ? "(and" : "(or";
      for (const Formula& k : n.kids) out += " " + render(k);
      return out + ")";
    }
    case FKind::Implies:
      return "(=> " + render(n.kids[0]) + " " + render(n.kids[1]) + ")";
    case FKind::Exists:
      return "(exists " + n.name + " " + render(n.kids[0]) + ")";
    case FKind::Lambda:
      return "(lambda " + render(n.kids[0]) + ")";
  }
  return "?";
}

bool operator==(const Formula& a, const Formula& b) {
  if (!a.valid() || !b.valid()) return a.valid() == b.valid();
  return render(a) == render(b);
}

bool operator<(const Formula& a, const Formula& b) {
  return render(a) < render(b);
}

// ---------------------------------------------------------------------------
// Formula factories.

namespace fml {

Formula truth() { return wrap_kind(FKind::True); }
Formula falsity() { return wrap_kind(FKind::False); }

Formula eq(TermPtr a, TermPtr b) {
  if (a->sort != b->sort) malformed("equality between different sorts");
  switch (a->sort) {
    case Sort::Time: case Sort::Mac: case Sort::Port: case Sort::Proto:
    case Sort::Frame: case Sort::Loc: case Sort::Table:
      break;
    default:
      malformed("equality over unsupported sort");
  }
  // Canonical operand order. Update expressions always stay on the right so
  // the table-update idiom reads `mlt = x.mlt(k){...}`.
  bool swap_needed;
  if (a->kind == TermKind::Update) swap_needed = b->kind != TermKind::Update;
  else if (b->kind == TermKind::Update) swap_needed = false;
  else swap_needed = render(b) < render(a);
  if (swap_needed) std::swap(a, b);
  FormulaNode n;
  n.kind = FKind::Eq;
  n.t1 = std::move(a);
  n.t2 = std::move(b);
  return wrap(std::move(n));
}

Formula neq(TermPtr a, TermPtr b) { return not_(eq(std::move(a), std::move(b))); }

Formula le(TermPtr a, TermPtr b) {
  if (a->sort != Sort::Time || b->sort != Sort::Time)
    malformed("ordering over non-time terms");
  FormulaNode n;
  n.kind = FKind::Le;
  n.t1 = std::move(a);
  n.t2 = std::move(b);
  return wrap(std::move(n));
}

Formula gt(TermPtr a, TermPtr b) { return not_(le(std::move(a), std::move(b))); }

Formula member(TermPtr iface, TermPtr loc) {
  if (iface->sort != Sort::Iface || loc->sort != Sort::Loc)
    malformed("membership needs an interface and a location");
  FormulaNode n;
  n.kind = FKind::Member;
  n.t1 = std::move(iface);
  n.t2 = std::move(loc);
  return wrap(std::move(n));
}

Formula subset_egress(TermPtr loc) {
  if (loc->sort != Sort::Loc) malformed("subset over non-location term");
  FormulaNode n;
  n.kind = FKind::SubsetEg;
  n.t1 = std::move(loc);
  return wrap(std::move(n));
}

Formula is_ingress() { return wrap_kind(FKind::IsIngress); }

Formula ucast(TermPtr mac) {
  if (mac->sort != Sort::Mac) malformed("ucast of non-address term");
  FormulaNode n;
  n.kind = FKind::Ucast;
  n.t1 = std::move(mac);
  return wrap(std::move(n));
}

Formula bcast(TermPtr mac) {
  if (mac->sort != Sort::Mac) malformed("bcast of non-address term");
  FormulaNode n;
  n.kind = FKind::Bcast;
  n.t1 = std::move(mac);
  return wrap(std::move(n));
}

Formula arp_reqrx(TermPtr frame, TermPtr port) {
  if (frame->sort != Sort::Frame || port->sort != Sort::Port)
    malformed("arp-reqrx needs a frame and a port");
  FormulaNode n;
  n.kind = FKind::ArpReqRx;
  n.t1 = std::move(frame);
  n.t2 = std::move(port);
  return wrap(std::move(n));
}

Formula prop(const std::string& name) {
  FormulaNode n;
  n.kind = FKind::Prop;
  n.name = name;
  return wrap(std::move(n));
}

Formula not_(Formula f) {
  // Double negations collapse so literal polarity stays canonical.
  if (f.kind() == FKind::Not) return f.node().kids[0];
  if (f.kind() == FKind::True) return falsity();
  if (f.kind() == FKind::False) return truth();
  FormulaNode n;
  n.kind = FKind::Not;
  n.kids = {std::move(f)};
  return wrap(std::move(n));
}

namespace {
// Shared nary builder: flattens same-kind children, drops the unit element,
// deduplicates syntactically equal children, and collapses on the absorbing
// element.
Formula nary(FKind kind, FormulaVec kids, FKind unit_kind, FKind zero_kind,
             Formula unit, Formula zero) {
  FormulaVec flat;
  std::set<std::string> seen;
  std::function<void(Formula)> push = [&](Formula k) {
    if (k.kind() == kind) {
      for (const Formula& g : k.node().kids) push(g);
      return;
    }
    if (k.kind() == unit_kind) return;
    std::string key = render(k);
    if (seen.insert(key).second) flat.push_back(std::move(k));
  };
  for (Formula& k : kids) push(std::move(k));
  for (const Formula& k : flat)
    if (k.kind() == zero_kind) return zero;
  if (flat.empty()) return unit;
  if (flat.size() == 1) return flat[0];
  FormulaNode n;
  n.kind = kind;
  n.kids = std::move(flat);
  return wrap(std::move(n));
}
}  // namespace

Formula and_(FormulaVec kids) {
  return nary(FKind::And, std::move(kids), FKind::True, FKind::False, truth(),
              falsity());
}

Formula or_(FormulaVec kids) {
  return nary(FKind::Or, std::move(kids), FKind::False, FKind::True, falsity(),
              truth());
}

Formula implies(Formula a, Formula b) {
  FormulaNode n;
  n.kind = FKind::Implies;
  n.kids = {std::move(a), std::move(b)};
  return wrap(std::move(n));
}

Formula exists(const std::string& idx, Formula body) {
  FormulaNode n;
  n.kind = FKind::Exists;
  n.name = idx;
  n.kids = {std::move(body)};
  return wrap(std::move(n));
}

Formula forall(const std::string& idx, Formula body) {
  return not_(exists(idx, not_(std::move(body))));
}

Formula lambda(Formula body) {
  FormulaNode n;
  n.kind = FKind::Lambda;
  n.kids = {std::move(body)};
  return wrap(std::move(n));
}

}  // namespace fml

// ---------------------------------------------------------------------------
// Structure queries.

bool is_atom(const Formula& f) {
  switch (f.kind()) {
    case FKind::Eq: case FKind::Le: case FKind::Member: case FKind::SubsetEg:
    case FKind::IsIngress: case FKind::Ucast: case FKind::Bcast:
    case FKind::ArpReqRx: case FKind::Prop: case FKind::Exists:
      return true;
    default:
      return false;
  }
}

namespace {
void collect_atoms(const Formula& f, std::map<std::string, Formula>& out) {
  if (is_atom(f)) {
    out.emplace(render(f), f);
    return;
  }
  switch (f.kind()) {
    case FKind::True: case FKind::False:
      return;
    default:
      for (const Formula& k : f.node().kids) collect_atoms(k, out);
  }
}
}  // namespace

std::set<std::string> atom_keys(const Formula& f) {
  std::map<std::string, Formula> m;
  collect_atoms(f, m);
  std::set<std::string> out;
  for (const auto& [k, v] : m) out.insert(k);
  return out;
}

std::vector<Formula> atoms(const Formula& f) {
  std::map<std::string, Formula> m;
  collect_atoms(f, m);
  std::vector<Formula> out;
  for (const auto& [k, v] : m) out.push_back(v);
  return out;
}

namespace {
void term_vars(const TermPtr& t, std::set<std::string>& out) {
  if (!t) return;
  switch (t->kind) {
    case TermKind::Var:
      switch (t->var) {
        case VarId::Time: out.insert("t"); break;
        case VarId::Frame: out.insert("f"); break;
        case VarId::Loc: out.insert("loc"); break;
        case VarId::Port: out.insert("port"); break;
        case VarId::Self: out.insert("self"); break;
        case VarId::Uplink: out.insert("uplink-port"); break;
        case VarId::Mto: out.insert("mto"); break;
        case VarId::Mlt: out.insert("mlt"); break;
      }
      return;
    default:
      term_vars(t->a, out);
      term_vars(t->b, out);
      for (const TermPtr& k : t->fields) term_vars(k, out);
  }
}

void formula_vars(const Formula& f, std::set<std::string>& out) {
  const FormulaNode& n = f.node();
  switch (n.kind) {
    case FKind::IsIngress:
      out.insert("loc");
      out.insert("port");
      return;
    case FKind::Prop:
      out.insert("prop:" + n.name);
      return;
    default:
      term_vars(n.t1, out);
      term_vars(n.t2, out);
      for (const Formula& k : n.kids) formula_vars(k, out);
  }
}
}  // namespace

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  formula_vars(f, out);
  return out;
}

Formula strip_lambda(const Formula& f) {
  if (f.kind() == FKind::Lambda) return f.node().kids[0];
  return f;
}

bool has_lambda(const Formula& f) { return f.kind() == FKind::Lambda; }

// ---------------------------------------------------------------------------
// Quantifier expansion.

namespace {
TermPtr subst_idx_term(const TermPtr& t, const std::string& name, int k) {
  if (!t) return t;
  if (t->kind == TermKind::IdxVar)
    return t->idx_name == name ? trm::idx_lit(k) : t;
  TermNode n = *t;
  n.a = subst_idx_term(t->a, name, k);
  n.b = subst_idx_term(t->b, name, k);
  for (TermPtr& kid : n.fields) kid = subst_idx_term(kid, name, k);
  return mk(std::move(n));
}

Formula subst_idx(const Formula& f, const std::string& name, int k) {
  const FormulaNode& n = f.node();
  if (n.kind == FKind::Exists && n.name == name) return f;  // shadowed
  FormulaNode out = n;
  out.t1 = subst_idx_term(n.t1, name, k);
  out.t2 = subst_idx_term(n.t2, name, k);
  for (Formula& kid : out.kids) kid = subst_idx(kid, name, k);
  return wrap(std::move(out));
}
}  // namespace

Formula expand_quantifiers(const Formula& f, std::size_t bound) {
  const FormulaNode& n = f.node();
  switch (n.kind) {
    case FKind::Exists: {
      FormulaVec branches;
      for (std::size_t k = 0; k < bound; ++k)
        branches.push_back(expand_quantifiers(
            subst_idx(n.kids[0], n.name, static_cast<int>(k)), bound));
      return fml::or_(std::move(branches));
    }
    case FKind::Not: case FKind::And: case FKind::Or: case FKind::Implies:
    case FKind::Lambda: {
      FormulaNode out = n;
      for (Formula& k : out.kids) k = expand_quantifiers(k, bound);
      if (n.kind == FKind::Not) return fml::not_(out.kids[0]);
      if (n.kind == FKind::And) return fml::and_(std::move(out.kids));
      if (n.kind == FKind::Or) return fml::or_(std::move(out.kids));
      return wrap(std::move(out));
    }
    default:
      return f;
  }
}

// ---------------------------------------------------------------------------
// Environments.

Env Env::at_event(const TraceEvent& e, MacTable mlt, std::optional<int> self,
                  const NetContext& net) {
  Env env;
  env.cur.time = e.time;
  env.cur.frame = e.frame;
  env.cur.loc = e.loc;
  env.cur.port = e.loc.ingress_port();
  env.cur.mlt = std::move(mlt);
  env.self = self;
  env.net = &net;
  return env;
}

Tri tri_not(Tri a) {
  if (a == Tri::Undef) return Tri::Undef;
  return a == Tri::True ? Tri::False : Tri::True;
}

Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::Undef || b == Tri::Undef) return Tri::Undef;
  return Tri::True;
}

Tri tri_or(Tri a, Tri b) {
  if (a == Tri::True || b == Tri::True) return Tri::True;
  if (a == Tri::Undef || b == Tri::Undef) return Tri::Undef;
  return Tri::False;
}

}  // namespace lsfc
