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

#include <map>
#include <optional>
#include <variant>

#include "lsfc/formula.hpp"

namespace lsfc {

namespace {

// Runtime value of a term. Times and indexes share int64 storage but are
// never compared across sorts (factories enforce sort agreement).
struct TVal {
  Sort sort = Sort::Time;
  std::int64_t num = 0;          // Time, Port, Index
  MacAddr mac{};                 // Mac
  std::string str;               // Proto
  Frame frame{};                 // Frame
  IfaceSet set{};                // Loc
  MacTable table{};              // Table
  MacEntry entry{};              // Entry
  Iface ifc{};                   // Iface
};

using IdxBind = std::map<std::string, int>;

[[noreturn]] void malformed(const std::string& msg) {
  throw FormulaError(FormulaError::Kind::malformed_projection, msg);
}

std::optional<TVal> eval_term(const TermPtr& t, const Env& env,
                              const IdxBind& bind) {
  TVal v;
  switch (t->kind) {
    case TermKind::Var: {
      const EnvCore* core = nullptr;
      if (t->snap) {
        if (!env.snap) return std::nullopt;
        core = &*env.snap;
      } else {
        core = &env.cur;
      }
      switch (t->var) {
        case VarId::Time:
          if (!core->time) return std::nullopt;
          v.sort = Sort::Time;
          v.num = *core->time;
          return v;
        case VarId::Frame:
          if (!core->frame) return std::nullopt;
          v.sort = Sort::Frame;
          v.frame = *core->frame;
          return v;
        case VarId::Loc:
          if (!core->loc) return std::nullopt;
          v.sort = Sort::Loc;
          v.set = *core->loc;
          return v;
        case VarId::Port:
          if (!core->port) return std::nullopt;
          v.sort = Sort::Port;
          v.num = *core->port;
          return v;
        case VarId::Self:
          if (!env.self) return std::nullopt;
          v.sort = Sort::Port;
          v.num = *env.self;
          return v;
        case VarId::Uplink:
          if (!env.net) return std::nullopt;
          v.sort = Sort::Port;
          v.num = env.net->uplink_port;
          return v;
        case VarId::Mto:
          if (!env.net) return std::nullopt;
          v.sort = Sort::Time;
          v.num = env.net->mto;
          return v;
        case VarId::Mlt:
          if (!core->mlt) return std::nullopt;
          v.sort = Sort::Table;
          v.table = *core->mlt;
          return v;
      }
      return std::nullopt;
    }
    case TermKind::Field: {
      auto base = eval_term(t->a, env, bind);
      if (!base) return std::nullopt;
      switch (t->field) {
        case FieldId::Da:
          v.sort = Sort::Mac;
          v.mac = base->frame.da;
          return v;
        case FieldId::Sa:
          v.sort = Sort::Mac;
          v.mac = base->frame.sa;
          return v;
        case FieldId::Proto:
          v.sort = Sort::Proto;
          v.str = base->frame.proto;
          return v;
        case FieldId::EntMac:
          v.sort = Sort::Mac;
          v.mac = base->entry.mac;
          return v;
        case FieldId::EntTs:
          v.sort = Sort::Time;
          v.num = base->entry.ts;
          return v;
        case FieldId::EntPort:
          v.sort = Sort::Port;
          v.num = base->entry.port;
          return v;
      }
      return std::nullopt;
    }
    case TermKind::Entry: {
      auto table = eval_term(t->a, env, bind);
      auto idx = eval_term(t->b, env, bind);
      if (!table || !idx) return std::nullopt;
      if (idx->num < 0 ||
          idx->num >= static_cast<std::int64_t>(table->table.entries.size()))
        malformed("table entry index out of range");
      v.sort = Sort::Entry;
      v.entry = table->table.entries[static_cast<std::size_t>(idx->num)];
      return v;
    }
    case TermKind::HAddr: {
      auto p = eval_term(t->a, env, bind);
      if (!p) return std::nullopt;
      if (!env.net) return std::nullopt;
      if (p->num < 1 ||
          p->num > static_cast<std::int64_t>(env.net->port_macs.size()))
        malformed("hardware address of unknown port");
      v.sort = Sort::Mac;
      v.mac = env.net->haddr(static_cast<int>(p->num));
      return v;
    }
    case TermKind::Diff: {
      auto a = eval_term(t->a, env, bind);
      auto b = eval_term(t->b, env, bind);
      if (!a || !b) return std::nullopt;
      v.sort = Sort::Time;
      v.num = a->num - b->num;
      return v;
    }
    case TermKind::Iface: {
      auto p = eval_term(t->a, env, bind);
      if (!p) return std::nullopt;
      v.sort = Sort::Iface;
      v.ifc = Iface{static_cast<int>(p->num), t->iface_egress};
      return v;
    }
    case TermKind::IfaceSet:
      v.sort = Sort::Loc;
      v.set = t->set_lit;
      return v;
    case TermKind::EgressAll: {
      if (!env.net) return std::nullopt;
      std::vector<int> ports;
      for (int p = 1; p <= env.net->num_ports; ++p) ports.push_back(p);
      v.sort = Sort::Loc;
      v.set = IfaceSet::egress(ports);
      return v;
    }
    case TermKind::Update: {
      auto table = eval_term(t->a, env, bind);
      auto idx = eval_term(t->b, env, bind);
      auto mac = eval_term(t->fields[0], env, bind);
      auto ts = eval_term(t->fields[1], env, bind);
      auto port = eval_term(t->fields[2], env, bind);
      if (!table || !idx || !mac || !ts || !port) return std::nullopt;
      if (idx->num < 0 ||
          idx->num >= static_cast<std::int64_t>(table->table.entries.size()))
        malformed("table update index out of range");
      v.sort = Sort::Table;
      v.table = table->table;
      v.table.entries[static_cast<std::size_t>(idx->num)] =
          MacEntry{mac->mac, ts->num, static_cast<int>(port->num)};
      return v;
    }
    case TermKind::IdxVar: {
      auto it = bind.find(t->idx_name);
      if (it == bind.end()) malformed("free table index variable " + t->idx_name);
      v.sort = Sort::Index;
      v.num = it->second;
      return v;
    }
    case TermKind::MacLit:
      v.sort = Sort::Mac;
      v.mac = t->mac_lit;
      return v;
    case TermKind::PortLit:
      v.sort = t->sort;  // Port or Index
      v.num = t->port_lit;
      return v;
    case TermKind::TimeLit:
      v.sort = Sort::Time;
      v.num = t->time_lit;
      return v;
    case TermKind::ProtoLit:
      v.sort = Sort::Proto;
      v.str = t->proto_lit;
      return v;
  }
  return std::nullopt;
}

bool vals_equal(const TVal& a, const TVal& b) {
  switch (a.sort) {
    case Sort::Time: case Sort::Port: case Sort::Index:
      return a.num == b.num;
    case Sort::Mac:
      return a.mac == b.mac;
    case Sort::Proto:
      return a.str == b.str;
    case Sort::Frame:
      return a.frame.da == b.frame.da && a.frame.sa == b.frame.sa &&
             a.frame.proto == b.frame.proto;
    case Sort::Loc:
      return a.set.members == b.set.members;
    case Sort::Table: {
      if (a.table.entries.size() != b.table.entries.size()) return false;
      for (std::size_t i = 0; i < a.table.entries.size(); ++i) {
        const MacEntry& x = a.table.entries[i];
        const MacEntry& y = b.table.entries[i];
        if (!(x.mac == y.mac) || x.ts != y.ts || x.port != y.port) return false;
      }
      return true;
    }
    default:
      return false;
  }
}

Tri eval3_rec(const Formula& f, const Env& env, const IdxBind& bind) {
  const FormulaNode& n = f.node();
  switch (n.kind) {
    case FKind::True: return Tri::True;
    case FKind::False: return Tri::False;
    case FKind::Eq: {
      auto a = eval_term(n.t1, env, bind);
      auto b = eval_term(n.t2, env, bind);
      if (!a || !b) return Tri::Undef;
      return vals_equal(*a, *b) ? Tri::True : Tri::False;
    }
    case FKind::Le: {
      auto a = eval_term(n.t1, env, bind);
      auto b = eval_term(n.t2, env, bind);
      if (!a || !b) return Tri::Undef;
      return a->num <= b->num ? Tri::True : Tri::False;
    }
    case FKind::Member: {
      auto i = eval_term(n.t1, env, bind);
      auto s = eval_term(n.t2, env, bind);
      if (!i || !s) return Tri::Undef;
      return s->set.contains(i->ifc) ? Tri::True : Tri::False;
    }
    case FKind::SubsetEg: {
      auto s = eval_term(n.t1, env, bind);
      if (!s) return Tri::Undef;
      return s->set.subset_of_egress() ? Tri::True : Tri::False;
    }
    case FKind::IsIngress:
      if (!env.cur.loc) return Tri::Undef;
      return env.cur.loc->ingress_port() ? Tri::True : Tri::False;
    case FKind::Ucast: {
      auto m = eval_term(n.t1, env, bind);
      if (!m) return Tri::Undef;
      return is_ucast(m->mac) ? Tri::True : Tri::False;
    }
    case FKind::Bcast: {
      auto m = eval_term(n.t1, env, bind);
      if (!m) return Tri::Undef;
      return is_bcast(m->mac) ? Tri::True : Tri::False;
    }
    case FKind::ArpReqRx: {
      auto fr = eval_term(n.t1, env, bind);
      auto p = eval_term(n.t2, env, bind);
      if (!fr || !p || !env.net) return Tri::Undef;
      return env.net->arp_reqrx(fr->frame, static_cast<int>(p->num))
                 ? Tri::True
                 : Tri::False;
    }
    case FKind::Prop: {
      auto it = env.props.find(n.name);
      if (it == env.props.end()) return Tri::Undef;
      return it->second ? Tri::True : Tri::False;
    }
    case FKind::Not:
      return tri_not(eval3_rec(n.kids[0], env, bind));
    case FKind::And: {
      Tri acc = Tri::True;
      for (const Formula& k : n.kids) acc = tri_and(acc, eval3_rec(k, env, bind));
      return acc;
    }
    case FKind::Or: {
      Tri acc = Tri::False;
      for (const Formula& k : n.kids) acc = tri_or(acc, eval3_rec(k, env, bind));
      return acc;
    }
    case FKind::Implies:
      return tri_or(tri_not(eval3_rec(n.kids[0], env, bind)),
                    eval3_rec(n.kids[1], env, bind));
    case FKind::Exists: {
      // The quantifier ranges over the learning table's entry indexes; the
      // bound comes from whichever table variable the body projects, which is
      // always the shared fixed-size table of the current environment.
      std::size_t bound = 0;
      if (env.cur.mlt) bound = env.cur.mlt->entries.size();
      if (env.snap && env.snap->mlt)
        bound = std::max(bound, env.snap->mlt->entries.size());
      if (bound == 0) return Tri::Undef;
      Tri acc = Tri::False;
      IdxBind inner = bind;
      for (std::size_t k = 0; k < bound; ++k) {
        inner[n.name] = static_cast<int>(k);
        acc = tri_or(acc, eval3_rec(n.kids[0], env, inner));
        if (acc == Tri::True) return acc;
      }
      return acc;
    }
    case FKind::Lambda:
      return eval3_rec(n.kids[0], env, bind);
  }
  return Tri::Undef;
}

}  // namespace

Tri eval3(const Formula& f, const Env& env) {
  return eval3_rec(f, env, IdxBind{});
}

std::optional<Frame> eval_frame_term(const TermPtr& t, const Env& env) {
  auto v = eval_term(t, env, IdxBind{});
  if (!v) return std::nullopt;
  if (v->sort != Sort::Frame) malformed("expected a frame term: " + render(t));
  return v->frame;
}

std::optional<int> eval_port_term(const TermPtr& t, const Env& env) {
  auto v = eval_term(t, env, IdxBind{});
  if (!v) return std::nullopt;
  if (v->sort != Sort::Port) malformed("expected a port term: " + render(t));
  return static_cast<int>(v->num);
}

bool eval(const Formula& f, const Env& env) {
  Tri r = eval3(f, env);
  if (r == Tri::Undef)
    throw FormulaError(FormulaError::Kind::unbound_variable,
                       "formula depends on a variable with no binding: " +
                           render(f));
  return r == Tri::True;
}

}  // namespace lsfc
