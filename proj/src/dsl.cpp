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

#include "lsfc/dsl.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

namespace lsfc {

namespace {

[[noreturn]] void fail(const SExpr& at, const std::string& msg) {
  std::ostringstream os;
  os << "line " << at.line << ", col " << at.col << ": " << msg;
  throw FormulaError(FormulaError::Kind::parse_error, os.str());
}

// ---------------------------------------------------------------------------
// S-expression reader.

struct Reader {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit Reader(const std::string& t) : text(t) {}

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_blank() {
    while (!done()) {
      char c = peek();
      if (c == ';') {
        while (!done() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  SExpr read() {
    skip_blank();
    if (done()) {
      SExpr eof;
      eof.line = line;
      eof.col = col;
      fail(eof, "unexpected end of input");
    }
    SExpr e;
    e.line = line;
    e.col = col;
    if (peek() == '(') {
      advance();
      e.is_atom = false;
      for (;;) {
        skip_blank();
        if (done()) fail(e, "unterminated list");
        if (peek() == ')') {
          advance();
          return e;
        }
        e.items.push_back(read());
      }
    }
    if (peek() == ')') fail(e, "unmatched ')'");
    e.is_atom = true;
    while (!done()) {
      char c = peek();
      if (c == '(' || c == ')' || c == ';' ||
          std::isspace(static_cast<unsigned char>(c)))
        break;
      e.atom.push_back(c);
      advance();
    }
    return e;
  }
};

bool is_integer(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

bool is_mac_literal(const std::string& s) {
  if (s.size() != 17) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i % 3 == 2) {
      if (s[i] != ':') return false;
    } else if (!std::isxdigit(static_cast<unsigned char>(s[i]))) {
      return false;
    }
  }
  return true;
}

// Thrown when an atom's sort is ambiguous without context; the caller
// re-parses with a hint taken from the sibling operand.
struct NeedsSort {};

TermPtr parse_term(const SExpr& e, std::optional<Sort> hint);

const SExpr& arg(const SExpr& e, std::size_t i, const char* what) {
  if (e.items.size() <= i) fail(e, std::string("missing ") + what);
  return e.items[i];
}

void expect_arity(const SExpr& e, std::size_t n, const char* form) {
  if (e.items.size() != n)
    fail(e, std::string(form) + " takes " + std::to_string(n - 1) +
                " argument(s), got " + std::to_string(e.items.size() - 1));
}

TermPtr parse_atom_term(const SExpr& e, std::optional<Sort> hint) {
  const std::string& s = e.atom;
  if (s == "t") return trm::time_var();
  if (s == "f") return trm::frame();
  if (s == "loc") return trm::loc();
  if (s == "port") return trm::port();
  if (s == "self") return trm::self();
  if (s == "uplink-port") return trm::uplink();
  if (s == "mto") return trm::mto();
  if (s == "mlt") return trm::mlt();
  if (s == "egress") return trm::egress_all();
  if (is_mac_literal(s)) return trm::mac_lit(parse_mac(s));
  if (is_integer(s)) {
    if (!hint) throw NeedsSort{};
    long long v = std::stoll(s);
    switch (*hint) {
      case Sort::Port: return trm::port_lit(static_cast<int>(v));
      case Sort::Time: return trm::time_lit(v);
      case Sort::Index: return trm::idx_lit(static_cast<int>(v));
      default: fail(e, "integer literal not meaningful at this sort");
    }
  }
  // Remaining identifiers: a bound table index or a protocol tag, decided by
  // the sort expected here.
  if (!hint) throw NeedsSort{};
  if (*hint == Sort::Index) return trm::idx_var(s);
  if (*hint == Sort::Proto) return trm::proto_lit(s);
  fail(e, "unknown identifier '" + s + "'");
}

TermPtr parse_list_term(const SExpr& e, std::optional<Sort> hint) {
  if (e.items.empty()) fail(e, "empty list is not a term");
  const SExpr& head = e.items[0];
  if (!head.is_atom) fail(e, "term operator must be an identifier");
  const std::string& op = head.atom;

  if (op == "x") {
    expect_arity(e, 2, "(x ...)");
    const SExpr& base = arg(e, 1, "snapshot variable");
    if (!base.is_atom) fail(base, "snapshot of a non-variable");
    if (base.atom == "f") return trm::frame(true);
    if (base.atom == "loc") return trm::loc(true);
    if (base.atom == "port") return trm::port(true);
    if (base.atom == "mlt") return trm::mlt(true);
    if (base.atom == "t") return trm::time_var(true);
    fail(base, "'" + base.atom + "' has no snapshot form");
  }
  if (op == "fld") {
    expect_arity(e, 3, "(fld ...)");
    TermPtr base = parse_term(arg(e, 1, "base term"), std::nullopt);
    const SExpr& fe = arg(e, 2, "field name");
    if (!fe.is_atom) fail(fe, "field name must be an identifier");
    const std::string& fn = fe.atom;
    if (base->sort == Sort::Frame) {
      if (fn == "da") return trm::da(base);
      if (fn == "sa") return trm::sa(base);
      if (fn == "proto") return trm::proto(base);
      fail(fe, "frames have fields da, sa, proto");
    }
    if (base->sort == Sort::Entry) {
      if (fn == "mac") return trm::ent_mac(base);
      if (fn == "t") return trm::ent_ts(base);
      if (fn == "port") return trm::ent_port(base);
      fail(fe, "table entries have fields mac, t, port");
    }
    fail(e, "field projection applies to frames and table entries");
  }
  if (op == "ent") {
    expect_arity(e, 3, "(ent ...)");
    TermPtr table = parse_term(arg(e, 1, "table term"), Sort::Table);
    TermPtr idx = parse_term(arg(e, 2, "index term"), Sort::Index);
    return trm::entry(table, idx);
  }
  if (op == "haddr") {
    expect_arity(e, 2, "(haddr ...)");
    return trm::haddr(parse_term(arg(e, 1, "port term"), Sort::Port));
  }
  if (op == "-") {
    expect_arity(e, 3, "(- ...)");
    TermPtr a = parse_term(arg(e, 1, "minuend"), Sort::Time);
    TermPtr b = parse_term(arg(e, 2, "subtrahend"), Sort::Time);
    return trm::diff(a, b);
  }
  if (op == "ing" || op == "egr") {
    expect_arity(e, 2, op == "ing" ? "(ing ...)" : "(egr ...)");
    TermPtr p = parse_term(arg(e, 1, "port term"), Sort::Port);
    return trm::iface(p, op == "egr");
  }
  if (op == "set") {
    IfaceSet s;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      const SExpr& item = e.items[i];
      if (item.is_atom || item.items.size() != 2 || !item.items[0].is_atom ||
          !item.items[1].is_atom || !is_integer(item.items[1].atom))
        fail(item, "set members must be (ing N) or (egr N) with a literal port");
      const std::string& kind = item.items[0].atom;
      if (kind != "ing" && kind != "egr")
        fail(item, "set members must be (ing N) or (egr N)");
      s.insert(Iface{std::stoi(item.items[1].atom), kind == "egr"});
    }
    return trm::iface_set(std::move(s));
  }
  if (op == "upd") {
    expect_arity(e, 6, "(upd ...)");
    TermPtr table = parse_term(arg(e, 1, "table term"), Sort::Table);
    TermPtr idx = parse_term(arg(e, 2, "index term"), Sort::Index);
    TermPtr mac = parse_term(arg(e, 3, "address term"), Sort::Mac);
    TermPtr ts = parse_term(arg(e, 4, "stamp term"), Sort::Time);
    TermPtr prt = parse_term(arg(e, 5, "port term"), Sort::Port);
    return trm::update(table, idx, mac, ts, prt);
  }
  (void)hint;
  fail(e, "unknown term operator '" + op + "'");
}

TermPtr parse_term(const SExpr& e, std::optional<Sort> hint) {
  return e.is_atom ? parse_atom_term(e, hint) : parse_list_term(e, hint);
}

// Parses a binary operator's operands, inferring ambiguous sorts from the
// sibling. Converts an unresolvable ambiguity into a positioned error.
std::pair<TermPtr, TermPtr> parse_pair(const SExpr& e) {
  const SExpr& lhs = arg(e, 1, "left operand");
  const SExpr& rhs = arg(e, 2, "right operand");
  try {
    TermPtr a = parse_term(lhs, std::nullopt);
    TermPtr b = parse_term(rhs, a->sort);
    return {a, b};
  } catch (const NeedsSort&) {
    try {
      TermPtr b = parse_term(rhs, std::nullopt);
      TermPtr a = parse_term(lhs, b->sort);
      return {a, b};
    } catch (const NeedsSort&) {
      fail(e, "cannot infer the sort of either operand");
    }
  }
}

// Recognizes the ingress-location idiom: equality between `loc` and the
// singleton set holding the current ingress interface. It cannot be built
// as a plain term equality (the set references the `port` variable), so it
// gets a dedicated formula kind.
bool is_ingress_idiom(const SExpr& lhs, const SExpr& rhs) {
  const SExpr* v = nullptr;
  const SExpr* s = nullptr;
  if (lhs.is_atom && lhs.atom == "loc") {
    v = &lhs;
    s = &rhs;
  } else if (rhs.is_atom && rhs.atom == "loc") {
    v = &rhs;
    s = &lhs;
  } else {
    return false;
  }
  (void)v;
  if (s->is_atom || s->items.size() != 2) return false;
  if (!s->items[0].is_atom || s->items[0].atom != "set") return false;
  const SExpr& m = s->items[1];
  return !m.is_atom && m.items.size() == 2 && m.items[0].is_atom &&
         m.items[0].atom == "ing" && m.items[1].is_atom &&
         m.items[1].atom == "port";
}

Formula parse_formula_rec(const SExpr& e) {
  if (e.is_atom) {
    if (e.atom == "true") return fml::truth();
    if (e.atom == "false") return fml::falsity();
    fail(e, "expected a formula, got '" + e.atom + "'");
  }
  if (e.items.empty()) fail(e, "empty list is not a formula");
  const SExpr& head = e.items[0];
  if (!head.is_atom) fail(e, "formula operator must be an identifier");
  const std::string& op = head.atom;

  if (op == "=" || op == "!=") {
    expect_arity(e, 3, op == "=" ? "(= ...)" : "(!= ...)");
    if (is_ingress_idiom(e.items[1], e.items[2])) {
      Formula ing = fml::is_ingress();
      return op == "=" ? ing : fml::not_(ing);
    }
    auto [a, b] = parse_pair(e);
    return op == "=" ? fml::eq(a, b) : fml::neq(a, b);
  }
  if (op == "<=" || op == ">") {
    expect_arity(e, 3, op == "<=" ? "(<= ...)" : "(> ...)");
    TermPtr a = parse_term(arg(e, 1, "left operand"), Sort::Time);
    TermPtr b = parse_term(arg(e, 2, "right operand"), Sort::Time);
    return op == "<=" ? fml::le(a, b) : fml::gt(a, b);
  }
  if (op == "in") {
    expect_arity(e, 3, "(in ...)");
    TermPtr ifc = parse_term(arg(e, 1, "interface term"), Sort::Iface);
    TermPtr l = parse_term(arg(e, 2, "location term"), Sort::Loc);
    return fml::member(ifc, l);
  }
  if (op == "subset") {
    expect_arity(e, 3, "(subset ...)");
    const SExpr& rhs = arg(e, 2, "superset");
    if (!rhs.is_atom || rhs.atom != "egress")
      fail(rhs, "only (subset LOC egress) is supported");
    return fml::subset_egress(parse_term(arg(e, 1, "location term"), Sort::Loc));
  }
  if (op == "ucast" || op == "bcast") {
    expect_arity(e, 2, op == "ucast" ? "(ucast ...)" : "(bcast ...)");
    TermPtr m = parse_term(arg(e, 1, "address term"), Sort::Mac);
    return op == "ucast" ? fml::ucast(m) : fml::bcast(m);
  }
  if (op == "arp-reqrx") {
    expect_arity(e, 3, "(arp-reqrx ...)");
    TermPtr f = parse_term(arg(e, 1, "frame term"), Sort::Frame);
    TermPtr p = parse_term(arg(e, 2, "port term"), Sort::Port);
    return fml::arp_reqrx(f, p);
  }
  if (op == "prop") {
    expect_arity(e, 2, "(prop ...)");
    const SExpr& name = arg(e, 1, "proposition name");
    if (!name.is_atom) fail(name, "proposition name must be an identifier");
    return fml::prop(name.atom);
  }
  if (op == "not") {
    expect_arity(e, 2, "(not ...)");
    return fml::not_(parse_formula_rec(arg(e, 1, "operand")));
  }
  if (op == "and" || op == "or") {
    FormulaVec kids;
    for (std::size_t i = 1; i < e.items.size(); ++i)
      kids.push_back(parse_formula_rec(e.items[i]));
    return op == "and" ? fml::and_(std::move(kids)) : fml::or_(std::move(kids));
  }
  if (op == "=>") {
    expect_arity(e, 3, "(=> ...)");
    Formula a = parse_formula_rec(arg(e, 1, "antecedent"));
    Formula b = parse_formula_rec(arg(e, 2, "consequent"));
    return fml::implies(std::move(a), std::move(b));
  }
  if (op == "exists" || op == "forall") {
    expect_arity(e, 3, op == "exists" ? "(exists ...)" : "(forall ...)");
    const SExpr& idx = arg(e, 1, "index variable");
    if (!idx.is_atom) fail(idx, "index variable must be an identifier");
    Formula body = parse_formula_rec(arg(e, 2, "body"));
    return op == "exists" ? fml::exists(idx.atom, std::move(body))
                          : fml::forall(idx.atom, std::move(body));
  }
  if (op == "lambda") {
    expect_arity(e, 2, "(lambda ...)");
    return fml::lambda(parse_formula_rec(arg(e, 1, "body")));
  }
  fail(e, "unknown formula operator '" + op + "'");
}

const SExpr* find_section(const SExpr& m, const std::string& name) {
  for (std::size_t i = 1; i < m.items.size(); ++i) {
    const SExpr& s = m.items[i];
    if (!s.is_atom && !s.items.empty() && s.items[0].is_atom &&
        s.items[0].atom == name)
      return &s;
  }
  return nullptr;
}

}  // namespace

std::vector<SExpr> parse_sexprs(const std::string& text) {
  Reader r(text);
  std::vector<SExpr> out;
  for (;;) {
    r.skip_blank();
    if (r.done()) return out;
    out.push_back(r.read());
  }
}

Formula parse_formula(const SExpr& e) {
  try {
    return parse_formula_rec(e);
  } catch (const NeedsSort&) {
    fail(e, "cannot infer the sort of an operand");
  }
}

Formula parse_formula(const std::string& text) {
  std::vector<SExpr> forms = parse_sexprs(text);
  if (forms.size() != 1) {
    SExpr at;
    at.line = forms.size() > 1 ? forms[1].line : 1;
    at.col = forms.size() > 1 ? forms[1].col : 1;
    fail(at, "expected exactly one formula, got " + std::to_string(forms.size()));
  }
  return parse_formula(forms[0]);
}

LambdaSFA parse_machine(const SExpr& e) {
  if (e.is_atom || e.items.empty() || !e.items[0].is_atom ||
      e.items[0].atom != "machine")
    fail(e, "expected (machine NAME ...)");
  LambdaSFA m;
  const SExpr& name = arg(e, 1, "machine name");
  if (!name.is_atom) fail(name, "machine name must be an identifier");
  m.name = name.atom;

  if (const SExpr* params = find_section(e, "params")) {
    for (std::size_t i = 1; i < params->items.size(); ++i) {
      const SExpr& p = params->items[i];
      if (!p.is_atom) fail(p, "parameter must be an identifier");
      m.params.push_back(p.atom);
    }
  }
  const SExpr* states = find_section(e, "states");
  if (!states || states->items.size() < 2)
    fail(e, "machine needs a nonempty (states ...) section");
  for (std::size_t i = 1; i < states->items.size(); ++i) {
    const SExpr& s = states->items[i];
    if (!s.is_atom) fail(s, "state name must be an identifier");
    m.states.push_back(s.atom);
  }
  const SExpr* start = find_section(e, "start");
  if (!start || start->items.size() != 2 || !start->items[1].is_atom)
    fail(e, "machine needs a (start STATE) section");
  m.start = start->items[1].atom;

  for (std::size_t i = 2; i < e.items.size(); ++i) {
    const SExpr& s = e.items[i];
    if (s.is_atom || s.items.empty() || !s.items[0].is_atom) continue;
    const std::string& kind = s.items[0].atom;
    if (kind == "params" || kind == "states" || kind == "start") continue;
    if (kind != "trans") fail(s, "unknown machine section '" + kind + "'");
    expect_arity(s, 4, "(trans ...)");
    const SExpr& from = s.items[1];
    const SExpr& to = s.items[2];
    if (!from.is_atom || !to.is_atom)
      fail(s, "transition endpoints must be state names");
    Formula label = parse_formula(s.items[3]);
    Transition t;
    t.from = from.atom;
    t.to = to.atom;
    t.binds_snapshot = has_lambda(label);
    t.label = strip_lambda(label);
    m.transitions.push_back(std::move(t));
  }
  if (m.transitions.empty()) fail(e, "machine needs at least one transition");
  return m;
}

LambdaSFA parse_machine(const std::string& text) {
  std::vector<SExpr> forms = parse_sexprs(text);
  if (forms.size() != 1) {
    SExpr at;
    at.line = 1;
    at.col = 1;
    fail(at, "expected exactly one machine definition");
  }
  return parse_machine(forms[0]);
}

LambdaSFA load_machine_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormulaError(FormulaError::Kind::parse_error,
                       "cannot open machine file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_machine(buf.str());
}

std::string serialize_machine(const LambdaSFA& m) {
  std::ostringstream os;
  os << "(machine " << m.name << "\n";
  os << "  (params";
  for (const std::string& p : m.params) os << " " << p;
  os << ")\n";
  os << "  (states";
  for (const std::string& s : m.states) os << " " << s;
  os << ")\n";
  os << "  (start " << m.start << ")";
  for (const Transition& t : m.transitions) {
    Formula label = t.binds_snapshot ? fml::lambda(t.label) : t.label;
    os << "\n  (trans " << t.from << " " << t.to << "\n    " << render(label)
       << ")";
  }
  os << ")\n";
  return os.str();
}

}  // namespace lsfc
