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
//
// SMT-LIB v2 export and the external-solver process driver. The encoding
// finitizes every sort as an enumerated datatype (times as bounded Ints) and
// guards each literal with the definedness of the partial bindings it reads:
// the current port exists only at an ingress-shaped location, and snapshot
// frame/location cells only when the snapshot is a world rather than the
// initial one. A model of the script is therefore exactly a real
// environment that three-valued evaluation maps to true.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lsfc/enumerate.hpp"
#include "lsfc/oracle.hpp"

namespace lsfc {

namespace {

[[noreturn]] void unsupported(const std::string& msg) {
  throw OracleError(OracleError::Kind::unsupported_construct, msg);
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s)
    out += (std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_');
  return out;
}

void collect_literals(const TermPtr& t, std::set<MacAddr>& macs,
                      std::set<std::string>& protos) {
  if (!t) return;
  if (t->kind == TermKind::MacLit) macs.insert(t->mac_lit);
  if (t->kind == TermKind::ProtoLit) protos.insert(t->proto_lit);
  collect_literals(t->a, macs, protos);
  collect_literals(t->b, macs, protos);
  for (const TermPtr& k : t->fields) collect_literals(k, macs, protos);
}

void collect_atoms_rec(const Formula& f, std::set<std::string>& props,
                       std::set<MacAddr>& macs,
                       std::set<std::string>& protos) {
  const FormulaNode& n = f.node();
  if (n.kind == FKind::Prop) props.insert(n.name);
  collect_literals(n.t1, macs, protos);
  collect_literals(n.t2, macs, protos);
  for (const Formula& k : n.kids) collect_atoms_rec(k, props, macs, protos);
}

struct Encoder {
  const DomainConfig& cfg;
  NetContext net;
  std::map<std::string, std::string> mac_sym;    // mac_str -> symbol
  std::map<std::string, std::string> proto_sym;  // tag -> symbol
  std::ostringstream out;

  explicit Encoder(const DomainConfig& c) : cfg(c), net(c.context()) {}

  std::string port_sym(int p) const { return "p" + std::to_string(p); }

  std::string mac_ref(const MacAddr& m) const {
    auto it = mac_sym.find(mac_str(m));
    if (it == mac_sym.end())
      unsupported("hardware address outside the declared universe: " +
                  mac_str(m));
    return it->second;
  }

  std::string proto_ref(const std::string& tag) const {
    auto it = proto_sym.find(tag);
    if (it == proto_sym.end())
      unsupported("protocol tag outside the declared universe: " + tag);
    return it->second;
  }

  std::string loc_value(const IfaceSet& s) const {
    if (auto p = s.ingress_port()) return "(ing " + port_sym(*p) + ")";
    if (!s.subset_of_egress())
      unsupported("location literal is neither ingress nor egress: " +
                  iface_set_str(s));
    std::string v = "(egr";
    for (int p = 1; p <= cfg.num_ports; ++p)
      v += s.contains(Iface{p, true}) ? " true" : " false";
    return v + ")";
  }

  // --- term translation ------------------------------------------------

  std::string tr_time(const TermPtr& t) {
    switch (t->kind) {
      case TermKind::Var:
        if (t->var == VarId::Time) return t->snap ? "x_t" : "t";
        if (t->var == VarId::Mto) return std::to_string(net.mto);
        break;
      case TermKind::Field:
        if (t->field == FieldId::EntTs) return entry_cell(t->a, "ts");
        break;
      case TermKind::Diff:
        return "(- " + tr_time(t->a) + " " + tr_time(t->b) + ")";
      case TermKind::TimeLit:
        return std::to_string(t->time_lit);
      default:
        break;
    }
    unsupported("time term has no SMT form: " + render(t));
  }

  std::string tr_port(const TermPtr& t) {
    switch (t->kind) {
      case TermKind::Var:
        if (t->var == VarId::Port)
          return t->snap ? "(ingp x_loc)" : "(ingp loc)";
        if (t->var == VarId::Self) return "self";
        if (t->var == VarId::Uplink) return port_sym(net.uplink_port);
        break;
      case TermKind::Field:
        if (t->field == FieldId::EntPort) return entry_cell(t->a, "port");
        break;
      case TermKind::PortLit:
        return port_sym(t->port_lit);
      default:
        break;
    }
    unsupported("port term has no SMT form: " + render(t));
  }

  std::string tr_mac(const TermPtr& t) {
    switch (t->kind) {
      case TermKind::Field:
        if (t->a->kind == TermKind::Var && t->a->sort == Sort::Frame) {
          if (t->field == FieldId::Da) return t->a->snap ? "x_f_da" : "f_da";
          if (t->field == FieldId::Sa) return t->a->snap ? "x_f_sa" : "f_sa";
        }
        if (t->field == FieldId::EntMac) return entry_cell(t->a, "mac");
        break;
      case TermKind::HAddr:
        return "(haddr " + tr_port(t->a) + ")";
      case TermKind::MacLit:
        return mac_ref(t->mac_lit);
      default:
        break;
    }
    unsupported("hardware-address term has no SMT form: " + render(t));
  }

  std::string tr_proto(const TermPtr& t) {
    if (t->kind == TermKind::Field && t->field == FieldId::Proto &&
        t->a->kind == TermKind::Var)
      return t->a->snap ? "x_f_proto" : "f_proto";
    if (t->kind == TermKind::ProtoLit) return proto_ref(t->proto_lit);
    unsupported("protocol term has no SMT form: " + render(t));
  }

  std::string tr_loc(const TermPtr& t) {
    if (t->kind == TermKind::Var && t->var == VarId::Loc)
      return t->snap ? "x_loc" : "loc";
    if (t->kind == TermKind::IfaceSet) return loc_value(t->set_lit);
    if (t->kind == TermKind::EgressAll) {
      std::string v = "(egr";
      for (int p = 1; p <= cfg.num_ports; ++p) v += " true";
      return v + ")";
    }
    unsupported("location term has no SMT form: " + render(t));
  }

  std::string entry_cell(const TermPtr& entry, const std::string& field) {
    if (entry->kind != TermKind::Entry || entry->a->kind != TermKind::Var ||
        entry->a->var != VarId::Mlt)
      unsupported("entry term has no SMT form: " + render(entry));
    const TermPtr& idx = entry->b;
    if (idx->kind != TermKind::PortLit || idx->sort != Sort::Index)
      unsupported("unexpanded entry index: " + render(entry));
    return std::string(entry->a->snap ? "x_mlt_" : "mlt_") +
           std::to_string(idx->port_lit) + "_" + field;
  }

  std::string tr_sorted(const TermPtr& t) {
    switch (t->sort) {
      case Sort::Time: return tr_time(t);
      case Sort::Port: return tr_port(t);
      case Sort::Mac: return tr_mac(t);
      case Sort::Proto: return tr_proto(t);
      case Sort::Loc: return tr_loc(t);
      default:
        unsupported("term sort has no SMT form: " + render(t));
    }
  }

  // --- definedness guards ----------------------------------------------

  void defness_term(const TermPtr& t, std::set<std::string>& defs) {
    if (!t) return;
    if (t->kind == TermKind::Var) {
      if (t->var == VarId::Port) {
        if (t->snap) {
          defs.insert("(not x_init)");
          defs.insert("((_ is ing) x_loc)");
        } else {
          defs.insert("((_ is ing) loc)");
        }
      }
      if (t->snap && (t->var == VarId::Frame || t->var == VarId::Loc))
        defs.insert("(not x_init)");
      return;
    }
    defness_term(t->a, defs);
    defness_term(t->b, defs);
    for (const TermPtr& k : t->fields) defness_term(k, defs);
  }

  std::string guard(const FormulaNode& n, const std::string& val) {
    std::set<std::string> defs;
    defness_term(n.t1, defs);
    defness_term(n.t2, defs);
    if (defs.empty()) return val;
    std::string g = "(and";
    for (const std::string& d : defs) g += " " + d;
    return g + " " + val + ")";
  }

  // --- atoms and negation-normal-form translation -----------------------

  std::string atom_value(const Formula& f) {
    const FormulaNode& n = f.node();
    switch (n.kind) {
      case FKind::Eq:
        return "(= " + tr_sorted(n.t1) + " " + tr_sorted(n.t2) + ")";
      case FKind::Le:
        return "(<= " + tr_time(n.t1) + " " + tr_time(n.t2) + ")";
      case FKind::Member: {
        if (n.t1->kind != TermKind::Iface)
          unsupported("membership of a non-interface term: " + render(f));
        std::string L = tr_loc(n.t2);
        std::string q = tr_port(n.t1->a);
        if (!n.t1->iface_egress)
          return "(and ((_ is ing) " + L + ") (= (ingp " + L + ") " + q +
                 "))";
        std::string v = "(and ((_ is egr) " + L + ") (or";
        for (int p = 1; p <= cfg.num_ports; ++p)
          v += " (and (= " + q + " " + port_sym(p) + ") (e" +
               std::to_string(p) + " " + L + "))";
        return v + "))";
      }
      case FKind::SubsetEg:
        return "((_ is egr) " + tr_loc(n.t1) + ")";
      case FKind::IsIngress:
        return "((_ is ing) loc)";
      case FKind::Ucast:
        return "(ucast " + tr_mac(n.t1) + ")";
      case FKind::Bcast:
        return "(bcast " + tr_mac(n.t1) + ")";
      case FKind::ArpReqRx: {
        const TermPtr& fr = n.t1;
        if (fr->kind != TermKind::Var || fr->sort != Sort::Frame)
          unsupported("arp-reqrx over a non-frame term: " + render(f));
        const std::string pre = fr->snap ? "x_f_" : "f_";
        return "(arp " + pre + "da " + pre + "sa " + pre + "proto " +
               tr_port(n.t2) + ")";
      }
      case FKind::Prop:
        return "prop_" + sanitize(n.name);
      default:
        unsupported("not an atom: " + render(f));
    }
  }

  std::string tr(const Formula& f, bool pos) {
    const FormulaNode& n = f.node();
    switch (n.kind) {
      case FKind::True:
        return pos ? "true" : "false";
      case FKind::False:
        return pos ? "false" : "true";
      case FKind::Not:
        return tr(n.kids[0], !pos);
      case FKind::And:
      case FKind::Or: {
        const bool conj = (n.kind == FKind::And) == pos;
        std::string s = conj ? "(and" : "(or";
        for (const Formula& k : n.kids) s += " " + tr(k, pos);
        return s + ")";
      }
      case FKind::Implies: {
        if (pos)
          return "(or " + tr(n.kids[0], false) + " " + tr(n.kids[1], true) +
                 ")";
        return "(and " + tr(n.kids[0], true) + " " + tr(n.kids[1], false) +
               ")";
      }
      case FKind::Exists:
        unsupported("quantifier survived preprocessing: " + render(f));
      case FKind::Lambda:
        unsupported("lambda survived preprocessing: " + render(f));
      default: {
        std::string v = atom_value(f);
        return guard(n, pos ? v : "(not " + v + ")");
      }
    }
  }

  // --- declarations ------------------------------------------------------

  void declare(const Formula& g) {
    const VarProfile p = var_profile(g);
    std::set<std::string> props;
    std::set<MacAddr> extra_macs;
    std::set<std::string> extra_protos;
    collect_atoms_rec(g, props, extra_macs, extra_protos);

    // Hardware-address symbols: the universe, the haddr range, plus any
    // literal mentioned by the formula. Variable cells are restricted to the
    // universe below; out-of-universe literals stay comparable-but-unequal.
    std::vector<MacAddr> macs = cfg.mac_universe;
    for (int q = 1; q <= cfg.num_ports; ++q) {
      if (std::find(macs.begin(), macs.end(), net.haddr(q)) == macs.end())
        macs.push_back(net.haddr(q));
    }
    for (const MacAddr& m : extra_macs)
      if (std::find(macs.begin(), macs.end(), m) == macs.end())
        macs.push_back(m);
    for (std::size_t i = 0; i < macs.size(); ++i)
      mac_sym[mac_str(macs[i])] = "m" + std::to_string(i);

    std::vector<std::string> protos = cfg.proto_tags;
    for (const std::string& tag : extra_protos)
      if (std::find(protos.begin(), protos.end(), tag) == protos.end())
        protos.push_back(tag);
    for (const std::string& tag : protos)
      proto_sym[tag] = "pr_" + sanitize(tag);

    out << "(set-logic ALL)\n";
    out << "(declare-datatypes ((Port 0)) ((";
    for (int q = 1; q <= cfg.num_ports; ++q) out << "(" << port_sym(q) << ")";
    out << ")))\n";
    out << "(declare-datatypes ((Mac 0)) ((";
    for (const MacAddr& m : macs) out << "(" << mac_sym[mac_str(m)] << ")";
    out << ")))\n";
    out << "(declare-datatypes ((Proto 0)) ((";
    for (const std::string& tag : protos) out << "(" << proto_sym[tag] << ")";
    out << ")))\n";
    out << "(declare-datatypes ((Loc 0)) (((ing (ingp Port)) (egr";
    for (int q = 1; q <= cfg.num_ports; ++q)
      out << " (e" << q << " Bool)";
    out << "))))\n";

    out << "(define-fun bcast ((m Mac)) Bool (= m "
        << mac_ref(broadcast_addr()) << "))\n";
    out << "(define-fun ucast ((m Mac)) Bool (or false";
    for (const MacAddr& m : macs)
      if (is_ucast(m)) out << " (= m " << mac_ref(m) << ")";
    out << "))\n";
    out << "(define-fun haddr ((q Port)) Mac ";
    std::string h = mac_ref(net.haddr(cfg.num_ports));
    for (int q = cfg.num_ports - 1; q >= 1; --q)
      h = "(ite (= q " + port_sym(q) + ") " + mac_ref(net.haddr(q)) + " " +
          h + ")";
    out << h << "))\n";
    out << "(declare-fun arp (Mac Mac Proto Port) Bool)\n";

    auto mac_cell = [&](const std::string& name) {
      out << "(declare-const " << name << " Mac)\n(assert (or";
      for (const MacAddr& m : cfg.mac_universe)
        out << " (= " << name << " " << mac_ref(m) << ")";
      out << "))\n";
    };
    auto time_cell = [&](const std::string& name, std::int64_t lo,
                         std::int64_t hi) {
      out << "(declare-const " << name << " Int)\n(assert (and (<= " << lo
          << " " << name << ") (<= " << name << " " << hi << ")))\n";
    };

    const bool snapshot_shape = p.x_f_da || p.x_f_sa || p.x_f_proto ||
                                p.x_loc || p.x_port;
    if (p.loc || p.port) out << "(declare-const loc Loc)\n";
    if (snapshot_shape) {
      out << "(declare-const x_init Bool)\n";
      out << "(declare-const x_loc Loc)\n";
    }
    if (p.self) out << "(declare-const self Port)\n";
    if (p.t) time_cell("t", 0, cfg.time_bound);
    if (p.x_t) time_cell("x_t", 0, cfg.time_bound);
    if (p.f_da || p.f_sa || p.f_proto || has_arp_frame(g, false)) {
      mac_cell("f_da");
      mac_cell("f_sa");
      out << "(declare-const f_proto Proto)\n";
    }
    if (p.x_f_da || p.x_f_sa || p.x_f_proto || has_arp_frame(g, true)) {
      mac_cell("x_f_da");
      mac_cell("x_f_sa");
      out << "(declare-const x_f_proto Proto)\n";
    }
    auto table_cells = [&](const std::string& pre) {
      for (int d = 0; d < cfg.mlt_size; ++d) {
        mac_cell(pre + std::to_string(d) + "_mac");
        time_cell(pre + std::to_string(d) + "_ts", cfg.time_min(),
                  cfg.time_bound);
        out << "(declare-const " << pre << d << "_port Port)\n";
      }
    };
    if (p.mlt) table_cells("mlt_");
    if (p.x_mlt) table_cells("x_mlt_");
    for (const std::string& name : props)
      out << "(declare-const prop_" << sanitize(name) << " Bool)\n";
  }

  static bool has_arp_frame(const Formula& f, bool snap) {
    const FormulaNode& n = f.node();
    if (n.kind == FKind::ArpReqRx && n.t1->kind == TermKind::Var &&
        n.t1->snap == snap)
      return true;
    for (const Formula& k : n.kids)
      if (has_arp_frame(k, snap)) return true;
    return false;
  }
};

}  // namespace

std::string to_smtlib(const Formula& f, const DomainConfig& cfg) {
  Formula g = oracle_preprocess(f, cfg);
  Encoder enc(cfg);
  enc.declare(g);
  enc.out << "(assert " << enc.tr(g, true) << ")\n(check-sat)\n";
  return enc.out.str();
}

bool run_external_solver(const std::string& solver_command,
                         const std::string& smtlib_script) {
  if (solver_command.empty())
    throw OracleError(OracleError::Kind::external_solver_failure,
                      "no solver command configured");
  char path[] = "/tmp/lsfc-smt-XXXXXX";
  const int fd = mkstemp(path);
  if (fd < 0)
    throw OracleError(OracleError::Kind::external_solver_failure,
                      "cannot create temporary script file");
  const std::string& s = smtlib_script;
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = write(fd, s.data() + off, s.size() - off);
    if (n <= 0) {
      close(fd);
      unlink(path);
      throw OracleError(OracleError::Kind::external_solver_failure,
                        "cannot write temporary script file");
    }
    off += static_cast<std::size_t>(n);
  }
  close(fd);

  const std::string command =
      solver_command + " \"" + path + "\" 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) {
    unlink(path);
    throw OracleError(OracleError::Kind::external_solver_failure,
                      "cannot start solver: " + solver_command);
  }
  std::string output;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int status = pclose(pipe);
  unlink(path);

  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw OracleError(OracleError::Kind::external_solver_failure,
                      "solver exited abnormally: " + output);
  std::istringstream iss(output);
  std::string tok;
  while (iss >> tok) {
    if (tok == "sat") return true;
    if (tok == "unsat") return false;
  }
  throw OracleError(OracleError::Kind::external_solver_failure,
                    "no sat/unsat token in solver reply: " + output);
}

}  // namespace lsfc
