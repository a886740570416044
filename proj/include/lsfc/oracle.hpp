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
// Satisfiability checking for transition formulas over finitized domains.
// The internal backend is a complete decision procedure for the
// quantifier-expanded finite-domain fragment; the external backend drives an
// SMT-LIB v2 solver process.

#ifndef LSFC_ORACLE_HPP_
#define LSFC_ORACLE_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsfc/formula.hpp"
#include "lsfc/net.hpp"

namespace lsfc {

class OracleError : public std::runtime_error {
 public:
  enum class Kind {
    domain_too_large,          // internal search budget exceeded
    external_solver_failure,   // nonzero exit / malformed reply
    unsupported_construct,     // construct the SMT translation cannot express
    bad_config,
  };
  OracleError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

// Finitization of the trace-variable sorts. Timestamps range over
// [-(mto+1), time_bound]: -(mto+1) is the all-expired initial table stamp
// (expired at every time ≥ 0) and event times are positive.
struct DomainConfig {
  int num_ports = 4;
  int uplink_port = 1;
  std::vector<MacAddr> mac_universe;          // must include broadcast
  std::int64_t time_bound = 8;
  int mlt_size = 2;
  std::vector<std::string> proto_tags = {"arpreq", "arpreply", "data"};
  std::int64_t mto = 5;
  // Internal-backend node budget; exceeding it raises domain_too_large.
  std::uint64_t budget = 50'000'000;

  // Throws OracleError{bad_config} unless num_ports ≥ 2, mlt_size ≥ 1 and
  // mac_universe contains the broadcast address.
  void validate() const;

  // Desk-scale default: 4 ports (uplink 1), broadcast + 4 named MACs +
  // per-port hardware addresses, 3 protocol tags.
  static DomainConfig desk();

  // Network context (port hardware addresses, uplink, mto) induced by this
  // domain; arp-reqrx defaults to constant false.
  NetContext context() const;

  std::int64_t time_min() const { return -(mto + 1); }
};

class SatOracle {
 public:
  enum class Backend { internal, external_process };

  explicit SatOracle(DomainConfig cfg, Backend backend = Backend::internal,
                     std::string solver_command = "");

  // True iff some environment over the finite domains satisfies the formula
  // (three-valued truth: the formula must evaluate to true; atoms over
  // variables that a real environment leaves unbound cannot decide it).
  bool is_satisfiable(const Formula& f);

  const DomainConfig& config() const { return cfg_; }
  Backend backend() const { return backend_; }

  // Counters for budget/regression introspection.
  std::uint64_t nodes_explored() const { return nodes_; }
  std::uint64_t queries() const { return queries_; }

 private:
  DomainConfig cfg_;
  Backend backend_;
  std::string solver_command_;
  std::uint64_t nodes_ = 0;
  std::uint64_t queries_ = 0;
};

// Free-function form of the internal decision procedure.
bool is_satisfiable(const Formula& f, const DomainConfig& cfg);

// SMT-LIB v2 script for the formula over the finite domains: enumerated
// datatypes for MACs/ports/protocols/locations, Int for times, an
// uninterpreted function for arp-reqrx, `(check-sat)` terminated. Bounded
// quantifiers and structural (frame/table/update) equalities are lowered by
// the shared preprocessing first; a construct that survives it with no
// SMT form (an update term outside a table equality, a bare entry
// comparison) raises unsupported_construct. Partial bindings are encoded
// with definedness guards, so sat here means a real environment (not just
// any model of the declared symbols) satisfies the formula.
std::string to_smtlib(const Formula& f, const DomainConfig& cfg);

// Runs `solver_command script-file`, parses the first sat/unsat token.
bool run_external_solver(const std::string& solver_command,
                         const std::string& smtlib_script);

// Preprocessing shared by both backends and exposed for tests: expands
// bounded quantifiers to mlt_size, rewrites frame/table/update equalities to
// field equalities, and strips the lambda marker.
Formula oracle_preprocess(const Formula& f, const DomainConfig& cfg);

}  // namespace lsfc

#endif  // LSFC_ORACLE_HPP_
