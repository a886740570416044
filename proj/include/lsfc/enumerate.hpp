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
// Exhaustive environment enumeration over a finite domain. This is the
// slow, obviously-correct satisfiability route: it builds complete Env
// values (projected onto the variables the formula mentions) and runs the
// production evaluator on each. The DPLL-style backend in oracle.cpp must
// agree with it on every formula; tests enforce that.

#ifndef LSFC_ENUMERATE_HPP_
#define LSFC_ENUMERATE_HPP_

#include <cstdint>
#include <functional>
#include <optional>

#include "lsfc/formula.hpp"
#include "lsfc/oracle.hpp"

namespace lsfc {

// Which semantic variables a formula mentions, at field granularity.
// Drives projection: fields that do not occur are pinned to a fixed value
// so the enumeration space stays at desk scale.
struct VarProfile {
  bool t = false;
  bool f_da = false, f_sa = false, f_proto = false;
  bool loc = false;
  bool port = false;
  bool self = false;
  bool mlt = false;  // any current-table projection (entries or table eq)
  bool x_t = false;
  bool x_f_da = false, x_f_sa = false, x_f_proto = false;
  bool x_loc = false;
  bool x_port = false;
  bool x_mlt = false;
  bool any_snapshot() const {
    return x_t || x_f_da || x_f_sa || x_f_proto || x_loc || x_port || x_mlt;
  }
};

VarProfile var_profile(const Formula& f);

// Invokes fn on every candidate environment of the projected space; stops
// early (and returns true) when fn returns true. Environments are real:
// port is bound iff loc is an ingress singleton, snapshot fields follow the
// same rule, and every arp-reqrx argument tuple ranges over both truth
// values. Quantifiers are NOT pre-expanded — the production evaluator
// handles them over the mlt_size-entry tables built here.
bool for_each_env(const Formula& f, const DomainConfig& cfg,
                  const std::function<bool(const Env&)>& fn);

// True iff some enumerated environment makes the formula evaluate true.
bool enumerate_is_satisfiable(const Formula& f, const DomainConfig& cfg);

// Number of enumerated environments (for budget sanity in tests).
std::uint64_t enumeration_size(const Formula& f, const DomainConfig& cfg);

}  // namespace lsfc

#endif  // LSFC_ENUMERATE_HPP_
