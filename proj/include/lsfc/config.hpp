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

// Project configuration for the pipeline driver: one JSON file naming the
// finite domain, the component machines, the distribution profile, the
// discharge table and the output locations. Stages communicate only
// through files, so the configuration is the single source of paths.

#ifndef LSFC_CONFIG_HPP_
#define LSFC_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsfc/oracle.hpp"
#include "lsfc/synth.hpp"

namespace lsfc {

class ConfigError : public std::runtime_error {
 public:
  enum class Kind {
    bad_config,  // malformed JSON / unknown field value
    io_error,    // referenced file missing or unwritable
  };
  ConfigError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

struct SolverConfig {
  std::string backend = "internal";  // "internal" | "external"
  std::string command;               // external solver invocation
};

struct ProjectConfig {
  DomainConfig domain = DomainConfig::desk();
  std::vector<std::string> components;  // machine files, product order
  std::string product_file;             // product machine artifact
  std::string profile;                  // distribution profile file
  std::string classification;           // atom classification JSON ("" = built-in rules)
  std::string discharge_table;          // pattern -> target text table
  std::string objective = "expected-time";  // or "min-size"
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  SolverConfig solver;
  std::string workload;  // ingress workload file
  std::string trace;     // trace file (monitor/estimation input)
};

// JSON shape (all fields optional, unknown fields rejected):
//   {
//     "domain": {"num_ports": 4, "uplink_port": 1, "mto": 5, "mlt_size": 4,
//                "time_bound": 8, "budget": 50000000,
//                "macs": ["04:0c:ce:d2:08:6c", ...], "protos": ["data", ...]},
//     "components": ["H.sfa", "B.sfa", "I.sfa", "M.sfa"],
//     "product": "out/product.sfa",
//     "profile": "switch.profile",
//     "classification": "classify.json",
//     "discharge_table": "dpdk.dt",
//     "objective": "expected-time",
//     "out_dir": "out",
//     "seed": 1,
//     "solver": {"backend": "internal", "command": ""},
//     "workload": "table1.workload",
//     "trace": "out/sim.trace"
//   }
// "macs" lists the named (host) addresses; the broadcast address and the
// per-port hardware addresses are always added to the universe.
ProjectConfig parse_project_config(const std::string& json_text);
ProjectConfig load_project_config(const std::string& path);

// "expected-time" / "min-size"; anything else raises bad_config.
Objective parse_objective(const std::string& name);

// Oracle per the solver section. The LSFC_SMT_SOLVER environment variable
// overrides the external command (the backend choice stays with the
// configuration). backend "external" with no command raises bad_config.
SatOracle make_oracle(const ProjectConfig& cfg);

// Whole-file text I/O; errors carry the path.
std::string read_text_file(const std::string& path);
// Creates parent directories as needed.
void write_text_file(const std::string& path, const std::string& content);

// Provenance line all driver outputs start with: toolchain version, seed
// and the producing command, prefixed by the format's comment leader
// (";" machine files, "#" traces/workloads/profiles/reports).
std::string provenance_line(const std::string& comment_lead,
                            std::uint64_t seed, const std::string& command);

}  // namespace lsfc

#endif  // LSFC_CONFIG_HPP_
