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

#include "lsfc/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "lsfc/emit.hpp"

namespace lsfc {

namespace {

using CK = ConfigError::Kind;
using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) {
  throw ConfigError(CK::bad_config, msg);
}

void check_fields(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      bad("unknown field '" + key + "' in " + where);
  }
}

std::string get_string(const json& j, const std::string& key,
                       std::string fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) bad("field '" + key + "' must be a string");
  return j[key].get<std::string>();
}

std::int64_t get_int(const json& j, const std::string& key,
                     std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) bad("field '" + key + "' must be an integer");
  return j[key].get<std::int64_t>();
}

DomainConfig parse_domain(const json& j) {
  DomainConfig d = DomainConfig::desk();
  check_fields(j, "domain",
               {"num_ports", "uplink_port", "mto", "mlt_size", "time_bound",
                "budget", "macs", "protos"});
  d.num_ports = static_cast<int>(get_int(j, "num_ports", d.num_ports));
  d.uplink_port = static_cast<int>(get_int(j, "uplink_port", d.uplink_port));
  d.mto = get_int(j, "mto", d.mto);
  d.mlt_size = static_cast<int>(get_int(j, "mlt_size", d.mlt_size));
  d.time_bound = get_int(j, "time_bound", d.time_bound);
  d.budget = static_cast<std::uint64_t>(get_int(
      j, "budget", static_cast<std::int64_t>(d.budget)));
  if (j.contains("macs")) {
    if (!j["macs"].is_array()) bad("domain field 'macs' must be an array");
    // Named host addresses; broadcast and the per-port hardware addresses
    // are part of every universe.
    d.mac_universe.clear();
    d.mac_universe.push_back(broadcast_addr());
    for (const auto& m : j["macs"]) {
      if (!m.is_string()) bad("domain field 'macs' must hold strings");
      d.mac_universe.push_back(parse_mac(m.get<std::string>()));
    }
  }
  if (j.contains("protos")) {
    if (!j["protos"].is_array()) bad("domain field 'protos' must be an array");
    d.proto_tags.clear();
    for (const auto& p : j["protos"]) {
      if (!p.is_string()) bad("domain field 'protos' must hold strings");
      d.proto_tags.push_back(p.get<std::string>());
    }
  }
  // Per-port hardware addresses must be in the universe for haddr atoms.
  NetContext net = d.context();
  for (int p = 1; p <= d.num_ports; ++p) {
    MacAddr h = net.haddr(p);
    bool present = false;
    for (const MacAddr& m : d.mac_universe) present = present || m == h;
    if (!present) d.mac_universe.push_back(h);
  }
  d.validate();
  return d;
}

}  // namespace

ProjectConfig parse_project_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("configuration root must be an object");
  check_fields(j, "configuration",
               {"domain", "components", "product", "profile", "classification",
                "discharge_table", "objective", "out_dir", "seed", "solver",
                "workload", "trace"});

  ProjectConfig c;
  if (j.contains("domain")) {
    if (!j["domain"].is_object()) bad("field 'domain' must be an object");
    c.domain = parse_domain(j["domain"]);
  }
  if (j.contains("components")) {
    if (!j["components"].is_array()) bad("field 'components' must be an array");
    for (const auto& f : j["components"]) {
      if (!f.is_string()) bad("field 'components' must hold file names");
      c.components.push_back(f.get<std::string>());
    }
  }
  c.product_file = get_string(j, "product", "");
  c.profile = get_string(j, "profile", "");
  c.classification = get_string(j, "classification", "");
  c.discharge_table = get_string(j, "discharge_table", "");
  c.objective = get_string(j, "objective", c.objective);
  parse_objective(c.objective);  // validate eagerly
  c.out_dir = get_string(j, "out_dir", c.out_dir);
  c.seed = static_cast<std::uint64_t>(
      get_int(j, "seed", static_cast<std::int64_t>(c.seed)));
  if (j.contains("solver")) {
    if (!j["solver"].is_object()) bad("field 'solver' must be an object");
    check_fields(j["solver"], "solver", {"backend", "command"});
    c.solver.backend = get_string(j["solver"], "backend", c.solver.backend);
    c.solver.command = get_string(j["solver"], "command", "");
  }
  if (c.solver.backend != "internal" && c.solver.backend != "external")
    bad("solver backend must be 'internal' or 'external', got '" +
        c.solver.backend + "'");
  c.workload = get_string(j, "workload", "");
  c.trace = get_string(j, "trace", "");
  return c;
}

ProjectConfig load_project_config(const std::string& path) {
  return parse_project_config(read_text_file(path));
}

Objective parse_objective(const std::string& name) {
  if (name == "expected-time") return Objective::expected_time;
  if (name == "min-size") return Objective::min_size;
  bad("objective must be 'expected-time' or 'min-size', got '" + name + "'");
}

SatOracle make_oracle(const ProjectConfig& cfg) {
  std::string command = cfg.solver.command;
  if (const char* env = std::getenv("LSFC_SMT_SOLVER"); env && *env)
    command = env;
  if (cfg.solver.backend == "external") {
    if (command.empty())
      bad("solver backend 'external' needs a command (configuration or "
          "LSFC_SMT_SOLVER)");
    return SatOracle(cfg.domain, SatOracle::Backend::external_process,
                     command);
  }
  return SatOracle(cfg.domain, SatOracle::Backend::internal);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError(CK::io_error, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec)
      throw ConfigError(CK::io_error,
                        "cannot create directory " + p.parent_path().string() +
                            ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError(CK::io_error, "cannot write " + path);
  out << content;
  if (!out)
    throw ConfigError(CK::io_error, "write failed for " + path);
}

std::string provenance_line(const std::string& comment_lead,
                            std::uint64_t seed, const std::string& command) {
  std::ostringstream os;
  os << comment_lead << " lsfc " << kToolchainVersion << " | seed " << seed
     << " | " << command;
  return os.str();
}

}  // namespace lsfc
