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

// Pipeline driver. Every command reads one JSON project configuration and
// communicates with the other stages only through files; outputs carry a
// provenance header (toolchain version, seed, producing command) and are
// byte-identical across reruns with the same inputs and seed.

#include <cstdint>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lsfc/config.hpp"
#include "lsfc/dsl.hpp"
#include "lsfc/emit.hpp"
#include "lsfc/machine.hpp"
#include "lsfc/netsim.hpp"
#include "lsfc/oracle.hpp"
#include "lsfc/synth.hpp"

namespace {

using namespace lsfc;

// Command-line overrides shared by every subcommand; empty/negative means
// "keep the configuration's value".
struct Common {
  std::string config_path;
  std::string objective;
  std::string backend;
  std::string solver_cmd;
  std::string out_dir;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "project configuration (JSON)")
      ->required();
  cmd->add_option("--objective", c.objective,
                  "branching objective: expected-time | min-size");
  cmd->add_option("--seed", c.seed, "random seed override");
  cmd->add_option("--backend", c.backend,
                  "satisfiability backend: internal | external");
  cmd->add_option("--solver", c.solver_cmd, "external solver command");
  cmd->add_option("--out-dir", c.out_dir, "output directory override");
}

ProjectConfig load_cfg(const Common& c) {
  ProjectConfig cfg = load_project_config(c.config_path);
  if (!c.objective.empty()) {
    parse_objective(c.objective);  // validate
    cfg.objective = c.objective;
  }
  if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
  if (!c.backend.empty()) cfg.solver.backend = c.backend;
  if (!c.solver_cmd.empty()) cfg.solver.command = c.solver_cmd;
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  if (cfg.solver.backend != "internal" && cfg.solver.backend != "external")
    throw ConfigError(ConfigError::Kind::bad_config,
                      "solver backend must be 'internal' or 'external'");
  return cfg;
}

std::string join(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : dir + "/" + name;
}

std::string product_path(const ProjectConfig& cfg) {
  return cfg.product_file.empty() ? join(cfg.out_dir, "product.sfa")
                                  : cfg.product_file;
}

std::string require_path(const std::string& override_path,
                         const std::string& configured,
                         const std::string& what) {
  if (!override_path.empty()) return override_path;
  if (!configured.empty()) return configured;
  throw ConfigError(ConfigError::Kind::bad_config,
                    "no " + what + " configured and none given on the "
                    "command line");
}

DistributionProfile load_profile_file(const std::string& path) {
  return parse_profile(read_text_file(path));
}

ClassificationConfig load_classification(const ProjectConfig& cfg) {
  if (cfg.classification.empty()) return default_classification();
  return parse_classification(read_text_file(cfg.classification));
}

std::string tree_root_str(const BranchTree& t) {
  if (t.kind == BranchTree::Kind::test) return render(t.atom);
  return "<no test>";
}

std::string indent_block(const std::string& text, const std::string& pad) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) out << pad << line << "\n";
  return out.str();
}

TraceGenOptions gen_options(const ProjectConfig& cfg) {
  TraceGenOptions go;
  go.seed = cfg.seed;
  go.num_ports = cfg.domain.num_ports;
  go.uplink_port = cfg.domain.uplink_port;
  return go;
}

// ---------------------------------------------------------------------------

int cmd_product(const Common& com, const std::string& out_override) {
  ProjectConfig cfg = load_cfg(com);
  if (cfg.components.empty())
    throw ConfigError(ConfigError::Kind::bad_config,
                      "configuration lists no components");
  SatOracle oracle = make_oracle(cfg);
  std::vector<LambdaSFA> machines;
  machines.reserve(cfg.components.size());
  for (const std::string& f : cfg.components)
    machines.push_back(load_machine_file(f));

  ProductResult pr = product(machines, oracle);

  std::string ppath = out_override.empty() ? product_path(cfg) : out_override;
  write_text_file(ppath, provenance_line(";", cfg.seed, "product") + "\n" +
                             serialize_machine(pr.machine));

  std::ostringstream os;
  os << provenance_line("#", cfg.seed, "product") << "\n";
  os << "machine " << pr.machine.name << "\n";
  os << "params:";
  for (const std::string& p : pr.machine.params) os << " " << p;
  os << "\nstates (" << pr.machine.states.size() << "):";
  for (const std::string& s : pr.machine.states) os << " " << s;
  os << "\nstart " << pr.machine.start << "\n";
  os << "transitions (" << pr.machine.transitions.size() << "):\n";
  for (std::size_t i = 0; i < pr.machine.transitions.size(); ++i) {
    const Transition& tr = pr.machine.transitions[i];
    os << "  t" << i + 1 << ": " << tr.from << " -> " << tr.to
       << (tr.binds_snapshot ? "  [binds snapshot]" : "") << "\n"
       << "      " << render(tr.label) << "\n";
  }
  os << "pruned as unsatisfiable (" << pr.pruned.size() << "):\n";
  for (const PrunedTransition& p : pr.pruned)
    os << "  " << p.from << " -> " << p.to << "\n"
       << "      " << render(p.label) << "\n";
  std::string lpath = join(cfg.out_dir, "product.txt");
  write_text_file(lpath, os.str());

  std::cout << "product " << pr.machine.name << ": "
            << pr.machine.states.size() << " states, "
            << pr.machine.transitions.size() << " transitions, "
            << pr.pruned.size() << " pruned\n";
  std::cout << "wrote " << ppath << "\n" << "wrote " << lpath << "\n";
  return 0;
}

int cmd_synth(const Common& com, const std::string& product_override,
              const std::string& profile_override,
              const std::string& out_override) {
  ProjectConfig cfg = load_cfg(com);
  SatOracle oracle = make_oracle(cfg);
  LambdaSFA m = load_machine_file(
      product_override.empty() ? product_path(cfg) : product_override);
  DistributionProfile profile = load_profile_file(
      require_path(profile_override, cfg.profile, "profile file"));
  ClassificationConfig cls = load_classification(cfg);
  Objective obj = parse_objective(cfg.objective);

  DecisionProgram prog = build_program(m, cls, profile, obj, oracle);

  std::ostringstream os;
  os << provenance_line("#", cfg.seed, "synth") << "\n";
  os << "objective " << cfg.objective << "\n";
  os << program_str(prog);
  os << "metrics:\n";
  for (std::size_t i = 0; i < prog.transitions.size(); ++i) {
    const TransitionProgram& tp = prog.transitions[i];
    TreeMetrics tm = tree_metrics(tp.tree, profile);
    os << "  t" << i + 1 << " " << tp.from << " -> " << tp.to << ": size "
       << tm.size << ", expected-tests " << tm.expected_tests.str() << "\n";
  }
  std::string opath =
      out_override.empty() ? join(cfg.out_dir, "program.txt") : out_override;
  write_text_file(opath, os.str());

  std::cout << "synthesized decision program for " << prog.name
            << " (objective " << cfg.objective << ", profile "
            << prog.profile_hash << ")\n";
  std::cout << "wrote " << opath << "\n";
  return 0;
}

int cmd_emit(const Common& com, const std::string& product_override,
             const std::string& profile_override,
             const std::string& table_override,
             const std::string& out_override) {
  ProjectConfig cfg = load_cfg(com);
  SatOracle oracle = make_oracle(cfg);
  LambdaSFA m = load_machine_file(
      product_override.empty() ? product_path(cfg) : product_override);
  DistributionProfile profile = load_profile_file(
      require_path(profile_override, cfg.profile, "profile file"));
  ClassificationConfig cls = load_classification(cfg);
  DischargeTable dt = parse_discharge_table(read_text_file(
      require_path(table_override, cfg.discharge_table, "discharge table")));
  Objective obj = parse_objective(cfg.objective);

  DecisionProgram prog = build_program(m, cls, profile, obj, oracle);
  std::string csrc =
      discharge(prog, dt, "seed " + std::to_string(cfg.seed));

  std::string opath =
      out_override.empty() ? join(cfg.out_dir, "program.c") : out_override;
  write_text_file(opath, csrc);
  std::cout << "emitted " << opath << " (" << csrc.size()
            << " bytes, product " << prog.name << ", profile "
            << prog.profile_hash << ")\n";
  return 0;
}

int cmd_simulate(const Common& com, const std::string& workload_override,
                 const std::string& mode, const std::string& out_override) {
  ProjectConfig cfg = load_cfg(com);
  if (mode != "interp" && mode != "program")
    throw ConfigError(ConfigError::Kind::bad_config,
                      "mode must be 'interp' or 'program', got '" + mode +
                          "'");
  std::vector<IngressEvent> w = parse_workload(read_text_file(
      require_path(workload_override, cfg.workload, "workload file")));
  NetContext net = cfg.domain.context();
  LambdaSFA m = load_machine_file(product_path(cfg));

  std::vector<TraceEvent> trace;
  if (mode == "interp") {
    trace = simulate(m, w, net);
  } else {
    SatOracle oracle = make_oracle(cfg);
    DistributionProfile profile = load_profile_file(
        require_path("", cfg.profile, "profile file"));
    DecisionProgram prog =
        build_program(m, load_classification(cfg), profile,
                      parse_objective(cfg.objective), oracle);
    trace = simulate(prog, w, net);
  }

  std::string tpath = !out_override.empty() ? out_override
                      : !cfg.trace.empty()  ? cfg.trace
                                            : join(cfg.out_dir, "sim.trace");
  write_text_file(tpath, provenance_line("#", cfg.seed, "simulate") +
                             "\n# mode " + mode + "\n" + render_trace(trace));

  std::ostringstream eg;
  eg << provenance_line("#", cfg.seed, "simulate") << "\n";
  for (std::size_t i = 0; i + 1 < trace.size(); i += 2)
    eg << trace_line(trace[i]) << "  ->  " << iface_set_str(trace[i + 1].loc)
       << "\n";
  std::string epath = join(cfg.out_dir, "sim.egress.txt");
  write_text_file(epath, eg.str());

  std::cout << "simulated " << w.size() << " ingress events (mode " << mode
            << ") into " << trace.size() << " trace events\n";
  std::cout << "wrote " << tpath << "\n" << "wrote " << epath << "\n";
  return 0;
}

int cmd_check(const Common& com, const std::string& trace_override,
              std::size_t random_count) {
  ProjectConfig cfg = load_cfg(com);
  NetContext net = cfg.domain.context();
  LambdaSFA m = load_machine_file(product_path(cfg));
  int failures = 0;

  std::ostringstream rep;
  rep << provenance_line("#", cfg.seed, "check") << "\n";

  // 1. Invariant monitors over a concrete trace.
  std::vector<TraceEvent> trace;
  std::string source;
  if (!trace_override.empty() || !cfg.trace.empty()) {
    std::string tpath = trace_override.empty() ? cfg.trace : trace_override;
    trace = parse_trace(read_text_file(tpath));
    source = tpath;
  } else if (!cfg.workload.empty()) {
    trace = simulate(m, parse_workload(read_text_file(cfg.workload)), net);
    source = "simulation of " + cfg.workload;
  } else {
    TraceGenOptions go = gen_options(cfg);
    trace = simulate(m, random_workload(go), net);
    source = "simulation of a generated workload (" +
             trace_gen_params_str(go) + ")";
  }
  InvariantReport rml = check_phi_ml(trace, net);
  InvariantReport rb1 = check_phi_b1(trace, net);
  rep << "monitors over " << source << " (" << trace.size() << " events):\n";
  rep << "  " << invariant_report_str(rml) << "\n";
  rep << "  " << invariant_report_str(rb1) << "\n";
  failures += rml.holds ? 0 : 1;
  failures += rb1.holds ? 0 : 1;

  // 2. Product vs components over random traces.
  if (!cfg.components.empty()) {
    std::vector<LambdaSFA> comps;
    for (const std::string& f : cfg.components)
      comps.push_back(load_machine_file(f));
    TraceGenOptions go = gen_options(cfg);
    std::vector<std::vector<TraceEvent>> traces;
    traces.reserve(random_count);
    for (std::size_t i = 0; i < random_count; ++i) {
      go.seed = cfg.seed + i;
      traces.push_back(random_trace(go));
    }
    EquivalenceReport er = equivalence_check(m, comps, traces, net);
    TraceGenOptions base = gen_options(cfg);
    rep << "product vs components (" << trace_gen_params_str(base)
        << ", consecutive seeds):\n";
    rep << "  " << equivalence_report_str(er) << "\n";
    failures += er.ok() ? 0 : 1;
  } else {
    rep << "product vs components: skipped (no components configured)\n";
  }

  // 3. Interpreted product vs compiled decision program.
  if (!cfg.profile.empty()) {
    SatOracle oracle = make_oracle(cfg);
    DecisionProgram prog =
        build_program(m, load_classification(cfg),
                      load_profile_file(cfg.profile),
                      parse_objective(cfg.objective), oracle);
    TraceGenOptions go = gen_options(cfg);
    std::vector<std::vector<IngressEvent>> workloads;
    workloads.reserve(random_count);
    for (std::size_t i = 0; i < random_count; ++i) {
      go.seed = cfg.seed + 1000 + i;
      workloads.push_back(random_workload(go));
    }
    EquivalenceReport pr = program_equivalence_check(m, prog, workloads, net);
    rep << "interpretation vs program (" << trace_gen_params_str(gen_options(cfg))
        << ", consecutive seeds offset 1000):\n";
    rep << "  " << equivalence_report_str(pr) << "\n";
    failures += pr.ok() ? 0 : 1;
  } else {
    rep << "interpretation vs program: skipped (no profile configured)\n";
  }

  std::string opath = join(cfg.out_dir, "check.txt");
  write_text_file(opath, rep.str());
  std::cout << rep.str();
  std::cout << "wrote " << opath << "\n";
  if (failures > 0) {
    std::cout << "check FAILED (" << failures << " failing section(s))\n";
    return 1;
  }
  std::cout << "check passed\n";
  return 0;
}

int cmd_adapt(const Common& com, const std::string& trace_override,
              std::size_t support) {
  ProjectConfig cfg = load_cfg(com);
  NetContext net = cfg.domain.context();
  SatOracle oracle = make_oracle(cfg);
  LambdaSFA m = load_machine_file(product_path(cfg));
  ClassificationConfig cls = load_classification(cfg);
  DistributionProfile old_profile = load_profile_file(
      require_path("", cfg.profile, "profile file"));
  Objective obj = parse_objective(cfg.objective);
  std::vector<TraceEvent> trace = parse_trace(read_text_file(
      require_path(trace_override, cfg.trace, "trace file")));

  // Atoms worth estimating: the checkable guard atoms of the product.
  std::map<std::string, Formula> atom_map;
  for (const Transition& tr : m.transitions) {
    PreparedLabel pl = prepare_label(tr.label, cls, oracle);
    for (const Disjunct& dj : pl.guards)
      for (const Literal& l : dj.lits) atom_map.emplace(l.key(), l.atom);
  }
  std::vector<Formula> atoms;
  atoms.reserve(atom_map.size());
  for (const auto& [key, f] : atom_map) atoms.push_back(f);

  EstimateOptions eo;
  eo.support = support;
  DistributionProfile new_profile = estimate_profile(trace, atoms, net, eo);

  std::string ppath = join(cfg.out_dir, "adapt.profile");
  write_text_file(ppath, provenance_line("#", cfg.seed, "adapt") + "\n" +
                             profile_str(new_profile));

  DecisionProgram oldp = build_program(m, cls, old_profile, obj, oracle);
  DecisionProgram newp = build_program(m, cls, new_profile, obj, oracle);

  std::ostringstream rep;
  rep << provenance_line("#", cfg.seed, "adapt") << "\n";
  rep << "estimated profile from " << trace.size() << " events over "
      << atoms.size() << " atoms (support " << support << ")\n";
  bool all_equivalent = true;
  for (std::size_t i = 0; i < oldp.transitions.size(); ++i) {
    const TransitionProgram& ot = oldp.transitions[i];
    const TransitionProgram& nt = newp.transitions[i];
    bool equiv = trees_equivalent(ot.tree, nt.tree, ot.label.guards);
    all_equivalent = all_equivalent && equiv;
    TreeMetrics om = tree_metrics(ot.tree, old_profile);
    TreeMetrics nm = tree_metrics(nt.tree, new_profile);
    rep << "t" << i + 1 << " " << ot.from << " -> " << ot.to << ": root "
        << tree_root_str(ot.tree) << " -> " << tree_root_str(nt.tree)
        << (equiv ? " (equivalent decisions)" : " (DECISIONS DIFFER)")
        << "\n";
    rep << "  old: size " << om.size << ", expected-tests "
        << om.expected_tests.str() << "\n";
    rep << "  new: size " << nm.size << ", expected-tests "
        << nm.expected_tests.str() << "\n";
    if (tree_str(ot.tree) != tree_str(nt.tree)) {
      rep << "  old tree:\n" << indent_block(tree_str(ot.tree), "    ");
      rep << "  new tree:\n" << indent_block(tree_str(nt.tree), "    ");
    }
  }
  std::string opath = join(cfg.out_dir, "adapt.txt");
  write_text_file(opath, rep.str());
  std::cout << rep.str();
  std::cout << "wrote " << ppath << "\n" << "wrote " << opath << "\n";
  if (!all_equivalent) {
    std::cout << "adapt FAILED: resynthesized program decides differently\n";
    return 1;
  }
  std::cout << "adapt passed: decision behavior preserved\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lsfc: compiles network functions from products of recognizer "
      "components"};
  app.require_subcommand(1);

  Common c_product, c_synth, c_emit, c_sim, c_check, c_adapt;
  std::string product_out, synth_product, synth_profile, synth_out;
  std::string emit_product, emit_profile, emit_table, emit_out;
  std::string sim_workload, sim_mode = "interp", sim_out;
  std::string check_trace, adapt_trace;
  std::size_t check_random = 100, adapt_support = 8;

  CLI::App* prod = app.add_subcommand(
      "product", "compose component machines into their product");
  add_common(prod, c_product);
  prod->add_option("--out", product_out, "product machine output path");

  CLI::App* syn = app.add_subcommand(
      "synth", "synthesize branching logic for a product");
  add_common(syn, c_synth);
  syn->add_option("--product", synth_product, "product machine file");
  syn->add_option("--profile", synth_profile, "distribution profile file");
  syn->add_option("--out", synth_out, "program listing output path");

  CLI::App* emt = app.add_subcommand(
      "emit", "discharge a decision program to C source");
  add_common(emt, c_emit);
  emt->add_option("--product", emit_product, "product machine file");
  emt->add_option("--profile", emit_profile, "distribution profile file");
  emt->add_option("--table", emit_table, "discharge table file");
  emt->add_option("--out", emit_out, "C source output path");

  CLI::App* sim = app.add_subcommand(
      "simulate", "run an ingress workload through the switch");
  add_common(sim, c_sim);
  sim->add_option("--workload", sim_workload, "ingress workload file");
  sim->add_option("--mode", sim_mode,
                  "interp (product interpretation) | program (compiled "
                  "decision program)");
  sim->add_option("--out", sim_out, "trace output path");

  CLI::App* chk = app.add_subcommand(
      "check", "monitor invariants and differential-test the pipeline");
  add_common(chk, c_check);
  chk->add_option("--trace", check_trace, "trace file to monitor");
  chk->add_option("--random", check_random,
                  "number of random traces/workloads per differential");

  CLI::App* adp = app.add_subcommand(
      "adapt", "re-estimate the profile from traffic and resynthesize");
  add_common(adp, c_adapt);
  adp->add_option("--trace", adapt_trace, "trace file to estimate from");
  adp->add_option("--support", adapt_support,
                  "conditional-probability support threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prod->parsed()) return cmd_product(c_product, product_out);
    if (syn->parsed())
      return cmd_synth(c_synth, synth_product, synth_profile, synth_out);
    if (emt->parsed())
      return cmd_emit(c_emit, emit_product, emit_profile, emit_table,
                      emit_out);
    if (sim->parsed()) return cmd_simulate(c_sim, sim_workload, sim_mode, sim_out);
    if (chk->parsed()) return cmd_check(c_check, check_trace, check_random);
    if (adp->parsed()) return cmd_adapt(c_adapt, adapt_trace, adapt_support);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
