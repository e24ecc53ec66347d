// Command-line front end: link-budget tables, randomized functional
// verification, single simulations, and comparative reports.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error,
// 3 solver/simulation failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oxbnn/archsim.hpp"
#include "oxbnn/link_budget.hpp"
#include "oxbnn/pca.hpp"
#include "oxbnn/report.hpp"
#include "oxbnn/verify.hpp"
#include "oxbnn/workloads.hpp"

namespace {

namespace fs = std::filesystem;
using namespace oxbnn;

constexpr int kExitVerifyFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;

// Captures a run so re-executing it reproduces byte-identical output. Keys
// are the long option names; `--manifest-in` replays them, with explicit
// command-line flags taking precedence.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open manifest file: " + path);
    out << "# oxbnn run manifest\ncommand=" << command << "\n";
    for (const auto& [k, v] : entries)
      if (!v.empty()) out << k << "=" << v << "\n";
  }
};

std::map<std::string, std::string> load_manifest(const std::string& path,
                                                 const std::string& expect_command) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
      while (!s.empty() && s.front() == ' ') s.erase(s.begin());
    };
    trim(key);
    trim(value);
    if (!key.empty()) kv[key] = value;
  }
  const auto cmd = kv.find("command");
  if (cmd != kv.end() && cmd->second != expect_command)
    throw ValidationError("manifest was recorded for `" + cmd->second +
                          "`, not `" + expect_command + "`");
  return kv;
}

std::string data_dir_candidate(const std::string& name, const char* ext) {
  const char* dir = std::getenv("OXBNN_DATA_DIR");
  if (dir == nullptr) return {};
  const fs::path p = fs::path(dir) / (name + ext);
  return fs::exists(p) ? p.string() : std::string{};
}

archsim::AcceleratorConfig resolve_config(const std::string& spec) {
  if (fs::exists(spec) && fs::is_regular_file(spec))
    return archsim::load_config_file(spec);
  if (const auto p = data_dir_candidate(spec, ".cfg"); !p.empty())
    return archsim::load_config_file(p);
  return archsim::build_config(spec);
}

workloads::ModelSpec resolve_model(const std::string& spec) {
  if (fs::exists(spec) && fs::is_regular_file(spec))
    return workloads::load_model_file(spec);
  if (const auto p = data_dir_candidate(spec, ".model"); !p.empty())
    return workloads::load_model_file(p);
  return workloads::builtin_model(spec);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open output file: " + path);
  out << text;
}

// --- link-budget -----------------------------------------------------------

int cmd_link_budget(const std::string& mode, double dr_flag,
                    const std::string& params_path) {
  linkbudget::LinkBudgetParams params;
  if (!params_path.empty()) params = linkbudget::load_params_file(params_path);
  const auto mode_e =
      mode == "analytic" ? linkbudget::Mode::analytic : linkbudget::Mode::table;

  std::vector<double> drs;
  if (dr_flag > 0) {
    drs.push_back(dr_flag);
  } else {
    for (const auto& row : linkbudget::scalability_table()) drs.push_back(row.dr_GSps);
  }

  std::ostringstream out;
  if (mode_e == linkbudget::Mode::analytic) {
    out << "# mode: analytic (sensitivity solved from the noise equations; "
           "monotonicity-checked, coarse agreement with the calibrated table)\n";
  }
  out << "DR_GSps P_PD_opt_dBm N gamma alpha\n";
  pca::PcaParams pca_params;
  for (double dr : drs) {
    const auto row = linkbudget::solve_max_n(dr * 1e9, params, mode_e);
    pca_params.pulse_width_s = 1.0 / (dr * 1e9);
    const auto cap = pca::capacity(pca_params, row.max_n, dr, linkbudget::Mode::table);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%g %.2f %d %ld %ld\n", dr,
                  row.pd_sensitivity_dBm, row.max_n, cap.gamma, cap.alpha);
    out << buf;
  }
  std::cout << out.str();
  return 0;
}

// --- verify ----------------------------------------------------------------

int cmd_verify(const verify::SweepOptions& options) {
  const auto report = verify::run_equivalence_sweep(options);
  if (report.passed()) {
    std::cout << "all " << report.instances_run << " instances passed (max_s="
              << options.max_s << ", seed=" << options.seed << ")\n";
    return 0;
  }
  const auto& cex = *report.first_failure;
  std::cout << report.failures << " of " << report.instances_run
            << " instances failed\ncounterexample: instance=" << cex.instance
            << " h=" << cex.h << " s=" << cex.s << " m=" << cex.m << " n=" << cex.n
            << " seed=" << cex.seed << "\n  " << cex.detail << "\n";
  return kExitVerifyFailure;
}

// --- simulate --------------------------------------------------------------

int cmd_simulate(const std::string& config_name, const std::string& model_name,
                 const std::string& policy, const std::string& out_path,
                 const std::string& trace_path, long seed,
                 const std::string& manifest_path) {
  auto config = resolve_config(config_name);
  if (!policy.empty()) {
    config.policy = policy == "oxbnn" ? mapping::Policy::oxbnn
                                      : mapping::Policy::baseline;
    if (config.policy == mapping::Policy::oxbnn && config.pca_capacity.alpha <= 1) {
      config.pca_capacity = pca::capacity(config.pca, config.xpe_size,
                                          config.datarate_GSps,
                                          linkbudget::Mode::table);
    }
  }
  const auto model = resolve_model(model_name);

  archsim::SimOptions options;
  std::unique_ptr<archsim::FileTraceSink> sink;
  if (!trace_path.empty()) {
    sink = std::make_unique<archsim::FileTraceSink>(trace_path);
    options.trace = sink.get();
  }

  (void)seed;  // recorded for reproducibility; the timing model is data-free
  const auto metrics = archsim::simulate_network(model, config, options);
  std::string csv = archsim::metrics_csv_header() + "\n" +
                    archsim::metrics_csv_row(config.name, model.name, metrics) + "\n";
  write_text(out_path, csv);

  if (!manifest_path.empty()) {
    RunManifest man;
    man.command = "simulate";
    man.add("config", config_name);
    man.add("model", model_name);
    man.add("policy", policy);
    man.add("out", out_path);
    man.add("trace", trace_path);
    man.add("seed", std::to_string(seed));
    man.write(manifest_path);
  }
  return 0;
}

// --- compare ---------------------------------------------------------------

int cmd_compare(const std::string& configs_csv, const std::string& models_csv,
                const std::string& csv_path, const std::string& manifest_path,
                long seed) {
  const auto config_names = split_list(configs_csv);
  if (config_names.size() < 2)
    throw ValidationError("compare needs at least two configurations");

  std::vector<std::string> model_names;
  if (models_csv == "all") {
    model_names = workloads::builtin_model_names();
  } else {
    model_names = split_list(models_csv);
  }
  if (model_names.empty()) throw ValidationError("compare needs at least one model");

  report::MetricsTable table;
  std::string subject;
  for (const auto& cname : config_names) {
    const auto config = resolve_config(cname);
    std::string key = config.name;
    for (int dup = 2; table.contains(key); ++dup)
      key = config.name + "#" + std::to_string(dup);
    if (subject.empty()) subject = key;
    for (const auto& mname : model_names) {
      const auto model = resolve_model(mname);
      table[key][model.name] = archsim::simulate_network(model, config);
    }
  }

  const auto rep = report::compare(table, subject);
  std::cout << rep.to_text();
  if (!csv_path.empty()) write_text(csv_path, rep.to_csv());

  if (!manifest_path.empty()) {
    RunManifest man;
    man.command = "compare";
    man.add("configs", configs_csv);
    man.add("models", models_csv);
    man.add("csv", csv_path);
    man.add("seed", std::to_string(seed));
    man.write(manifest_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XNOR-bitcount photonic BNN accelerator simulation suite"};
  app.require_subcommand(1);

  // link-budget
  auto* lb = app.add_subcommand("link-budget",
                                "detector sensitivity and XPE scalability table");
  std::string lb_mode = "table";
  double lb_dr = 0.0;
  std::string lb_params;
  lb->add_option("--mode,--link-mode", lb_mode, "table or analytic")
      ->check(CLI::IsMember({"table", "analytic"}));
  lb->add_option("--dr", lb_dr, "restrict to one datarate (GS/s)");
  lb->add_option("--params", lb_params, "link parameter override file");

  // verify
  auto* vf = app.add_subcommand("verify", "randomized oracle-equivalence sweep");
  verify::SweepOptions sweep;
  vf->add_option("--instances", sweep.instances, "number of random instances");
  vf->add_option("--max-s", sweep.max_s, "largest vector size");
  vf->add_option("--max-m", sweep.max_m, "largest XPE count per schedule");
  vf->add_option("--seed", sweep.seed, "sweep seed");
  vf->add_flag("--inject-fault", sweep.inject_fault,
               "corrupt one instance (failure-path test hook)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate one model on one accelerator");
  std::string sim_config, sim_model, sim_policy, sim_out = "-", sim_trace,
              sim_manifest, sim_manifest_in;
  long sim_seed = 0;
  sim->add_option("--config", sim_config, "built-in name or config file");
  sim->add_option("--model", sim_model, "built-in name or model file");
  sim->add_option("--policy", sim_policy, "override the mapping policy")
      ->check(CLI::IsMember({"", "oxbnn", "baseline"}));
  sim->add_option("--out", sim_out, "metrics CSV path ('-' for stdout)");
  sim->add_option("--trace", sim_trace, "event trace output path");
  sim->add_option("--seed", sim_seed, "recorded run seed");
  sim->add_option("--manifest-out", sim_manifest, "write a run manifest");
  sim->add_option("--manifest-in", sim_manifest_in, "replay a recorded manifest");

  // compare
  auto* cmp = app.add_subcommand("compare", "compare configurations over workloads");
  std::string cmp_configs, cmp_models = "all", cmp_csv, cmp_manifest,
              cmp_manifest_in;
  long cmp_seed = 0;
  cmp->add_option("--configs", cmp_configs,
                  "comma-separated configs; first is the subject");
  cmp->add_option("--models", cmp_models, "'all' or comma-separated model names");
  cmp->add_option("--csv", cmp_csv, "also write the report as CSV");
  cmp->add_option("--seed", cmp_seed, "recorded run seed");
  cmp->add_option("--manifest-out", cmp_manifest, "write a run manifest");
  cmp->add_option("--manifest-in", cmp_manifest_in, "replay a recorded manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (lb->parsed()) return cmd_link_budget(lb_mode, lb_dr, lb_params);
    if (vf->parsed()) return cmd_verify(sweep);
    if (sim->parsed()) {
      if (!sim_manifest_in.empty()) {
        const auto kv = load_manifest(sim_manifest_in, "simulate");
        auto pick = [&](const char* flag, const char* key, std::string& var) {
          if (sim->count(flag) == 0 && kv.contains(key)) var = kv.at(key);
        };
        pick("--config", "config", sim_config);
        pick("--model", "model", sim_model);
        pick("--policy", "policy", sim_policy);
        pick("--out", "out", sim_out);
        pick("--trace", "trace", sim_trace);
        if (sim->count("--seed") == 0 && kv.contains("seed"))
          sim_seed = std::stol(kv.at("seed"));
      }
      if (sim_config.empty()) throw ValidationError("--config is required");
      if (sim_model.empty()) throw ValidationError("--model is required");
      return cmd_simulate(sim_config, sim_model, sim_policy, sim_out, sim_trace,
                          sim_seed, sim_manifest);
    }
    if (cmp->parsed()) {
      if (!cmp_manifest_in.empty()) {
        const auto kv = load_manifest(cmp_manifest_in, "compare");
        auto pick = [&](const char* flag, const char* key, std::string& var) {
          if (cmp->count(flag) == 0 && kv.contains(key)) var = kv.at(key);
        };
        pick("--configs", "configs", cmp_configs);
        pick("--models", "models", cmp_models);
        pick("--csv", "csv", cmp_csv);
        if (cmp->count("--seed") == 0 && kv.contains("seed"))
          cmp_seed = std::stol(kv.at("seed"));
      }
      if (cmp_configs.empty()) throw ValidationError("--configs is required");
      return cmd_compare(cmp_configs, cmp_models, cmp_csv, cmp_manifest, cmp_seed);
    }
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
