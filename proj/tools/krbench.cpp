#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "krip/experiments.hpp"
#include "krip/version.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::optional<std::string> mode;
  bool strict = false;
};

void add_common(CLI::App* cmd, Overrides& overrides) {
  cmd->add_option("--config", overrides.config_path, "experiment config file")
      ->required();
  cmd->add_option("--seed", overrides.seed, "override the config seed");
  cmd->add_option("--out", overrides.out, "override the output path");
  cmd->add_option("--jobs", overrides.jobs, "worker threads (0 = all cores)");
  cmd->add_option("--mode", overrides.mode,
                  "override the mode (centered|uncentered|both)");
  cmd->add_flag("--strict", overrides.strict,
                "fail (exit 3) instead of downgrading infeasible exact "
                "enumeration to greedy");
}

std::string sibling_path(const std::string& path, const std::string& suffix) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + suffix;
  return path.substr(0, dot) + suffix;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << content;
}

int run(krip::ExperimentKind kind, const Overrides& overrides) {
  krip::ExperimentConfig config =
      krip::ExperimentConfig::load(overrides.config_path, kind);
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.out) config.out = *overrides.out;
  if (overrides.jobs) config.jobs = *overrides.jobs;
  if (overrides.mode) config.mode = krip::mode_from_name(*overrides.mode);
  config.validate();

  const krip::ExperimentReport report = krip::run_experiment(config);
  for (const std::string& warning : report.warnings)
    std::cerr << "warning: " << warning << "\n";

  if (!config.out.empty()) {
    write_file(config.out, report.table.to_string());
    write_file(sibling_path(config.out, ".json"), report.to_json().dump(2) + "\n");
    if (report.trial_table)
      write_file(sibling_path(config.out, "_trials.csv"),
                 report.trial_table->to_string());
    std::cout << "wrote " << config.out << " (" << report.table.rows().size()
              << " rows, config " << report.config_hash << ", "
              << report.wall_ms << " ms)\n";
  } else {
    std::cout << report.table.to_string();
  }
  if (report.extra.contains("separation"))
    for (const auto& row : report.extra["separation"])
      std::cout << "separation: n=" << row["n"] << " s_star=" << row["s_star"]
                << " gap=" << row["gap"].get<double>() << "\n";

  if (report.downgraded && overrides.strict) {
    std::cerr << "error: exact enumeration infeasible and --strict given\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmarks for centered self Khatri-Rao measurement "
               "operators: RIP estimation, sparse-recovery phase "
               "transitions, and tail/concentration experiments"};
  app.set_version_flag("--version", krip::kVersion);
  app.require_subcommand(1);

  std::map<std::string, krip::ExperimentKind> kinds = {
      {"kappa", krip::ExperimentKind::KappaTable},
      {"rip", krip::ExperimentKind::RipSweep},
      {"phase", krip::ExperimentKind::PhaseTransition},
      {"conc", krip::ExperimentKind::Concentration},
      {"tails", krip::ExperimentKind::Tails},
  };
  std::map<std::string, Overrides> overrides;
  overrides["kappa"];
  add_common(app.add_subcommand("kappa", "normalization-factor table"),
             overrides["kappa"]);
  overrides["rip"];
  add_common(app.add_subcommand("rip", "delta_s sweep with bound overlay"),
             overrides["rip"]);
  overrides["phase"];
  add_common(app.add_subcommand("phase", "recovery phase-transition grid"),
             overrides["phase"]);
  overrides["conc"];
  add_common(app.add_subcommand("conc", "column-norm concentration table"),
             overrides["conc"]);
  overrides["tails"];
  add_common(app.add_subcommand("tails", "marginal tail and psi-norm report"),
             overrides["tails"]);

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return run(kinds.at(name), overrides.at(name));
  } catch (const krip::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
