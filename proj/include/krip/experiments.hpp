#pragma once

#include <json.hpp>

#include "krip/config.hpp"
#include "krip/csv.hpp"

namespace krip {

/// Result of one experiment run: the primary CSV table (byte-stable for a
/// fixed config + seed at any parallelism degree), an optional per-trial
/// table for phase transitions, and a JSON mirror with config echo, hash,
/// version and wall-clock metadata.
struct ExperimentReport {
  ExperimentConfig config;
  std::string config_hash;
  CsvTable table{{}};
  std::optional<CsvTable> trial_table;
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json extra = nlohmann::json::object();
  std::vector<std::string> warnings;
  bool downgraded = false;  // an exact enumeration fell back to greedy
  double wall_ms = 0.0;

  nlohmann::json to_json() const;
};

ExperimentReport run_kappa_table(const ExperimentConfig& config);
ExperimentReport run_rip_sweep(const ExperimentConfig& config);
ExperimentReport run_phase_transition(const ExperimentConfig& config);
ExperimentReport run_concentration(const ExperimentConfig& config);
ExperimentReport run_tails(const ExperimentConfig& config);

/// Validates and dispatches on config.kind, filling wall-clock metadata.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace krip
