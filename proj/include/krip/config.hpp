#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "krip/ensembles.hpp"
#include "krip/kr_operator.hpp"
#include "krip/rip.hpp"

namespace krip {

/// Invalid or inconsistent experiment configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  KappaTable,
  RipSweep,
  PhaseTransition,
  Concentration,
  Tails
};

ExperimentKind experiment_from_name(const std::string& name);
std::string experiment_name(ExperimentKind kind);

enum class ModeSelect { Centered, Uncentered, Both };

ModeSelect mode_from_name(const std::string& name);
std::string mode_name(ModeSelect mode);

struct SolverConfig {
  std::string name = "iht";  // iht | fista
  int max_iters = 500;
  double tol = 1e-7;
  double rel_tol = 1e-3;      // success criterion
  double lambda_scale = 0.1;  // fista: lambda = scale * ||adjoint(y)||_inf
  int continuation = 0;       // fista: extra lambda halvings
  std::optional<double> step; // iht: fixed step override
};

/// Declarative experiment description. Parsed from the key-value config
/// format or from JSON; round-trips losslessly through canonical_text().
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::KappaTable;
  std::vector<Family> families;  // kappa table rows
  Family family = Family::Gaussian;
  ModeSelect mode = ModeSelect::Centered;
  std::vector<int> n_list;
  long N = 0;
  std::vector<int> s_list;
  long trials = 50;
  long samples = 100000;  // kappa monte-carlo / tails sample count
  int p_max = 8;
  double noise_sigma = 0.0;
  std::string amplitudes = "unit";  // unit | gaussian
  std::vector<double> t_grid;
  SolverConfig solver;
  std::optional<TheoryBoundParams> theory;
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 0;  // 0 = all cores
  std::size_t enumeration_budget = kDefaultEnumerationBudget;
  std::size_t explicit_budget = kDefaultExplicitBudget;

  /// Reads a config file; .json extension (or a leading '{') selects the
  /// JSON encoding. `expected` is the CLI subcommand's experiment; a
  /// mismatch with the file's `experiment` key is a ConfigError.
  static ExperimentConfig load(const std::string& path,
                               std::optional<ExperimentKind> expected = {});
  static ExperimentConfig parse_kv(const std::string& text,
                                   std::optional<ExperimentKind> expected = {});
  static ExperimentConfig parse_json(const std::string& text,
                                     std::optional<ExperimentKind> expected = {});

  /// Canonical key-value serialization (fixed key order, full state).
  std::string canonical_text() const;

  /// FNV-1a hash of canonical_text(), as 16 hex digits.
  std::string content_hash() const;

  /// Checks every referenced parameter; throws ConfigError. Must pass
  /// before any computation starts.
  void validate() const;

  std::vector<KrMode> selected_modes() const;

  bool operator==(const ExperimentConfig& other) const {
    return canonical_text() == other.canonical_text();
  }
};

}  // namespace krip
