#include "krip/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <tuple>

#include "krip/parallel.hpp"
#include "krip/recovery.hpp"
#include "krip/tails.hpp"
#include "krip/version.hpp"

namespace krip {

namespace {

using nlohmann::json;

std::string mode_label(KrMode mode) {
  return mode == KrMode::Centered ? "centered" : "uncentered";
}

std::string csv_cell(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number_float()) return format_double(value.get<double>());
  return value.dump();
}

// Builds the CSV table and the JSON row array from the same cells, so the
// two outputs can never drift apart.
class RowSink {
 public:
  explicit RowSink(std::vector<std::string> header)
      : header_(std::move(header)), table_(header_) {}

  void add(const std::vector<json>& cells) {
    std::vector<std::string> text(cells.size());
    json object = json::object();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      text[i] = csv_cell(cells[i]);
      object[header_[i]] = cells[i];
    }
    table_.add_row(std::move(text));
    rows_.push_back(std::move(object));
  }

  CsvTable table() && { return std::move(table_); }
  json rows() && { return std::move(rows_); }

 private:
  std::vector<std::string> header_;
  CsvTable table_;
  json rows_;
};

KrRepresentation pick_representation(int n, long N, std::size_t budget) {
  const std::size_t entries = static_cast<std::size_t>(n) * n * N;
  return entries <= budget ? KrRepresentation::Explicit
                           : KrRepresentation::MatrixFree;
}

Eigen::VectorXd random_unit_vector(int dim, std::uint64_t key) {
  RngStream stream{key};
  Eigen::VectorXd y(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) y[i] = stream.normal();
    norm = y.norm();
  } while (norm == 0.0);
  return y / norm;
}

RecoveryResult solve_trial(const ExperimentConfig& config,
                           const RecoveryProblem& problem, int s) {
  if (config.solver.name == "iht")
    return iht(problem, s, config.solver.max_iters, config.solver.tol,
               config.solver.step);
  double lambda =
      config.solver.lambda_scale * problem.op->adjoint(problem.y).lpNorm<Eigen::Infinity>();
  if (lambda <= 0.0) lambda = 1e-12;
  RecoveryResult result =
      fista_lasso(problem, lambda, config.solver.max_iters, config.solver.tol);
  for (int k = 0; k < config.solver.continuation; ++k) {
    lambda *= 0.5;
    result = fista_lasso(problem, lambda, config.solver.max_iters,
                         config.solver.tol, result.x_hat);
  }
  return result;
}

}  // namespace

json ExperimentReport::to_json() const {
  json mirror;
  mirror["experiment"] = experiment_name(config.kind);
  mirror["version"] = kVersion;
  mirror["config_hash"] = config_hash;
  mirror["config"] = config.canonical_text();
  mirror["wall_ms"] = wall_ms;
  mirror["warnings"] = warnings;
  mirror["downgraded"] = downgraded;
  mirror["header"] = table.header();
  mirror["rows"] = rows;
  if (!extra.empty()) mirror["extra"] = extra;
  return mirror;
}

ExperimentReport run_kappa_table(const ExperimentConfig& config) {
  ExperimentReport report;
  report.config = config;
  report.config_hash = config.content_hash();

  std::vector<Family> families =
      config.families.empty() ? std::vector<Family>{config.family}
                              : config.families;

  struct Point {
    Family family;
    int n;
    std::uint64_t row_seed;
  };
  std::vector<Point> points;
  for (Family family : families)
    for (int n : config.n_list)
      points.push_back(
          {family, n,
           RngStream::derive_key(config.seed,
                                 {streams::kKappaPoint,
                                  static_cast<std::uint64_t>(family),
                                  static_cast<std::uint64_t>(n)})});

  // one task per (row, sample chunk); partial sums reduced in index order
  constexpr long kChunk = 4096;
  const long chunks_per_row = (config.samples + kChunk - 1) / kChunk;
  std::vector<double> partial(points.size() * chunks_per_row, 0.0);
  parallel_for(
      static_cast<long>(partial.size()), config.jobs, [&](long task) {
        const Point& point = points[task / chunks_per_row];
        const long chunk = task % chunks_per_row;
        const DistributionSpec spec = DistributionSpec::make(point.family);
        const long begin = chunk * kChunk;
        const long end = std::min(config.samples, begin + kChunk);
        double sum = 0.0;
        for (long i = begin; i < end; ++i) {
          RngStream stream = RngStream::derive(
              point.row_seed, {streams::kTrial, static_cast<std::uint64_t>(i)});
          const Eigen::VectorXd a = sample_column(spec, point.n, stream);
          const double S = a.squaredNorm();
          sum += S * S - 2.0 * S + static_cast<double>(point.n);
        }
        partial[task] = sum;
      });

  RowSink sink({"family", "n", "kappa_analytic", "kappa_mc", "rel_gap",
                "samples", "seed"});
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point& point = points[p];
    double sum = 0.0;
    for (long c = 0; c < chunks_per_row; ++c)
      sum += partial[p * chunks_per_row + c];
    const double mean = sum / static_cast<double>(config.samples);
    const double analytic =
        kappa(DistributionSpec::make(point.family), point.n);
    const double mc = static_cast<double>(point.n) * point.n / mean;
    sink.add({family_name(point.family), point.n, analytic, mc,
              std::abs(mc - analytic) / analytic, config.samples,
              point.row_seed});
  }
  report.table = std::move(sink).table();
  report.rows = std::move(sink).rows();
  return report;
}

ExperimentReport run_rip_sweep(const ExperimentConfig& config) {
  ExperimentReport report;
  report.config = config;
  report.config_hash = config.content_hash();

  const DistributionSpec spec = DistributionSpec::make(config.family);
  const std::vector<KrMode> modes = config.selected_modes();

  struct Point {
    int n;
    KrMode mode;
    int s;
    std::uint64_t row_seed;
    RipEstimate estimate;
    bool downgraded = false;
  };
  std::vector<Point> points;
  for (int n : config.n_list)
    for (KrMode mode : modes)
      for (int s : config.s_list)
        points.push_back(
            {n, mode, s,
             RngStream::derive_key(
                 config.seed,
                 {streams::kRipPoint, static_cast<std::uint64_t>(mode),
                  static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s)}),
             {},
             false});

  // the source matrix is mode-independent: both modes see the same draw
  std::map<int, ColumnMatrix> sources;
  for (int n : config.n_list)
    sources.emplace(n, sample_matrix(spec, n, static_cast<int>(config.N),
                                     RngStream::derive_key(
                                         config.seed, {streams::kSourceMatrix,
                                                       static_cast<std::uint64_t>(n)})));
  std::map<std::pair<int, int>, KrOperator> operators;
  for (int n : config.n_list)
    for (KrMode mode : modes)
      operators.emplace(
          std::make_pair(n, static_cast<int>(mode)),
          KrOperator::build(sources.at(n), mode,
                            pick_representation(n, config.N, config.explicit_budget),
                            config.explicit_budget));

  parallel_for(static_cast<long>(points.size()), config.jobs, [&](long i) {
    Point& point = points[i];
    const KrOperator& op =
        operators.at(std::make_pair(point.n, static_cast<int>(point.mode)));
    const std::size_t count = binomial_capped(
        static_cast<int>(config.N), point.s, config.enumeration_budget);
    if (count <= config.enumeration_budget) {
      point.estimate = delta_exact(op, point.s, config.enumeration_budget);
      point.estimate.seed = point.row_seed;
    } else {
      point.estimate = delta_greedy(op, point.s,
                                    static_cast<int>(config.trials),
                                    point.row_seed);
      point.downgraded = true;
    }
  });

  // theory overlay; xi falls back to an empirical psi_1 fit per n
  TheoryBoundParams params = config.theory.value_or(TheoryBoundParams{});
  std::map<int, double> xi_by_n;
  for (int n : config.n_list) {
    if (params.xi || params.psi) {
      xi_by_n[n] = params.resolved_xi();
    } else {
      const std::uint64_t key = RngStream::derive_key(
          config.seed, {streams::kUnitVector, static_cast<std::uint64_t>(n)});
      const MarginalSampleSet set =
          sample_marginals(spec, n, random_unit_vector(n * n, key), 20000, key,
                           "random-unit");
      const double psi = psi_alpha_estimate(set, 1, config.p_max);
      xi_by_n[n] = psi * params.K + params.Kprime;
    }
  }

  RowSink sink({"s", "delta", "method", "n", "N", "family", "mode", "seed",
                "theory_bound", "sparsity_budget", "note"});
  for (const Point& point : points) {
    TheoryBoundParams row_params = params;
    row_params.xi = xi_by_n.at(point.n);
    const double bound =
        theory_bound(point.s, static_cast<long>(point.n) * point.n, config.N,
                     row_params);
    const long budget =
        sparsity_budget(point.n, config.N, row_params.c_xi_delta);
    if (point.downgraded) {
      report.downgraded = true;
      report.warnings.push_back(
          "s=" + std::to_string(point.s) +
          ": exact enumeration over budget, downgraded to greedy");
    }
    sink.add({point.s, point.estimate.delta,
              rip_method_name(point.estimate.method), point.n, config.N,
              family_name(config.family), mode_label(point.mode),
              point.row_seed, bound, budget,
              point.downgraded ? "downgraded-to-greedy" : ""});
  }
  json xi_echo = json::object();
  for (const auto& [n, xi] : xi_by_n) xi_echo[std::to_string(n)] = xi;
  report.extra["xi_by_n"] = xi_echo;
  report.table = std::move(sink).table();
  report.rows = std::move(sink).rows();
  return report;
}

ExperimentReport run_phase_transition(const ExperimentConfig& config) {
  ExperimentReport report;
  report.config = config;
  report.config_hash = config.content_hash();
  if (config.trials < 20)
    report.warnings.push_back(
        "phase: fewer than 20 trials per point gives noisy rates");

  const DistributionSpec spec = DistributionSpec::make(config.family);
  const std::vector<KrMode> modes = config.selected_modes();
  const AmplitudeModel amplitudes = config.amplitudes == "unit"
                                        ? AmplitudeModel::UnitSigns
                                        : AmplitudeModel::GaussianAmps;

  struct TrialResult {
    bool success = false;
    int iterations = 0;
    double residual = 0.0;
    std::uint64_t seed = 0;
  };
  struct Cell {
    int n;
    int s;
    KrMode mode;
    std::vector<TrialResult> trials;
  };
  std::vector<Cell> cells;
  for (int n : config.n_list)
    for (int s : config.s_list)
      for (KrMode mode : modes)
        cells.push_back({n, s, mode, std::vector<TrialResult>(config.trials)});

  parallel_for(
      static_cast<long>(cells.size()) * config.trials, config.jobs,
      [&](long task) {
        Cell& cell = cells[task / config.trials];
        const long t = task % config.trials;
        // the trial seed is mode-independent: centered and uncentered see
        // the same source matrix, support and amplitudes
        const std::uint64_t trial_seed = RngStream::derive_key(
            config.seed,
            {streams::kPhasePoint, static_cast<std::uint64_t>(cell.n),
             static_cast<std::uint64_t>(cell.s), streams::kTrial,
             static_cast<std::uint64_t>(t)});
        const ColumnMatrix source = sample_matrix(
            spec, cell.n, static_cast<int>(config.N),
            RngStream::derive_key(trial_seed, {streams::kSourceMatrix}));
        const KrOperator op = KrOperator::build(
            source, cell.mode,
            pick_representation(cell.n, config.N, config.explicit_budget),
            config.explicit_budget);
        const RecoveryProblem problem =
            synth_problem(op, cell.s, amplitudes, config.noise_sigma, trial_seed);
        const RecoveryResult result = solve_trial(config, problem, cell.s);
        TrialResult& slot = cell.trials[t];
        slot.success = success(result, problem, config.solver.rel_tol);
        slot.iterations = result.iterations;
        slot.residual = result.residual_norm;
        slot.seed = trial_seed;
      });

  RowSink grid({"family", "mode", "n", "N", "s", "solver", "noise_sigma",
                "trials", "successes", "success_rate", "seed"});
  RowSink per_trial({"family", "mode", "n", "N", "s", "solver", "noise_sigma",
                     "seed", "success", "iterations", "residual"});
  std::map<std::tuple<int, int, int>, double> rates;
  for (const Cell& cell : cells) {
    long successes = 0;
    for (const TrialResult& trial : cell.trials) {
      successes += trial.success ? 1 : 0;
      per_trial.add({family_name(config.family), mode_label(cell.mode), cell.n,
                     config.N, cell.s, config.solver.name, config.noise_sigma,
                     trial.seed, trial.success, trial.iterations,
                     trial.residual});
    }
    const double rate =
        static_cast<double>(successes) / static_cast<double>(config.trials);
    rates[{cell.n, cell.s, static_cast<int>(cell.mode)}] = rate;
    grid.add({family_name(config.family), mode_label(cell.mode), cell.n,
              config.N, cell.s, config.solver.name, config.noise_sigma,
              config.trials, successes, rate, config.seed});
  }

  if (modes.size() == 2) {
    // the sweep doubles as its own pilot: report where the centered and
    // uncentered success rates separate the most
    json separations = json::array();
    for (int n : config.n_list) {
      int s_star = -1;
      double best_gap = -2.0;
      for (int s : config.s_list) {
        const double gap =
            rates.at({n, s, static_cast<int>(KrMode::Centered)}) -
            rates.at({n, s, static_cast<int>(KrMode::Uncentered)});
        if (gap > best_gap) {
          best_gap = gap;
          s_star = s;
        }
      }
      separations.push_back(
          {{"n", n},
           {"s_star", s_star},
           {"gap", best_gap},
           {"centered_rate",
            rates.at({n, s_star, static_cast<int>(KrMode::Centered)})},
           {"uncentered_rate",
            rates.at({n, s_star, static_cast<int>(KrMode::Uncentered)})}});
    }
    report.extra["separation"] = separations;
  }

  report.table = std::move(grid).table();
  report.rows = std::move(grid).rows();
  report.trial_table = std::move(per_trial).table();
  return report;
}

ExperimentReport run_concentration(const ExperimentConfig& config) {
  ExperimentReport report;
  report.config = config;
  report.config_hash = config.content_hash();

  const DistributionSpec spec = DistributionSpec::make(config.family);
  const std::vector<ConcentrationRow> rows = norm_concentration_experiment(
      spec, config.n_list, static_cast<int>(config.N), config.trials,
      config.t_grid, config.seed, config.jobs);

  RowSink sink({"family", "n", "t", "frequency", "trials",
                "side_condition_ok", "seed"});
  for (const ConcentrationRow& row : rows) {
    if (!row.side_condition_ok)
      report.warnings.push_back(
          "n=" + std::to_string(row.n) + ", t=" + format_double(row.t) +
          ": small-n side condition violated; row flagged");
    sink.add({family_name(config.family), row.n, row.t, row.frequency,
              row.trials, row.side_condition_ok, config.seed});
  }
  report.table = std::move(sink).table();
  report.rows = std::move(sink).rows();
  return report;
}

ExperimentReport run_tails(const ExperimentConfig& config) {
  ExperimentReport report;
  report.config = config;
  report.config_hash = config.content_hash();

  const DistributionSpec spec = DistributionSpec::make(config.family);

  struct Row {
    int n;
    std::uint64_t row_seed;
    double psi1 = 0.0, psi2 = 0.0, raw_m2 = 0.0;
    TailReport tail;
  };
  std::vector<Row> rows(config.n_list.size());
  parallel_for(static_cast<long>(rows.size()), config.jobs, [&](long i) {
    Row& row = rows[i];
    row.n = config.n_list[i];
    row.row_seed = RngStream::derive_key(
        config.seed, {streams::kTailsPoint, static_cast<std::uint64_t>(row.n)});
    const Eigen::VectorXd y = random_unit_vector(
        row.n * row.n,
        RngStream::derive_key(config.seed, {streams::kUnitVector,
                                            static_cast<std::uint64_t>(row.n)}));
    const MarginalSampleSet set = sample_marginals(
        spec, row.n, y, config.samples, row.row_seed, "random-unit");
    row.psi1 = psi_alpha_estimate(set, 1, config.p_max);
    row.psi2 = psi_alpha_estimate(set, 2, config.p_max);
    row.raw_m2 = raw_quadratic_second_moment(
        spec, row.n, config.samples,
        RngStream::derive_key(row.row_seed, {streams::kMarginal}));

    std::vector<double> grid = config.t_grid;
    if (grid.empty()) {
      double top = 0.0;
      for (double z : set.samples) top = std::max(top, std::abs(z));
      if (top > 0.0)
        for (int k = 1; k <= 15; ++k) grid.push_back(top * k / 16.0);
    }
    row.tail = make_tail_report(set, 1, config.p_max, grid);
  });

  RowSink sink({"family", "n", "samples", "p_max", "psi1_estimate",
                "psi2_estimate", "raw_identity_second_moment", "seed"});
  json curves = json::array();
  for (const Row& row : rows) {
    sink.add({family_name(config.family), row.n, config.samples, config.p_max,
              row.psi1, row.psi2, row.raw_m2, row.row_seed});
    json moment_curve = json::array();
    for (const auto& [p, value] : row.tail.moment_curve)
      moment_curve.push_back({{"p", p}, {"moment", value}});
    json tail_points = json::array();
    for (const TailPoint& point : row.tail.tail_curve)
      tail_points.push_back({{"t", point.t},
                             {"log_survival", point.exceedances == 0
                                                  ? json()
                                                  : json(point.log_survival)},
                             {"exceedances", point.exceedances},
                             {"reliable", point.reliable}});
    curves.push_back({{"n", row.n},
                      {"alpha", row.tail.alpha},
                      {"psi_alpha_estimate", row.tail.psi_alpha_estimate},
                      {"moment_curve", moment_curve},
                      {"tail_curve", tail_points}});
  }
  report.extra["tail_reports"] = curves;
  report.table = std::move(sink).table();
  report.rows = std::move(sink).rows();
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  switch (config.kind) {
    case ExperimentKind::KappaTable: report = run_kappa_table(config); break;
    case ExperimentKind::RipSweep: report = run_rip_sweep(config); break;
    case ExperimentKind::PhaseTransition:
      report = run_phase_transition(config);
      break;
    case ExperimentKind::Concentration:
      report = run_concentration(config);
      break;
    case ExperimentKind::Tails: report = run_tails(config); break;
  }
  const auto end = std::chrono::steady_clock::now();
  report.wall_ms =
      std::chrono::duration<double, std::milli>(end - start).count();
  return report;
}

}  // namespace krip
