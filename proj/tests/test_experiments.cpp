#include <doctest.h>

#include <cmath>

#include "krip/experiments.hpp"

using namespace krip;

namespace {

ExperimentConfig small_rip_config() {
  ExperimentConfig config;
  config.kind = ExperimentKind::RipSweep;
  config.family = Family::Gaussian;
  config.mode = ModeSelect::Both;
  config.n_list = {4};
  config.N = 20;
  config.s_list = {1, 2, 3};
  config.trials = 10;
  config.seed = 77;
  config.jobs = 1;
  TheoryBoundParams theory;
  theory.xi = 1.0;
  config.theory = theory;
  return config;
}

ExperimentConfig small_phase_config() {
  ExperimentConfig config;
  config.kind = ExperimentKind::PhaseTransition;
  config.family = Family::Spherical;
  config.mode = ModeSelect::Both;
  config.n_list = {4};
  config.N = 18;
  config.s_list = {1, 9};
  config.trials = 8;
  config.seed = 5;
  config.jobs = 1;
  config.solver.max_iters = 300;
  return config;
}

}  // namespace

TEST_CASE("kv config round-trips through its canonical text") {
  ExperimentConfig config = small_phase_config();
  config.noise_sigma = 0.05;
  config.solver.step = 0.125;
  config.t_grid = {0.25, 0.5};
  const ExperimentConfig reparsed =
      ExperimentConfig::parse_kv(config.canonical_text());
  CHECK(reparsed == config);
  CHECK(reparsed.content_hash() == config.content_hash());
}

TEST_CASE("json configs parse to the same result as kv") {
  const std::string kv = R"(
experiment = rip
family = gaussian
mode = both
n = 4
N = 20
s_list = 1, 2, 3
seed = 9

[theory]
xi = 1.25
)";
  const std::string js = R"({
  "experiment": "rip",
  "family": "gaussian",
  "mode": "both",
  "n": 4,
  "N": 20,
  "s_list": [1, 2, 3],
  "seed": 9,
  "theory": {"xi": 1.25}
})";
  const ExperimentConfig a = ExperimentConfig::parse_kv(kv);
  const ExperimentConfig b = ExperimentConfig::parse_json(js);
  CHECK(a == b);
}

TEST_CASE("config validation failures") {
  CHECK_THROWS_AS(ExperimentConfig::parse_kv("family = gaussian\n"),
                  ConfigError);  // no experiment
  CHECK_THROWS_AS(
      ExperimentConfig::parse_kv("experiment = rip\nfamily = gaussian\n"
                                 "n = 4\nN = 8\ns_list = 1\n"),
      ConfigError);  // N < n^2
  CHECK_THROWS_AS(
      ExperimentConfig::parse_kv("experiment = kappa\nn = 4\nwat = 1\n"),
      ConfigError);  // unknown key
  CHECK_THROWS_AS(ExperimentConfig::parse_kv("experiment = rip\nn = 4\n",
                                             ExperimentKind::KappaTable),
                  ConfigError);  // kind mismatch
  CHECK_THROWS_AS(
      ExperimentConfig::parse_kv("experiment = conc\nn = 4\nN = 8\n"
                                 "t_grid = 0.5, 0.25\n"),
      ConfigError);  // non-increasing grid
}

TEST_CASE("kappa table rows match the closed forms") {
  ExperimentConfig config;
  config.kind = ExperimentKind::KappaTable;
  config.families = {Family::Rademacher, Family::Gaussian};
  config.n_list = {4, 8};
  config.samples = 20000;
  config.seed = 3;
  config.jobs = 1;
  const ExperimentReport report = run_kappa_table(config);
  REQUIRE(report.rows.size() == 4);
  for (const auto& row : report.rows) {
    const double analytic = row["kappa_analytic"].get<double>();
    const double mc = row["kappa_mc"].get<double>();
    CHECK(std::abs(mc - analytic) / analytic <= 0.02);
  }
  // rademacher rows are exact
  CHECK(report.rows[0]["rel_gap"].get<double>() <= 1e-14);
}

TEST_CASE("rip sweep: monotone deltas, bound and budget columns") {
  const ExperimentReport report = run_rip_sweep(small_rip_config());
  REQUIRE(report.rows.size() == 6);  // 2 modes x 3 sparsities
  double prev = -1.0;
  for (const auto& row : report.rows) {
    if (row["mode"] == "centered") {
      const double delta = row["delta"].get<double>();
      CHECK(delta >= prev - 1e-14);
      prev = delta;
      CHECK(row["method"] == "exact");
    }
    CHECK(row["theory_bound"].get<double>() > 0.0);
    CHECK(row["sparsity_budget"].get<long>() >= 1);
  }
  CHECK_FALSE(report.downgraded);
}

TEST_CASE("rip sweep downgrades over-budget enumerations to greedy") {
  ExperimentConfig config = small_rip_config();
  config.mode = ModeSelect::Centered;
  config.enumeration_budget = 4;  // forces greedy beyond s = 1
  const ExperimentReport report = run_rip_sweep(config);
  CHECK(report.downgraded);
  bool saw_greedy = false;
  for (const auto& row : report.rows)
    if (row["method"] == "greedy") {
      saw_greedy = true;
      CHECK(row["note"] == "downgraded-to-greedy");
    }
  CHECK(saw_greedy);
  CHECK_FALSE(report.warnings.empty());
}

TEST_CASE("experiment CSV bytes are independent of the parallelism degree") {
  ExperimentConfig serial = small_phase_config();
  ExperimentConfig parallel = small_phase_config();
  parallel.jobs = 4;
  const ExperimentReport a = run_experiment(serial);
  const ExperimentReport b = run_experiment(parallel);
  CHECK(a.table.to_string() == b.table.to_string());
  REQUIRE(a.trial_table.has_value());
  REQUIRE(b.trial_table.has_value());
  CHECK(a.trial_table->to_string() == b.trial_table->to_string());

  ExperimentConfig rip1 = small_rip_config();
  ExperimentConfig rip2 = small_rip_config();
  rip2.jobs = 3;
  CHECK(run_experiment(rip1).table.to_string() ==
        run_experiment(rip2).table.to_string());
}

TEST_CASE("a phase grid row regenerates in isolation from its coordinates") {
  const ExperimentReport full = run_experiment(small_phase_config());

  ExperimentConfig narrowed = small_phase_config();
  narrowed.s_list = {9};
  narrowed.mode = ModeSelect::Uncentered;
  const ExperimentReport single = run_experiment(narrowed);
  REQUIRE(single.rows.size() == 1);

  bool matched = false;
  for (const auto& row : full.rows)
    if (row["s"] == 9 && row["mode"] == "uncentered") {
      CHECK(row["success_rate"] == single.rows[0]["success_rate"]);
      CHECK(row["successes"] == single.rows[0]["successes"]);
      matched = true;
    }
  CHECK(matched);
}

TEST_CASE("phase report locates the separation sparsity") {
  const ExperimentReport report = run_experiment(small_phase_config());
  REQUIRE(report.extra.contains("separation"));
  const auto& sep = report.extra["separation"][0];
  CHECK(sep["s_star"].get<int>() >= 1);
  CHECK(sep["gap"].get<double>() ==
        doctest::Approx(sep["centered_rate"].get<double>() -
                        sep["uncentered_rate"].get<double>()));

  // trivial sparsity always recovers on the centered operator
  for (const auto& row : report.rows)
    if (row["s"] == 1 && row["mode"] == "centered")
      CHECK(row["success_rate"].get<double>() == 1.0);
}

TEST_CASE("dense targets are unrecoverable when m < N") {
  ExperimentConfig config = small_phase_config();
  config.mode = ModeSelect::Centered;
  config.s_list = {18};  // s = N, with m = 16 measurements
  config.trials = 6;
  const ExperimentReport report = run_experiment(config);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0]["success_rate"].get<double>() == 0.0);
}

TEST_CASE("rip sweep on a spherical source has zero delta at s = 1") {
  ExperimentConfig config = small_rip_config();
  config.family = Family::Spherical;
  config.mode = ModeSelect::Centered;
  config.s_list = {1};
  const ExperimentReport report = run_experiment(config);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0]["delta"].get<double>() <= 1e-10);
}

TEST_CASE("concentration runner mirrors the tails table") {
  ExperimentConfig config;
  config.kind = ExperimentKind::Concentration;
  config.family = Family::Rademacher;
  config.n_list = {4};
  config.N = 12;
  config.trials = 10;
  config.t_grid = {0.5};
  config.seed = 8;
  config.jobs = 1;
  const ExperimentReport report = run_experiment(config);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0]["frequency"].get<double>() == 0.0);
  CHECK(report.rows[0]["side_condition_ok"].get<bool>());
}

TEST_CASE("tails runner reports psi estimates and the raw second moment") {
  ExperimentConfig config;
  config.kind = ExperimentKind::Tails;
  config.family = Family::Gaussian;
  config.n_list = {4, 8};
  config.samples = 20000;
  config.seed = 13;
  config.jobs = 1;
  const ExperimentReport report = run_experiment(config);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0]["psi1_estimate"].get<double>() > 0.0);
  CHECK(report.rows[1]["raw_identity_second_moment"].get<double>() >
        report.rows[0]["raw_identity_second_moment"].get<double>());
  REQUIRE(report.extra.contains("tail_reports"));
  const auto& curve = report.extra["tail_reports"][0]["moment_curve"];
  CHECK(curve.size() == 8);
}

TEST_CASE("rip sweep estimates xi when no theory parameters are given") {
  ExperimentConfig config = small_rip_config();
  config.theory.reset();
  config.mode = ModeSelect::Centered;
  config.s_list = {1};
  const ExperimentReport report = run_rip_sweep(config);
  REQUIRE(report.extra.contains("xi_by_n"));
  const double xi = report.extra["xi_by_n"]["4"].get<double>();
  CHECK(xi > 1.0);  // psi * K + Kprime with K = Kprime = 1
  CHECK(report.rows[0]["theory_bound"].get<double>() > 0.0);
}

TEST_CASE("a rip row regenerates from a narrowed config") {
  const ExperimentReport full = run_experiment(small_rip_config());
  ExperimentConfig narrowed = small_rip_config();
  narrowed.s_list = {2};
  narrowed.mode = ModeSelect::Uncentered;
  const ExperimentReport single = run_experiment(narrowed);
  REQUIRE(single.rows.size() == 1);
  bool matched = false;
  for (const auto& row : full.rows)
    if (row["s"] == 2 && row["mode"] == "uncentered") {
      CHECK(row["delta"] == single.rows[0]["delta"]);
      CHECK(row["seed"] == single.rows[0]["seed"]);
      matched = true;
    }
  CHECK(matched);
}

TEST_CASE("json mirror carries hash, version and rows") {
  ExperimentConfig config;
  config.kind = ExperimentKind::KappaTable;
  config.families = {Family::Spherical};
  config.n_list = {4};
  config.samples = 500;
  config.seed = 1;
  config.jobs = 1;
  const ExperimentReport report = run_experiment(config);
  const nlohmann::json mirror = report.to_json();
  CHECK(mirror["config_hash"] == config.content_hash());
  CHECK(mirror["rows"].size() == 1);
  CHECK(mirror.contains("version"));
  CHECK(mirror.contains("wall_ms"));
}
