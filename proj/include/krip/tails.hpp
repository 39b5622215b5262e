#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "krip/ensembles.hpp"

namespace krip {

/// Draws of Z = <centered KR column, y> for a fixed unit vector y.
struct MarginalSampleSet {
  std::vector<double> samples;
  DistributionSpec spec;
  int n = 0;
  std::string y_descriptor;  // random-unit | vec-identity | basis | custom
  std::uint64_t seed = 0;
};

struct TailPoint {
  double t = 0.0;
  double log_survival = 0.0;  // log of empirical P(|Z| > t)
  long exceedances = 0;
  bool reliable = false;  // at least 10 exceedances
};

/// Samples Z = sqrt(kappa) (a^T Y a - tr Y) with Y the row-major reshape
/// of the unit vector y. Rejects non-unit y.
MarginalSampleSet sample_marginals(const DistributionSpec& spec, int n,
                                   const Eigen::VectorXd& y, long trials,
                                   std::uint64_t seed,
                                   const std::string& y_descriptor = "custom");

/// Moment-ratio psi_alpha estimate:
/// max over p in {1..p_max} of (E|Z|^p)^{1/p} / p^{1/alpha}.
double psi_alpha_estimate(const MarginalSampleSet& set, int alpha, int p_max);

/// Empirical log-survival of |Z| on an increasing positive grid.
std::vector<TailPoint> tail_curve(const MarginalSampleSet& set,
                                  const std::vector<double>& t_grid);

/// Terms of the column-norm deviation split. With S = ||a||^2,
/// ||col||^2/n^2 - 1 = quadratic + linear - offset, where quadratic and
/// offset are non-negative.
struct NormDeviationTerms {
  double quadratic = 0.0;  // kappa (S - n)^2 / n^2
  double linear = 0.0;     // 2 kappa (n - 1)(S - n) / n^2
  double offset = 0.0;     // (E a^4 - 1) / (n - 2 + E a^4)
  double total = 0.0;      // quadratic + linear - offset
};

NormDeviationTerms norm_deviation_terms(const DistributionSpec& spec, int n,
                                        double source_sq_norm);

/// Second moment of the unnormalized quadratic form a^T I a = ||a||^2;
/// grows like n^2 and motivates the centering.
double raw_quadratic_second_moment(const DistributionSpec& spec, int n,
                                   long trials, std::uint64_t seed);

struct ConcentrationRow {
  int n = 0;
  double t = 0.0;
  double frequency = 0.0;
  long trials = 0;
  bool side_condition_ok = false;
};

/// For each n and threshold t, the empirical frequency over `trials`
/// matrices of max_i | ||col_i||^2/n^2 - 1 | >= t. Rows violating the
/// small-n side condition n >= 1 + (E a^4 - 1)(3/t - 1) are flagged but
/// still computed; exactly normalized ensembles satisfy it vacuously.
std::vector<ConcentrationRow> norm_concentration_experiment(
    const DistributionSpec& spec, const std::vector<int>& n_list, int N,
    long trials, const std::vector<double>& t_grid, std::uint64_t seed,
    int jobs = 1);

/// psi_alpha norm of a sample set together with its moment and tail curves.
struct TailReport {
  double psi_alpha_estimate = 0.0;
  int alpha = 1;
  std::vector<std::pair<int, double>> moment_curve;  // (p, (E|Z|^p)^{1/p})
  std::vector<TailPoint> tail_curve;
};

TailReport make_tail_report(const MarginalSampleSet& set, int alpha, int p_max,
                            const std::vector<double>& t_grid);

/// max_i | ||col_i||^2/n^2 - 1 | of the centered KR columns of one matrix.
double max_column_deviation(const DistributionSpec& spec,
                            const Eigen::MatrixXd& entries);

}  // namespace krip
