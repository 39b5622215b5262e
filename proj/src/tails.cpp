#include "krip/tails.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "krip/kr_operator.hpp"
#include "krip/parallel.hpp"

namespace krip {

MarginalSampleSet sample_marginals(const DistributionSpec& spec, int n,
                                   const Eigen::VectorXd& y, long trials,
                                   std::uint64_t seed,
                                   const std::string& y_descriptor) {
  if (trials < 1) throw std::invalid_argument("sample_marginals: trials >= 1");
  if (y.size() != static_cast<Eigen::Index>(n) * n)
    throw std::invalid_argument("sample_marginals: y must have length n^2");
  if (std::abs(y.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("sample_marginals: y must have unit norm");

  Eigen::MatrixXd Y(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Y(i, j) = y[i * n + j];
  const double trace = Y.trace();
  const double root = std::sqrt(kappa(spec, n));

  MarginalSampleSet set;
  set.spec = spec;
  set.n = n;
  set.y_descriptor = y_descriptor;
  set.seed = seed;
  set.samples.resize(trials);
  for (long t = 0; t < trials; ++t) {
    RngStream stream = RngStream::derive(
        seed, {streams::kMarginal, static_cast<std::uint64_t>(t)});
    const Eigen::VectorXd a = sample_column(spec, n, stream);
    set.samples[t] = root * (a.dot(Y * a) - trace);
  }
  return set;
}

double psi_alpha_estimate(const MarginalSampleSet& set, int alpha, int p_max) {
  if (set.samples.empty())
    throw std::invalid_argument("psi_alpha_estimate: empty sample set");
  if (alpha != 1 && alpha != 2)
    throw std::invalid_argument("psi_alpha_estimate: alpha must be 1 or 2");
  if (p_max < 2) throw std::invalid_argument("psi_alpha_estimate: p_max >= 2");

  const double count = static_cast<double>(set.samples.size());
  double best = 0.0;
  for (int p = 1; p <= p_max; ++p) {
    double sum = 0.0;
    for (double z : set.samples) sum += std::pow(std::abs(z), p);
    const double moment = std::pow(sum / count, 1.0 / p);
    const double denom =
        alpha == 1 ? static_cast<double>(p) : std::sqrt(static_cast<double>(p));
    best = std::max(best, moment / denom);
  }
  return best;
}

std::vector<TailPoint> tail_curve(const MarginalSampleSet& set,
                                  const std::vector<double>& t_grid) {
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (t_grid[k] <= 0.0)
      throw std::invalid_argument("tail_curve: grid must be positive");
    if (k > 0 && t_grid[k] <= t_grid[k - 1])
      throw std::invalid_argument("tail_curve: grid must be increasing");
  }
  std::vector<double> magnitudes(set.samples.size());
  std::transform(set.samples.begin(), set.samples.end(), magnitudes.begin(),
                 [](double z) { return std::abs(z); });
  std::sort(magnitudes.begin(), magnitudes.end());

  const double total = static_cast<double>(magnitudes.size());
  std::vector<TailPoint> curve;
  curve.reserve(t_grid.size());
  for (double t : t_grid) {
    TailPoint point;
    point.t = t;
    const auto it =
        std::upper_bound(magnitudes.begin(), magnitudes.end(), t);
    point.exceedances = static_cast<long>(magnitudes.end() - it);
    point.reliable = point.exceedances >= 10;
    point.log_survival =
        point.exceedances == 0
            ? -std::numeric_limits<double>::infinity()
            : std::log(static_cast<double>(point.exceedances) / total);
    curve.push_back(point);
  }
  return curve;
}

NormDeviationTerms norm_deviation_terms(const DistributionSpec& spec, int n,
                                        double source_sq_norm) {
  const double nn = static_cast<double>(n);
  const double k = kappa(spec, n);
  const double shift = source_sq_norm - nn;
  NormDeviationTerms terms;
  terms.quadratic = k * shift * shift / (nn * nn);
  terms.linear = 2.0 * k * (nn - 1.0) * shift / (nn * nn);
  if (spec.family == Family::Rademacher || spec.family == Family::Spherical) {
    // exact norm: E a^4 contribution reduces to zero through kappa
    terms.offset =
        spec.family == Family::Rademacher ? 0.0 : 1.0 - k * (nn - 1.0) / nn;
  } else {
    const double e4 = fourth_moment(spec);
    terms.offset = (e4 - 1.0) / (nn - 2.0 + e4);
  }
  terms.total = terms.quadratic + terms.linear - terms.offset;
  return terms;
}

double raw_quadratic_second_moment(const DistributionSpec& spec, int n,
                                   long trials, std::uint64_t seed) {
  if (trials < 1)
    throw std::invalid_argument("raw_quadratic_second_moment: trials >= 1");
  double sum = 0.0;
  for (long t = 0; t < trials; ++t) {
    RngStream stream = RngStream::derive(
        seed, {streams::kMarginal, static_cast<std::uint64_t>(t)});
    const Eigen::VectorXd a = sample_column(spec, n, stream);
    const double s = a.squaredNorm();
    sum += s * s;
  }
  return sum / static_cast<double>(trials);
}

double max_column_deviation(const DistributionSpec& spec,
                            const Eigen::MatrixXd& entries) {
  const int n = static_cast<int>(entries.rows());
  double worst = 0.0;
  for (int i = 0; i < entries.cols(); ++i) {
    const NormDeviationTerms terms =
        norm_deviation_terms(spec, n, entries.col(i).squaredNorm());
    worst = std::max(worst, std::abs(terms.total));
  }
  return worst;
}

std::vector<ConcentrationRow> norm_concentration_experiment(
    const DistributionSpec& spec, const std::vector<int>& n_list, int N,
    long trials, const std::vector<double>& t_grid, std::uint64_t seed,
    int jobs) {
  if (N < 1 || trials < 1)
    throw std::invalid_argument("norm_concentration_experiment: N, trials >= 1");
  if (t_grid.empty())
    throw std::invalid_argument("norm_concentration_experiment: empty grid");

  const bool exact_norm = spec.family == Family::Rademacher ||
                          spec.family == Family::Spherical;
  const double e4 = exact_norm ? 1.0 : fourth_moment(spec);

  // per-(n, trial) substreams, so the reduction below does not depend on
  // the parallelism degree
  std::vector<double> all_devs(n_list.size() * trials);
  parallel_for(static_cast<long>(all_devs.size()), jobs, [&](long task) {
    const int n = n_list[task / trials];
    const long t = task % trials;
    const std::uint64_t matrix_seed = RngStream::derive_key(
        seed, {streams::kConcPoint, static_cast<std::uint64_t>(n),
               static_cast<std::uint64_t>(t)});
    const ColumnMatrix m = sample_matrix(spec, n, N, matrix_seed);
    all_devs[task] = max_column_deviation(spec, m.entries);
  });

  std::vector<ConcentrationRow> rows;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const int n = n_list[ni];
    const double* max_devs = all_devs.data() + ni * trials;
    for (double t : t_grid) {
      ConcentrationRow row;
      row.n = n;
      row.t = t;
      row.trials = trials;
      row.side_condition_ok =
          static_cast<double>(n) >= 1.0 + (e4 - 1.0) * (3.0 / t - 1.0);
      long hits = 0;
      for (long k = 0; k < trials; ++k)
        if (max_devs[k] >= t) ++hits;
      row.frequency = static_cast<double>(hits) / static_cast<double>(trials);
      rows.push_back(row);
    }
  }
  return rows;
}

TailReport make_tail_report(const MarginalSampleSet& set, int alpha, int p_max,
                            const std::vector<double>& t_grid) {
  TailReport report;
  report.alpha = alpha;
  report.psi_alpha_estimate = psi_alpha_estimate(set, alpha, p_max);
  const double count = static_cast<double>(set.samples.size());
  for (int p = 1; p <= p_max; ++p) {
    double sum = 0.0;
    for (double z : set.samples) sum += std::pow(std::abs(z), p);
    report.moment_curve.emplace_back(p, std::pow(sum / count, 1.0 / p));
  }
  report.tail_curve = tail_curve(set, t_grid);
  return report;
}

}  // namespace krip
