#include "krip/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace krip {

namespace {

std::vector<int> sorted_support(const Eigen::VectorXd& x) {
  std::vector<int> out;
  for (int i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) out.push_back(i);
  return out;
}

double lasso_objective(const RecoveryProblem& problem, double lambda,
                       const Eigen::VectorXd& x) {
  const double r = (problem.op->apply(x) - problem.y).squaredNorm();
  return 0.5 * r + lambda * x.lpNorm<1>();
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  return v.unaryExpr([t](double z) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
  });
}

}  // namespace

std::vector<int> top_k_support(const Eigen::VectorXd& x, int k) {
  const int N = static_cast<int>(x.size());
  k = std::min(k, N);
  std::vector<int> idx(N);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&x](int a, int b) {
                      const double fa = std::abs(x[a]), fb = std::abs(x[b]);
                      if (fa != fb) return fa > fb;
                      return a < b;
                    });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

RecoveryProblem synth_problem(const KrOperator& op, int s,
                              AmplitudeModel amplitudes, double noise_sigma,
                              std::uint64_t seed) {
  const int N = op.cols();
  if (s < 1 || s > N)
    throw std::invalid_argument("synth_problem: need 1 <= s <= N");
  if (noise_sigma < 0.0)
    throw std::invalid_argument("synth_problem: noise_sigma >= 0");

  RecoveryProblem problem;
  problem.op = &op;
  problem.s = s;
  problem.noise_sigma = noise_sigma;
  problem.seed = seed;

  RngStream support_stream = RngStream::derive(seed, {streams::kSupport});
  std::vector<int> pool(N);
  std::iota(pool.begin(), pool.end(), 0);
  for (int k = 0; k < s; ++k) {
    const int j = k + static_cast<int>(support_stream.below(N - k));
    std::swap(pool[k], pool[j]);
  }
  std::sort(pool.begin(), pool.begin() + s);

  RngStream amp_stream = RngStream::derive(seed, {streams::kAmplitude});
  problem.x_true = Eigen::VectorXd::Zero(N);
  for (int k = 0; k < s; ++k) {
    const double v = amplitudes == AmplitudeModel::UnitSigns
                         ? amp_stream.rademacher()
                         : amp_stream.normal();
    problem.x_true[pool[k]] = v;
  }

  problem.y = op.apply(problem.x_true);
  if (noise_sigma > 0.0) {
    RngStream noise_stream = RngStream::derive(seed, {streams::kNoise});
    for (int i = 0; i < problem.y.size(); ++i)
      problem.y[i] += noise_sigma * noise_stream.normal();
  }
  return problem;
}

double operator_norm(const KrOperator& op, int iters, std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("operator_norm: iters >= 1");
  RngStream stream = RngStream::derive(seed, {streams::kPowerIter});
  Eigen::VectorXd v(op.cols());
  for (int i = 0; i < v.size(); ++i) v[i] = stream.normal();
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd w = op.adjoint(op.apply(v));
    const double norm = w.norm();
    if (norm <= 1e-300) return 0.0;
    v = w / norm;
    estimate = std::sqrt(v.dot(op.adjoint(op.apply(v))));
  }
  return estimate;
}

RecoveryResult iht(const RecoveryProblem& problem, int s, int max_iters,
                   double tol, std::optional<double> step) {
  const KrOperator& op = *problem.op;
  const int N = op.cols();
  if (s < 1 || s > N) throw std::invalid_argument("iht: need 1 <= s <= N");

  double mu = 0.0;
  if (step) {
    mu = *step;
  } else {
    const double nrm = operator_norm(op, 100, problem.seed);
    mu = 0.9 / (nrm * nrm);
  }

  const double y_norm = problem.y.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
  RecoveryResult result;
  result.converged = false;

  int it = 0;
  for (; it < max_iters; ++it) {
    const Eigen::VectorXd g = op.adjoint(problem.y - op.apply(x));
    const Eigen::VectorXd z = x + mu * g;
    Eigen::VectorXd next = Eigen::VectorXd::Zero(N);
    for (int idx : top_k_support(z, s)) next[idx] = z[idx];
    const double change = (next - x).norm();
    x = std::move(next);
    if (x.norm() > 1e6 * std::max(y_norm, 1e-300)) {
      result.converged = false;
      ++it;
      break;
    }
    if (change < tol) {
      result.converged = true;
      ++it;
      break;
    }
  }
  result.iterations = it;
  result.x_hat = std::move(x);
  result.residual_norm = (op.apply(result.x_hat) - problem.y).norm();
  result.support_recovered =
      top_k_support(result.x_hat, problem.s) == sorted_support(problem.x_true);
  return result;
}

RecoveryResult fista_lasso(const RecoveryProblem& problem, double lambda,
                           int max_iters, double tol,
                           std::optional<Eigen::VectorXd> x0) {
  if (lambda <= 0.0) throw std::invalid_argument("fista_lasso: lambda > 0");
  const KrOperator& op = *problem.op;
  const int N = op.cols();

  const double nrm = operator_norm(op, 200, problem.seed);
  const double L = std::max(1.02 * nrm * nrm, 1e-12);

  Eigen::VectorXd x = x0 ? std::move(*x0) : Eigen::VectorXd::Zero(N);
  if (x.size() != N)
    throw std::invalid_argument("fista_lasso: warm start has wrong length");
  Eigen::VectorXd momentum = x;
  double t = 1.0;
  double objective = lasso_objective(problem, lambda, x);

  RecoveryResult result;
  result.converged = false;
  int it = 0;
  for (; it < max_iters; ++it) {
    Eigen::VectorXd grad = op.adjoint(op.apply(momentum) - problem.y);
    Eigen::VectorXd next = soft_threshold(momentum - grad / L, lambda / L);
    double next_objective = lasso_objective(problem, lambda, next);
    if (next_objective > objective) {
      // function-value restart: plain proximal step from x descends
      t = 1.0;
      grad = op.adjoint(op.apply(x) - problem.y);
      next = soft_threshold(x - grad / L, lambda / L);
      next_objective = lasso_objective(problem, lambda, next);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    momentum = next + ((t - 1.0) / t_next) * (next - x);
    const double change = (next - x).norm();
    x = std::move(next);
    objective = next_objective;
    t = t_next;
    if (change < tol) {
      result.converged = true;
      ++it;
      break;
    }
  }

  // least-squares debias on the detected support; kept only if it does not
  // worsen the objective
  const std::vector<int> support = sorted_support(x);
  if (!support.empty() &&
      support.size() <= static_cast<std::size_t>(op.rows())) {
    Eigen::MatrixXd cols(op.rows(), support.size());
    for (std::size_t k = 0; k < support.size(); ++k)
      cols.col(k) = op.scaled_column(support[k]);
    const Eigen::VectorXd z = cols.colPivHouseholderQr().solve(problem.y);
    Eigen::VectorXd debiased = Eigen::VectorXd::Zero(N);
    for (std::size_t k = 0; k < support.size(); ++k)
      debiased[support[k]] = z[k];
    if (lasso_objective(problem, lambda, debiased) <= objective)
      x = std::move(debiased);
  }

  result.iterations = it;
  result.x_hat = std::move(x);
  result.residual_norm = (op.apply(result.x_hat) - problem.y).norm();
  result.support_recovered =
      top_k_support(result.x_hat, problem.s) == sorted_support(problem.x_true);
  return result;
}

bool success(const RecoveryResult& result, const RecoveryProblem& problem,
             double rel_tol) {
  const std::vector<int> truth = sorted_support(problem.x_true);
  if (top_k_support(result.x_hat, static_cast<int>(truth.size())) != truth)
    return false;
  const double err = (result.x_hat - problem.x_true).norm();
  return err <= rel_tol * problem.x_true.norm();
}

}  // namespace krip
