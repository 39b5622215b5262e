#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "krip/kr_operator.hpp"

namespace krip {

enum class AmplitudeModel { UnitSigns, GaussianAmps };

/// A synthetic sparse-recovery instance y = op(x_true) + noise.
struct RecoveryProblem {
  const KrOperator* op = nullptr;
  Eigen::VectorXd x_true;
  Eigen::VectorXd y;
  int s = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct RecoveryResult {
  Eigen::VectorXd x_hat;
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  bool support_recovered = false;
};

/// Uniformly random size-s support with +-1 or standard normal amplitudes;
/// reproducible from the seed alone.
RecoveryProblem synth_problem(const KrOperator& op, int s,
                              AmplitudeModel amplitudes, double noise_sigma,
                              std::uint64_t seed);

/// Power-iteration estimate of the spectral norm of the scaled operator.
double operator_norm(const KrOperator& op, int iters, std::uint64_t seed);

/// Iterative hard thresholding: x <- H_s(x + mu * adjoint(y - apply(x)))
/// with H_s keeping the s largest magnitudes (ties to the lower index).
/// Default step is 0.9 / ||op||^2.
RecoveryResult iht(const RecoveryProblem& problem, int s, int max_iters,
                   double tol, std::optional<double> step = std::nullopt);

/// Accelerated proximal gradient for 0.5 ||apply(x) - y||^2 + lambda ||x||_1
/// with function-value restarts, then least-squares debiasing on the
/// detected support. x0 warm-starts the iteration (continuation).
RecoveryResult fista_lasso(const RecoveryProblem& problem, double lambda,
                           int max_iters, double tol,
                           std::optional<Eigen::VectorXd> x0 = std::nullopt);

/// True iff the top-s support of x_hat matches the true support and
/// ||x_hat - x_true|| <= rel_tol ||x_true||.
bool success(const RecoveryResult& result, const RecoveryProblem& problem,
             double rel_tol = 1e-3);

/// Indices of the k largest-magnitude entries, ties broken by lower index.
std::vector<int> top_k_support(const Eigen::VectorXd& x, int k);

}  // namespace krip
