#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "krip/kr_operator.hpp"

namespace krip {

enum class RipMethod { Exact, MonteCarlo, Greedy };

std::string rip_method_name(RipMethod method);

/// Sorted set of distinct column indices in [0, N).
struct SupportSet {
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
};

/// A restricted-isometry constant estimate for sparsity order s:
/// delta = max(lambda_max(G_S) - 1, 1 - lambda_min(G_S)) over the supports
/// inspected, where G_S is the Gram matrix of the scaled columns on S.
struct RipEstimate {
  int s = 0;
  double delta = 0.0;
  RipMethod method = RipMethod::Exact;
  SupportSet witness;
  long trials = 0;
  std::uint64_t seed = 0;
};

/// Fit parameters for the theoretical delta_s bound. The universal
/// constants are unspecified, so everything is user-tunable; xi can be
/// given directly or composed as psi * K + Kprime.
struct TheoryBoundParams {
  double C = 1.0;
  std::optional<double> xi;
  std::optional<double> psi;
  double K = 1.0;
  double Kprime = 1.0;
  double theta_prime = 0.0;
  double c_xi_delta = 1.0;

  double resolved_xi() const {
    if (xi) return *xi;
    if (psi) return *psi * K + Kprime;
    return 1.0;
  }
};

/// Gram matrix of the scaled columns restricted to S; entry (p, q) is
/// <col_{S_p}/n, col_{S_q}/n>. Duplicate or out-of-range indices rejected.
Eigen::MatrixXd gram_submatrix(const KrOperator& op, const SupportSet& S);

constexpr int kDefaultEigCrossover = 64;

/// Smallest and largest eigenvalue of a symmetric matrix: dense
/// eigendecomposition up to `dense_crossover`, shifted power iterations
/// above. Input must be symmetric within 1e-10.
std::pair<double, double> extreme_eigs(const Eigen::MatrixXd& G,
                                       int dense_crossover = kDefaultEigCrossover);

constexpr std::size_t kDefaultEnumerationBudget = 2'000'000;

/// Exact delta_s by enumeration of all C(N, s) supports. Throws when the
/// enumeration budget is exceeded.
RipEstimate delta_exact(const KrOperator& op, int s,
                        std::size_t budget = kDefaultEnumerationBudget);

/// Lower bound on delta_s: maximum deviation over `trials` uniformly
/// random supports.
RipEstimate delta_monte_carlo(const KrOperator& op, int s, long trials,
                              std::uint64_t seed);

/// Lower bound on delta_s by best-improvement local search over
/// single-index swaps; restart r starts from the same support as
/// Monte-Carlo trial r with the same seed, so greedy dominates it.
RipEstimate delta_greedy(const KrOperator& op, int s, int restarts,
                         std::uint64_t seed);

/// max_i | ||col_i/n||^2 - 1 |, which equals delta_1.
double column_norm_deviation(const KrOperator& op);

/// C xi^2 sqrt(s/m) log(e N sqrt(s/m) / s) + theta'.
double theory_bound(long s, long m, long N, const TheoryBoundParams& params);

/// floor(c n^2 / log^2(e N / (c n^2))), at least 1. Requires N >= n^2.
long sparsity_budget(int n, long N, double c);

/// C(N, s) capped at `cap` + 1 (overflow-safe).
std::size_t binomial_capped(int N, int s, std::size_t cap);

}  // namespace krip
