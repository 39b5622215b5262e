#include "krip/rip.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace krip {

namespace {

void validate_support(const SupportSet& S, int N) {
  if (S.indices.empty())
    throw std::invalid_argument("support must be non-empty");
  for (std::size_t k = 0; k < S.indices.size(); ++k) {
    const int idx = S.indices[k];
    if (idx < 0 || idx >= N)
      throw std::invalid_argument("support index out of range");
    if (k > 0 && idx <= S.indices[k - 1])
      throw std::invalid_argument(
          "support indices must be strictly increasing");
  }
}

// Scaled Gram lookups backed by the source inner products. The full N x N
// table is materialized below this column count; larger instances compute
// entries on demand.
constexpr int kFullGramLimit = 2048;

class GramTable {
 public:
  explicit GramTable(const KrOperator& op) : op_(op) {
    const int N = op.cols();
    diag_.resize(N);
    for (int i = 0; i < N; ++i) diag_[i] = op.scaled_gram_entry(i, i);
    if (N <= kFullGramLimit) {
      const Eigen::MatrixXd& A = op.source().entries;
      Eigen::MatrixXd dots = A.transpose() * A;
      const double n = static_cast<double>(op.n());
      const double s2 = op.scale() * op.scale();
      full_.resize(N, N);
      for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
          double ip = dots(i, j) * dots(i, j);
          if (op.mode() == KrMode::Centered)
            ip = op.kappa_value() *
                 (ip - op.source_sq_norm(i) - op.source_sq_norm(j) + n);
          full_(i, j) = ip * s2;
        }
      }
    }
  }

  double entry(int i, int j) const {
    if (full_.size() > 0) return full_(i, j);
    return op_.scaled_gram_entry(i, j);
  }

  double deviation(const std::vector<int>& S, int crossover) const {
    const int s = static_cast<int>(S.size());
    if (s == 1) return std::abs(entry(S[0], S[0]) - 1.0);
    Eigen::MatrixXd G(s, s);
    for (int q = 0; q < s; ++q)
      for (int p = 0; p < s; ++p) G(p, q) = entry(S[p], S[q]);
    auto [lo, hi] = extreme_eigs(G, crossover);
    return std::max(hi - 1.0, 1.0 - lo);
  }

  const Eigen::VectorXd& diag() const { return diag_; }

 private:
  const KrOperator& op_;
  Eigen::MatrixXd full_;
  Eigen::VectorXd diag_;
};

std::vector<int> random_support(int N, int s, RngStream& stream) {
  // Partial Fisher-Yates over 0..N-1.
  std::vector<int> pool(N);
  std::iota(pool.begin(), pool.end(), 0);
  for (int k = 0; k < s; ++k) {
    const int j = k + static_cast<int>(stream.below(N - k));
    std::swap(pool[k], pool[j]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + s);
  std::sort(out.begin(), out.end());
  return out;
}

double power_extreme(const Eigen::MatrixXd& B) {
  // Largest eigenvalue of a PSD matrix by power iteration.
  const int s = static_cast<int>(B.rows());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(s);
  for (int i = 0; i < s; ++i) v[i] += 1e-3 * (i % 7);
  v.normalize();
  double lambda = 0.0;
  const int max_iters = 20000 + 200 * s;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = B * v;
    const double norm = w.norm();
    if (norm <= 1e-300) return 0.0;
    w /= norm;
    const double next = w.dot(B * w);
    const bool done = std::abs(next - lambda) <= 1e-14 * std::max(1.0, std::abs(next));
    lambda = next;
    v = std::move(w);
    if (done && it > 4) break;
  }
  return lambda;
}

}  // namespace

std::string rip_method_name(RipMethod method) {
  switch (method) {
    case RipMethod::Exact: return "exact";
    case RipMethod::MonteCarlo: return "monte-carlo";
    case RipMethod::Greedy: return "greedy";
  }
  throw std::logic_error("bad RipMethod value");
}

Eigen::MatrixXd gram_submatrix(const KrOperator& op, const SupportSet& S) {
  validate_support(S, op.cols());
  const int s = S.size();
  Eigen::MatrixXd G(s, s);
  for (int q = 0; q < s; ++q)
    for (int p = 0; p <= q; ++p) {
      const double v = op.scaled_gram_entry(S.indices[p], S.indices[q]);
      G(p, q) = v;
      G(q, p) = v;
    }
  return G;
}

std::pair<double, double> extreme_eigs(const Eigen::MatrixXd& G,
                                       int dense_crossover) {
  const int s = static_cast<int>(G.rows());
  if (G.cols() != s) throw std::invalid_argument("extreme_eigs: square input required");
  const double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
  if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("extreme_eigs: input is not symmetric");

  if (s <= dense_crossover) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        G, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return {ev[0], ev[s - 1]};
  }

  const Eigen::MatrixXd S = 0.5 * (G + G.transpose());
  // Gershgorin enclosure gives the shifts that keep both iterations PSD.
  double lo = S(0, 0), hi = S(0, 0);
  for (int i = 0; i < s; ++i) {
    const double radius = S.row(i).cwiseAbs().sum() - std::abs(S(i, i));
    lo = std::min(lo, S(i, i) - radius);
    hi = std::max(hi, S(i, i) + radius);
  }
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(s, s);
  const double lambda_max = lo + power_extreme(S - lo * I);
  const double lambda_min = hi - power_extreme(hi * I - S);
  return {lambda_min, lambda_max};
}

std::size_t binomial_capped(int N, int s, std::size_t cap) {
  if (s < 0 || s > N) return 0;
  s = std::min(s, N - s);
  long double count = 1.0L;
  for (int k = 1; k <= s; ++k) {
    count *= static_cast<long double>(N - s + k);
    count /= static_cast<long double>(k);
    if (count > static_cast<long double>(cap) * 2.0L)
      return cap + 1;
  }
  return static_cast<std::size_t>(count + 0.5L);
}

RipEstimate delta_exact(const KrOperator& op, int s, std::size_t budget) {
  const int N = op.cols();
  if (s < 1 || s > N) throw std::invalid_argument("delta_exact: need 1 <= s <= N");
  const std::size_t count = binomial_capped(N, s, budget);
  if (count > budget)
    throw std::runtime_error(
        "delta_exact: C(N, s) exceeds the enumeration budget of " +
        std::to_string(budget) +
        "; use delta_greedy or delta_monte_carlo instead");

  GramTable gram(op);
  RipEstimate est;
  est.s = s;
  est.method = RipMethod::Exact;
  est.delta = -1.0;

  std::vector<int> S(s);
  std::iota(S.begin(), S.end(), 0);
  long visited = 0;
  while (true) {
    const double dev = gram.deviation(S, kDefaultEigCrossover);
    ++visited;
    if (dev > est.delta) {
      est.delta = dev;
      est.witness.indices = S;
    }
    // next combination in lexicographic order
    int k = s - 1;
    while (k >= 0 && S[k] == N - s + k) --k;
    if (k < 0) break;
    ++S[k];
    for (int j = k + 1; j < s; ++j) S[j] = S[j - 1] + 1;
  }
  est.trials = visited;
  return est;
}

RipEstimate delta_monte_carlo(const KrOperator& op, int s, long trials,
                              std::uint64_t seed) {
  const int N = op.cols();
  if (s < 1 || s > N)
    throw std::invalid_argument("delta_monte_carlo: need 1 <= s <= N");
  if (trials < 1) throw std::invalid_argument("delta_monte_carlo: trials >= 1");

  GramTable gram(op);
  RipEstimate est;
  est.s = s;
  est.method = RipMethod::MonteCarlo;
  est.trials = trials;
  est.seed = seed;
  est.delta = -1.0;
  for (long t = 0; t < trials; ++t) {
    RngStream stream = RngStream::derive(
        seed, {streams::kSupport, static_cast<std::uint64_t>(t)});
    const std::vector<int> S = random_support(N, s, stream);
    const double dev = gram.deviation(S, kDefaultEigCrossover);
    if (dev > est.delta) {
      est.delta = dev;
      est.witness.indices = S;
    }
  }
  return est;
}

RipEstimate delta_greedy(const KrOperator& op, int s, int restarts,
                         std::uint64_t seed) {
  const int N = op.cols();
  if (s < 1 || s > N) throw std::invalid_argument("delta_greedy: need 1 <= s <= N");
  if (restarts < 1) throw std::invalid_argument("delta_greedy: restarts >= 1");

  GramTable gram(op);
  RipEstimate est;
  est.s = s;
  est.method = RipMethod::Greedy;
  est.trials = restarts;
  est.seed = seed;
  est.delta = -1.0;

  std::vector<char> in_support(N);
  for (int r = 0; r < restarts; ++r) {
    RngStream stream = RngStream::derive(
        seed, {streams::kSupport, static_cast<std::uint64_t>(r)});
    std::vector<int> S = random_support(N, s, stream);
    double dev = gram.deviation(S, kDefaultEigCrossover);

    bool improved = true;
    while (improved) {
      improved = false;
      std::fill(in_support.begin(), in_support.end(), 0);
      for (int idx : S) in_support[idx] = 1;
      double best_dev = dev;
      int best_p = -1, best_q = -1;
      std::vector<int> candidate = S;
      for (int p = 0; p < s; ++p) {
        for (int q = 0; q < N; ++q) {
          if (in_support[q]) continue;
          candidate = S;
          candidate[p] = q;
          std::sort(candidate.begin(), candidate.end());
          const double d = gram.deviation(candidate, kDefaultEigCrossover);
          if (d > best_dev + 1e-15) {
            best_dev = d;
            best_p = p;
            best_q = q;
          }
        }
      }
      if (best_p >= 0) {
        S[best_p] = best_q;
        std::sort(S.begin(), S.end());
        dev = best_dev;
        improved = true;
      }
    }
    if (dev > est.delta) {
      est.delta = dev;
      est.witness.indices = S;
    }
  }
  return est;
}

double column_norm_deviation(const KrOperator& op) {
  double worst = 0.0;
  for (int i = 0; i < op.cols(); ++i)
    worst = std::max(worst, std::abs(op.scaled_gram_entry(i, i) - 1.0));
  return worst;
}

double theory_bound(long s, long m, long N, const TheoryBoundParams& params) {
  if (m < 1 || N < 1) throw std::invalid_argument("theory_bound: m, N >= 1");
  if (s < 1 || s > std::min(N, m))
    throw std::invalid_argument("theory_bound: need 1 <= s <= min(N, m)");
  const double xi = params.resolved_xi();
  const double ratio = std::sqrt(static_cast<double>(s) / static_cast<double>(m));
  const double arg = M_E * static_cast<double>(N) * ratio / static_cast<double>(s);
  return params.C * xi * xi * ratio * std::log(arg) + params.theta_prime;
}

long sparsity_budget(int n, long N, double c) {
  const long m = static_cast<long>(n) * n;
  if (N < m)
    throw std::invalid_argument(
        "sparsity_budget requires N >= n^2 (standing assumption of the "
        "sparsity regime)");
  if (!(c > 0.0 && c <= 1.0))
    throw std::invalid_argument("sparsity_budget: c must be in (0, 1]");
  const double cm = c * static_cast<double>(m);
  const double l = std::log(M_E * static_cast<double>(N) / cm);
  const long budget = static_cast<long>(std::floor(cm / (l * l)));
  return std::max(budget, 1L);
}

}  // namespace krip
