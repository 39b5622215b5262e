#include "krip/kr_operator.hpp"

#include <cmath>
#include <stdexcept>

namespace krip {

double kappa(const DistributionSpec& spec, int n) {
  if (n < 2) throw std::invalid_argument("kappa undefined for n < 2");
  const double nn = static_cast<double>(n);
  switch (spec.family) {
    case Family::Rademacher:
    case Family::Spherical:
      // Exact column norm ||a||^2 = n collapses the denominator to n(n-1).
      return nn / (nn - 1.0);
    default: {
      const double e4 = fourth_moment(spec);
      return nn * nn / (nn * (nn - 2.0 + e4));
    }
  }
}

Eigen::VectorXd center_column(const Eigen::VectorXd& a, double kappa_value) {
  if (kappa_value <= 0.0)
    throw std::invalid_argument("center_column: kappa must be positive");
  const int n = static_cast<int>(a.size());
  const double root = std::sqrt(kappa_value);
  Eigen::VectorXd out(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[i * n + j] = root * (a[i] * a[j] - (i == j ? 1.0 : 0.0));
  return out;
}

Eigen::VectorXd kr_column(const Eigen::VectorXd& a) {
  const int n = static_cast<int>(a.size());
  Eigen::VectorXd out(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i * n + j] = a[i] * a[j];
  return out;
}

KrOperator KrOperator::build(ColumnMatrix source, KrMode mode,
                             KrRepresentation representation,
                             std::size_t explicit_budget) {
  KrOperator op;
  op.mode_ = mode;
  op.representation_ = representation;
  const int n = source.n();
  const int N = source.cols();
  op.kappa_ = mode == KrMode::Centered ? kappa(source.spec, n) : 1.0;
  op.scale_ = 1.0 / static_cast<double>(n);
  op.source_sq_norms_ = source.entries.colwise().squaredNorm();
  op.source_ = std::move(source);
  if (representation == KrRepresentation::Explicit) {
    const std::size_t entries = static_cast<std::size_t>(n) * n * N;
    if (entries > explicit_budget)
      throw std::runtime_error(
          "explicit representation needs " + std::to_string(entries) +
          " entries, over the budget of " + std::to_string(explicit_budget) +
          "; use the matrix-free representation");
    Eigen::MatrixXd m(n * n, N);
    for (int i = 0; i < N; ++i) m.col(i) = op.column(i);
    op.explicit_ = std::move(m);
  }
  return op;
}

Eigen::VectorXd KrOperator::column(int i) const {
  const Eigen::VectorXd a = source_.entries.col(i);
  return mode_ == KrMode::Centered ? center_column(a, kappa_) : kr_column(a);
}

Eigen::VectorXd KrOperator::scaled_column(int i) const {
  return column(i) * scale_;
}

double KrOperator::scaled_gram_entry(int i, int j) const {
  // tr((a a^T - I)(b b^T - I)) = (a.b)^2 - ||a||^2 - ||b||^2 + n,
  // tr((a a^T)(b b^T)) = (a.b)^2.
  const double dot = source_.entries.col(i).dot(source_.entries.col(j));
  const double n = static_cast<double>(this->n());
  double ip = dot * dot;
  if (mode_ == KrMode::Centered)
    ip = kappa_ * (ip - source_sq_norms_[i] - source_sq_norms_[j] + n);
  return ip * scale_ * scale_;
}

Eigen::VectorXd KrOperator::apply(const Eigen::VectorXd& x) const {
  if (x.size() != cols())
    throw std::invalid_argument("apply: expected a vector of length N");
  if (explicit_) return scale_ * (*explicit_ * x);

  const int n = this->n();
  const Eigen::MatrixXd& A = source_.entries;
  Eigen::MatrixXd M = A * x.asDiagonal() * A.transpose();
  double factor = scale_;
  if (mode_ == KrMode::Centered) {
    const double shift = x.sum();
    M.diagonal().array() -= shift;
    factor *= std::sqrt(kappa_);
  }
  Eigen::VectorXd out(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i * n + j] = factor * M(i, j);
  return out;
}

Eigen::VectorXd KrOperator::adjoint(const Eigen::VectorXd& y) const {
  if (y.size() != rows())
    throw std::invalid_argument("adjoint: expected a vector of length n^2");
  if (explicit_) return scale_ * (explicit_->transpose() * y);

  const int n = this->n();
  Eigen::MatrixXd Y(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Y(i, j) = y[i * n + j];
  const Eigen::MatrixXd& A = source_.entries;
  // entry i = a_i^T Y a_i, evaluated for all columns at once
  Eigen::VectorXd quad =
      (Y * A).cwiseProduct(A).colwise().sum().transpose();
  if (mode_ == KrMode::Centered) {
    quad.array() -= Y.trace();
    quad *= std::sqrt(kappa_);
  }
  return scale_ * quad;
}

}  // namespace krip
