#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "krip/ensembles.hpp"

namespace krip {

enum class KrMode { Centered, Uncentered };
enum class KrRepresentation { Explicit, MatrixFree };

/// Normalization factor kappa(n) = n^2 / E||vec(a a^T - I)||^2.
/// Entry families: n^2 / (n (n - 2 + E a^4)); Rademacher and spherical
/// columns have exact norm, giving n / (n - 1).
double kappa(const DistributionSpec& spec, int n);

/// sqrt(kappa) * vec(a a^T - I), vectorized row-major:
/// out[i*n + j] = (a a^T - I)(i, j).
Eigen::VectorXd center_column(const Eigen::VectorXd& a, double kappa_value);

/// vec(a a^T), row-major.
Eigen::VectorXd kr_column(const Eigen::VectorXd& a);

constexpr std::size_t kDefaultExplicitBudget = std::size_t{1} << 28;

/// The n^2 x N self Khatri-Rao measurement operator built from a column
/// matrix A. Centered mode stores columns sqrt(kappa) vec(a_i a_i^T - I),
/// uncentered mode vec(a_i a_i^T); both are applied with a global 1/n
/// scale, so the operator under test is A_kr / n. Immutable after build;
/// apply/adjoint are pure and thread-safe.
class KrOperator {
 public:
  static KrOperator build(ColumnMatrix source, KrMode mode,
                          KrRepresentation representation,
                          std::size_t explicit_budget = kDefaultExplicitBudget);

  int n() const { return source_.n(); }
  int rows() const { return n() * n(); }
  int cols() const { return source_.cols(); }
  KrMode mode() const { return mode_; }
  KrRepresentation representation() const { return representation_; }
  double kappa_value() const { return kappa_; }
  double scale() const { return scale_; }
  const ColumnMatrix& source() const { return source_; }

  /// scale * A_kr * x; the matrix-free path forms
  /// scale * sqrt(kappa) * vec(A diag(x) A^T - (sum x) I)
  /// without materializing the n^2 x N matrix.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  /// Exact adjoint of apply: entry i is scale * sqrt(kappa) *
  /// (a_i^T Y a_i - tr Y) in centered mode, with Y the row-major reshape
  /// of the input.
  Eigen::VectorXd adjoint(const Eigen::VectorXd& y) const;

  /// Unscaled i-th KR column.
  Eigen::VectorXd column(int i) const;
  /// column(i) / n.
  Eigen::VectorXd scaled_column(int i) const;

  /// <column(i)/n, column(j)/n>, computed from source inner products.
  double scaled_gram_entry(int i, int j) const;

  /// ||a_i||^2 of the source column.
  double source_sq_norm(int i) const { return source_sq_norms_[i]; }

  /// Explicit n^2 x N matrix, or nullptr for the matrix-free representation.
  const Eigen::MatrixXd* explicit_matrix() const {
    return explicit_ ? &*explicit_ : nullptr;
  }

 private:
  KrOperator() = default;

  ColumnMatrix source_;
  KrMode mode_ = KrMode::Centered;
  KrRepresentation representation_ = KrRepresentation::MatrixFree;
  double kappa_ = 1.0;
  double scale_ = 1.0;
  Eigen::VectorXd source_sq_norms_;
  std::optional<Eigen::MatrixXd> explicit_;
};

}  // namespace krip
