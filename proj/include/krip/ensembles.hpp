#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "krip/rng.hpp"

namespace krip {

enum class Family { Gaussian, Rademacher, BoundedUniform, Spherical };

Family family_from_name(const std::string& name);
std::string family_name(Family family);

/// Column ensemble description. Entry families draw iid entries with
/// E a = 0, E a^2 = 1; Spherical draws whole columns uniformly from the
/// sphere of radius sqrt(n). psi2_bound is a nominal sub-Gaussian constant
/// for diagnostics only.
struct DistributionSpec {
  Family family = Family::Gaussian;
  double psi2_bound = 0.0;

  static DistributionSpec make(Family family);
};

/// n x N matrix with independent columns drawn from a DistributionSpec.
/// Column i is a pure function of (seed, i), so any column can be
/// regenerated in isolation.
struct ColumnMatrix {
  Eigen::MatrixXd entries;  // n x N
  DistributionSpec spec;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }
};

/// Draws one column of length n from the given stream.
Eigen::VectorXd sample_column(const DistributionSpec& spec, int n,
                              RngStream& stream);

/// Draws an n x N matrix with independent columns; column i uses the
/// substream derived from (seed, i).
ColumnMatrix sample_matrix(const DistributionSpec& spec, int n, int N,
                           std::uint64_t seed);

/// E a^4 of a single entry. Defined for entry families only; the spherical
/// ensemble has no iid entry distribution and is rejected.
double fourth_moment(const DistributionSpec& spec);

}  // namespace krip
