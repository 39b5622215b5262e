#include "krip/ensembles.hpp"

#include <cmath>
#include <stdexcept>

namespace krip {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
// psi2 constants from E exp(X^2/K^2) <= 2: sqrt(8/3) for the standard
// normal, 1/sqrt(ln 2) for Rademacher, sqrt(3/ln 2) for uniform on
// [-sqrt(3), sqrt(3)]. Spherical marginals tend to N(0,1), so the
// Gaussian value is used as the nominal label.
const double kPsi2Gaussian = std::sqrt(8.0 / 3.0);
const double kPsi2Rademacher = 1.0 / std::sqrt(std::log(2.0));
const double kPsi2BoundedUniform = std::sqrt(3.0 / std::log(2.0));
}  // namespace

Family family_from_name(const std::string& name) {
  if (name == "gaussian") return Family::Gaussian;
  if (name == "rademacher") return Family::Rademacher;
  if (name == "uniform") return Family::BoundedUniform;
  if (name == "spherical") return Family::Spherical;
  throw std::invalid_argument("unknown distribution family: " + name);
}

std::string family_name(Family family) {
  switch (family) {
    case Family::Gaussian: return "gaussian";
    case Family::Rademacher: return "rademacher";
    case Family::BoundedUniform: return "uniform";
    case Family::Spherical: return "spherical";
  }
  throw std::logic_error("bad Family value");
}

DistributionSpec DistributionSpec::make(Family family) {
  DistributionSpec spec;
  spec.family = family;
  switch (family) {
    case Family::Gaussian: spec.psi2_bound = kPsi2Gaussian; break;
    case Family::Rademacher: spec.psi2_bound = kPsi2Rademacher; break;
    case Family::BoundedUniform: spec.psi2_bound = kPsi2BoundedUniform; break;
    case Family::Spherical: spec.psi2_bound = kPsi2Gaussian; break;
  }
  return spec;
}

Eigen::VectorXd sample_column(const DistributionSpec& spec, int n,
                              RngStream& stream) {
  if (n < 1) throw std::invalid_argument("sample_column: n must be >= 1");
  Eigen::VectorXd a(n);
  switch (spec.family) {
    case Family::Gaussian:
      for (int i = 0; i < n; ++i) a[i] = stream.normal();
      break;
    case Family::Rademacher:
      for (int i = 0; i < n; ++i) a[i] = stream.rademacher();
      break;
    case Family::BoundedUniform:
      for (int i = 0; i < n; ++i)
        a[i] = kSqrt3 * (2.0 * stream.uniform01() - 1.0);
      break;
    case Family::Spherical: {
      double norm = 0.0;
      do {
        for (int i = 0; i < n; ++i) a[i] = stream.normal();
        norm = a.norm();
      } while (norm == 0.0);
      a *= std::sqrt(static_cast<double>(n)) / norm;
      break;
    }
  }
  return a;
}

ColumnMatrix sample_matrix(const DistributionSpec& spec, int n, int N,
                           std::uint64_t seed) {
  if (n < 1 || N < 1)
    throw std::invalid_argument("sample_matrix: dimensions must be >= 1");
  ColumnMatrix m;
  m.spec = spec;
  m.seed = seed;
  m.entries.resize(n, N);
  for (int i = 0; i < N; ++i) {
    RngStream stream = RngStream::derive(
        seed, {streams::kColumn, static_cast<std::uint64_t>(i)});
    m.entries.col(i) = sample_column(spec, n, stream);
  }
  return m;
}

double fourth_moment(const DistributionSpec& spec) {
  switch (spec.family) {
    case Family::Gaussian: return 3.0;
    case Family::Rademacher: return 1.0;
    case Family::BoundedUniform: return 9.0 / 5.0;  // c^4/5 with c^2 = 3
    case Family::Spherical:
      throw std::invalid_argument(
          "fourth moment of entries undefined for spherical ensemble; "
          "use kappa directly");
  }
  throw std::logic_error("bad Family value");
}

}  // namespace krip
