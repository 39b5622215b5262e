#pragma once

// Test-only oracles, independent of the library paths they check.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "krip/rng.hpp"

namespace testutil {

/// Composite Simpson quadrature on [lo, hi].
inline double simpson(const std::function<double(double)>& f, double lo,
                      double hi, int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (hi - lo) / intervals;
  double sum = f(lo) + f(hi);
  for (int k = 1; k < intervals; ++k)
    sum += f(lo + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Characteristic-polynomial root oracle for the extreme eigenvalues of a
/// symmetric matrix: scans det(G - x I) for sign changes on the Gershgorin
/// interval and bisects. Deliberately brute force.
inline std::pair<double, double> charpoly_extreme_roots(
    const Eigen::MatrixXd& G) {
  const int s = static_cast<int>(G.rows());
  auto det_at = [&](double x) {
    return (G - x * Eigen::MatrixXd::Identity(s, s)).fullPivLu().determinant();
  };
  double lo = G(0, 0), hi = G(0, 0);
  for (int i = 0; i < s; ++i) {
    const double r = G.row(i).cwiseAbs().sum() - std::abs(G(i, i));
    lo = std::min(lo, G(i, i) - r);
    hi = std::max(hi, G(i, i) + r);
  }
  lo -= 1e-6;
  hi += 1e-6;
  const int grid = 200000;
  const double step = (hi - lo) / grid;
  std::vector<double> roots;
  double prev_x = lo, prev_v = det_at(lo);
  for (int k = 1; k <= grid; ++k) {
    const double x = lo + k * step;
    const double v = det_at(x);
    if ((prev_v < 0 && v > 0) || (prev_v > 0 && v < 0) || v == 0.0) {
      double a = prev_x, b = x, fa = prev_v;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = det_at(mid);
        if ((fa < 0 && fm < 0) || (fa > 0 && fm > 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
        if (b - a < 1e-12) break;
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_v = v;
  }
  if (roots.empty()) throw std::runtime_error("charpoly oracle found no roots");
  return {roots.front(), roots.back()};
}

inline Eigen::MatrixXd random_symmetric(int s, std::uint64_t key) {
  krip::RngStream stream{key};
  Eigen::MatrixXd M(s, s);
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < s; ++i) M(i, j) = stream.normal();
  return 0.5 * (M + M.transpose());
}

inline Eigen::VectorXd random_vector(int dim, std::uint64_t key) {
  krip::RngStream stream{key};
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = stream.normal();
  return v;
}

}  // namespace testutil
