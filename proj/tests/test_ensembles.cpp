#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "krip/ensembles.hpp"

using namespace krip;

namespace {
DistributionSpec spec_of(Family family) { return DistributionSpec::make(family); }
}

TEST_CASE("family names round-trip") {
  for (Family f : {Family::Gaussian, Family::Rademacher,
                   Family::BoundedUniform, Family::Spherical})
    CHECK(family_from_name(family_name(f)) == f);
  CHECK_THROWS(family_from_name("cauchy"));
}

TEST_CASE("sample_column rejects n = 0") {
  RngStream stream{1};
  CHECK_THROWS_AS(sample_column(spec_of(Family::Gaussian), 0, stream),
                  std::invalid_argument);
}

TEST_CASE("rademacher entries have fixed amplitude") {
  RngStream stream{5};
  const Eigen::VectorXd a = sample_column(spec_of(Family::Rademacher), 3, stream);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i]) == 1.0);
}

TEST_CASE("spherical columns have exact squared norm n") {
  RngStream stream{11};
  const Eigen::VectorXd a = sample_column(spec_of(Family::Spherical), 5, stream);
  CHECK(a.squaredNorm() == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("gaussian draws are reproducible from the seed") {
  RngStream s1 = RngStream::derive(1234, {streams::kColumn, 0});
  RngStream s2 = RngStream::derive(1234, {streams::kColumn, 0});
  const Eigen::VectorXd a = sample_column(spec_of(Family::Gaussian), 2, s1);
  const Eigen::VectorXd b = sample_column(spec_of(Family::Gaussian), 2, s2);
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
}

TEST_CASE("sample_matrix basics") {
  const ColumnMatrix m = sample_matrix(spec_of(Family::Rademacher), 2, 4, 7);
  CHECK(m.n() == 2);
  CHECK(m.cols() == 4);
  for (int i = 0; i < 4; ++i)
    for (int r = 0; r < 2; ++r) CHECK(std::abs(m.entries(r, i)) == 1.0);

  const ColumnMatrix again = sample_matrix(spec_of(Family::Rademacher), 2, 4, 7);
  CHECK(m.entries == again.entries);

  CHECK_THROWS_AS(sample_matrix(spec_of(Family::Gaussian), 0, 4, 7),
                  std::invalid_argument);
}

TEST_CASE("spherical matrix columns all have norm sqrt(n)") {
  const ColumnMatrix m = sample_matrix(spec_of(Family::Spherical), 8, 16, 99);
  for (int i = 0; i < 16; ++i)
    CHECK(m.entries.col(i).squaredNorm() == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("columns depend only on (seed, index)") {
  const ColumnMatrix narrow = sample_matrix(spec_of(Family::Gaussian), 4, 3, 21);
  const ColumnMatrix wide = sample_matrix(spec_of(Family::Gaussian), 4, 9, 21);
  for (int i = 0; i < 3; ++i)
    CHECK(narrow.entries.col(i) == wide.entries.col(i));
}

TEST_CASE("fourth moments") {
  CHECK(fourth_moment(spec_of(Family::Rademacher)) == 1.0);
  CHECK(fourth_moment(spec_of(Family::BoundedUniform)) ==
        doctest::Approx(1.8).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(fourth_moment(spec_of(Family::Spherical)),
                       doctest::Contains("use kappa directly"),
                       std::invalid_argument);

  // quadrature oracle for the gaussian value
  const double quad = testutil::simpson(
      [](double x) {
        return x * x * x * x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
      },
      -15.0, 15.0, 20000);
  CHECK(std::abs(quad - 3.0) < 1e-10);
  CHECK(fourth_moment(spec_of(Family::Gaussian)) == doctest::Approx(quad).epsilon(1e-10));

  // monte-carlo cross-check of the bounded-uniform value
  RngStream stream{2024};
  double sum = 0.0;
  const long trials = 1000000;
  for (long i = 0; i < trials; ++i) {
    const double x = std::sqrt(3.0) * (2.0 * stream.uniform01() - 1.0);
    sum += x * x * x * x;
  }
  CHECK(sum / trials == doctest::Approx(1.8).epsilon(0.01));
}

TEST_CASE("entry families are centered with unit second moment") {
  const long count = 1000000;
  for (Family family :
       {Family::Gaussian, Family::Rademacher, Family::BoundedUniform}) {
    RngStream stream = RngStream::derive(31337, {static_cast<std::uint64_t>(family)});
    const DistributionSpec spec = spec_of(family);
    double sum = 0.0, sumsq = 0.0;
    const long cols = count / 100;
    for (long c = 0; c < cols; ++c) {
      const Eigen::VectorXd a = sample_column(spec, 100, stream);
      sum += a.sum();
      sumsq += a.squaredNorm();
    }
    CAPTURE(family_name(family));
    CHECK(std::abs(sum / count) <= 4.0 / std::sqrt(static_cast<double>(count)));
    CHECK(std::abs(sumsq / count - 1.0) <= 0.01);
  }
}

TEST_CASE("spherical columns are isotropic") {
  const int n = 8;
  const long cols = 100000;
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
  RngStream stream{808};
  const DistributionSpec spec = spec_of(Family::Spherical);
  for (long c = 0; c < cols; ++c) {
    const Eigen::VectorXd a = sample_column(spec, n, stream);
    second += a * a.transpose();
  }
  second /= static_cast<double>(cols);
  const Eigen::MatrixXd err = second - Eigen::MatrixXd::Identity(n, n);
  CHECK(err.cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("nominal psi2 labels are positive and finite") {
  for (Family f : {Family::Gaussian, Family::Rademacher,
                   Family::BoundedUniform, Family::Spherical}) {
    const DistributionSpec spec = spec_of(f);
    CHECK(spec.psi2_bound > 0.0);
    CHECK(std::isfinite(spec.psi2_bound));
  }
}
