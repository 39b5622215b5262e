#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "krip/io.hpp"
#include "krip/kr_operator.hpp"

using namespace krip;

namespace {

ColumnMatrix fixed_source(Family family, const Eigen::MatrixXd& entries) {
  ColumnMatrix m;
  m.entries = entries;
  m.spec = DistributionSpec::make(family);
  m.seed = 0;
  return m;
}

KrOperator random_op(Family family, int n, int N, std::uint64_t seed,
                     KrMode mode, KrRepresentation repr) {
  return KrOperator::build(sample_matrix(DistributionSpec::make(family), n, N, seed),
                           mode, repr);
}

}  // namespace

TEST_CASE("kappa closed forms") {
  CHECK(kappa(DistributionSpec::make(Family::Rademacher), 4) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(kappa(DistributionSpec::make(Family::Spherical), 10) ==
        doctest::Approx(10.0 / 9.0).epsilon(1e-15));
  CHECK(kappa(DistributionSpec::make(Family::Gaussian), 5) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(kappa(DistributionSpec::make(Family::BoundedUniform), 4) ==
        doctest::Approx(16.0 / (4.0 * (2.0 + 1.8))).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(kappa(DistributionSpec::make(Family::Gaussian), 1),
                       doctest::Contains("kappa undefined"),
                       std::invalid_argument);
}

TEST_CASE("center_column on a rademacher pair") {
  Eigen::VectorXd a(2);
  a << 1.0, -1.0;
  const Eigen::VectorXd col = center_column(a, 2.0);
  const double r = std::sqrt(2.0);
  // row-major vec of [[0, -1], [-1, 0]]
  CHECK(col[0] == 0.0);
  CHECK(col[1] == -r);
  CHECK(col[2] == -r);
  CHECK(col[3] == 0.0);
  CHECK(col.squaredNorm() == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("center_column of the zero vector is -vec(I)") {
  const Eigen::VectorXd col = center_column(Eigen::VectorXd::Zero(3), 1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(col[i * 3 + j] == (i == j ? -1.0 : 0.0));
  CHECK_THROWS_AS(center_column(Eigen::VectorXd::Zero(3), 0.0),
                  std::invalid_argument);
}

TEST_CASE("centered spherical columns are traceless") {
  const DistributionSpec spec = DistributionSpec::make(Family::Spherical);
  RngStream stream{3};
  for (int n : {3, 6, 11}) {
    const Eigen::VectorXd a = sample_column(spec, n, stream);
    const Eigen::VectorXd col = center_column(a, kappa(spec, n));
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += col[i * n + i];
    CHECK(std::abs(trace) <= 1e-10);
  }
}

TEST_CASE("build produces the expected single columns") {
  Eigen::MatrixXd entries(2, 1);
  entries << 1.0, 1.0;

  const KrOperator centered =
      KrOperator::build(fixed_source(Family::Rademacher, entries),
                        KrMode::Centered, KrRepresentation::Explicit);
  const double r = std::sqrt(2.0);
  const Eigen::VectorXd col = centered.column(0);
  CHECK(col[0] == 0.0);
  CHECK(col[1] == r);
  CHECK(col[2] == r);
  CHECK(col[3] == 0.0);
  CHECK(centered.kappa_value() == doctest::Approx(2.0));
  CHECK(centered.scale() == doctest::Approx(0.5));

  const KrOperator uncentered =
      KrOperator::build(fixed_source(Family::Rademacher, entries),
                        KrMode::Uncentered, KrRepresentation::MatrixFree);
  const Eigen::VectorXd raw = uncentered.column(0);
  for (int k = 0; k < 4; ++k) CHECK(raw[k] == 1.0);
  CHECK(uncentered.kappa_value() == 1.0);
}

TEST_CASE("explicit representation refuses to blow the memory budget") {
  const ColumnMatrix source =
      sample_matrix(DistributionSpec::make(Family::Gaussian), 4, 4, 5);
  CHECK_THROWS_AS(
      KrOperator::build(source, KrMode::Centered, KrRepresentation::Explicit, 8),
      std::runtime_error);
}

TEST_CASE("apply: zero, basis and random vectors") {
  const KrOperator op = random_op(Family::Gaussian, 3, 6, 17, KrMode::Centered,
                                  KrRepresentation::Explicit);
  const KrOperator free_op = random_op(Family::Gaussian, 3, 6, 17,
                                       KrMode::Centered, KrRepresentation::MatrixFree);

  CHECK(op.apply(Eigen::VectorXd::Zero(6)).norm() == 0.0);

  for (int j = 0; j < 6; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(6);
    e[j] = 1.0;
    const Eigen::VectorXd got = free_op.apply(e);
    const Eigen::VectorXd want = op.scaled_column(j);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
  }

  const Eigen::VectorXd x = testutil::random_vector(6, 555);
  CHECK((op.apply(x) - free_op.apply(x)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(op.apply(Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("adjoint agrees with the explicit transpose and kills vec(I)") {
  const KrOperator op = random_op(Family::Spherical, 3, 5, 23, KrMode::Centered,
                                  KrRepresentation::Explicit);
  const KrOperator free_op = random_op(Family::Spherical, 3, 5, 23,
                                       KrMode::Centered, KrRepresentation::MatrixFree);

  Eigen::VectorXd vec_identity = Eigen::VectorXd::Zero(9);
  for (int i = 0; i < 3; ++i) vec_identity[i * 3 + i] = 1.0;
  CHECK(free_op.adjoint(vec_identity).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(free_op.adjoint(Eigen::VectorXd::Zero(9)).norm() == 0.0);

  const Eigen::VectorXd y = testutil::random_vector(9, 777);
  CHECK((op.adjoint(y) - free_op.adjoint(y)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(op.adjoint(Eigen::VectorXd::Zero(8)), std::invalid_argument);
}

TEST_CASE("apply/adjoint form an exact adjoint pair") {
  std::uint64_t key = 1000;
  for (int n = 2; n <= 8; ++n) {
    for (int rep = 0; rep < 100 / 7 + 3; ++rep) {
      const int N = 3 + (rep * 5) % 10;
      const KrOperator op = random_op(Family::Gaussian, n, N, ++key,
                                      rep % 2 ? KrMode::Centered : KrMode::Uncentered,
                                      KrRepresentation::MatrixFree);
      const Eigen::VectorXd x = testutil::random_vector(N, ++key);
      const Eigen::VectorXd y = testutil::random_vector(n * n, ++key);
      const double lhs = op.apply(x).dot(y);
      const double rhs = x.dot(op.adjoint(y));
      CHECK(std::abs(lhs - rhs) <=
            1e-10 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
    }
  }
}

TEST_CASE("exactly normalized sources give unit scaled columns") {
  for (Family family : {Family::Rademacher, Family::Spherical}) {
    const KrOperator op = random_op(family, 6, 20, 4242, KrMode::Centered,
                                    KrRepresentation::MatrixFree);
    for (int i = 0; i < op.cols(); ++i) {
      CHECK(std::abs(op.scaled_column(i).squaredNorm() - 1.0) <= 1e-10);
      CHECK(std::abs(op.scaled_gram_entry(i, i) - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("centered columns average to zero") {
  const DistributionSpec spec = DistributionSpec::make(Family::Gaussian);
  const int n = 8;
  const double k = kappa(spec, n);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n * n);
  const long draws = 10000;
  RngStream stream{6060};
  for (long d = 0; d < draws; ++d)
    mean += center_column(sample_column(spec, n, stream), k);
  mean /= static_cast<double>(draws);
  CHECK(mean.cwiseAbs().maxCoeff() <= 5.0 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("reshaped centered columns are exactly symmetric") {
  const KrOperator op = random_op(Family::Gaussian, 5, 12, 88, KrMode::Centered,
                                  KrRepresentation::MatrixFree);
  for (int i = 0; i < op.cols(); ++i) {
    const Eigen::VectorXd col = op.column(i);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c)
        CHECK(col[r * 5 + c] == col[c * 5 + r]);
  }
}

TEST_CASE("distinct scaled columns are uncorrelated on average") {
  const DistributionSpec spec = DistributionSpec::make(Family::Gaussian);
  const int n = 6;
  const double k = kappa(spec, n);
  const long draws = 10000;
  RngStream stream{7117};
  double sum = 0.0, sumsq = 0.0;
  for (long d = 0; d < draws; ++d) {
    const Eigen::VectorXd u = center_column(sample_column(spec, n, stream), k) / n;
    const Eigen::VectorXd v = center_column(sample_column(spec, n, stream), k) / n;
    const double ip = u.dot(v);
    sum += ip;
    sumsq += ip * ip;
  }
  const double mean = sum / draws;
  const double stderr_est =
      std::sqrt((sumsq / draws - mean * mean) / static_cast<double>(draws));
  CHECK(std::abs(mean) <= 5.0 * stderr_est);
}

TEST_CASE("operator metadata and csv export") {
  const KrOperator op = random_op(Family::Spherical, 3, 4, 31, KrMode::Centered,
                                  KrRepresentation::Explicit);
  const nlohmann::json meta = operator_metadata(op);
  CHECK(meta["n"] == 3);
  CHECK(meta["N"] == 4);
  CHECK(meta["mode"] == "centered");
  CHECK(meta["family"] == "spherical");
  CHECK(meta["kappa"].get<double>() == doctest::Approx(1.5));
  CHECK(meta["representation"] == "explicit");

  std::ostringstream csv;
  write_operator_csv(op, csv);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 9);

  const KrOperator free_op = random_op(Family::Spherical, 3, 4, 31,
                                       KrMode::Centered, KrRepresentation::MatrixFree);
  std::ostringstream sink;
  CHECK_THROWS_AS(write_operator_csv(free_op, sink), std::invalid_argument);
}
