#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "dig/errors.hpp"
#include "dig/spectral.hpp"

using namespace dig;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int n, bool metzler) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = (metzler && i != j) ? std::abs(u(rng)) : u(rng);
  return a;
}

double rel_norm_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("expm agrees with Eigen's matrix exponential") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 5;
    const bool metzler = trial % 2 == 0;
    const double t = std::pow(10.0, -2.0 + 0.07 * trial);
    const Eigen::MatrixXd a = random_matrix(rng, n, metzler);
    CAPTURE(trial);
    CHECK(rel_norm_diff(oracle::to_eigen(expm(oracle::to_dig(a), t)), oracle::expm(a * t)) < 1e-11);
  }
}

TEST_CASE("expm of zero and diagonal matrices") {
  const Matrix z = expm(Matrix(3));
  CHECK(z == Matrix::identity(3));
  const Matrix d = expm(Matrix::diagonal(Vector{1.0, -2.0}), 0.5);
  CHECK(d(0, 0) == doctest::Approx(std::exp(0.5)).epsilon(1e-15));
  CHECK(d(1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(d(0, 1) == 0.0);
}

TEST_CASE("Metzler exponentials are accurate entry by entry") {
  // Upper triangular: e^{tA} = [[e^{at}, c (e^{at} - e^{bt}) / (a - b)], [0, e^{bt}]].
  const double a = 1.0, b = -1.0, c = 0.5;
  for (double t : {1.0, 30.0, 150.0, 300.0}) {
    const ScaledMatrix s = expm_scaled(Matrix{{a, c}, {0.0, b}}, t);
    CHECK(std::log(s.matrix(0, 0)) + s.log_scale == doctest::Approx(a * t).epsilon(1e-12));
    CHECK(std::log(s.matrix(1, 1)) + s.log_scale == doctest::Approx(b * t).epsilon(1e-12));
    const double off = std::log(c / (a - b)) + a * t + std::log1p(-std::exp((b - a) * t));
    CHECK(std::log(s.matrix(0, 1)) + s.log_scale == doctest::Approx(off).epsilon(1e-12));
    CHECK(s.matrix(1, 0) == 0.0);
  }
}

TEST_CASE("scaled exponential keeps huge results representable") {
  const ScaledMatrix s = expm_scaled(Matrix{{-1.0, 2.0}, {1.0, -3.0}}, 5000.0);
  const ScaledMatrix r = expm_scaled(Matrix{{-1.0, 2.0}, {1.0, -3.0}}, 4000.0);
  const double root = oracle::abscissa(Eigen::Matrix2d{{-1.0, 2.0}, {1.0, -3.0}});
  // Both are rank one up to e^{-4000 gap}; the eigenvector factor cancels.
  CHECK(s.log_scale - r.log_scale == doctest::Approx(root * 1000.0).epsilon(1e-10));
  CHECK(max_abs_diff(s.matrix.values(), r.matrix.values()) < 1e-12);
  CHECK_THROWS_AS(expm(Matrix{{800.0, 0.0}, {0.0, 1.0}}), NumericalError);
  CHECK_THROWS_AS(expm(Matrix{{NAN, 0.0}, {0.0, 1.0}}), ValidationError);
}

TEST_CASE("Perron root of positive 2x2 matrices") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const PerronPair p = perron_positive(Matrix{{a, b}, {c, d}});
    CHECK(p.root == doctest::Approx(oracle::lambda_max_2x2(a, b, c, d)).epsilon(1e-11));
    CHECK(p.vector[0] + p.vector[1] == doctest::Approx(1.0));
    CHECK(p.residual < 1e-11);
  }
}

TEST_CASE("Perron root of a nearly imprimitive matrix") {
  // Eigenvalues eps +- sqrt(h d): the two of largest modulus nearly cancel
  // in power iteration without a shift.
  const double eps = 1e-9, h = 4e6, d = 4e-9;
  const PerronPair p = perron_positive(Matrix{{eps, h}, {d, eps}});
  CHECK(p.root == doctest::Approx(eps + std::sqrt(h * d)).epsilon(1e-12));
  CHECK_FALSE(p.dense_fallback);
}

TEST_CASE("Perron root rejects non-positive input") {
  CHECK_THROWS_AS(perron_positive(Matrix{{1.0, 0.0}, {1.0, 1.0}}), NumericalError);
  CHECK_THROWS_AS(perron_nonnegative(Matrix{{1.0, -1.0}, {1.0, 1.0}}), NumericalError);
}

TEST_CASE("Perron-Frobenius pair of Metzler matrices") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 4;
    const Eigen::MatrixXd a = random_matrix(rng, n, true) + Eigen::MatrixXd::Identity(n, n) * 0.01;
    const PerronPair p = perron_frobenius_metzler(oracle::to_dig(a));
    CHECK(p.root == doctest::Approx(oracle::abscissa(a)).epsilon(1e-10));
    for (double v : p.vector) CHECK(v > 0.0);
  }
  CHECK_THROWS_WITH_AS(perron_frobenius_metzler(Matrix{{-1, 0}, {1, -1}}), "Metzler matrix is reducible", NumericalError);
  CHECK_THROWS_AS(perron_frobenius_metzler(Matrix{{-1, -1}, {1, -1}}), ValidationError);
}

TEST_CASE("kernel vector of migration matrices") {
  const Vector p = kernel_vector(Matrix{{-1.0, 2.0}, {1.0, -2.0}});
  CHECK(p[0] == doctest::Approx(2.0 / 3.0));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0));
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 6; ++n) {
    const oracle::RawModel raw = oracle::random_model(rng, n, 1, true);
    const Vector v = kernel_vector(oracle::to_dig(raw.l[0]));
    const Eigen::VectorXd w = oracle::kernel(raw.l[0]);
    for (int i = 0; i < n; ++i) CHECK(v[static_cast<std::size_t>(i)] == doctest::Approx(w[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(kernel_vector(Matrix{{0.0, 1.0}, {0.0, -1.0}}), NumericalError);
}

TEST_CASE("spectral abscissa and radius") {
  CHECK(spectral_abscissa(Matrix{{0.0, 1.0}, {-1.0, 0.0}}) == doctest::Approx(0.0));
  CHECK(spectral_radius(Matrix{{0.0, 1.0}, {-1.0, 0.0}}) == doctest::Approx(1.0));
  CHECK(metzler_abscissa(Matrix{{-1.0, 0.0}, {1.0, 2.0}}) == doctest::Approx(2.0));
}

TEST_CASE("scaled products") {
  const ScaledMatrix a{Matrix{{1.0, 0.5}, {0.25, 1.0}}, 3.0};
  const ScaledMatrix b{Matrix{{1.0, 0.0}, {0.0, 0.5}}, -1.0};
  const ScaledMatrix c = multiply(a, b);
  CHECK(max_abs(c.matrix) == 1.0);
  CHECK(c.matrix(0, 1) * std::exp(c.log_scale) == doctest::Approx(0.25 * std::exp(2.0)));
}
