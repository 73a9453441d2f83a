#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "../support/oracles.hpp"
#include "dig/asymptotics.hpp"
#include "dig/builtins.hpp"
#include "dig/dynamics.hpp"
#include "dig/errors.hpp"

using namespace dig;

namespace {

// Lambda of the +-1 model: B is A with the patches swapped (B = P A P), so
// Phi = (P e^{TA/2})^2 and mu is the square of a 2x2 Perron root.
double pm1_lambda(double eps, double m, double T) {
  Eigen::Matrix2d a{{1 - eps - m, m}, {m, -1 - eps - m}};
  Eigen::Matrix2d p{{0, 1}, {1, 0}};
  const Eigen::MatrixXd q = p * oracle::expm(a * (T / 2));
  return 2.0 * std::log(oracle::lambda_max_2x2(q(0, 0), q(0, 1), q(1, 0), q(1, 1))) / T;
}

// The same model as a smooth (sampled) function, forcing the RK4 path.
PatchModel sampled_copy(const PatchModel& m) {
  std::vector<SegmentSampler> growth, migration;
  for (std::size_t k = 0; k < m.growth().segment_count(); ++k) {
    const Matrix v = m.growth().segment_value(k);
    growth.push_back([v](double) { return v; });
  }
  for (std::size_t k = 0; k < m.migration().segment_count(); ++k) {
    const Matrix v = m.migration().segment_value(k);
    migration.push_back([v](double) { return v; });
  }
  return PatchModel(m.name() + "-sampled",
                    PeriodicMatrixFunction::piecewise_smooth(m.patches(), m.growth().breaks(), growth),
                    PeriodicMatrixFunction::piecewise_smooth(m.patches(), m.migration().breaks(), migration));
}

PatchModel sinusoidal() {
  const double two_pi = 2.0 * std::numbers::pi;
  auto growth = PeriodicMatrixFunction::piecewise_smooth(
      2, {0.0}, {[two_pi](double tau) { return Matrix::diagonal(Vector{std::sin(two_pi * tau) - 0.2, -std::sin(two_pi * tau) - 0.3}); }});
  return PatchModel("sine", std::move(growth), PeriodicMatrixFunction::constant(Matrix{{-1, 2}, {1, -2}}));
}

}  // namespace

TEST_CASE("growth rate of the +-1 model against its explicit monodromy") {
  const PatchModel model = builtin("pm1");
  for (double m : {0.05, 0.3, 1.0, 4.0})
    for (double T : {0.05, 1.0, 7.0, 40.0}) {
      CAPTURE(m);
      CAPTURE(T);
      CHECK(growth_rate(model, {m, T}).lambda == doctest::Approx(pm1_lambda(0.5, m, T)).epsilon(1e-10));
    }
}

TEST_CASE("growth rate in the time-independent case is the Perron-Frobenius root") {
  const Matrix a{{-0.3, 0.0}, {0.0, 0.1}};
  const Matrix l{{-1.0, 0.5}, {1.0, -0.5}};
  const PatchModel model("const", PeriodicMatrixFunction::constant(a), PeriodicMatrixFunction::constant(l));
  const double expected = oracle::lambda_max_2x2(-0.3 - 0.7, 0.7 * 0.5, 0.7, 0.1 - 0.7 * 0.5);
  for (double T : {0.01, 1.0, 100.0}) CHECK(growth_rate(model, {0.7, T}).lambda == doctest::Approx(expected).epsilon(1e-11));
}

TEST_CASE("monodromy agrees with a long-horizon integration") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 4; ++trial) {
    const oracle::RawModel raw = oracle::random_model(rng, 2 + trial % 3, 3, false);
    const PatchModel model = oracle::to_model(raw);
    const double m = 0.5 + trial, T = 0.7 + 2 * trial;
    CHECK(growth_rate(model, {m, T}).lambda == doctest::Approx(oracle::long_horizon_lambda(raw, m, T, 400)).epsilon(1e-4));
  }
}

TEST_CASE("integrated fundamental matrix matches the exponential product") {
  for (const char* name : {"ab1", "abc_two_patch", "three_patch_circular"}) {
    const PatchModel model = builtin(name);
    const PatchModel sampled = sampled_copy(model);
    for (double T : {0.3, 5.0}) {
      const GrowthResult exact_result = growth_rate(model, {1.0, T});
      const GrowthResult rk4 = growth_rate(sampled, {1.0, T});
      CHECK(rk4.method == GrowthMethod::IntegratedFundamental);
      CHECK(rk4.lambda == doctest::Approx(exact_result.lambda).epsilon(1e-9));
    }
  }
}

TEST_CASE("smooth models obey the bound and the integral formula") {
  const PatchModel model = sinusoidal();
  for (double T : {0.5, 3.0, 20.0}) {
    const double lambda = growth_rate(model, {0.5, T}).lambda;
    CHECK(lambda <= chi(model) + 1e-9);
    CHECK(growth_rate_integral(model, {0.5, T}) == doctest::Approx(lambda).epsilon(1e-7));
    CHECK(growth_rate_h_formula(model, {0.5, T}) == doctest::Approx(lambda).epsilon(1e-7));
  }
}

TEST_CASE("periodic simplex solution and its formulas") {
  const PatchModel model = builtin("ab1");
  const ModelParameters params{1.0, 5.0};
  const GrowthResult r = growth_rate(model, params);
  const SimplexTrajectory traj = periodic_simplex_solution(model, params);
  CHECK(traj.periodic_defect <= 1e-8);
  CHECK(traj.integral_lambda == doctest::Approx(r.lambda).epsilon(1e-9));
  REQUIRE(traj.h_lambda);
  CHECK(*traj.h_lambda == doctest::Approx(r.lambda).epsilon(1e-9));
  CHECK(*traj.min_h >= -1e-10);
  for (const Vector& theta : traj.states) CHECK(theta[0] + theta[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(growth_rate_h_formula(builtin("ab2s"), params), ValidationError);
}

TEST_CASE("simplex trajectories converge to the periodic solution") {
  const PatchModel model = builtin("three_patch_circular");
  const ModelParameters params{1.0, 4.0};
  const Vector pi = growth_rate(model, params).pi;
  const Vector end = integrate_simplex(model, params, {0.8, 0.1, 0.1}, 40);
  for (std::size_t i = 0; i < 3; ++i) CHECK(end[i] == doctest::Approx(pi[i]).epsilon(1e-8));
  CHECK_THROWS_AS(integrate_simplex(model, params, {1.0, 0.0, 0.0}, 1), ValidationError);
  CHECK_THROWS_AS(integrate_simplex(model, params, {0.5, 0.5}, 1), ValidationError);
}

TEST_CASE("slow curve deviation shrinks with the period") {
  const PatchModel model = builtin("ab1");
  const double d20 = verify_slow_curve(model, {1.0, 20.0}, 0.05).sup_deviation;
  const double d80 = verify_slow_curve(model, {1.0, 80.0}, 0.05).sup_deviation;
  CHECK(d80 < d20);
  CHECK_THROWS_AS(verify_slow_curve(builtin("unidir_favorable"), {1.0, 20.0}, 0.05), ValidationError);
}

TEST_CASE("growth rate preconditions and reducible models") {
  CHECK_THROWS_AS(growth_rate(builtin("ab1"), {0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(growth_rate(builtin("ab1"), {1.0, -1.0}), ValidationError);
  const GrowthResult ok = growth_rate(builtin("unidir_favorable"), {1.0, 2.0});
  CHECK(std::isfinite(ok.lambda));
  try {
    growth_rate(builtin("three_patch_reducible"), {0.01, 5000.0});
    FAIL("expected a non-positive monodromy");
  } catch (const NumericalError& e) {
    CHECK(e.code() == "NonPositiveMonodromy");
  }
}
