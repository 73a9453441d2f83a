#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "dig/asymptotics.hpp"
#include "dig/builtins.hpp"
#include "dig/errors.hpp"
#include "dig/stochastic.hpp"

using namespace dig;

namespace {

// The two half-period environments of pm1(eps), switching at unit rate.
MarkovEnvironment pm1_twin(double eps = 0.5) {
  const Matrix l{{-1, 1}, {1, -1}};
  return MarkovEnvironment(Matrix{{-1, 1}, {1, -1}},
                           {{Vector{1 - eps, -1 - eps}, l}, {Vector{-1 - eps, 1 - eps}, l}});
}

}  // namespace

TEST_CASE("stationary distributions") {
  const Vector a = stationary_distribution(Matrix{{-1, 1}, {1, -1}});
  CHECK(a[0] == doctest::Approx(0.5));
  const Vector b = stationary_distribution(Matrix{{-2, 2}, {1, -1}});
  CHECK(b[0] == doctest::Approx(1.0 / 3.0));
  CHECK(b[1] == doctest::Approx(2.0 / 3.0));
  const Vector c = stationary_distribution(Matrix{{-1, 1, 0}, {0, -1, 1}, {1, 0, -1}});
  for (double v : c) CHECK(v == doctest::Approx(1.0 / 3.0));
  CHECK(stationary_distribution(Matrix{{0.0}}) == Vector{1.0});
  CHECK_THROWS_AS(stationary_distribution(Matrix{{-1, 1}, {0, 0}}), NumericalError);
}

TEST_CASE("environment validation") {
  const Matrix l{{-1, 1}, {1, -1}};
  CHECK_THROWS_AS(MarkovEnvironment(Matrix{{-1, 2}, {1, -1}}, {{Vector{1, -1}, l}, {Vector{1, -1}, l}}), ValidationError);
  CHECK_THROWS_AS(MarkovEnvironment(Matrix{{1, -1}, {1, -1}}, {{Vector{1, -1}, l}, {Vector{1, -1}, l}}), ValidationError);
  CHECK_THROWS_AS(MarkovEnvironment(Matrix{{-1, 1}, {1, -1}}, {{Vector{1, -1}, l}, {Vector{1, -1}, Matrix{{-1, 1}, {2, -1}}}}),
                  ValidationError);
  CHECK_THROWS_AS(MarkovEnvironment(Matrix{{0.0}}, {{Vector{1, -1, 0}, l}}), ValidationError);
}

TEST_CASE("environment files round-trip") {
  const MarkovEnvironment env = pm1_twin();
  const MarkovEnvironment back = environment_from_json(environment_to_json(env));
  CHECK(back.size() == 2);
  CHECK(back.generator() == env.generator());
  CHECK(back.state(1).r == env.state(1).r);
  try {
    environment_from_json(R"({"Q": [[0]]})");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.field() == "$.states");
  }
}

TEST_CASE("limit formulas of the +-1 twin") {
  const MarkovEnvironment env = pm1_twin();
  const StochasticLimits lim = stochastic_limits(env, 1.0);
  CHECK(lim.Tinf == doctest::Approx(-0.5 + std::sqrt(2.0) - 1.0).epsilon(1e-12));
  CHECK(lim.Tinf == doctest::Approx(limit_Tinf(builtin("pm1"), 1.0)).epsilon(1e-12));
  CHECK(lim.T0 == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(lim.chi == doctest::Approx(0.5));
  CHECK(lim.m0 == doctest::Approx(-0.5));
  REQUIRE(lim.minf_T0);
  CHECK(*lim.minf_T0 == doctest::Approx(-0.5));
}

TEST_CASE("single-state environment reproduces lambda_max exactly") {
  const Matrix l{{-1, 2}, {1, -2}};
  const MarkovEnvironment env(Matrix{{0.0}}, {{Vector{0.3, -0.6}, l}});
  const LyapunovEstimate e = simulate_lyapunov(env, 0.7, 1.0, 200.0);
  const double expected = oracle::lambda_max_2x2(0.3 - 0.7, 1.4, 0.7, -0.6 - 1.4);
  CHECK(e.lambda_hat == doctest::Approx(expected).epsilon(1e-9));
  const StochasticLimits lim = stochastic_limits(env, 0.7);
  CHECK(lim.T0 == doctest::Approx(expected).epsilon(1e-12));
  CHECK(lim.Tinf == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("simulation is seeded and bounded") {
  const MarkovEnvironment env = pm1_twin();
  SimulationOptions one_thread;
  one_thread.jobs = 1;
  const LyapunovEstimate a = simulate_lyapunov(env, 1.0, 1.0, 2e4, 7, one_thread);
  const LyapunovEstimate b = simulate_lyapunov(env, 1.0, 1.0, 2e4, 7);
  CHECK(a.lambda_hat == b.lambda_hat);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.batch_estimates.size() == 20);
  CHECK(a.stderr_ > 0.0);
  CHECK(a.lambda_hat <= stochastic_limits(env, 1.0).chi + 3 * a.stderr_);
  const LyapunovEstimate c = simulate_lyapunov(env, 1.0, 1.0, 2e4, 8);
  CHECK(c.lambda_hat != a.lambda_hat);
}

TEST_CASE("estimator consistency between horizons") {
  const MarkovEnvironment env = pm1_twin();
  const LyapunovEstimate a = simulate_lyapunov(env, 1.0, 2.0, 1e4, 3);
  const LyapunovEstimate b = simulate_lyapunov(env, 1.0, 2.0, 1e5, 3);
  CHECK(std::abs(a.lambda_hat - b.lambda_hat) < 3 * std::hypot(a.stderr_, b.stderr_));
}

TEST_CASE("too short a horizon is rejected") {
  try {
    simulate_lyapunov(pm1_twin(), 1.0, 100.0, 1000.0);
    FAIL("expected DegenerateHorizon");
  } catch (const ValidationError& e) {
    CHECK(e.code() == "DegenerateHorizon");
  }
}

TEST_CASE("finite-T corrections scale like T and 1/T") {
  const MarkovEnvironment env = pm1_twin();
  const StochasticLimits lim = stochastic_limits(env, 1.0);
  auto mean = [&](double T, double horizon) {
    double s = 0.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) s += simulate_lyapunov(env, 1.0, T, horizon, seed).lambda_hat / 4;
    return s;
  };
  const double fast1 = (mean(1e-2, 200.0) - lim.T0) / 1e-2, fast2 = (mean(1e-3, 200.0) - lim.T0) / 1e-3;
  CHECK(fast1 == doctest::Approx(fast2).epsilon(0.1));
  const double slow1 = (mean(1e2, 2e5) - lim.Tinf) * 1e2, slow2 = (mean(1e3, 2e6) - lim.Tinf) * 1e3;
  CHECK(slow1 == doctest::Approx(slow2).epsilon(0.1));
  CHECK(slow1 < 0.0);
}
