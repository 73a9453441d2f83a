// One line per acceptance criterion: PASS/FAIL, the measured quantities and
// the wall time against the time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "../support/oracles.hpp"
#include "dig/asymptotics.hpp"
#include "dig/builtins.hpp"
#include "dig/dynamics.hpp"
#include "dig/errors.hpp"
#include "dig/explorer.hpp"
#include "dig/spectral.hpp"
#include "dig/stochastic.hpp"

using namespace dig;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

void table_ab1(Outcome& o) {
  const PatchModel model = builtin("ab1");
  double worst = 0.0;
  for (double m : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double t0 = -3.0 / 8 - 1.5 * m + std::sqrt(1 + 8 * m + 144 * m * m) / 8;
    const double tinf = -3.0 / 8 - 1.5 * m + std::sqrt(4 + 4 * m + 9 * m * m) / 4 + std::sqrt(9 - 12 * m + 36 * m * m) / 8;
    worst = std::max({worst, std::abs(limit_T0(model, m) - t0), std::abs(limit_Tinf(model, m) - tinf)});
  }
  o.require(worst <= 1e-10, "closed forms");
  const MStar ms = m_star(model);
  const double ms_err = ms.value ? std::abs(*ms.value - 5.0 / 9.0) : INFINITY;
  o.require(ms_err <= 1e-8, "m* = 5/9");
  const Corners c = corners(model);
  const double corner_err = std::max({std::abs(c.m0_T0 + 0.25), std::abs(c.minf_T0.value_or(NAN) + 1.0 / 3),
                                      std::abs(c.minf_Tinf.value_or(NAN) + 1.0 / 3), std::abs(c.m0_Tinf - 0.5)});
  o.require(corner_err <= 1e-12, "corners");
  o.detail << "max formula error " << worst << ", |m*-5/9| " << ms_err << ", corner error " << corner_err;
}

void tables_supplementary(Outcome& o) {
  const PatchModel ab2s = builtin("ab2s"), inf = builtin("ab_mstar_inf"), abc = builtin("abc_two_patch");
  const Corners c2 = corners(ab2s), ci = corners(inf), cc = corners(abc);
  const double corner_err =
      std::max({std::abs(*c2.minf_T0 + 3.0 / 8), std::abs(*c2.minf_Tinf + 2.0 / 3), std::abs(*ci.minf_T0 + 3.0 / 8),
                std::abs(*ci.minf_Tinf - 5.0 / 24), std::abs(*cc.minf_T0 + 453.0 / 3320), std::abs(*cc.minf_Tinf + 21.0 / 44)});
  o.require(corner_err <= 1e-10, "corners");
  double form_err = 0.0;
  for (double m : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double a0 = -3.0 / 8 - 1.5 * m + std::sqrt(1 + 144 * m * m) / 8;
    const double ainf = -3.0 / 8 - 1.5 * m + std::sqrt(4 - 4 * m + 9 * m * m) / 4 + std::sqrt(9 - 12 * m + 36 * m * m) / 8;
    const double i0 = -3.0 / 8 - 3 * m + std::sqrt(1 + 576 * m * m) / 8;
    const double iinf = -3.0 / 8 - 3 * m + std::sqrt(1 + 4 * m + 9 * m * m) / 2 + std::sqrt(9 + 48 * m + 144 * m * m) / 8;
    const double c0 = -3.0 / 20 - 83.0 / 150 * m + std::sqrt(225 + 1350 * m + 27556 * m * m) / 300;
    const double cinf = -3.0 / 20 - 83.0 / 150 * m + std::sqrt(1 - 18 * m + 121 * m * m) / 60 +
                        std::sqrt(529 - 828 * m + 484 * m * m) / 60 + std::sqrt(15625 + m * m) / 300;
    form_err = std::max({form_err, std::abs(limit_T0(ab2s, m) - a0), std::abs(limit_Tinf(ab2s, m) - ainf),
                         std::abs(limit_T0(inf, m) - i0), std::abs(limit_Tinf(inf, m) - iinf),
                         std::abs(limit_T0(abc, m) - c0), std::abs(limit_Tinf(abc, m) - cinf)});
  }
  o.require(form_err <= 1e-10, "closed forms");
  const MStar m2 = m_star(ab2s), mi = m_star(inf), mc = m_star(abc);
  o.require(m2.value && std::abs(*m2.value - 0.315) <= 1e-3, "m*(ab2s) ~ 0.315");
  o.require(!mi.value, "m*(ab_mstar_inf) = None");
  o.require(mc.value && std::abs(*mc.value - 1.764) <= 1e-3, "m*(abc) ~ 1.764");
  o.detail << "corner error " << corner_err << ", closed-form error " << form_err << ", m* = "
           << m2.value.value_or(NAN) << " / " << (mi.value ? "value" : mi.reason) << " / " << mc.value.value_or(NAN);
}

void fainshil(Outcome& o) {
  const PatchModel model = builtin("fainshil");
  const double l0 = limit_T0(model, 1.0), linf = limit_Tinf(model, 1.0);
  const GrowthResult g = growth_rate(model, {1.0, 2.0});
  // Independent monodromy from Eigen's exponential of the two half-period matrices.
  const Eigen::MatrixXd a = oracle::to_eigen(model.system_matrix(0.25, 1.0));
  const Eigen::MatrixXd b = oracle::to_eigen(model.system_matrix(0.75, 1.0));
  const Eigen::MatrixXd phi = oracle::expm(b) * oracle::expm(a);
  const double half_log_mu = 0.5 * std::log(oracle::abscissa(phi));
  o.require(l0 < 0.0, "Lambda(1,0) < 0");
  o.require(linf < 0.0, "Lambda(1,inf) < 0");
  o.require(g.lambda > 0.0, "Lambda(1,2) > 0");
  o.require(std::abs(g.lambda - half_log_mu) <= 1e-10, "Lambda(1,2) = ln(mu)/2");
  // Unperturbed switched system: e^B e^A with reducible pieces (non-negative, not positive).
  const PatchModel base = builtin("fainshil(0,0)");
  const Matrix phi0 = expm(base.system_matrix(0.75, 1.0)) * expm(base.system_matrix(0.25, 1.0));
  const double mu0 = perron_nonnegative(phi0).root;
  o.require(std::abs(mu0 - 1.669) <= 1e-3, "mu ~ 1.669");
  o.detail << "Lambda(1,0) = " << l0 << ", Lambda(1,inf) = " << linf << ", Lambda(1,2) = " << g.lambda
           << ", ln(mu)/2 = " << half_log_mu << ", mu(eps=delta=0) = " << mu0;
}

void oracle_equivalence(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> logm(std::log(0.1), std::log(3.0)), logt(std::log(0.1), std::log(10.0));
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const oracle::RawModel raw = oracle::random_model(rng, 2 + k % 3, 1 + k % 4, k % 5 == 0);
    const double m = std::exp(logm(rng)), T = std::exp(logt(rng));
    const double lam = growth_rate(oracle::to_model(raw), {m, T}).lambda;
    worst = std::max(worst, std::abs(lam - oracle::long_horizon_lambda(raw, m, T, 2000)));
  }
  o.require(worst <= 1e-3, "monodromy vs long-horizon");
  o.detail << "50 models, max |difference| " << worst;
}

void identities(Outcome& o) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> logm(std::log(0.05), std::log(5.0)), logt(std::log(0.05), std::log(20.0));
  double bound = -INFINITY, lower = -INFINITY, lower_t0 = -INFINITY, integral = 0.0, h = 0.0;
  int constant = 0;
  for (int k = 0; k < 200; ++k) {
    const bool constant_l = k % 2 == 0;
    const oracle::RawModel raw = oracle::random_model(rng, 2 + k % 3, 1 + k % 3, constant_l);
    const PatchModel model = oracle::to_model(raw);
    const double m = std::exp(logm(rng)), T = std::exp(logt(rng));
    const GrowthResult g = growth_rate(model, {m, T});
    const double lam = g.log_mu / T;
    bound = std::max(bound, lam - oracle::chi(raw));
    integral = std::max(integral, std::abs(growth_rate_integral(model, {m, T}) - lam));
    if (constant_l) {
      ++constant;
      const double inf = oracle::kernel(raw.l[0]).dot(oracle::mean_growth(raw));
      lower = std::max(lower, inf - lam);
      lower_t0 = std::max(lower_t0, oracle::lambda_T0(raw, m) - lam);
      h = std::max(h, std::abs(growth_rate_h_formula(model, {m, T}) - lam));
    }
  }
  o.require(bound <= 1e-9, "Lambda <= chi");
  o.require(lower <= 1e-9, "Lambda >= sum p_i rbar_i");
  o.require(lower_t0 <= 1e-9, "Lambda >= Lambda(m,0)");
  o.require(integral <= 1e-6, "integral formula");
  o.require(h <= 1e-6, "h formula");
  o.detail << "200 models (" << constant << " constant L): max(Lambda-chi) " << bound << ", max(p.rbar-Lambda) "
           << lower << ", max(Lambda(m,0)-Lambda) " << lower_t0 << ", integral err " << integral << ", h err " << h;
}

void simplex(Outcome& o) {
  std::mt19937_64 rng(5);
  double defect = 0.0, distance = 0.0;
  struct Case {
    const char* model;
    double m, T;
  };
  for (const Case& c : {Case{"ab1", 1.0, 5.0}, Case{"abc_two_patch", 1.0, 3.0}, Case{"three_patch_circular", 1.0, 5.0},
                        Case{"fainshil", 1.0, 2.0}}) {
    const PatchModel model = builtin(c.model);
    const ModelParameters params{c.m, c.T};
    const SimplexTrajectory star = periodic_simplex_solution(model, params);
    defect = std::max(defect, star.periodic_defect);
    std::exponential_distribution<double> e(1.0);
    for (int k = 0; k < 20; ++k) {
      Vector theta(model.patches());
      for (double& v : theta) v = e(rng) + 1e-12;
      const double s = sum(theta);
      for (double& v : theta) v /= s;
      const Vector end = integrate_simplex(model, params, theta, 30);
      distance = std::max(distance, max_abs_diff(end, star.states.front()));
    }
  }
  o.require(defect <= 1e-8, "periodic defect");
  o.require(distance <= 1e-6, "global attraction");
  o.detail << "max periodic defect " << defect << ", max distance after 30 periods " << distance;
}

void slow_curve(Outcome& o) {
  for (const char* name : {"ab1", "three_patch_circular"}) {
    const PatchModel model = builtin(name);
    std::vector<double> sup;
    for (double T : {20.0, 80.0, 320.0}) sup.push_back(verify_slow_curve(model, {1.0, T}, 0.05).sup_deviation);
    o.require(sup[1] < sup[0] && sup[2] < sup[1], std::string(name) + " decreasing");
    o.detail << name << " sup deviation " << sup[0] << " > " << sup[1] << " > " << sup[2] << "; ";
  }
}

void critical_curves(Outcome& o) {
  const auto ladder = Axis{1e-2, 1e5, 240, true}.values();
  const PatchModel ab1 = builtin("ab1");
  const CriticalCurve c1 = critical_curve(ab1, sweep(ab1, kDefaultMAxis, kDefaultTAxis));
  double lo = INFINITY, hi = 0.0;
  for (const auto& b : c1.branches)
    for (const CurveVertex& v : b) lo = std::min(lo, v.m), hi = std::max(hi, v.m);
  o.require(c1.branches.size() == 1, "ab1 single branch");
  o.require(hi < 5.0 / 9.0 && lo > 0.0, "ab1 branch inside (0, 5/9)");
  const auto t05 = critical_periods(ab1, 0.05, ladder), t3 = critical_periods(ab1, 0.3, ladder),
             t55 = critical_periods(ab1, 0.55, ladder);
  const bool diverging = t05.size() == 1 && t3.size() == 1 && t55.size() == 1 && t05[0] > t3[0] && t55[0] > t3[0];
  o.require(diverging, "ab1 T_c larger at both ends");
  o.require(c1.max_residual() <= 1e-8, "ab1 residuals");

  const PatchModel abc = builtin("abc_two_patch");
  const CriticalCurve c2 = critical_curve(abc, sweep(abc, kDefaultMAxis, kDefaultTAxis));
  const MStar ms = m_star(abc);
  bool growth_beyond = false;
  for (double m : {2.0, 3.0, 5.0}) growth_beyond |= sup_over_T(abc, m, ladder) > 0.0;
  o.require(c2.branches.size() == 2, "abc two branches");
  o.require(ms.value && std::abs(*ms.value - 1.764) <= 1e-3 && growth_beyond, "abc growth beyond m*");
  o.require(c2.max_residual() <= 1e-8, "abc residuals");

  const PatchModel f = builtin("fainshil");
  const CriticalCurve c3 = critical_curve(f, sweep(f, kDefaultMAxis, kDefaultTAxis));
  double m_max = 0.0;
  for (const auto& b : c3.branches)
    for (const CurveVertex& v : b) m_max = std::max(m_max, v.m);
  const double f_star = m_star(f).value.value_or(NAN);
  o.require(std::abs(f_star - 0.904) <= 2e-2, "fainshil m*");
  o.require(std::abs(m_max - 1.807) <= 2e-2, "fainshil m**");
  o.require(c3.max_residual() <= 1e-8, "fainshil residuals");
  o.detail << "ab1: " << c1.branches.size() << " branch on [" << lo << ", " << hi << "], T_c(0.05, 0.3, 0.55) = "
           << (t05.empty() ? NAN : t05[0]) << ", " << (t3.empty() ? NAN : t3[0]) << ", " << (t55.empty() ? NAN : t55[0])
           << "; abc: " << c2.branches.size() << " branches, m* = " << ms.value.value_or(NAN)
           << "; fainshil: m* = " << f_star << ", m** = " << m_max;
}

void reducible(Outcome& o) {
  const Axis m{1e-2, 1e2, 64, true}, T{1e-2, 1e3, 64, true};
  for (const char* name : {"unidir_favorable", "unidir_unfavorable"}) {
    const SweepGrid g = sweep(builtin(name), m, T);
    o.require(g.max_lambda() > kGrowthThreshold, std::string(name) + " growth region");
    o.detail << name << " max Lambda " << g.max_lambda() << "; ";
  }
  for (const char* b : {"-0.8", "-0.6", "-1", "-1.2"}) {
    const DigVerdict v = classify_dig(builtin(std::string("three_patch_reducible(1,") + b + ")"), m, T);
    const bool expect = std::stod(b) > -0.9;
    const bool found = v.empirical && v.empirical->growth_found;
    o.require(v.dig_case == DigCase::ReducibleUnknown && found == expect, std::string("b = ") + b);
    o.detail << "b=" << b << (found ? " growth" : " no growth") << " (max " << (v.empirical ? v.empirical->max_lambda : NAN)
             << "); ";
  }
}

void stochastic(Outcome& o) {
  const Matrix l{{-1, 1}, {1, -1}};
  const MarkovEnvironment twin(Matrix{{-1, 1}, {1, -1}}, {{Vector{0.5, -1.5}, l}, {Vector{-1.5, 0.5}, l}});
  const double m = 1.0;
  const StochasticLimits lim = stochastic_limits(twin, m);
  double chi_excess = -INFINITY;

  const MarkovEnvironment single(Matrix{{0.0}}, {{Vector{0.3, -0.6}, Matrix{{-1, 2}, {1, -2}}}});
  const LyapunovEstimate s = simulate_lyapunov(single, m, 1.0, 100.0);
  const double exact = oracle::abscissa(oracle::to_eigen(single.system_matrix(0, m)));
  o.require(std::abs(s.lambda_hat - exact) <= 1e-9, "N = 1");

  auto run = [&](double T, double horizon, double target, const char* label) {
    std::vector<double> est, err;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const LyapunovEstimate e = simulate_lyapunov(twin, m, T, horizon, seed);
      est.push_back(e.lambda_hat);
      err.push_back(e.stderr_);
      chi_excess = std::max(chi_excess, (e.lambda_hat - lim.chi) / e.stderr_);
    }
    const double med = median(est), se = median(err);
    o.require(std::abs(med - target) <= 3 * se, label);
    o.detail << label << ": median " << med << " vs " << target << " (" << std::abs(med - target) / se << " stderr); ";
  };
  run(1e-3, 200.0, lim.T0, "T=1e-3 vs T->0 limit");
  run(1e3, 2e6, lim.Tinf, "T=1e3 vs T->inf limit");
  // Limit trend: the distance to the T->inf value shrinks along T.
  std::vector<double> gaps;
  for (double T : {10.0, 100.0, 1000.0}) {
    std::vector<double> est;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) est.push_back(simulate_lyapunov(twin, m, T, 2000 * T, seed).lambda_hat);
    gaps.push_back(std::abs(median(est) - lim.Tinf));
  }
  o.require(gaps[1] < gaps[0] && gaps[2] < gaps[1], "limit trend");
  o.detail << "|median-Tinf| at T=10,100,1000: " << gaps[0] << ", " << gaps[1] << ", " << gaps[2] << "; ";
  o.require(chi_excess <= 3.0, "chi bound");
  o.detail << "N=1 error " << std::abs(s.lambda_hat - exact) << "; max (lambda_hat-chi)/stderr " << chi_excess;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  // --allow-fail N: a criterion documented as unattainable still prints FAIL
  // but does not change the exit status.
  // --report FILE: also write the lines to FILE (ctest hides passing output).
  std::set<int> allowed;
  std::FILE* report = nullptr;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--allow-fail") == 0) allowed.insert(std::atoi(argv[++i]));
    else if (std::strcmp(argv[i], "--report") == 0) report = std::fopen(argv[++i], "w");
  }

  const std::vector<Criterion> criteria{
      {1, "ab1 limits, m* and corners", 1.0, table_ab1},
      {2, "supplementary tables (ab2s, ab_mstar_inf, abc_two_patch)", 2.0, tables_supplementary},
      {3, "non-monotone growth in T (fainshil)", 1.0, fainshil},
      {4, "monodromy vs long-horizon oracle", 60.0, oracle_equivalence},
      {5, "identity suite", 120.0, identities},
      {6, "simplex dynamics", 30.0, simplex},
      {7, "slow-curve trend", 20.0, slow_curve},
      {8, "critical curves at 128x128", 300.0, critical_curves},
      {9, "reducible examples", 120.0, reducible},
      {10, "stochastic environment", 180.0, stochastic},
  };
  int unexpected = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(seconds < c.budget_seconds, "time budget");
    for (std::FILE* f : {stdout, report}) {
      if (!f) continue;
      std::fprintf(f, "%s %2d %s (%.2f s, budget %.0f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                   c.budget_seconds, o.detail.str().c_str());
      std::fflush(f);
    }
    if (!o.pass && !allowed.count(c.id)) ++unexpected;
  }
  if (report) std::fclose(report);
  return unexpected == 0 ? 0 : 1;
}
