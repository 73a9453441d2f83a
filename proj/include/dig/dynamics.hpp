#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dig/linalg.hpp"
#include "dig/model.hpp"
#include "dig/spectral.hpp"

namespace dig {

enum class GrowthMethod { ExponentialProduct, IntegratedFundamental };

const char* to_string(GrowthMethod m) noexcept;

/// Monodromy matrix Phi(T) over one period, kept as a scaled matrix so that
/// e^{Lambda T} never has to be represented.
struct Monodromy {
  ScaledMatrix phi;
  GrowthMethod method = GrowthMethod::ExponentialProduct;
  /// Smallest entry of phi.matrix (whose largest entry is 1).
  double min_relative_entry = 0.0;
};

/// Fixed-step RK4 settings shared by every integrator in this module.
struct IntegrationOptions {
  int steps_per_period = 2000;
  /// Upper bound on h * T * ||A||_inf for one step (h in phase units).
  double max_step_stiffness = 0.02;
};

/// Phi(T): ordered product of segment exponentials for piecewise-constant
/// models, breakpoint-aligned RK4 otherwise. Models that are only
/// provisionally valid are certified here: every entry of the scaled matrix
/// must exceed 1e-300, else NumericalError("NonPositiveMonodromy").
Monodromy monodromy(const PatchModel& model, const ModelParameters& params, const IntegrationOptions& opts = {});

struct GrowthResult {
  double lambda = 0.0;
  double mu = 0.0;      // may be +inf when e^{Lambda T} overflows; log_mu stays exact
  double log_mu = 0.0;
  Vector pi;
  GrowthMethod method = GrowthMethod::ExponentialProduct;
  double perron_residual = 0.0;
  bool dense_fallback = false;
  std::optional<double> cross_check;    // |Lambda - integral formula|
  std::optional<double> h_cross_check;  // |Lambda - h formula|
};

/// Lambda(m, T) = ln(mu) / T. Requires m > 0 and T > 0.
GrowthResult growth_rate(const PatchModel& model, const ModelParameters& params, const IntegrationOptions& opts = {});

struct SimplexTrajectory {
  std::vector<double> times;   // on [0, T]
  std::vector<Vector> states;  // theta at each time
  double periodic_defect = 0.0;
  /// Quadrature of sum_i r_i theta_i over the period (the integral formula).
  double integral_lambda = 0.0;
  /// sum_i p_i rbar_i + m * int h(theta); only for constant migration.
  std::optional<double> h_lambda;
  std::optional<double> min_h;
};

/// theta* started from the Perron vector and integrated over one period.
/// Throws NumericalError("PeriodicityDefectExceeded") when
/// ||theta(T) - theta(0)||_inf > 1e-8.
SimplexTrajectory periodic_simplex_solution(const PatchModel& model, const ModelParameters& params,
                                            const IntegrationOptions& opts = {});

double growth_rate_integral(const PatchModel& model, const ModelParameters& params,
                            const IntegrationOptions& opts = {});

/// Throws ValidationError("NonConstantMigration"), and
/// NumericalError("NegativeH") when h(theta*) < -1e-10 somewhere.
double growth_rate_h_formula(const PatchModel& model, const ModelParameters& params,
                             const IntegrationOptions& opts = {});

/// h(x) = sum_i (sum_j l_ij x_j) p_i / x_i.
double h_function(const Matrix& l, const Vector& p, const Vector& x);

/// Integrates the simplex equation from theta0 over whole periods.
Vector integrate_simplex(const PatchModel& model, const ModelParameters& params, Vector theta0, int periods,
                         const IntegrationOptions& opts = {});

/// Same, recording every step; periodic_defect is ||theta(end) - theta(0)||.
SimplexTrajectory simplex_trajectory(const PatchModel& model, const ModelParameters& params, Vector theta0,
                                     int periods, const IntegrationOptions& opts = {});

struct SlowCurveReport {
  double nu = 0.0;
  double sup_deviation = 0.0;
  double tau_at_sup = 0.0;
  std::size_t samples = 0;
  std::vector<double> layer_starts;
  /// Sampled phases with theta*(T tau) and v(tau), for plotting.
  std::vector<double> tau;
  std::vector<Vector> theta;
  std::vector<Vector> slow;
};

/// sup over tau outside [tau_k, tau_k + nu] of ||theta*(T tau) - v(tau)||_inf,
/// v(tau) the Perron-Frobenius vector of A(tau).
SlowCurveReport verify_slow_curve(const PatchModel& model, const ModelParameters& params, double nu,
                                  const IntegrationOptions& opts = {});

}  // namespace dig
