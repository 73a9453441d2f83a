#include "dig/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "dig/errors.hpp"

namespace dig {

const char* to_string(GrowthMethod m) noexcept {
  return m == GrowthMethod::ExponentialProduct ? "ExponentialProduct" : "IntegratedFundamental";
}

namespace {

constexpr double kPositivityFloor = 1e-300;
constexpr double kDefectTolerance = 1e-8;

// Stiffness estimate of a piece: ||A||_inf at its ends and midpoint.
double piece_norm(const PatchModel& model, const Piece& piece, double m) {
  if (model.piecewise_constant()) return norm_inf(model.system_matrix(piece, piece.start, m));
  double best = 0.0;
  for (double f : {0.0, 0.5, 1.0})
    best = std::max(best, norm_inf(model.system_matrix(piece, piece.start + f * (piece.end - piece.start), m)));
  return best;
}

int steps_for(const PatchModel& model, const Piece& piece, const ModelParameters& params,
              const IntegrationOptions& opts) {
  const double len = piece.end - piece.start;
  const double by_grid = std::ceil(opts.steps_per_period * len);
  const double by_stiffness = std::ceil(len * params.T * piece_norm(model, piece, params.m) / opts.max_step_stiffness);
  const double steps = std::max({1.0, by_grid, by_stiffness});
  if (steps > 5e7) throw NumericalError("IntegrationFailure", "step count exceeds the integrator budget");
  return static_cast<int>(steps);
}

void check_params(const ModelParameters& params) {
  params.check();
  if (!(params.m > 0.0))
    throw ValidationError("InvalidParameters", "growth rate needs m > 0; the m -> 0 limit is limit_m0");
}

void renormalize(Vector& theta) {
  const double s = sum(theta);
  if (!(s > 0.0) || !std::isfinite(s)) throw NumericalError("IntegrationFailure", "simplex state left the simplex");
  for (double& v : theta) v /= s;
}

// theta' = T (A theta - <A theta, 1> theta) in phase time, plus scalar
// running integrals whose integrands are evaluated on the RK4 stages.
class SimplexIntegrator {
 public:
  using Integrand = std::function<double(const Piece&, double tau, const Vector& theta)>;
  using Observer = std::function<void(double tau, const Vector& theta)>;

  SimplexIntegrator(const PatchModel& model, const ModelParameters& params, const IntegrationOptions& opts)
      : model_(model), params_(params), opts_(opts) {
    for (const Piece& p : model.pieces()) steps_.push_back(steps_for(model, p, params, opts));
  }

  void add_integrand(Integrand f) {
    integrands_.push_back(std::move(f));
    totals_.push_back(0.0);
  }

  const std::vector<double>& totals() const { return totals_; }

  // Advances theta through one period starting at phase 0.
  void period(Vector& theta, const Observer& observe = {}) {
    if (observe) observe(0.0, theta);
    const auto& pieces = model_.pieces();
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const Piece& piece = pieces[k];
      const int steps = steps_[k];
      const double h = (piece.end - piece.start) / steps;
      const bool constant = model_.piecewise_constant();
      Matrix a_const = constant ? model_.system_matrix(piece, piece.start, params_.m) : Matrix();
      auto a_at = [&](double tau) { return constant ? a_const : model_.system_matrix(piece, tau, params_.m); };
      for (int s = 0; s < steps; ++s) {
        const double tau = piece.start + s * h;
        const double tau_end = s + 1 == steps ? piece.end : tau + h;
        step(piece, a_at, tau, tau_end - tau, theta);
        if (observe) observe(tau_end, theta);
      }
    }
  }

 private:
  template <class AAt>
  void step(const Piece& piece, const AAt& a_at, double tau, double h, Vector& theta) {
    const std::size_t n = theta.size();
    const Matrix a0 = a_at(tau);
    const Matrix a_mid = model_.piecewise_constant() ? a0 : a_at(tau + 0.5 * h);
    const Matrix a1 = model_.piecewise_constant() ? a0 : a_at(tau + h);
    auto rhs = [&](const Matrix& a, const Vector& x) {
      Vector ax = a * x;
      const double flux = sum(ax);
      for (std::size_t i = 0; i < n; ++i) ax[i] = params_.T * (ax[i] - flux * x[i]);
      return ax;
    };
    auto shifted = [&](const Vector& k, double c) {
      Vector y = theta;
      for (std::size_t i = 0; i < n; ++i) y[i] += c * k[i];
      return y;
    };
    const Vector k1 = rhs(a0, theta);
    const Vector y2 = shifted(k1, 0.5 * h);
    const Vector k2 = rhs(a_mid, y2);
    const Vector y3 = shifted(k2, 0.5 * h);
    const Vector k3 = rhs(a_mid, y3);
    const Vector y4 = shifted(k3, h);
    const Vector k4 = rhs(a1, y4);
    for (std::size_t j = 0; j < integrands_.size(); ++j) {
      const auto& f = integrands_[j];
      totals_[j] += h / 6.0 *
                    (f(piece, tau, theta) + 2.0 * f(piece, tau + 0.5 * h, y2) + 2.0 * f(piece, tau + 0.5 * h, y3) +
                     f(piece, tau + h, y4));
    }
    for (std::size_t i = 0; i < n; ++i) theta[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    renormalize(theta);
  }

  const PatchModel& model_;
  ModelParameters params_;
  IntegrationOptions opts_;
  std::vector<int> steps_;
  std::vector<Integrand> integrands_;
  std::vector<double> totals_;
};

ScaledMatrix integrate_fundamental(const PatchModel& model, const ModelParameters& params,
                                   const IntegrationOptions& opts) {
  const std::size_t n = model.patches();
  ScaledMatrix y{Matrix::identity(n), 0.0};
  for (const Piece& piece : model.pieces()) {
    const int steps = steps_for(model, piece, params, opts);
    const double h = (piece.end - piece.start) / steps;
    for (int s = 0; s < steps; ++s) {
      const double tau = piece.start + s * h;
      const Matrix a0 = model.system_matrix(piece, tau, params.m) * params.T;
      const Matrix am = model.system_matrix(piece, tau + 0.5 * h, params.m) * params.T;
      const Matrix a1 = model.system_matrix(piece, tau + h, params.m) * params.T;
      const Matrix& x = y.matrix;
      const Matrix k1 = a0 * x;
      const Matrix k2 = am * (x + k1 * (0.5 * h));
      const Matrix k3 = am * (x + k2 * (0.5 * h));
      const Matrix k4 = a1 * (x + k3 * h);
      Matrix next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
      const double c = max_abs(next);
      if (!(c > 0.0) || !std::isfinite(c)) throw NumericalError("IntegrationFailure", "fundamental matrix diverged");
      next *= 1.0 / c;
      y.matrix = std::move(next);
      y.log_scale += std::log(c);
    }
  }
  return y;
}

}  // namespace

Monodromy monodromy(const PatchModel& model, const ModelParameters& params, const IntegrationOptions& opts) {
  params.check();
  model.require_valid();
  Monodromy out;
  if (model.piecewise_constant()) {
    out.method = GrowthMethod::ExponentialProduct;
    ScaledMatrix phi{Matrix::identity(model.patches()), 0.0};
    for (const Piece& piece : model.pieces()) {
      const Matrix a = model.system_matrix(piece, piece.start, params.m);
      // Later pieces multiply from the left.
      try {
        phi = multiply(expm_scaled(a, (piece.end - piece.start) * params.T), phi);
      } catch (const NumericalError& e) {
        // Reducible pieces can annihilate each other's support entirely.
        if (e.code() != "Underflow" || model.validation() != ValidationStatus::PositiveMonodromyOnly) throw;
        throw NumericalError("NonPositiveMonodromy", "monodromy matrix vanished; the growth rate is undefined");
      }
    }
    out.phi = std::move(phi);
  } else {
    out.method = GrowthMethod::IntegratedFundamental;
    out.phi = integrate_fundamental(model, params, opts);
  }
  out.min_relative_entry = min_entry(out.phi.matrix);
  if (model.validation() == ValidationStatus::PositiveMonodromyOnly && !(out.min_relative_entry > kPositivityFloor))
    throw NumericalError("NonPositiveMonodromy", "monodromy matrix is not entrywise positive; the growth rate is undefined");
  return out;
}

GrowthResult growth_rate(const PatchModel& model, const ModelParameters& params, const IntegrationOptions& opts) {
  check_params(params);
  const Monodromy mono = monodromy(model, params, opts);
  const PerronPair pair = mono.min_relative_entry > 0.0 ? perron_positive(mono.phi.matrix)
                                                        : perron_nonnegative(mono.phi.matrix);
  if (!(pair.root > 0.0)) throw NumericalError("NonPositiveMonodromy", "Perron root is not positive");
  GrowthResult out;
  out.log_mu = std::log(pair.root) + mono.phi.log_scale;
  out.lambda = out.log_mu / params.T;
  out.mu = std::exp(out.log_mu);
  out.pi = pair.vector;
  out.method = mono.method;
  out.perron_residual = pair.residual;
  out.dense_fallback = pair.dense_fallback;
  return out;
}

double h_function(const Matrix& l, const Vector& p, const Vector& x) {
  const Vector lx = l * x;
  double h = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) h += lx[i] * p[i] / x[i];
  return h;
}

SimplexTrajectory periodic_simplex_solution(const PatchModel& model, const ModelParameters& params,
                                            const IntegrationOptions& opts) {
  const GrowthResult g = growth_rate(model, params, opts);
  SimplexIntegrator integrator(model, params, opts);
  integrator.add_integrand([&](const Piece& piece, double tau, const Vector& theta) {
    const Vector r = model.growth_rates(piece, tau);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r[i] * theta[i];
    return s;
  });

  const bool constant_l = model.constant_migration();
  Matrix l;
  Vector p;
  double min_h = std::numeric_limits<double>::infinity();
  if (constant_l) {
    l = model.migration().segment_value(0);
    p = kernel_vector(l);
    integrator.add_integrand([&](const Piece& piece, double tau, const Vector& theta) {
      const Vector r = model.growth_rates(piece, tau);
      const double h = h_function(l, p, theta);
      min_h = std::min(min_h, h);
      double s = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) s += p[i] * r[i];
      return s + params.m * h;
    });
  }

  SimplexTrajectory out;
  Vector theta = g.pi;
  integrator.period(theta, [&](double tau, const Vector& state) {
    out.times.push_back(tau * params.T);
    out.states.push_back(state);
  });
  out.periodic_defect = max_abs_diff(theta, g.pi);
  out.integral_lambda = integrator.totals()[0];
  if (constant_l) {
    out.h_lambda = integrator.totals()[1];
    out.min_h = min_h;
  }
  if (out.periodic_defect > kDefectTolerance)
    throw NumericalError("PeriodicityDefectExceeded",
                         "theta* periodic defect " + std::to_string(out.periodic_defect) + " exceeds 1e-8");
  return out;
}

double growth_rate_integral(const PatchModel& model, const ModelParameters& params, const IntegrationOptions& opts) {
  return periodic_simplex_solution(model, params, opts).integral_lambda;
}

double growth_rate_h_formula(const PatchModel& model, const ModelParameters& params, const IntegrationOptions& opts) {
  if (!model.constant_migration())
    throw ValidationError("NonConstantMigration", "the h formula needs a time-independent migration matrix");
  const SimplexTrajectory traj = periodic_simplex_solution(model, params, opts);
  if (*traj.min_h < -1e-10) throw NumericalError("NegativeH", "h(theta*) is negative along the periodic solution");
  return *traj.h_lambda;
}

namespace {

void check_start(const PatchModel& model, const ModelParameters& params, Vector& theta0) {
  check_params(params);
  model.require_valid();
  if (theta0.size() != model.patches()) throw ValidationError("SchemaError", "initial state has the wrong size");
  for (double v : theta0)
    if (!(v > 0.0)) throw ValidationError("InvalidParameters", "initial state must be strictly positive");
  renormalize(theta0);
}

}  // namespace

Vector integrate_simplex(const PatchModel& model, const ModelParameters& params, Vector theta0, int periods,
                         const IntegrationOptions& opts) {
  check_start(model, params, theta0);
  SimplexIntegrator integrator(model, params, opts);
  for (int k = 0; k < periods; ++k) integrator.period(theta0);
  return theta0;
}

SimplexTrajectory simplex_trajectory(const PatchModel& model, const ModelParameters& params, Vector theta0,
                                     int periods, const IntegrationOptions& opts) {
  check_start(model, params, theta0);
  SimplexIntegrator integrator(model, params, opts);
  SimplexTrajectory out;
  const Vector start = theta0;
  for (int k = 0; k < periods; ++k) {
    integrator.period(theta0, [&](double tau, const Vector& state) {
      if (k > 0 && tau == 0.0) return;
      out.times.push_back((k + tau) * params.T);
      out.states.push_back(state);
    });
  }
  out.periodic_defect = max_abs_diff(theta0, start);
  return out;
}

SlowCurveReport verify_slow_curve(const PatchModel& model, const ModelParameters& params, double nu,
                                  const IntegrationOptions& opts) {
  if (model.validation() != ValidationStatus::IrreducibleEverywhere)
    throw ValidationError("InvalidModel", "the slow curve needs irreducible migration at every phase");
  if (!(nu >= 0.0 && nu < 1.0)) throw ValidationError("InvalidParameters", "layer width must lie in [0, 1)");
  const SimplexTrajectory traj = periodic_simplex_solution(model, params, opts);

  SlowCurveReport report;
  report.nu = nu;
  for (const Piece& p : model.pieces()) report.layer_starts.push_back(p.start);
  std::vector<Vector> cached(model.pieces().size());
  const auto& pieces = model.pieces();
  std::size_t k = 0;
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    const double tau = traj.times[s] / params.T;
    while (k + 1 < pieces.size() && tau >= pieces[k + 1].start) ++k;
    bool in_layer = false;
    for (double start : report.layer_starts)
      if (tau >= start && tau <= start + nu) in_layer = true;
    if (in_layer) continue;
    Vector v;
    if (model.piecewise_constant()) {
      if (cached[k].empty()) cached[k] = perron_frobenius_metzler(model.system_matrix(pieces[k], tau, params.m)).vector;
      v = cached[k];
    } else {
      v = perron_frobenius_metzler(model.system_matrix(pieces[k], tau, params.m)).vector;
    }
    const double dev = max_abs_diff(traj.states[s], v);
    if (dev > report.sup_deviation) {
      report.sup_deviation = dev;
      report.tau_at_sup = tau;
    }
    ++report.samples;
    report.tau.push_back(tau);
    report.theta.push_back(traj.states[s]);
    report.slow.push_back(std::move(v));
  }
  return report;
}

}  // namespace dig
