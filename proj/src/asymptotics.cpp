#include "dig/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dig/errors.hpp"
#include "dig/spectral.hpp"

namespace dig {
namespace {

struct GaussRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // summing to 1
};

// Newton iteration on the Legendre polynomial from Chebyshev initial guesses.
GaussRule gauss_legendre(int n) {
  GaussRule rule;
  for (int i = 1; i <= n; ++i) {
    double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes.push_back(0.5 * (1.0 - x));
    rule.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
  }
  return rule;
}

const GaussRule& rule64() {
  static const GaussRule r = gauss_legendre(64);
  return r;
}

Matrix integrate_matrix(const PatchModel& model, const std::function<Matrix(const Piece&, double)>& f) {
  Matrix acc(model.patches());
  for (const Piece& piece : model.pieces()) {
    const double len = piece.end - piece.start;
    if (model.piecewise_constant()) {
      acc += f(piece, piece.start) * len;
      continue;
    }
    const GaussRule& g = rule64();
    for (std::size_t k = 0; k < g.nodes.size(); ++k)
      acc += f(piece, piece.start + len * g.nodes[k]) * (len * g.weights[k]);
  }
  return acc;
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

CurveShape shape(const std::vector<double>& m, const std::vector<double>& f, bool flat) {
  constexpr double kSlack = 1e-8;
  CurveShape s;
  s.flat = flat;
  std::vector<double> slopes;
  for (std::size_t k = 0; k + 1 < f.size(); ++k) {
    const double d = f[k + 1] - f[k];
    s.max_increase = std::max(s.max_increase, d);
    slopes.push_back(d / (m[k + 1] - m[k]));
  }
  for (std::size_t k = 0; k + 1 < slopes.size(); ++k) s.max_concavity = std::max(s.max_concavity, slopes[k] - slopes[k + 1]);
  s.decreasing = s.max_increase <= kSlack;
  s.convex = s.max_concavity <= kSlack;
  return s;
}

}  // namespace

double integrate_period(const PatchModel& model, const std::function<double(const Piece&, double)>& f) {
  double acc = 0.0;
  for (const Piece& piece : model.pieces()) {
    const double len = piece.end - piece.start;
    if (model.piecewise_constant()) {
      acc += len * f(piece, piece.start);
      continue;
    }
    const GaussRule& g = rule64();
    for (std::size_t k = 0; k < g.nodes.size(); ++k) acc += len * g.weights[k] * f(piece, piece.start + len * g.nodes[k]);
  }
  return acc;
}

Vector mean_growth(const PatchModel& model) {
  return integrate_matrix(model, [&](const Piece& p, double tau) { return Matrix::diagonal(model.growth_rates(p, tau)); })
      .diag();
}

Matrix mean_migration(const PatchModel& model) {
  return integrate_matrix(model, [&](const Piece& p, double tau) { return model.migration_matrix(p, tau); });
}

double chi(const PatchModel& model) {
  return integrate_period(model, [&](const Piece& p, double tau) {
    const Vector r = model.growth_rates(p, tau);
    return *std::max_element(r.begin(), r.end());
  });
}

double limit_T0(const PatchModel& model, double m) {
  Matrix a = mean_migration(model) * m;
  a += Matrix::diagonal(mean_growth(model));
  return metzler_abscissa(a);
}

double limit_Tinf(const PatchModel& model, double m) {
  return integrate_period(model, [&](const Piece& p, double tau) { return metzler_abscissa(model.system_matrix(p, tau, m)); });
}

double limit_m0(const PatchModel& model) {
  const Vector r = mean_growth(model);
  return *std::max_element(r.begin(), r.end());
}

double limit_minf(const PatchModel& model) {
  if (model.validation() != ValidationStatus::IrreducibleEverywhere)
    throw NumericalError("Reducible", "the m -> infinity limit needs irreducible migration at every phase");
  return integrate_period(model, [&](const Piece& p, double tau) {
    return dot(kernel_vector(model.migration_matrix(p, tau)), model.growth_rates(p, tau));
  });
}

Corners corners(const PatchModel& model) {
  Corners c;
  c.m0_T0 = limit_m0(model);
  c.m0_Tinf = chi(model);
  const Matrix avg_l = mean_migration(model);
  if (strongly_connected(avg_l, kEdgeThreshold)) c.minf_T0 = dot(kernel_vector(avg_l), mean_growth(model));
  if (model.validation() == ValidationStatus::IrreducibleEverywhere) c.minf_Tinf = limit_minf(model);
  return c;
}

MStar m_star(const PatchModel& model, double bracket_max) {
  MStar out;
  const double x = chi(model);
  const double best_mean = limit_m0(model);
  if (!(best_mean < 0.0)) {
    out.reason = "not all sinks";
    return out;
  }
  if (!(x > 0.0)) {
    out.reason = "chi <= 0";
    return out;
  }
  if (model.validation() != ValidationStatus::IrreducibleEverywhere) {
    out.reason = "reducible";
    return out;
  }
  if (limit_minf(model) >= 0.0) {
    out.reason = "growth for all m";
    return out;
  }
  double lo = 1e-6;
  double hi = bracket_max;
  auto f = [&](double m) { return limit_Tinf(model, m); };
  if (!(f(lo) > 0.0)) throw NumericalError("BracketFailure", "Lambda(m, infinity) is not positive at the lower bracket");
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e8) throw NumericalError("BracketFailure", "no sign change of Lambda(m, infinity) below m = 1e8");
  }
  double mid = 0.5 * (lo + hi);
  double value = f(mid);
  for (out.iterations = 1; out.iterations <= 200; ++out.iterations) {
    mid = 0.5 * (lo + hi);
    value = f(mid);
    if (std::abs(value) <= 1e-10 && hi - lo <= 1e-12 * hi) break;
    if (value > 0.0) lo = mid; else hi = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  out.value = mid;
  out.residual = value;
  out.reason = "root";
  return out;
}

double two_patch_lambda_max(double r1, double r2, double l12, double l21, double m) {
  const double d = (r1 - r2 + m * (l12 - l21)) * (r1 - r2 + m * (l12 - l21)) + 4.0 * m * m * l12 * l21;
  return 0.5 * (r1 + r2 - m * (l12 + l21) + std::sqrt(d));
}

TwoPatchForms two_patch_closed_forms(const PatchModel& model, double m) {
  if (model.patches() != 2) throw ValidationError("WrongDimension", "closed forms are for two patches");
  TwoPatchForms out;
  const Vector r = mean_growth(model);
  const Matrix l = mean_migration(model);
  out.lambda_T0 = two_patch_lambda_max(r[0], r[1], l(0, 1), l(1, 0), m);
  out.lambda_Tinf = integrate_period(model, [&](const Piece& p, double tau) {
    const Vector rt = model.growth_rates(p, tau);
    const Matrix lt = model.migration_matrix(p, tau);
    return two_patch_lambda_max(rt[0], rt[1], lt(0, 1), lt(1, 0), m);
  });
  return out;
}

ConvexityReport convexity_report(const PatchModel& model, const std::vector<double>& m_grid) {
  ConvexityReport out;
  out.m = m_grid;
  std::sort(out.m.begin(), out.m.end());
  for (double m : out.m) {
    out.lambda_T0.push_back(limit_T0(model, m));
    out.lambda_Tinf.push_back(limit_Tinf(model, m));
  }
  const Vector r = mean_growth(model);
  const auto [rmin, rmax] = std::minmax_element(r.begin(), r.end());
  const bool equal_means = *rmax - *rmin < 1e-12;
  bool equal_rates = true;
  for (const Piece& p : model.pieces()) {
    for (double f : {0.0, 0.5}) {
      const Vector rt = model.growth_rates(p, p.start + f * (p.end - p.start));
      const auto [lo, hi] = std::minmax_element(rt.begin(), rt.end());
      if (*hi - *lo >= 1e-12) equal_rates = false;
    }
  }
  out.T0 = shape(out.m, out.lambda_T0, equal_means);
  out.Tinf = shape(out.m, out.lambda_Tinf, equal_rates);
  return out;
}

LimitPanel limit_panel(const PatchModel& model, std::optional<double> m) {
  model.require_valid();
  LimitPanel panel;
  panel.m = m;
  if (m) {
    if (!(std::isfinite(*m) && *m > 0.0)) throw ValidationError("InvalidParameters", "m must be finite and > 0");
    panel.lambda_m_0 = limit_T0(model, *m);
    panel.lambda_m_inf = limit_Tinf(model, *m);
  }
  panel.mean_growth = mean_growth(model);
  panel.lambda_0_T = limit_m0(model);
  panel.corners = corners(model);
  panel.lambda_inf_T = panel.corners.minf_Tinf;
  panel.chi = panel.corners.m0_Tinf;
  panel.m_star = m_star(model);
  if (model.constant_migration() && model.validation() == ValidationStatus::IrreducibleEverywhere)
    panel.infimum = dot(kernel_vector(model.migration().segment_value(0)), panel.mean_growth);
  return panel;
}

}  // namespace dig
