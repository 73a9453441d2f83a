#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dig/linalg.hpp"
#include "dig/model.hpp"

namespace dig {

/// Integral over one period of f(piece, tau): exact segment weights for
/// piecewise-constant models, 64-node Gauss-Legendre per piece otherwise.
double integrate_period(const PatchModel& model, const std::function<double(const Piece&, double)>& f);

/// Period averages r-bar_i.
Vector mean_growth(const PatchModel& model);
/// Entrywise period average of L.
Matrix mean_migration(const PatchModel& model);

/// chi = int max_i r_i(tau) dtau.
double chi(const PatchModel& model);

/// T -> 0: lambda_max(avg R + m avg L). Dense abscissa if the average is reducible.
double limit_T0(const PatchModel& model, double m);
/// T -> infinity: int lambda_max(R(tau) + m L(tau)) dtau.
double limit_Tinf(const PatchModel& model, double m);
/// m -> 0: max_i r-bar_i.
double limit_m0(const PatchModel& model);
/// m -> infinity: sum_i avg(p_i r_i), p(tau) the kernel vector of L(tau).
/// Throws NumericalError("Reducible") unless the model is irreducible everywhere.
double limit_minf(const PatchModel& model);

struct Corners {
  double m0_T0 = 0.0;                // max r-bar_i
  std::optional<double> minf_T0;     // sum q_i r-bar_i, q = kernel(avg L)
  double m0_Tinf = 0.0;              // chi
  std::optional<double> minf_Tinf;   // sum avg(p_i r_i)
};

Corners corners(const PatchModel& model);

struct MStar {
  std::optional<double> value;
  /// "root", "growth for all m", "not all sinks", "chi <= 0" or "reducible".
  std::string reason;
  double residual = 0.0;  // Lambda(m*, infinity)
  int iterations = 0;
};

/// Root of m -> Lambda(m, infinity) by bisection on [1e-6, bracket_max]; the
/// upper end is doubled (up to 1e8) while the limit there is still positive.
/// Throws NumericalError("BracketFailure") when no sign change is found.
MStar m_star(const PatchModel& model, double bracket_max = 100.0);

struct TwoPatchForms {
  double lambda_T0 = 0.0;
  double lambda_Tinf = 0.0;
};

/// Closed forms for two patches with D = (r1 - r2 + m(l12 - l21))^2 + 4 m^2 l12 l21.
/// Throws ValidationError("WrongDimension") when n != 2.
TwoPatchForms two_patch_closed_forms(const PatchModel& model, double m);

/// lambda_max of [[r1 - m l21, m l12], [m l21, r2 - m l12]].
double two_patch_lambda_max(double r1, double r2, double l12, double l21, double m);

struct CurveShape {
  bool decreasing = true;
  bool convex = true;
  double max_increase = 0.0;     // largest positive first difference
  double max_concavity = 0.0;    // largest drop between consecutive slopes
  bool flat = false;             // degenerate equal-rate case
};

struct ConvexityReport {
  std::vector<double> m;
  std::vector<double> lambda_T0;
  std::vector<double> lambda_Tinf;
  CurveShape T0;
  CurveShape Tinf;
};

ConvexityReport convexity_report(const PatchModel& model, const std::vector<double>& m_grid);

struct LimitPanel {
  std::optional<double> m;
  std::optional<double> lambda_m_0;     // Lambda(m, 0) at the given m
  std::optional<double> lambda_m_inf;   // Lambda(m, infinity) at the given m
  double lambda_0_T = 0.0;
  std::optional<double> lambda_inf_T;
  Corners corners;
  double chi = 0.0;
  MStar m_star;
  std::optional<double> infimum;  // sum p_i r-bar_i for constant migration
  Vector mean_growth;
};

LimitPanel limit_panel(const PatchModel& model, std::optional<double> m = std::nullopt);

}  // namespace dig
