#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dig/model.hpp"

namespace dig {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads (0 = hardware
/// concurrency). Exceptions from fn are rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// A sampled parameter axis: `count` points from lo to hi, geometric when `log`.
struct Axis {
  double lo = 1e-2;
  double hi = 1e2;
  std::size_t count = 128;
  bool log = true;

  std::vector<double> values() const;
  /// Midpoint used for bisection along this axis.
  double midpoint(double a, double b) const { return log ? std::sqrt(a * b) : 0.5 * (a + b); }
};

/// Parses "a:b:n" with an optional ":log" or ":lin" suffix (log by default).
Axis parse_axis(std::string_view text);

inline constexpr Axis kDefaultMAxis{1e-2, 1e2, 128, true};
inline constexpr Axis kDefaultTAxis{1e-2, 1e3, 128, true};

enum class CellStatus { Ok, NonPositiveMonodromy, Error };
const char* to_string(CellStatus s) noexcept;

/// Lambda at one point; NaN with a non-Ok status when undefined.
struct PointValue {
  double lambda = 0.0;
  CellStatus status = CellStatus::Ok;
};
PointValue evaluate_point(const PatchModel& model, double m, double T);

struct SweepGrid {
  Axis m_axis;
  Axis T_axis;
  std::vector<double> m_values;
  std::vector<double> T_values;
  /// Row-major by m: index i * T_values.size() + j.
  std::vector<double> lambda;
  std::vector<CellStatus> status;

  std::size_t index(std::size_t i, std::size_t j) const { return i * T_values.size() + j; }
  double at(std::size_t i, std::size_t j) const { return lambda[index(i, j)]; }
  bool ok(std::size_t i, std::size_t j) const { return status[index(i, j)] == CellStatus::Ok; }
  std::size_t count(CellStatus s) const;
  /// Largest Lambda over Ok cells (-inf when none).
  double max_lambda() const;
};

SweepGrid sweep(const PatchModel& model, const Axis& m_axis, const Axis& T_axis, unsigned jobs = 0);

struct CurveVertex {
  double m = 0.0;
  double T = 0.0;
  double lambda = 0.0;  // residual at the refined point
  double nu() const { return 1.0 / T; }
};

struct CriticalCurve {
  std::vector<std::vector<CurveVertex>> branches;
  double tolerance = 1e-8;
  std::size_t excluded_cells = 0;  // cells with an undefined corner
  bool empirical = false;          // traced on a model without the irreducibility hypothesis
  double max_residual() const;
};

/// Marching squares over the grid, saddles resolved by the cell centre,
/// crossings refined by bisection along the grid edge (60 iterations at most).
/// Throws NumericalError("NoZeroCrossing") when Lambda has one sign on the grid.
CriticalCurve critical_curve(const PatchModel& model, const SweepGrid& grid, double tol = 1e-8);

/// Roots of T -> Lambda(m, T) bracketed on the given ladder, refined in log T.
std::vector<double> critical_periods(const PatchModel& model, double m, const std::vector<double>& T_ladder,
                                     double tol = 1e-10);

/// max over T of Lambda(m, T): best ladder point refined by golden section in log T.
double sup_over_T(const PatchModel& model, double m, const std::vector<double>& T_ladder);

enum class DigCase { Case1, Case2, NotAllSinks, NoDig, ReducibleUnknown };
const char* to_string(DigCase c) noexcept;

struct EmpiricalSummary {
  bool growth_found = false;
  double max_lambda = 0.0;
  double m_at_max = 0.0;
  double T_at_max = 0.0;
  std::size_t ok_cells = 0;
  std::size_t non_positive_cells = 0;
};

struct DigVerdict {
  bool all_sinks = false;
  double chi = 0.0;
  bool dig_possible = false;
  DigCase dig_case = DigCase::NoDig;
  std::optional<double> m_star;
  std::optional<EmpiricalSummary> empirical;
};

/// Growth on the empirical sweep means Lambda > this threshold.
inline constexpr double kGrowthThreshold = 1e-9;

/// For models that are only provisionally valid, a sweep over (m_axis, T_axis)
/// supplies the empirical verdict.
DigVerdict classify_dig(const PatchModel& model, const Axis& m_axis = {1e-2, 1e2, 64, true},
                        const Axis& T_axis = {1e-2, 1e3, 64, true}, unsigned jobs = 0);

struct MonotonicityRow {
  double m = 0.0;
  std::vector<double> lambda;
  /// "increasing", "decreasing", "constant", "increasing-then-decreasing" or "non-monotone".
  std::string shape;
};

struct MonotonicityReport {
  std::vector<double> T_ladder;
  std::vector<MonotonicityRow> rows;
  bool constant_migration = false;
};

MonotonicityReport monotonicity_scan(const PatchModel& model, const std::vector<double>& m_list,
                                     const std::vector<double>& T_ladder, unsigned jobs = 0);

}  // namespace dig
