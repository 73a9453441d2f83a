#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dig/linalg.hpp"

namespace dig {

enum class FunctionKind { PiecewiseConstant, PiecewiseSmooth };

/// Evaluates a smooth segment at an absolute phase tau inside the closed
/// segment [start, end]; at `end` it must return the left limit.
using SegmentSampler = std::function<Matrix(double tau)>;

/// A 1-periodic, piecewise-defined matrix-valued function of the phase
/// tau in [0, 1). Segment k covers [breaks[k], breaks[k+1]) with the last
/// segment ending at 1; evaluation is right-continuous and uses tau mod 1.
class PeriodicMatrixFunction {
 public:
  static PeriodicMatrixFunction piecewise_constant(std::vector<double> breaks, std::vector<Matrix> values);
  static PeriodicMatrixFunction piecewise_smooth(std::size_t n, std::vector<double> breaks,
                                                 std::vector<SegmentSampler> samplers);
  static PeriodicMatrixFunction constant(Matrix value);

  std::size_t dimension() const noexcept { return n_; }
  FunctionKind kind() const noexcept { return kind_; }
  const std::vector<double>& breaks() const noexcept { return breaks_; }
  std::size_t segment_count() const noexcept { return breaks_.size(); }
  double segment_start(std::size_t k) const { return breaks_.at(k); }
  double segment_end(std::size_t k) const { return k + 1 < breaks_.size() ? breaks_[k + 1] : 1.0; }

  /// Segment containing tau mod 1.
  std::size_t segment_index(double tau) const;
  Matrix operator()(double tau) const;
  /// Evaluates inside segment k; tau may equal the segment end (left limit).
  Matrix evaluate_in_segment(std::size_t k, double tau) const;
  /// Value of a piecewise-constant segment.
  const Matrix& segment_value(std::size_t k) const;

  /// True when the function provably does not depend on tau: a single
  /// constant segment, or several constant segments with identical values.
  bool is_time_independent() const;

 private:
  PeriodicMatrixFunction() = default;
  void check_breaks() const;

  std::size_t n_ = 0;
  FunctionKind kind_ = FunctionKind::PiecewiseConstant;
  std::vector<double> breaks_;
  std::vector<Matrix> values_;
  std::vector<SegmentSampler> samplers_;
};

enum class ValidationStatus { IrreducibleEverywhere, PositiveMonodromyOnly, Invalid };

const char* to_string(ValidationStatus s) noexcept;

struct ValidationIssue {
  std::string code;  // ColumnSumViolation, NegativeOffDiagonal, NonFiniteEntry
  std::size_t segment = 0;
  std::size_t row = 0;
  std::size_t column = 0;
  double residual = 0.0;
  std::string message;
};

struct ValidationReport {
  ValidationStatus status = ValidationStatus::Invalid;
  /// PositiveMonodromyOnly is only provisional: it is certified per (m, T)
  /// when the monodromy matrix turns out entrywise positive.
  bool provisional = false;
  /// Segments whose migration graph is not strongly connected.
  std::vector<std::size_t> reducible_segments;
  std::vector<ValidationIssue> issues;
};

/// Interval of the period on which both growth and migration are given by a
/// single segment each.
struct Piece {
  double start = 0.0;
  double end = 1.0;
  std::size_t growth_segment = 0;
  std::size_t migration_segment = 0;
};

/// An n-patch model dx/dt = (R(t/T) + m L(t/T)) x. Immutable after
/// construction; the validation status is computed once.
class PatchModel {
 public:
  /// Throws ValidationError("SchemaError") when n < 2, the dimensions
  /// disagree, or the growth function has off-diagonal entries.
  PatchModel(std::string name, PeriodicMatrixFunction growth, PeriodicMatrixFunction migration);

  const std::string& name() const noexcept { return name_; }
  std::size_t patches() const noexcept { return growth_.dimension(); }
  const PeriodicMatrixFunction& growth() const noexcept { return growth_; }
  const PeriodicMatrixFunction& migration() const noexcept { return migration_; }
  const ValidationReport& report() const noexcept { return report_; }
  ValidationStatus validation() const noexcept { return report_.status; }

  bool piecewise_constant() const noexcept {
    return growth_.kind() == FunctionKind::PiecewiseConstant &&
           migration_.kind() == FunctionKind::PiecewiseConstant;
  }
  bool constant_migration() const { return migration_.is_time_independent(); }

  /// Common refinement of the growth and migration breakpoints.
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

  Vector growth_rates(const Piece& piece, double tau) const;
  Matrix migration_matrix(const Piece& piece, double tau) const;
  /// R(tau) + m L(tau) on a piece (tau ignored for constant pieces).
  Matrix system_matrix(const Piece& piece, double tau, double m) const;
  Matrix system_matrix(double tau, double m) const;

  /// Throws ValidationError("InvalidModel") unless the status is usable.
  void require_valid() const;

 private:
  std::string name_;
  PeriodicMatrixFunction growth_;
  PeriodicMatrixFunction migration_;
  std::vector<Piece> pieces_;
  ValidationReport report_;
};

/// Migration strength m >= 0 and period T > 0. Limits are dedicated
/// operations; 0 and infinity are never plugged in here.
struct ModelParameters {
  double m = 0.0;
  double T = 1.0;

  /// Throws ValidationError("InvalidParameters").
  void check() const;
};

/// Deterministic, side-effect free structural check of a model.
ValidationReport validate(const PatchModel& model);

/// Validation thresholds.
inline constexpr double kColumnSumTolerance = 1e-12;
inline constexpr double kEdgeThreshold = 1e-14;

}  // namespace dig
