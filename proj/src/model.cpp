#include "dig/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dig/errors.hpp"

namespace dig {

// ---------------------------------------------------------------------------
// PeriodicMatrixFunction

PeriodicMatrixFunction PeriodicMatrixFunction::piecewise_constant(std::vector<double> breaks,
                                                                  std::vector<Matrix> values) {
  if (values.empty()) throw ValidationError("SchemaError", "periodic function needs at least one segment");
  if (breaks.size() != values.size())
    throw ValidationError("SchemaError", "number of breaks must equal number of segment values");
  PeriodicMatrixFunction f;
  f.n_ = values.front().size();
  f.kind_ = FunctionKind::PiecewiseConstant;
  f.breaks_ = std::move(breaks);
  f.values_ = std::move(values);
  for (const Matrix& v : f.values_)
    if (v.size() != f.n_) throw ValidationError("SchemaError", "segment matrices must share one dimension");
  f.check_breaks();
  return f;
}

PeriodicMatrixFunction PeriodicMatrixFunction::piecewise_smooth(std::size_t n, std::vector<double> breaks,
                                                                std::vector<SegmentSampler> samplers) {
  if (samplers.empty()) throw ValidationError("SchemaError", "periodic function needs at least one segment");
  if (breaks.size() != samplers.size())
    throw ValidationError("SchemaError", "number of breaks must equal number of samplers");
  PeriodicMatrixFunction f;
  f.n_ = n;
  f.kind_ = FunctionKind::PiecewiseSmooth;
  f.breaks_ = std::move(breaks);
  f.samplers_ = std::move(samplers);
  f.check_breaks();
  for (std::size_t k = 0; k < f.samplers_.size(); ++k) {
    if (!f.samplers_[k]) throw ValidationError("SchemaError", "empty segment sampler");
    if (f.samplers_[k](f.segment_start(k)).size() != n)
      throw ValidationError("SchemaError", "sampler returned a matrix of the wrong dimension");
  }
  return f;
}

PeriodicMatrixFunction PeriodicMatrixFunction::constant(Matrix value) {
  return piecewise_constant({0.0}, {std::move(value)});
}

void PeriodicMatrixFunction::check_breaks() const {
  if (breaks_.front() != 0.0) throw ValidationError("SchemaError", "first break must be 0");
  for (std::size_t k = 0; k < breaks_.size(); ++k) {
    const double b = breaks_[k];
    if (!(b >= 0.0 && b < 1.0)) throw ValidationError("SchemaError", "breaks must lie in [0, 1)");
    if (k > 0 && !(b > breaks_[k - 1]))
      throw ValidationError("SchemaError", "breaks must be strictly increasing");
  }
}

std::size_t PeriodicMatrixFunction::segment_index(double tau) const {
  double phase = tau - std::floor(tau);
  if (phase >= 1.0) phase = 0.0;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), phase);
  return static_cast<std::size_t>(std::distance(breaks_.begin(), it)) - 1;
}

Matrix PeriodicMatrixFunction::operator()(double tau) const {
  const std::size_t k = segment_index(tau);
  if (kind_ == FunctionKind::PiecewiseConstant) return values_[k];
  return samplers_[k](tau - std::floor(tau));
}

Matrix PeriodicMatrixFunction::evaluate_in_segment(std::size_t k, double tau) const {
  if (kind_ == FunctionKind::PiecewiseConstant) return values_.at(k);
  return samplers_.at(k)(tau);
}

const Matrix& PeriodicMatrixFunction::segment_value(std::size_t k) const {
  if (kind_ != FunctionKind::PiecewiseConstant)
    throw std::logic_error("segment_value on a piecewise-smooth function");
  return values_.at(k);
}

bool PeriodicMatrixFunction::is_time_independent() const {
  if (kind_ != FunctionKind::PiecewiseConstant) return false;
  return std::all_of(values_.begin(), values_.end(), [&](const Matrix& v) { return v == values_.front(); });
}

// ---------------------------------------------------------------------------
// Validation

const char* to_string(ValidationStatus s) noexcept {
  switch (s) {
    case ValidationStatus::IrreducibleEverywhere: return "IrreducibleEverywhere";
    case ValidationStatus::PositiveMonodromyOnly: return "PositiveMonodromyOnly";
    case ValidationStatus::Invalid: return "Invalid";
  }
  return "Invalid";
}

namespace {

// Phases at which a segment is inspected: the constant value, or a sweep of
// the closed segment for smooth functions.
std::vector<double> inspection_points(const PeriodicMatrixFunction& f, std::size_t k) {
  if (f.kind() == FunctionKind::PiecewiseConstant) return {f.segment_start(k)};
  constexpr int kSamples = 16;
  const double a = f.segment_start(k);
  const double b = f.segment_end(k);
  std::vector<double> pts;
  for (int s = 0; s <= kSamples; ++s) pts.push_back(a + (b - a) * s / kSamples);
  return pts;
}

std::string describe(const char* what, std::size_t seg, std::size_t i, std::size_t j, double v) {
  std::ostringstream os;
  os << what << " in migration segment " << seg << " at (" << i << ", " << j << "): " << v;
  return os.str();
}

ValidationReport compute_report(const PeriodicMatrixFunction& migration) {
  ValidationReport report;
  const std::size_t n = migration.dimension();
  for (std::size_t k = 0; k < migration.segment_count(); ++k) {
    bool connected = true;
    for (double tau : inspection_points(migration, k)) {
      const Matrix l = migration.evaluate_in_segment(k, tau);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (!std::isfinite(l(i, j))) {
            report.issues.push_back({"NonFiniteEntry", k, i, j, l(i, j), describe("non-finite entry", k, i, j, l(i, j))});
          } else if (i != j && l(i, j) < 0.0) {
            report.issues.push_back(
                {"NegativeOffDiagonal", k, i, j, l(i, j), describe("negative off-diagonal", k, i, j, l(i, j))});
          }
        }
      }
      for (std::size_t j = 0; j < n; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < n; ++i) col += l(i, j);
        if (std::abs(col) > kColumnSumTolerance) {
          report.issues.push_back(
              {"ColumnSumViolation", k, 0, j, col, describe("non-zero column sum", k, 0, j, col)});
        }
      }
      if (!strongly_connected(l, kEdgeThreshold)) connected = false;
    }
    if (!connected) report.reducible_segments.push_back(k);
  }
  if (!report.issues.empty()) {
    report.status = ValidationStatus::Invalid;
  } else if (report.reducible_segments.empty()) {
    report.status = ValidationStatus::IrreducibleEverywhere;
  } else {
    report.status = ValidationStatus::PositiveMonodromyOnly;
    report.provisional = true;
  }
  return report;
}

std::vector<Piece> merge_pieces(const PeriodicMatrixFunction& growth, const PeriodicMatrixFunction& migration) {
  std::vector<double> cuts = growth.breaks();
  cuts.insert(cuts.end(), migration.breaks().begin(), migration.breaks().end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Piece> pieces;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    Piece p;
    p.start = cuts[k];
    p.end = k + 1 < cuts.size() ? cuts[k + 1] : 1.0;
    p.growth_segment = growth.segment_index(p.start);
    p.migration_segment = migration.segment_index(p.start);
    pieces.push_back(p);
  }
  return pieces;
}

}  // namespace

// ---------------------------------------------------------------------------
// PatchModel

PatchModel::PatchModel(std::string name, PeriodicMatrixFunction growth, PeriodicMatrixFunction migration)
    : name_(std::move(name)), growth_(std::move(growth)), migration_(std::move(migration)) {
  const std::size_t n = growth_.dimension();
  if (n < 2) throw ValidationError("SchemaError", "n >= 2 required");
  if (migration_.dimension() != n)
    throw ValidationError("SchemaError", "growth and migration dimensions differ");
  for (std::size_t k = 0; k < growth_.segment_count(); ++k) {
    for (double tau : inspection_points(growth_, k)) {
      const Matrix r = growth_.evaluate_in_segment(k, tau);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j && r(i, j) != 0.0)
            throw ValidationError("SchemaError", "growth matrices must be diagonal");
    }
  }
  pieces_ = merge_pieces(growth_, migration_);
  report_ = compute_report(migration_);
}

Vector PatchModel::growth_rates(const Piece& piece, double tau) const {
  return growth_.evaluate_in_segment(piece.growth_segment, tau).diag();
}

Matrix PatchModel::migration_matrix(const Piece& piece, double tau) const {
  return migration_.evaluate_in_segment(piece.migration_segment, tau);
}

Matrix PatchModel::system_matrix(const Piece& piece, double tau, double m) const {
  Matrix a = migration_.evaluate_in_segment(piece.migration_segment, tau);
  a *= m;
  a += growth_.evaluate_in_segment(piece.growth_segment, tau);
  return a;
}

Matrix PatchModel::system_matrix(double tau, double m) const {
  const double phase = tau - std::floor(tau);
  for (const Piece& p : pieces_)
    if (phase >= p.start && phase < p.end) return system_matrix(p, phase, m);
  return system_matrix(pieces_.front(), 0.0, m);
}

void PatchModel::require_valid() const {
  if (report_.status == ValidationStatus::Invalid) {
    const std::string detail = report_.issues.empty() ? "" : ": " + report_.issues.front().message;
    throw ValidationError("InvalidModel", "model '" + name_ + "' failed validation" + detail);
  }
}

void ModelParameters::check() const {
  if (!(std::isfinite(m) && m >= 0.0)) throw ValidationError("InvalidParameters", "m must be finite and >= 0");
  if (!(std::isfinite(T) && T > 0.0)) throw ValidationError("InvalidParameters", "T must be finite and > 0");
}

ValidationReport validate(const PatchModel& model) { return compute_report(model.migration()); }

}  // namespace dig
