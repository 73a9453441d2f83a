#include "dig/explorer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "dig/asymptotics.hpp"
#include "dig/builtins.hpp"
#include "dig/dynamics.hpp"
#include "dig/errors.hpp"

namespace dig {

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(count, 1)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> Axis::values() const {
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(count - 1);
    v[k] = log ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

Axis parse_axis(std::string_view text) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto colon = text.find(':');
    parts.push_back(text.substr(0, colon));
    if (colon == std::string_view::npos) break;
    text.remove_prefix(colon + 1);
  }
  if (parts.size() != 3 && parts.size() != 4)
    throw ValidationError("InvalidRange", "range must look like a:b:n[:log|:lin]");
  Axis axis;
  axis.lo = exact(parts[0]);
  axis.hi = exact(parts[1]);
  const double n = exact(parts[2]);
  if (parts.size() == 4) {
    if (parts[3] == "log") axis.log = true;
    else if (parts[3] == "lin") axis.log = false;
    else throw ValidationError("InvalidRange", "range spacing must be 'log' or 'lin'");
  }
  if (!(n >= 1 && n <= 1e5 && n == std::floor(n))) throw ValidationError("InvalidRange", "range count must be an integer in [1, 1e5]");
  axis.count = static_cast<std::size_t>(n);
  if (!(std::isfinite(axis.lo) && std::isfinite(axis.hi) && axis.lo <= axis.hi))
    throw ValidationError("InvalidRange", "range bounds must be finite with a <= b");
  if (axis.count == 1 && axis.lo != axis.hi) throw ValidationError("InvalidRange", "a single-point range needs a == b");
  if (axis.log && !(axis.lo > 0.0)) throw ValidationError("InvalidRange", "log ranges need a > 0");
  return axis;
}

const char* to_string(CellStatus s) noexcept {
  switch (s) {
    case CellStatus::Ok: return "ok";
    case CellStatus::NonPositiveMonodromy: return "non_positive_monodromy";
    case CellStatus::Error: return "error";
  }
  return "error";
}

PointValue evaluate_point(const PatchModel& model, double m, double T) {
  try {
    return {growth_rate(model, {m, T}).lambda, CellStatus::Ok};
  } catch (const Error& e) {
    const auto status = e.code() == "NonPositiveMonodromy" ? CellStatus::NonPositiveMonodromy : CellStatus::Error;
    return {std::numeric_limits<double>::quiet_NaN(), status};
  }
}

std::size_t SweepGrid::count(CellStatus s) const { return static_cast<std::size_t>(std::count(status.begin(), status.end(), s)); }

double SweepGrid::max_lambda() const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lambda.size(); ++k)
    if (status[k] == CellStatus::Ok) best = std::max(best, lambda[k]);
  return best;
}

SweepGrid sweep(const PatchModel& model, const Axis& m_axis, const Axis& T_axis, unsigned jobs) {
  model.require_valid();
  SweepGrid grid;
  grid.m_axis = m_axis;
  grid.T_axis = T_axis;
  grid.m_values = m_axis.values();
  grid.T_values = T_axis.values();
  for (double m : grid.m_values)
    if (!(m > 0.0)) throw ValidationError("InvalidRange", "sweep needs m > 0");
  for (double T : grid.T_values)
    if (!(T > 0.0)) throw ValidationError("InvalidRange", "sweep needs T > 0");
  const std::size_t cells = grid.m_values.size() * grid.T_values.size();
  grid.lambda.assign(cells, 0.0);
  grid.status.assign(cells, CellStatus::Ok);
  parallel_for(cells, jobs, [&](std::size_t k) {
    const std::size_t i = k / grid.T_values.size();
    const std::size_t j = k % grid.T_values.size();
    const PointValue v = evaluate_point(model, grid.m_values[i], grid.T_values[j]);
    grid.lambda[k] = v.lambda;
    grid.status[k] = v.status;
  });
  return grid;
}

double CriticalCurve::max_residual() const {
  double r = 0.0;
  for (const auto& b : branches)
    for (const auto& v : b) r = std::max(r, std::abs(v.lambda));
  return r;
}

namespace {

struct EdgeRef {
  std::size_t i0, j0, i1, j1;  // endpoints on the grid
};

// Bisection along a grid edge in the parameter that varies.
CurveVertex refine_edge(const PatchModel& model, const SweepGrid& grid, const EdgeRef& e, double tol) {
  const bool along_m = e.i0 != e.i1;
  const Axis& axis = along_m ? grid.m_axis : grid.T_axis;
  double a = along_m ? grid.m_values[e.i0] : grid.T_values[e.j0];
  double b = along_m ? grid.m_values[e.i1] : grid.T_values[e.j1];
  double fa = grid.at(e.i0, e.j0);
  const double fixed = along_m ? grid.T_values[e.j0] : grid.m_values[e.i0];
  auto point = [&](double x) { return along_m ? CurveVertex{x, fixed, 0.0} : CurveVertex{fixed, x, 0.0}; };

  // Start from the endpoint closer to zero in case no midpoint is usable.
  const double fb = grid.at(e.i1, e.j1);
  CurveVertex best = std::abs(fa) <= std::abs(fb) ? point(a) : point(b);
  best.lambda = std::abs(fa) <= std::abs(fb) ? fa : fb;
  for (int it = 0; it < 60; ++it) {
    const double mid = axis.midpoint(a, b);
    const CurveVertex p = point(mid);
    const PointValue v = evaluate_point(model, p.m, p.T);
    if (v.status != CellStatus::Ok) break;
    if (std::abs(v.lambda) < std::abs(best.lambda)) {
      best = p;
      best.lambda = v.lambda;
    }
    if (std::abs(v.lambda) <= tol) break;
    if ((v.lambda > 0.0) == (fa > 0.0)) {
      a = mid;
      fa = v.lambda;
    } else {
      b = mid;
    }
  }
  return best;
}

}  // namespace

CriticalCurve critical_curve(const PatchModel& model, const SweepGrid& grid, double tol) {
  CriticalCurve curve;
  curve.tolerance = tol;
  curve.empirical = model.validation() != ValidationStatus::IrreducibleEverywhere;
  const std::size_t nm = grid.m_values.size();
  const std::size_t nt = grid.T_values.size();

  bool any_pos = false, any_neg = false;
  for (std::size_t k = 0; k < grid.lambda.size(); ++k) {
    if (grid.status[k] != CellStatus::Ok) continue;
    (grid.lambda[k] > 0.0 ? any_pos : any_neg) = true;
  }
  if (!(any_pos && any_neg)) throw NumericalError("NoZeroCrossing", "Lambda does not change sign on the grid");

  // Edge ids: 2 * node + 0 for the edge towards larger m, + 1 towards larger T.
  auto h_edge = [&](std::size_t i, std::size_t j) { return 2 * (i * nt + j); };
  auto v_edge = [&](std::size_t i, std::size_t j) { return 2 * (i * nt + j) + 1; };
  auto edge_ref = [&](std::size_t id) {
    const std::size_t node = id / 2;
    const std::size_t i = node / nt, j = node % nt;
    return id % 2 == 0 ? EdgeRef{i, j, i + 1, j} : EdgeRef{i, j, i, j + 1};
  };

  std::vector<std::pair<std::size_t, std::size_t>> segments;
  for (std::size_t i = 0; i + 1 < nm; ++i) {
    for (std::size_t j = 0; j + 1 < nt; ++j) {
      if (!(grid.ok(i, j) && grid.ok(i + 1, j) && grid.ok(i + 1, j + 1) && grid.ok(i, j + 1))) {
        ++curve.excluded_cells;
        continue;
      }
      const bool c0 = grid.at(i, j) > 0.0, c1 = grid.at(i + 1, j) > 0.0;
      const bool c2 = grid.at(i + 1, j + 1) > 0.0, c3 = grid.at(i, j + 1) > 0.0;
      const std::size_t e0 = h_edge(i, j), e1 = v_edge(i + 1, j), e2 = h_edge(i, j + 1), e3 = v_edge(i, j);
      std::vector<std::size_t> crossing;
      if (c0 != c1) crossing.push_back(e0);
      if (c1 != c2) crossing.push_back(e1);
      if (c2 != c3) crossing.push_back(e2);
      if (c3 != c0) crossing.push_back(e3);
      if (crossing.size() == 2) {
        segments.emplace_back(crossing[0], crossing[1]);
      } else if (crossing.size() == 4) {
        const double mc = grid.m_axis.midpoint(grid.m_values[i], grid.m_values[i + 1]);
        const double tc = grid.T_axis.midpoint(grid.T_values[j], grid.T_values[j + 1]);
        const PointValue centre = evaluate_point(model, mc, tc);
        const bool joined_like_c0 = centre.status == CellStatus::Ok ? (centre.lambda > 0.0) == c0 : true;
        if (joined_like_c0) {
          segments.emplace_back(e0, e1);
          segments.emplace_back(e2, e3);
        } else {
          segments.emplace_back(e3, e0);
          segments.emplace_back(e1, e2);
        }
      }
    }
  }

  std::map<std::size_t, std::size_t> vertex_of_edge;
  std::vector<std::size_t> edges;
  for (const auto& [a, b] : segments) {
    for (std::size_t e : {a, b}) {
      if (vertex_of_edge.emplace(e, edges.size()).second) edges.push_back(e);
    }
  }
  std::vector<CurveVertex> vertices(edges.size());
  parallel_for(edges.size(), 0, [&](std::size_t k) { vertices[k] = refine_edge(model, grid, edge_ref(edges[k]), tol); });

  std::vector<std::vector<std::size_t>> adjacency(vertices.size());
  for (const auto& [a, b] : segments) {
    const std::size_t va = vertex_of_edge[a], vb = vertex_of_edge[b];
    adjacency[va].push_back(vb);
    adjacency[vb].push_back(va);
  }
  std::vector<bool> used(vertices.size(), false);
  auto walk = [&](std::size_t start) {
    std::vector<CurveVertex> branch;
    std::size_t current = start;
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    while (true) {
      used[current] = true;
      branch.push_back(vertices[current]);
      std::size_t next = std::numeric_limits<std::size_t>::max();
      for (std::size_t nb : adjacency[current]) {
        if (nb != previous && !used[nb]) {
          next = nb;
          break;
        }
      }
      if (next == std::numeric_limits<std::size_t>::max()) {
        // Close loops by repeating the first vertex.
        for (std::size_t nb : adjacency[current])
          if (nb == start && branch.size() > 2) branch.push_back(vertices[start]);
        break;
      }
      previous = current;
      current = next;
    }
    if (branch.front().m > branch.back().m) std::reverse(branch.begin(), branch.end());
    curve.branches.push_back(std::move(branch));
  };
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (!used[v] && adjacency[v].size() == 1) walk(v);
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (!used[v]) walk(v);
  std::sort(curve.branches.begin(), curve.branches.end(), [](const auto& a, const auto& b) {
    return a.front().m != b.front().m ? a.front().m < b.front().m : a.front().T < b.front().T;
  });
  return curve;
}

std::vector<double> critical_periods(const PatchModel& model, double m, const std::vector<double>& T_ladder, double tol) {
  std::vector<PointValue> values(T_ladder.size());
  parallel_for(T_ladder.size(), 0, [&](std::size_t k) { values[k] = evaluate_point(model, m, T_ladder[k]); });
  std::vector<double> roots;
  for (std::size_t k = 0; k + 1 < T_ladder.size(); ++k) {
    if (values[k].status != CellStatus::Ok || values[k + 1].status != CellStatus::Ok) continue;
    if ((values[k].lambda > 0.0) == (values[k + 1].lambda > 0.0)) continue;
    double a = T_ladder[k], b = T_ladder[k + 1], fa = values[k].lambda;
    double mid = std::sqrt(a * b);
    for (int it = 0; it < 100; ++it) {
      mid = std::sqrt(a * b);
      const PointValue v = evaluate_point(model, m, mid);
      if (v.status != CellStatus::Ok || std::abs(v.lambda) <= tol) break;
      if ((v.lambda > 0.0) == (fa > 0.0)) {
        a = mid;
        fa = v.lambda;
      } else {
        b = mid;
      }
    }
    roots.push_back(mid);
  }
  return roots;
}

double sup_over_T(const PatchModel& model, double m, const std::vector<double>& T_ladder) {
  std::vector<PointValue> values(T_ladder.size());
  parallel_for(T_ladder.size(), 0, [&](std::size_t k) { values[k] = evaluate_point(model, m, T_ladder[k]); });
  std::size_t best = T_ladder.size();
  for (std::size_t k = 0; k < values.size(); ++k)
    if (values[k].status == CellStatus::Ok && (best == T_ladder.size() || values[k].lambda > values[best].lambda)) best = k;
  if (best == T_ladder.size()) throw NumericalError("NoConvergence", "no defined Lambda on the ladder");
  double lo = std::log(T_ladder[best > 0 ? best - 1 : best]);
  double hi = std::log(T_ladder[best + 1 < T_ladder.size() ? best + 1 : best]);
  double top = values[best].lambda;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double x) {
    const PointValue v = evaluate_point(model, m, std::exp(x));
    return v.status == CellStatus::Ok ? v.lambda : -std::numeric_limits<double>::infinity();
  };
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::max({top, f1, f2});
}

const char* to_string(DigCase c) noexcept {
  switch (c) {
    case DigCase::Case1: return "Case1";
    case DigCase::Case2: return "Case2";
    case DigCase::NotAllSinks: return "NotAllSinks";
    case DigCase::NoDig: return "NoDig";
    case DigCase::ReducibleUnknown: return "ReducibleUnknown";
  }
  return "NoDig";
}

DigVerdict classify_dig(const PatchModel& model, const Axis& m_axis, const Axis& T_axis, unsigned jobs) {
  model.require_valid();
  DigVerdict v;
  const Vector r = mean_growth(model);
  v.all_sinks = std::all_of(r.begin(), r.end(), [](double x) { return x < 0.0; });
  v.chi = chi(model);
  if (!v.all_sinks) {
    v.dig_case = DigCase::NotAllSinks;
    return v;
  }
  if (model.validation() != ValidationStatus::IrreducibleEverywhere) {
    if (!(v.chi > 0.0)) {
      v.dig_case = DigCase::NoDig;
      return v;
    }
    v.dig_case = DigCase::ReducibleUnknown;
    const SweepGrid grid = sweep(model, m_axis, T_axis, jobs);
    EmpiricalSummary s;
    s.ok_cells = grid.count(CellStatus::Ok);
    s.non_positive_cells = grid.count(CellStatus::NonPositiveMonodromy);
    s.max_lambda = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.m_values.size(); ++i) {
      for (std::size_t j = 0; j < grid.T_values.size(); ++j) {
        if (grid.ok(i, j) && grid.at(i, j) > s.max_lambda) {
          s.max_lambda = grid.at(i, j);
          s.m_at_max = grid.m_values[i];
          s.T_at_max = grid.T_values[j];
        }
      }
    }
    s.growth_found = s.max_lambda > kGrowthThreshold;
    v.dig_possible = s.growth_found;
    v.empirical = s;
    return v;
  }
  v.dig_possible = v.chi > 0.0;
  if (!v.dig_possible) {
    v.dig_case = DigCase::NoDig;
    return v;
  }
  const MStar ms = m_star(model);
  v.m_star = ms.value;
  v.dig_case = ms.value ? DigCase::Case1 : DigCase::Case2;
  return v;
}

MonotonicityReport monotonicity_scan(const PatchModel& model, const std::vector<double>& m_list,
                                     const std::vector<double>& T_ladder, unsigned jobs) {
  constexpr double kSlack = 1e-10;
  MonotonicityReport report;
  report.T_ladder = T_ladder;
  report.constant_migration = model.constant_migration();
  const std::size_t nt = T_ladder.size();
  std::vector<double> values(m_list.size() * nt);
  parallel_for(values.size(), jobs, [&](std::size_t k) {
    values[k] = evaluate_point(model, m_list[k / nt], T_ladder[k % nt]).lambda;
  });
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    MonotonicityRow row;
    row.m = m_list[i];
    row.lambda.assign(values.begin() + static_cast<std::ptrdiff_t>(i * nt),
                      values.begin() + static_cast<std::ptrdiff_t>((i + 1) * nt));
    // Sign pattern of the non-negligible differences.
    std::vector<int> signs;
    for (std::size_t k = 0; k + 1 < nt; ++k) {
      const double d = row.lambda[k + 1] - row.lambda[k];
      if (std::isnan(d)) continue;
      if (std::abs(d) <= kSlack) continue;
      const int s = d > 0.0 ? 1 : -1;
      if (signs.empty() || signs.back() != s) signs.push_back(s);
    }
    if (signs.empty()) row.shape = "constant";
    else if (signs.size() == 1) row.shape = signs[0] > 0 ? "increasing" : "decreasing";
    else if (signs.size() == 2 && signs[0] > 0) row.shape = "increasing-then-decreasing";
    else row.shape = "non-monotone";
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace dig
