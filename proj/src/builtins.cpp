#include "dig/builtins.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "dig/errors.hpp"

namespace dig {

double exact(std::string_view literal) {
  auto parse = [&](std::string_view s) {
    double v = 0.0;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      throw ValidationError("InvalidParameters", "not a number: '" + std::string(literal) + "'");
    return v;
  };
  const auto slash = literal.find('/');
  if (slash == std::string_view::npos) return parse(literal);
  return parse(literal.substr(0, slash)) / parse(literal.substr(slash + 1));
}

namespace {

using Args = std::vector<double>;

Matrix diag_of(std::initializer_list<const char*> entries) {
  Vector d;
  for (const char* e : entries) d.push_back(exact(e));
  return Matrix::diagonal(d);
}

// Two-patch migration: l12 is the flow from patch 2 to patch 1.
Matrix two_patch_l(double l12, double l21) { return Matrix{{-l21, l12}, {l21, -l12}}; }

const std::vector<double> kHalves{0.0, 0.5};
const std::vector<double> kThirds{0.0, exact("1/3"), exact("2/3")};

PeriodicMatrixFunction ab_growth() {
  return PeriodicMatrixFunction::piecewise_constant(kHalves, {diag_of({"1/2", "-3/2"}), diag_of({"-1", "1/2"})});
}

PatchModel make_pm1(const Args& a) {
  const double eps = a[0];
  const Matrix first = Matrix::diagonal(Vector{1.0 - eps, -1.0 - eps});
  const Matrix second = Matrix::diagonal(Vector{-1.0 - eps, 1.0 - eps});
  return PatchModel("pm1", PeriodicMatrixFunction::piecewise_constant(kHalves, {first, second}),
                    PeriodicMatrixFunction::constant(two_patch_l(1.0, 1.0)));
}

PatchModel make_ab1(const Args&) {
  return PatchModel("ab1", ab_growth(), PeriodicMatrixFunction::constant(two_patch_l(2.0, 1.0)));
}

PatchModel make_ab2s(const Args&) {
  return PatchModel("ab2s", ab_growth(),
                    PeriodicMatrixFunction::piecewise_constant(kHalves, {two_patch_l(1.0, 2.0), two_patch_l(2.0, 1.0)}));
}

PatchModel make_ab_mstar_inf(const Args&) {
  return PatchModel("ab_mstar_inf", ab_growth(),
                    PeriodicMatrixFunction::piecewise_constant(kHalves, {two_patch_l(5.0, 1.0), two_patch_l(1.0, 5.0)}));
}

PatchModel make_abc_two_patch(const Args&) {
  auto growth = PeriodicMatrixFunction::piecewise_constant(
      kThirds, {diag_of({"0", "-1/10"}), diag_of({"-4/5", "3/2"}), diag_of({"1/2", "-2"})});
  auto migration = PeriodicMatrixFunction::piecewise_constant(
      kThirds, {two_patch_l(exact("1/10"), 1.0), two_patch_l(2.0, exact("1/5")),
                two_patch_l(exact("1/100"), exact("1/100"))});
  return PatchModel("abc_two_patch", std::move(growth), std::move(migration));
}

PatchModel make_three_patch_circular(const Args&) {
  // One-way cycle 1 -> 2 -> 3 -> 1 at unit rate.
  const Matrix l{{-1, 0, 1}, {1, -1, 0}, {0, 1, -1}};
  auto growth = PeriodicMatrixFunction::piecewise_constant(
      kHalves, {diag_of({"3/20", "-9/20", "-1/5"}), diag_of({"-9/20", "3/20", "-1/5"})});
  return PatchModel("three_patch_circular", std::move(growth), PeriodicMatrixFunction::constant(l));
}

// Eps = (e1..e5), delta = (d1..d4); see catalog() for the argument forms.
PatchModel make_fainshil(const Args& a) {
  const double e1 = a[0], e2 = a[1], e3 = a[2], e4 = a[3], e5 = a[4];
  const double d1 = a[5], d2 = a[6], d3 = a[7], d4 = a[8];
  const Matrix la{{-(10 + e1), e2, e3}, {10, -(e2 + e4), e5}, {e1, e4, -(e3 + e5)}};
  const Matrix lb{{-(d1 + d4), d2, 10}, {d1, -(10 + d2), d3}, {d4, 10, -(10 + d3)}};
  auto growth = PeriodicMatrixFunction::piecewise_constant(kHalves, {diag_of({"9", "-1", "-10"}), diag_of({"-10", "0", "9"})});
  auto migration = PeriodicMatrixFunction::piecewise_constant(kHalves, {la, lb});
  return PatchModel("fainshil", std::move(growth), std::move(migration));
}

PatchModel make_unidir_favorable(const Args&) {
  const Matrix into_1{{0, 1}, {0, -1}};
  const Matrix into_2{{-1, 0}, {1, 0}};
  return PatchModel("unidir_favorable", ab_growth(),
                    PeriodicMatrixFunction::piecewise_constant(kHalves, {into_1, into_2}));
}

PatchModel make_unidir_unfavorable(const Args&) {
  const Matrix into_1{{0, 1}, {0, -1}};
  const Matrix into_2{{-1, 0}, {1, 0}};
  return PatchModel("unidir_unfavorable", ab_growth(),
                    PeriodicMatrixFunction::piecewise_constant(kHalves, {into_2, into_1}));
}

// In each third one patch has rate a and is isolated; the two others have
// rate b and exchange individuals symmetrically at unit rate.
PatchModel make_three_patch_reducible(const Args& args) {
  const double a = args[0], b = args[1];
  std::vector<Matrix> growth;
  std::vector<Matrix> migration;
  for (std::size_t isolated : {2u, 1u, 0u}) {
    Vector r(3, b);
    r[isolated] = a;
    growth.push_back(Matrix::diagonal(r));
    Matrix l(3);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        if (i == isolated || j == isolated) continue;
        l(i, j) = i == j ? -1.0 : 1.0;
      }
    }
    migration.push_back(l);
  }
  return PatchModel("three_patch_reducible", PeriodicMatrixFunction::piecewise_constant(kThirds, growth),
                    PeriodicMatrixFunction::piecewise_constant(kThirds, migration));
}

struct Family {
  CatalogEntry entry;
  Args defaults;
  std::function<PatchModel(const Args&)> make;
  // Expands a short argument list (after validation of its length) into the
  // full one; the identity by default.
  std::function<Args(const Args&)> expand;
};

const std::vector<Family>& families() {
  static const std::vector<Family> all = [] {
    std::vector<Family> f;
    f.push_back({{"pm1", "eps=0.5", "two patches, rates 1-eps and -1-eps in antiphase, l12=l21=1"}, {0.5}, make_pm1, {}});
    f.push_back({{"ab1", "", "two patches, rates (1/2,-1) and (-3/2,1/2) by half period, constant l12=2, l21=1"},
                 {}, make_ab1, {}});
    f.push_back({{"ab2s", "", "ab1 rates, switching migration l12=(1,2), l21=(2,1)"}, {}, make_ab2s, {}});
    f.push_back({{"ab_mstar_inf", "", "ab1 rates, switching migration l12=(5,1), l21=(1,5); growth for all m"},
                 {}, make_ab_mstar_inf, {}});
    f.push_back({{"abc_two_patch", "", "two patches, three thirds of the period, time-dependent migration"},
                 {}, make_abc_two_patch, {}});
    f.push_back({{"three_patch_circular", "", "three patches, one-way circular migration at unit rate"},
                 {}, make_three_patch_circular, {}});
    f.push_back({{"fainshil", "e1..e5,d1..d4 (or eps,delta) = 0,0,0.1,0.1,0,0.1,0,0,0",
                  "three patches built on a positive switched system that is not stable"},
                 {0, 0, 0.1, 0.1, 0, 0.1, 0, 0, 0},
                 make_fainshil,
                 [](const Args& a) {
                   if (a.size() == 2) return Args{a[0], a[0], a[0], a[0], a[0], a[1], a[1], a[1], a[1]};
                   return a;
                 }});
    f.push_back({{"unidir_favorable", "", "ab1 rates, one-way migration toward the currently favorable patch"},
                 {}, make_unidir_favorable, {}});
    f.push_back({{"unidir_unfavorable", "", "ab1 rates, one-way migration toward the currently unfavorable patch"},
                 {}, make_unidir_unfavorable, {}});
    f.push_back({{"three_patch_reducible", "a=1,b=-1", "three patches, migration only between the two b patches"},
                 {1.0, -1.0}, make_three_patch_reducible, {}});
    return f;
  }();
  return all;
}

struct ParsedSpec {
  std::string name;
  Args args;
  bool has_args = false;
};

ParsedSpec parse_spec(std::string_view spec) {
  ParsedSpec out;
  const auto open = spec.find('(');
  if (open == std::string_view::npos) {
    out.name = std::string(spec);
    return out;
  }
  if (spec.back() != ')')
    throw ValidationError("InvalidParameters", "unbalanced parentheses in '" + std::string(spec) + "'");
  out.name = std::string(spec.substr(0, open));
  out.has_args = true;
  std::string_view inner = spec.substr(open + 1, spec.size() - open - 2);
  while (!inner.empty()) {
    const auto comma = inner.find(',');
    out.args.push_back(exact(inner.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  return out;
}

const Family* find_family(std::string_view name) {
  for (const Family& f : families())
    if (f.entry.name == name) return &f;
  return nullptr;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> e;
    for (const Family& f : families()) e.push_back(f.entry);
    return e;
  }();
  return entries;
}

bool is_builtin(std::string_view spec) {
  const auto open = spec.find('(');
  return find_family(spec.substr(0, open)) != nullptr;
}

PatchModel builtin(std::string_view spec) {
  const ParsedSpec parsed = parse_spec(spec);
  const Family* family = find_family(parsed.name);
  if (!family) throw ValidationError("UnknownModel", "unknown built-in model '" + parsed.name + "'");
  Args args = family->defaults;
  if (parsed.has_args) {
    Args given = family->expand ? family->expand(parsed.args) : parsed.args;
    if (given.size() != family->defaults.size())
      throw ValidationError("InvalidParameters", "wrong number of arguments for '" + parsed.name + "'");
    args = std::move(given);
  }
  for (double v : args)
    if (!std::isfinite(v)) throw ValidationError("InvalidParameters", "non-finite model argument");
  PatchModel model = family->make(args);
  if (!parsed.has_args) return model;
  return PatchModel(std::string(spec), model.growth(), model.migration());
}

}  // namespace dig
