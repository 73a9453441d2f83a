#include "dig/reproduce.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dig/asymptotics.hpp"
#include "dig/builtins.hpp"
#include "dig/dynamics.hpp"
#include "dig/errors.hpp"
#include "dig/explorer.hpp"
#include "dig/format.hpp"

namespace dig {
namespace {

class Writer {
 public:
  Writer(std::filesystem::path dir, FigureData& data) : dir_(std::move(dir)), data_(data) {}

  void file(const std::string& name, const std::string& description, const std::string& content) {
    const auto path = dir_ / data_.figure / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ValidationError("FileNotWritable", "cannot write '" + path.string() + "'");
    out << content;
    const auto rows = static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n'));
    data_.files.push_back({data_.figure + "/" + name, description, rows > 0 ? rows - 1 : 0});
  }

 private:
  std::filesystem::path dir_;
  FigureData& data_;
};

std::vector<double> ladder(double lo, double hi, std::size_t n, bool log) { return Axis{lo, hi, n, log}.values(); }

std::string sweep_csv(const SweepGrid& g) {
  std::ostringstream os;
  write_sweep_csv(g, os);
  return os.str();
}

void surface(Writer& w, FigureData& data, const PatchModel& model, const Axis& m_axis, const Axis& T_axis,
             const ReproduceOptions& opts, const std::string& prefix, bool with_curve) {
  const SweepGrid grid = sweep(model, m_axis, T_axis, opts.jobs);
  w.file(prefix + "grid.csv", "Lambda(m, T) on the sweep grid", sweep_csv(grid));
  if (!with_curve) return;
  try {
    const CriticalCurve curve = critical_curve(model, grid);
    std::ostringstream os;
    write_curve_csv(curve, os);
    w.file(prefix + "curve.csv", "zero set of Lambda, in (m, T) and (m, nu = 1/T)", os.str());
    data.max_curve_residual = std::max(data.max_curve_residual, curve.max_residual());
  } catch (const NumericalError& e) {
    if (e.code() != "NoZeroCrossing") throw;
  }
}

void slices(Writer& w, const PatchModel& model, const std::vector<double>& T_fixed, const std::vector<double>& m_fixed,
            double m_hi, const ReproduceOptions& opts) {
  const auto ms = ladder(1e-2, m_hi, 200, false);
  const auto ts = ladder(1e-2, 1e3, 200, true);
  std::ostringstream by_m, by_T, limits;
  by_m << "T,m,lambda\n";
  by_T << "m,T,lambda\n";
  limits << "m,lambda_T0,lambda_Tinf\n";
  std::vector<double> values(T_fixed.size() * ms.size());
  parallel_for(values.size(), opts.jobs,
               [&](std::size_t k) { values[k] = evaluate_point(model, ms[k % ms.size()], T_fixed[k / ms.size()]).lambda; });
  for (std::size_t k = 0; k < values.size(); ++k)
    by_m << format_number(T_fixed[k / ms.size()]) << ',' << format_number(ms[k % ms.size()]) << ','
         << format_number(values[k]) << '\n';
  values.assign(m_fixed.size() * ts.size(), 0.0);
  parallel_for(values.size(), opts.jobs,
               [&](std::size_t k) { values[k] = evaluate_point(model, m_fixed[k / ts.size()], ts[k % ts.size()]).lambda; });
  for (std::size_t k = 0; k < values.size(); ++k)
    by_T << format_number(m_fixed[k / ts.size()]) << ',' << format_number(ts[k % ts.size()]) << ','
         << format_number(values[k]) << '\n';
  for (double m : ms)
    limits << format_number(m) << ',' << format_number(limit_T0(model, m)) << ',' << format_number(limit_Tinf(model, m))
           << '\n';
  w.file("slices_m.csv", "m -> Lambda(m, T) at fixed T", by_m.str());
  w.file("slices_T.csv", "T -> Lambda(m, T) at fixed m", by_T.str());
  w.file("limits.csv", "Lambda(m, 0) and Lambda(m, infinity)", limits.str());
}

Axis grid_axis(double lo, double hi, const ReproduceOptions& opts) { return Axis{lo, hi, opts.resolution, true}; }

using Builder = std::function<void(Writer&, FigureData&, const ReproduceOptions&)>;

void four_panel(Writer& w, FigureData& d, const ReproduceOptions& o, const std::string& model_name, double m_hi) {
  const PatchModel model = builtin(model_name);
  d.model = model_name;
  surface(w, d, model, grid_axis(1e-2, m_hi, o), grid_axis(1e-2, 1e3, o), o, "", true);
  slices(w, model, {0.5, 2.0, 10.0, 50.0}, {0.1, 0.3, 0.5, 1.0, 2.0}, m_hi, o);
}

const std::map<std::string, Builder>& builders() {
  static const std::map<std::string, Builder> all = {
      {"fig2", [](Writer& w, FigureData& d, const ReproduceOptions& o) { four_panel(w, d, o, "ab1", 3.0); }},
      {"fig5",
       [](Writer& w, FigureData& d, const ReproduceOptions& o) {
         d.model = "ab1,ab2s,ab_mstar_inf";
         for (const char* name : {"ab1", "ab2s", "ab_mstar_inf"})
           surface(w, d, builtin(name), grid_axis(1e-2, 1e2, o), grid_axis(1e-2, 1e3, o), o, std::string(name) + "_",
                   true);
       }},
      {"fig7",
       [](Writer& w, FigureData& d, const ReproduceOptions& o) {
         d.model = "abc_two_patch";
         surface(w, d, builtin("abc_two_patch"), grid_axis(1e-2, 1e2, o), grid_axis(1e-2, 1e3, o), o, "", false);
       }},
      {"fig9",
       [](Writer& w, FigureData& d, const ReproduceOptions& o) {
         d.model = "abc_two_patch";
         surface(w, d, builtin("abc_two_patch"), grid_axis(1e-2, 1e2, o), grid_axis(1e-2, 1e3, o), o, "", true);
       }},
      {"fig11",
       [](Writer& w, FigureData& d, const ReproduceOptions& o) {
         d.model = "fainshil";
         surface(w, d, builtin("fainshil"), grid_axis(1e-2, 1e1, o), grid_axis(1e-2, 1e3, o), o, "", true);
       }},
      {"fig16",
       [](Writer& w, FigureData& d, const ReproduceOptions& o) {
         d.model = "three_patch_reducible(1,-0.8),three_patch_reducible(1,-1)";
         for (const char* b : {"-0.8", "-1"}) {
           const std::string name = std::string("three_patch_reducible(1,") + b + ")";
           surface(w, d, builtin(name), grid_axis(1e-2, 1e2, o), grid_axis(1e-2, 1e3, o), o,
                   std::string("b") + b + "_", true);
         }
       }},
      {"fig17",
       [](Writer& w, FigureData& d, const ReproduceOptions& o) {
         d.model = "unidir_favorable,unidir_unfavorable";
         for (const char* name : {"unidir_favorable", "unidir_unfavorable"})
           surface(w, d, builtin(name), grid_axis(1e-2, 1e2, o), grid_axis(1e-2, 1e3, o), o, std::string(name) + "_",
                   true);
       }},
      {"s1", [](Writer& w, FigureData& d, const ReproduceOptions& o) { four_panel(w, d, o, "three_patch_circular", 1.0); }},
      {"s2", [](Writer& w, FigureData& d, const ReproduceOptions& o) { four_panel(w, d, o, "ab2s", 3.0); }},
      {"s3", [](Writer& w, FigureData& d, const ReproduceOptions& o) { four_panel(w, d, o, "ab_mstar_inf", 3.0); }},
      {"s4",
       [](Writer& w, FigureData& d, const ReproduceOptions& o) {
         d.model = "abc_two_patch";
         slices(w, builtin("abc_two_patch"), {0.5, 2.0, 10.0, 50.0, 200.0}, {0.5, 1.0, 1.5, 2.0, 3.0}, 5.0, o);
       }},
      {"s5", [](Writer& w, FigureData& d, const ReproduceOptions& o) { four_panel(w, d, o, "fainshil", 5.0); }},
      {"s6",
       [](Writer& w, FigureData& d, const ReproduceOptions&) {
         d.model = "three_patch_circular";
         const PatchModel model = builtin("three_patch_circular");
         const ModelParameters params{1.0, 20.0};
         const SlowCurveReport report = verify_slow_curve(model, params, 0.0);
         const SimplexTrajectory from_start = simplex_trajectory(model, params, {0.3, 0.35, 0.35}, 1);
         std::ostringstream os;
         os << "tau,theta_star_1,theta_star_2,theta_star_3,v_1,v_2,v_3,theta_1,theta_2,theta_3\n";
         // Both trajectories use the same step grid, so rows align by index.
         for (std::size_t k = 0; k < report.tau.size() && k < from_start.states.size(); ++k) {
           os << format_number(report.tau[k]);
           for (double x : report.theta[k]) os << ',' << format_number(x);
           for (double x : report.slow[k]) os << ',' << format_number(x);
           for (double x : from_start.states[k]) os << ',' << format_number(x);
           os << '\n';
         }
         w.file("slow_curve.csv", "theta*(T tau), slow curve v(tau), and theta from (0.3, 0.35, 0.35); m = 1, T = 20",
                os.str());
       }},
  };
  return all;
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig2", "fig5", "fig7", "fig9", "fig11", "fig16", "fig17",
                                            "s1",   "s2",   "s3",   "s4",   "s5",    "s6"};
  return ids;
}

std::vector<FigureData> reproduce(const std::string& id, const std::filesystem::path& dir, const ReproduceOptions& opts) {
  std::vector<std::string> wanted;
  if (id == "all") {
    wanted = figure_ids();
  } else if (builders().count(id)) {
    wanted = {id};
  } else {
    throw ValidationError("UnknownFigure", "unknown figure id '" + id + "'");
  }
  std::filesystem::create_directories(dir);
  std::vector<FigureData> out;
  for (const std::string& fig : wanted) {
    FigureData data;
    data.figure = fig;
    Writer writer(dir, data);
    builders().at(fig)(writer, data, opts);
    out.push_back(std::move(data));
  }
  nlohmann::json manifest = nlohmann::json::array();
  for (const FigureData& f : out) {
    nlohmann::json files = nlohmann::json::array();
    for (const ReproducedFile& file : f.files)
      files.push_back({{"path", file.path}, {"description", file.description}, {"rows", file.rows}});
    manifest.push_back({{"figure", f.figure},
                        {"model", f.model},
                        {"files", files},
                        {"max_curve_residual", json_number(f.max_curve_residual)}});
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  return out;
}

}  // namespace dig
