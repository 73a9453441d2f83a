#include "dig/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "dig/asymptotics.hpp"
#include "dig/builtins.hpp"
#include "dig/dynamics.hpp"
#include "dig/errors.hpp"
#include "dig/explorer.hpp"
#include "dig/format.hpp"
#include "dig/model_io.hpp"
#include "dig/reproduce.hpp"
#include "dig/stochastic.hpp"

namespace dig::cli {
namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json_number(*v) : json(nullptr); }

json to_json(const MStar& s) {
  return {{"value", optional_number(s.value)},
          {"reason", s.reason},
          {"residual", json_number(s.residual)},
          {"iterations", s.iterations}};
}

json to_json(const Corners& c) {
  return {{"m0_T0", json_number(c.m0_T0)},
          {"minf_T0", optional_number(c.minf_T0)},
          {"m0_Tinf", json_number(c.m0_Tinf)},
          {"minf_Tinf", optional_number(c.minf_Tinf)}};
}

json to_json(const LimitPanel& p) {
  return {{"m", optional_number(p.m)},
          {"lambda_m_0", optional_number(p.lambda_m_0)},
          {"lambda_m_inf", optional_number(p.lambda_m_inf)},
          {"lambda_0_T", json_number(p.lambda_0_T)},
          {"lambda_inf_T", optional_number(p.lambda_inf_T)},
          {"corners", to_json(p.corners)},
          {"chi", json_number(p.chi)},
          {"m_star", to_json(p.m_star)},
          {"infimum", optional_number(p.infimum)},
          {"mean_growth", json_vector(p.mean_growth)}};
}

json to_json(const ValidationReport& r) {
  json issues = json::array();
  for (const ValidationIssue& i : r.issues)
    issues.push_back({{"code", i.code},
                      {"segment", i.segment},
                      {"row", i.row},
                      {"column", i.column},
                      {"residual", json_number(i.residual)},
                      {"message", i.message}});
  return {{"status", to_string(r.status)},
          {"provisional", r.provisional},
          {"reducible_segments", r.reducible_segments},
          {"issues", issues}};
}

json to_json(const DigVerdict& v) {
  json out = {{"all_sinks", v.all_sinks},
              {"chi", json_number(v.chi)},
              {"dig_possible", v.dig_possible},
              {"case", to_string(v.dig_case)},
              {"m_star", optional_number(v.m_star)}};
  if (v.empirical) {
    const EmpiricalSummary& e = *v.empirical;
    out["empirical"] = {{"growth_found", e.growth_found},
                        {"max_lambda", json_number(e.max_lambda)},
                        {"m_at_max", json_number(e.m_at_max)},
                        {"T_at_max", json_number(e.T_at_max)},
                        {"ok_cells", e.ok_cells},
                        {"non_positive_cells", e.non_positive_cells}};
  }
  return out;
}

json to_json(const Axis& a) {
  return {{"lo", json_number(a.lo)}, {"hi", json_number(a.hi)}, {"count", a.count}, {"log", a.log}};
}

json sweep_json(const SweepGrid& g) {
  json m = json::array(), t = json::array(), rows = json::array();
  for (double v : g.m_values) m.push_back(json_number(v));
  for (double v : g.T_values) t.push_back(json_number(v));
  for (std::size_t i = 0; i < g.m_values.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < g.T_values.size(); ++j) row.push_back(json_number(g.at(i, j)));
    rows.push_back(row);
  }
  return {{"m", m}, {"T", t}, {"lambda", rows}};
}

json curve_json(const CriticalCurve& c) {
  json branches = json::array();
  for (const auto& b : c.branches) {
    json pts = json::array();
    for (const CurveVertex& v : b)
      pts.push_back({{"m", json_number(v.m)},
                     {"T", json_number(v.T)},
                     {"nu", json_number(v.nu())},
                     {"lambda_residual", json_number(v.lambda)}});
    branches.push_back(pts);
  }
  return {{"branches", branches},
          {"tolerance", json_number(c.tolerance)},
          {"max_residual", json_number(c.max_residual())},
          {"excluded_cells", c.excluded_cells},
          {"empirical", c.empirical}};
}

json error_json(const std::string& cls, const std::string& code, const std::string& message) {
  return {{"error", {{"class", cls}, {"code", code}, {"message", message}}}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw ValidationError("FileNotWritable", "cannot write '" + path + "'");
  f << content;
}

struct Globals {
  unsigned jobs = 0;
  std::string format = "json";
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Growth rates of populations in periodically varying patchy environments", "dig"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.fallthrough();

  std::string model_spec;
  double m = 0.0, T = 0.0;
  std::optional<double> limits_m;
  bool check_integral = false, check_h = false;
  std::string m_range, T_range, out_path;
  std::string env_path;
  double horizon = 1e5;
  std::uint64_t seed = kDefaultSeed;
  int batches = 20;
  std::string figure;
  std::size_t resolution = 128;

  auto* validate = app.add_subcommand("validate", "Validate a model file or built-in model");
  validate->add_option("model", model_spec, "Model file or built-in name")->required();

  auto* catalog_cmd = app.add_subcommand("catalog", "List the built-in models");

  auto* lambda = app.add_subcommand("lambda", "Growth rate Lambda(m, T)");
  lambda->add_option("model", model_spec)->required();
  lambda->add_option("--m", m, "Migration scale")->required();
  lambda->add_option("--T", T, "Period")->required();
  lambda->add_flag("--check-integral", check_integral, "Cross-check with the integral formula");
  lambda->add_flag("--check-h", check_h, "Cross-check with the h formula (constant migration)");

  auto* limits = app.add_subcommand("limits", "Limits of Lambda in m and T");
  limits->add_option("model", model_spec)->required();
  limits->add_option("--m", limits_m, "Migration scale for the T limits");

  auto* sweep_cmd = app.add_subcommand("sweep", "Lambda on an (m, T) grid");
  sweep_cmd->add_option("model", model_spec)->required();
  sweep_cmd->add_option("--m-range", m_range, "lo:hi:n[:log|:lin]");
  sweep_cmd->add_option("--T-range", T_range, "lo:hi:n[:log|:lin]");
  sweep_cmd->add_option("--out", out_path, "CSV output file");

  auto* critical = app.add_subcommand("critical", "Zero set of Lambda in the (m, T) plane");
  critical->add_option("model", model_spec)->required();
  critical->add_option("--m-range", m_range, "lo:hi:n[:log|:lin]");
  critical->add_option("--T-range", T_range, "lo:hi:n[:log|:lin]");
  critical->add_option("--out", out_path, "CSV output file");

  auto* classify = app.add_subcommand("classify", "Dispersal-induced growth verdict");
  classify->add_option("model", model_spec)->required();
  classify->add_option("--m-range", m_range, "Empirical sweep for reducible models");
  classify->add_option("--T-range", T_range, "Empirical sweep for reducible models");

  auto* simulate = app.add_subcommand("simulate", "Lyapunov exponent in a Markov-switched environment");
  simulate->add_option("env", env_path, "Environment file")->required();
  simulate->add_option("--m", m)->required();
  simulate->add_option("--T", T)->required();
  simulate->add_option("--horizon", horizon, "Total simulated time")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "RNG seed");
  simulate->add_option("--batches", batches, "Batches for the standard error")->check(CLI::Range(2, 100000));

  auto* reproduce_cmd = app.add_subcommand("reproduce", "Write the data behind a figure");
  reproduce_cmd->add_option("figure", figure, "Figure id or 'all'")->required();
  reproduce_cmd->add_option("--out", out_path, "Output directory");
  reproduce_cmd->add_option("--resolution", resolution, "Grid points per axis")->check(CLI::Range(4, 4096));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("validation", "UsageError", e.what()).dump() << '\n';
    return 2;
  }

  const bool csv = g.format == "csv";
  try {
    if (*validate) {
      const PatchModel model = resolve_model(model_spec);
      json result = to_json(model.report());
      result["name"] = model.name();
      result["n"] = model.patches();
      out << result.dump(2) << '\n';
      return model.report().status == ValidationStatus::Invalid ? 2 : 0;
    }
    if (*catalog_cmd) {
      if (csv) {
        out << "name,parameters,description\n";
        for (const CatalogEntry& e : catalog())
          out << e.name << ",\"" << e.parameters << "\",\"" << e.description << "\"\n";
        return 0;
      }
      json list = json::array();
      for (const CatalogEntry& e : catalog())
        list.push_back({{"name", e.name}, {"parameters", e.parameters}, {"description", e.description}});
      out << list.dump(2) << '\n';
      return 0;
    }
    if (*lambda) {
      const PatchModel model = resolve_model(model_spec);
      model.require_valid();
      const ModelParameters params{m, T};
      GrowthResult r = growth_rate(model, params);
      if (check_integral) r.cross_check = std::abs(r.lambda - growth_rate_integral(model, params));
      if (check_h) r.h_cross_check = std::abs(r.lambda - growth_rate_h_formula(model, params));
      if (csv) {
        out << "m,T,lambda,mu,log_mu\n"
            << format_number(m) << ',' << format_number(T) << ',' << format_number(r.lambda) << ','
            << format_number(r.mu) << ',' << format_number(r.log_mu) << '\n';
        return 0;
      }
      json result = {{"model", model.name()},
                     {"m", json_number(m)},
                     {"T", json_number(T)},
                     {"lambda", json_number(r.lambda)},
                     {"mu", json_number(r.mu)},
                     {"log_mu", json_number(r.log_mu)},
                     {"pi", json_vector(r.pi)},
                     {"method", to_string(r.method)},
                     {"perron_residual", json_number(r.perron_residual)},
                     {"dense_fallback", r.dense_fallback},
                     {"cross_checks", {{"integral", optional_number(r.cross_check)}, {"h", optional_number(r.h_cross_check)}}}};
      out << result.dump(2) << '\n';
      return 0;
    }
    if (*limits) {
      const PatchModel model = resolve_model(model_spec);
      model.require_valid();
      if (limits_m && !(std::isfinite(*limits_m) && *limits_m >= 0.0))
        throw ValidationError("InvalidParameters", "m must be finite and >= 0");
      json result = to_json(limit_panel(model, limits_m));
      result["model"] = model.name();
      out << result.dump(2) << '\n';
      return 0;
    }
    if (*sweep_cmd || *critical) {
      const PatchModel model = resolve_model(model_spec);
      model.require_valid();
      const Axis m_axis = m_range.empty() ? kDefaultMAxis : parse_axis(m_range);
      const Axis T_axis = T_range.empty() ? kDefaultTAxis : parse_axis(T_range);
      const SweepGrid grid = sweep(model, m_axis, T_axis, g.jobs);
      std::ostringstream csv_text;
      json result = {{"model", model.name()}, {"m_axis", to_json(m_axis)}, {"T_axis", to_json(T_axis)}};
      if (*sweep_cmd) {
        write_sweep_csv(grid, csv_text);
        result["max_lambda"] = json_number(grid.max_lambda());
        result["non_positive_cells"] = grid.count(CellStatus::NonPositiveMonodromy);
        result["error_cells"] = grid.count(CellStatus::Error);
      } else {
        const CriticalCurve curve = critical_curve(model, grid);
        write_curve_csv(curve, csv_text);
        result["curve"] = curve_json(curve);
      }
      if (!out_path.empty()) {
        write_file(out_path, csv_text.str());
        result["out"] = out_path;
        if (*sweep_cmd) result["cells"] = grid.lambda.size();
        out << result.dump(2) << '\n';
      } else if (csv) {
        out << csv_text.str();
      } else {
        if (*sweep_cmd) result["grid"] = sweep_json(grid);
        out << result.dump(2) << '\n';
      }
      return 0;
    }
    if (*classify) {
      const PatchModel model = resolve_model(model_spec);
      model.require_valid();
      const Axis m_axis = m_range.empty() ? Axis{1e-2, 1e2, 64, true} : parse_axis(m_range);
      const Axis T_axis = T_range.empty() ? Axis{1e-2, 1e3, 64, true} : parse_axis(T_range);
      json result = to_json(classify_dig(model, m_axis, T_axis, g.jobs));
      result["model"] = model.name();
      result["status"] = to_string(model.report().status);
      out << result.dump(2) << '\n';
      return 0;
    }
    if (*simulate) {
      const ModelParameters params{m, T};
      params.check();
      const MarkovEnvironment env = load_environment(env_path);
      SimulationOptions opts;
      opts.batches = batches;
      opts.jobs = g.jobs;
      const LyapunovEstimate e = simulate_lyapunov(env, m, T, horizon, seed, opts);
      const StochasticLimits lim = stochastic_limits(env, m);
      json batch = json::array();
      for (double b : e.batch_estimates) batch.push_back(json_number(b));
      json result = {{"lambda_hat", json_number(e.lambda_hat)},
                     {"stderr", json_number(e.stderr_)},
                     {"horizon", json_number(e.horizon)},
                     {"renormalizations", e.renormalizations},
                     {"jumps", e.jumps},
                     {"seed", e.seed},
                     {"batches", e.batches},
                     {"batch_estimates", batch},
                     {"limits",
                      {{"T0", json_number(lim.T0)},
                       {"Tinf", json_number(lim.Tinf)},
                       {"chi", json_number(lim.chi)},
                       {"m0", json_number(lim.m0)},
                       {"minf_T0", optional_number(lim.minf_T0)},
                       {"minf_Tinf", optional_number(lim.minf_Tinf)}}},
                     {"stationary", json_vector(env.stationary())}};
      out << result.dump(2) << '\n';
      return 0;
    }
    if (*reproduce_cmd) {
      const std::string dir = out_path.empty() ? "reproduce_out" : out_path;
      const auto figures = reproduce(figure, dir, {g.jobs, resolution});
      json list = json::array();
      for (const FigureData& f : figures) {
        json files = json::array();
        for (const ReproducedFile& file : f.files) files.push_back({{"path", file.path}, {"rows", file.rows}});
        list.push_back({{"figure", f.figure},
                        {"model", f.model},
                        {"files", files},
                        {"max_curve_residual", json_number(f.max_curve_residual)}});
      }
      out << json{{"out", dir}, {"figures", list}}.dump(2) << '\n';
      return 0;
    }
  } catch (const ParseError& e) {
    json j = error_json("validation", e.code(), e.what());
    j["error"]["field"] = e.field();
    if (e.line() > 0) j["error"]["line"] = e.line();
    err << j.dump() << '\n';
    return 2;
  } catch (const Error& e) {
    const bool validation = e.error_class() == ErrorClass::Validation;
    err << error_json(validation ? "validation" : "numerical", e.code(), e.what()).dump() << '\n';
    return validation ? 2 : 1;
  } catch (const std::exception& e) {
    err << error_json("internal", "InternalError", e.what()).dump() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace dig::cli
