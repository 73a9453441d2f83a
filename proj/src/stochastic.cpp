#include "dig/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dig/errors.hpp"
#include "dig/explorer.hpp"
#include "dig/model.hpp"
#include "dig/spectral.hpp"

namespace dig {

using nlohmann::json;

Vector stationary_distribution(const Matrix& generator) {
  if (generator.size() == 1) return {1.0};
  if (!strongly_connected(generator, kEdgeThreshold))
    throw NumericalError("ReducibleChain", "the environment chain is not irreducible");
  return kernel_vector(generator.transposed());
}

MarkovEnvironment::MarkovEnvironment(Matrix generator, std::vector<EnvironmentState> states)
    : q_(std::move(generator)), states_(std::move(states)) {
  if (states_.empty()) throw ValidationError("SchemaError", "environment needs at least one state");
  if (q_.size() != states_.size()) throw ValidationError("SchemaError", "generator size must equal the state count");
  const std::size_t n = states_.front().r.size();
  if (n < 2) throw ValidationError("SchemaError", "n >= 2 required");
  for (std::size_t i = 0; i < q_.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < q_.size(); ++j) {
      if (!std::isfinite(q_(i, j))) throw ValidationError("SchemaError", "generator has non-finite entries");
      if (i != j && q_(i, j) < 0.0) throw ValidationError("NegativeRate", "generator off-diagonal entries must be >= 0");
      row += q_(i, j);
    }
    if (std::abs(row) > kColumnSumTolerance)
      throw ValidationError("GeneratorRowSum", "generator row " + std::to_string(i) + " does not sum to 0");
  }
  for (std::size_t s = 0; s < states_.size(); ++s) {
    const EnvironmentState& st = states_[s];
    if (st.r.size() != n || st.l.size() != n) throw ValidationError("SchemaError", "state dimensions disagree");
    for (std::size_t j = 0; j < n; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != j && st.l(i, j) < 0.0)
          throw ValidationError("NegativeOffDiagonal", "state " + std::to_string(s) + " has a negative migration rate");
        col += st.l(i, j);
      }
      if (std::abs(col) > kColumnSumTolerance)
        throw ValidationError("ColumnSumViolation", "state " + std::to_string(s) + " migration column does not sum to 0");
    }
  }
  stationary_ = stationary_distribution(q_);
}

Matrix MarkovEnvironment::system_matrix(std::size_t s, double m) const {
  const EnvironmentState& st = states_.at(s);
  Matrix a = st.l * m;
  for (std::size_t i = 0; i < st.r.size(); ++i) a(i, i) += st.r[i];
  return a;
}

namespace {

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, 0, "'" + path + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ParseError(path, 0, "'" + path + "' must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Matrix square(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, 0, "'" + path + "' must be an array of rows");
  const std::size_t n = v.size();
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = numbers(v[i], path + "[" + std::to_string(i) + "]");
    if (row.size() != n) throw ParseError(path, 0, "'" + path + "' must be square");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = row[j];
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

struct BatchResult {
  double log_growth = 0.0;
  std::uint64_t renormalizations = 0;
  std::uint64_t jumps = 0;
};

// Uniform on (0, 1] from the top 53 bits.
double uniform01(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; }

std::size_t sample(const std::vector<double>& weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform01(rng) * total;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (u <= weights[k]) return k;
    u -= weights[k];
  }
  for (std::size_t k = weights.size(); k-- > 0;)
    if (weights[k] > 0.0) return k;
  return 0;
}

BatchResult run_batch(const MarkovEnvironment& env, const std::vector<Matrix>& a, double T, double burn_in,
                      double horizon, std::mt19937_64& rng) {
  const std::size_t n = env.patches();
  const Matrix& q = env.generator();
  std::size_t s = sample(env.stationary(), rng);
  // Start on the Perron vector of the first state, so a single-state
  // environment has no transient at all.
  Vector x(n, 1.0 / static_cast<double>(n));
  try {
    x = perron_frobenius_metzler(a[s]).vector;
  } catch (const Error&) {
  }
  BatchResult out;
  double t = -burn_in;
  while (t < horizon) {
    const double rate = -q(s, s);
    const double dwell = rate > 0.0 ? -std::log(uniform01(rng)) / rate * T : std::numeric_limits<double>::infinity();
    // Split the dwell at the end of the burn-in so only recorded time counts.
    const double stop = t < 0.0 ? std::min(t + dwell, 0.0) : std::min(t + dwell, horizon);
    const double end = t + dwell;
    double cursor = t;
    for (double boundary : {stop, std::min(end, horizon)}) {
      if (!(boundary > cursor)) continue;
      const ScaledMatrix e = expm_scaled(a[s], boundary - cursor);
      Vector y = e.matrix * x;
      const double total = sum(y);
      if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("IntegrationFailure", "state left the positive cone");
      for (double& v : y) v /= total;
      x = std::move(y);
      if (cursor >= 0.0) {
        out.log_growth += std::log(total) + e.log_scale;
        ++out.renormalizations;
      }
      cursor = boundary;
    }
    t = end;
    if (t >= horizon) break;
    std::vector<double> w(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) w[j] = j == s ? 0.0 : q(s, j);
    s = sample(w, rng);
    if (t >= 0.0) ++out.jumps;
  }
  return out;
}

}  // namespace

MarkovEnvironment environment_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ParseError("", line, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("", 1, "environment document must be a JSON object");
  if (!doc.contains("states")) throw ParseError("$.states", 0, "missing field '$.states'");
  if (!doc.contains("Q")) throw ParseError("$.Q", 0, "missing field '$.Q'");
  const json& states = doc["states"];
  if (!states.is_array()) throw ParseError("$.states", 0, "'$.states' must be an array");
  std::vector<EnvironmentState> parsed;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const std::string path = "$.states[" + std::to_string(s) + "]";
    if (!states[s].is_object() || !states[s].contains("R") || !states[s].contains("L"))
      throw ParseError(path, 0, "'" + path + "' needs fields R and L");
    parsed.push_back({numbers(states[s]["R"], path + ".R"), square(states[s]["L"], path + ".L")});
  }
  return MarkovEnvironment(square(doc["Q"], "$.Q"), std::move(parsed));
}

MarkovEnvironment load_environment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("FileNotFound", "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return environment_from_json(buffer.str());
}

std::string environment_to_json(const MarkovEnvironment& env) {
  json states = json::array();
  for (std::size_t s = 0; s < env.size(); ++s)
    states.push_back({{"R", env.state(s).r}, {"L", matrix_json(env.state(s).l)}});
  json doc;
  doc["states"] = states;
  doc["Q"] = matrix_json(env.generator());
  return doc.dump(2) + "\n";
}

LyapunovEstimate simulate_lyapunov(const MarkovEnvironment& env, double m, double T, double horizon,
                                   std::uint64_t seed, const SimulationOptions& opts) {
  if (!(std::isfinite(m) && m >= 0.0)) throw ValidationError("InvalidParameters", "m must be finite and >= 0");
  if (!(std::isfinite(T) && T > 0.0)) throw ValidationError("InvalidParameters", "T must be finite and > 0");
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw ValidationError("InvalidParameters", "horizon must be > 0");
  if (opts.batches < 2) throw ValidationError("InvalidParameters", "at least two batches are needed");
  std::vector<Matrix> a;
  for (std::size_t s = 0; s < env.size(); ++s) a.push_back(env.system_matrix(s, m));

  const double batch_horizon = horizon / opts.batches;
  const double burn_in = opts.burn_in_fraction * batch_horizon;
  std::vector<BatchResult> results(static_cast<std::size_t>(opts.batches));
  parallel_for(results.size(), opts.jobs, [&](std::size_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    results[b] = run_batch(env, a, T, burn_in, batch_horizon, rng);
  });

  LyapunovEstimate est;
  est.horizon = horizon;
  est.seed = seed;
  est.batches = opts.batches;
  double total = 0.0;
  for (const BatchResult& r : results) {
    est.batch_estimates.push_back(r.log_growth / batch_horizon);
    est.renormalizations += r.renormalizations;
    est.jumps += r.jumps;
    total += r.log_growth;
  }
  if (env.size() > 1 && est.jumps < 100)
    throw ValidationError("DegenerateHorizon", "only " + std::to_string(est.jumps) +
                                                   " environment jumps; increase the horizon relative to T");
  est.lambda_hat = total / horizon;
  double ss = 0.0;
  for (double e : est.batch_estimates) ss += (e - est.lambda_hat) * (e - est.lambda_hat);
  est.stderr_ = std::sqrt(ss / (opts.batches - 1) / opts.batches);
  return est;
}

StochasticLimits stochastic_limits(const MarkovEnvironment& env, double m) {
  if (!(std::isfinite(m) && m >= 0.0)) throw ValidationError("InvalidParameters", "m must be finite and >= 0");
  const Vector& mu = env.stationary();
  const std::size_t n = env.patches();
  StochasticLimits out;
  Matrix avg(n);
  Matrix avg_l(n);
  Vector rbar(n, 0.0);
  bool all_irreducible = true;
  double p_weighted = 0.0;
  for (std::size_t s = 0; s < env.size(); ++s) {
    const EnvironmentState& st = env.state(s);
    const Matrix a = env.system_matrix(s, m);
    avg += a * mu[s];
    avg_l += st.l * mu[s];
    for (std::size_t i = 0; i < n; ++i) rbar[i] += mu[s] * st.r[i];
    out.Tinf += mu[s] * metzler_abscissa(a);
    out.chi += mu[s] * *std::max_element(st.r.begin(), st.r.end());
    if (strongly_connected(st.l, kEdgeThreshold)) {
      const Vector p = kernel_vector(st.l);
      for (std::size_t i = 0; i < n; ++i) p_weighted += mu[s] * p[i] * st.r[i];
    } else {
      all_irreducible = false;
    }
  }
  out.T0 = metzler_abscissa(avg);
  out.m0 = *std::max_element(rbar.begin(), rbar.end());
  if (strongly_connected(avg_l, kEdgeThreshold)) {
    const Vector q = kernel_vector(avg_l);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += q[i] * rbar[i];
    out.minf_T0 = s;
  }
  if (all_irreducible) out.minf_Tinf = p_weighted;
  return out;
}

}  // namespace dig
