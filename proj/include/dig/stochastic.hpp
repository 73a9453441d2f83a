#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dig/linalg.hpp"

namespace dig {

struct EnvironmentState {
  Vector r;  // growth rates r_i(s)
  Matrix l;  // migration matrix L(s)
};

/// Finite-state continuous-time Markov environment: generator Q (rows sum to
/// zero) and one (R_s, L_s) pair per state. Immutable after construction.
class MarkovEnvironment {
 public:
  /// Throws ValidationError("SchemaError") for shape problems,
  /// ("GeneratorRowSum"), ("NegativeRate"), ("ColumnSumViolation"),
  /// ("NegativeOffDiagonal"), and NumericalError("ReducibleChain").
  MarkovEnvironment(Matrix generator, std::vector<EnvironmentState> states);

  std::size_t size() const noexcept { return states_.size(); }
  std::size_t patches() const noexcept { return states_.front().r.size(); }
  const Matrix& generator() const noexcept { return q_; }
  const EnvironmentState& state(std::size_t s) const { return states_.at(s); }
  const Vector& stationary() const noexcept { return stationary_; }
  /// R_s + m L_s.
  Matrix system_matrix(std::size_t s, double m) const;

 private:
  Matrix q_;
  std::vector<EnvironmentState> states_;
  Vector stationary_;
};

/// Left kernel vector of Q normalized to sum 1.
Vector stationary_distribution(const Matrix& generator);

MarkovEnvironment environment_from_json(std::string_view text);
MarkovEnvironment load_environment(const std::filesystem::path& path);
std::string environment_to_json(const MarkovEnvironment& env);

struct SimulationOptions {
  int batches = 20;
  /// Unrecorded warm-up at the start of every batch, as a fraction of the
  /// batch horizon; removes the transient of the uniform initial state.
  double burn_in_fraction = 0.1;
  unsigned jobs = 0;
};

struct LyapunovEstimate {
  double lambda_hat = 0.0;
  double stderr_ = 0.0;
  double horizon = 0.0;
  std::uint64_t renormalizations = 0;
  std::uint64_t jumps = 0;
  std::uint64_t seed = 0;
  int batches = 0;
  std::vector<double> batch_estimates;
};

inline constexpr std::uint64_t kDefaultSeed = 20240601;

/// Exact-event simulation of the switched system with holding times dilated
/// by T. Each batch is an independent stream seeded from (seed, batch index)
/// and covers horizon / batches time units after its burn-in.
/// Throws ValidationError("DegenerateHorizon") when fewer than 100 jumps are
/// recorded (single-state environments are exempt).
LyapunovEstimate simulate_lyapunov(const MarkovEnvironment& env, double m, double T, double horizon,
                                   std::uint64_t seed = kDefaultSeed, const SimulationOptions& opts = {});

struct StochasticLimits {
  double T0 = 0.0;    // lambda_max of the stationary average of R + mL
  double Tinf = 0.0;  // sum_s mu_s lambda_max(R_s + m L_s)
  double chi = 0.0;   // sum_s mu_s max_i r_i(s)
  double m0 = 0.0;    // max_i r-bar_i
  std::optional<double> minf_T0;    // sum q_i r-bar_i, q = kernel(avg L)
  std::optional<double> minf_Tinf;  // sum_s mu_s sum_i p_i(s) r_i(s)
};

StochasticLimits stochastic_limits(const MarkovEnvironment& env, double m);

}  // namespace dig
