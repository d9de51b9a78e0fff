#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>

#include "trish/core.hpp"
#include "trish/problems.hpp"

namespace trish {

/// All randomness flows through explicitly passed engines of this type.
using Rng = std::mt19937_64;

inline constexpr const char* kRngFamily = "mt19937_64+std::normal_distribution";

Rng make_rng(std::uint64_t seed);

/// Second-moment coefficients: E||g||^2 <= M1 + M2 ||grad f||^2, and
/// optionally E||g||^2 <= M3 zeta^(k-1) + ||grad f||^2.
struct OracleMoments {
  double M1 = 0.0;
  double M2 = 0.0;
  std::optional<double> M3;
  std::optional<double> zeta;

  void validate() const;
};

struct ConstantSigma {
  double sigma = 0.0;
};
/// sigma_k = multiplier * alpha_k
struct StepsizeCoupledSigma {
  double multiplier = 1.0;
};
/// sigma_k^2 = M3 * zeta^(k-1)
struct GeometricDecaySigma {
  double M3 = 0.0;
  double zeta = 0.0;
};

using SigmaSchedule = std::variant<ConstantSigma, StepsizeCoupledSigma, GeometricDecaySigma>;

/// Isotropic Gaussian noise around the true gradient: g = grad f + sigma_k z.
struct GaussianOracleConfig {
  SigmaSchedule schedule = ConstantSigma{1.0};
  std::uint64_t rng_seed = 0;

  void validate() const;
  /// Per-coordinate standard deviation at iteration k.
  double sigma_at(std::int64_t k, double alpha_k) const;
  /// Declared moments for dimension n. alpha_bound bounds alpha_k for the
  /// stepsize-coupled schedule.
  OracleMoments moments(std::size_t n, double alpha_bound) const;
};

Vector gaussian_sample(std::span<const double> grad_true, const GaussianOracleConfig& config,
                       std::int64_t k, double alpha_k, Rng& rng);

/// Scalar oracle taking value_pos with probability prob_pos, else value_neg.
struct TwoPointOracle {
  double value_pos = 6.0;
  double value_neg = -1.5;
  double prob_pos = 1.0 / 3.0;

  void validate() const;
  double mean() const noexcept { return prob_pos * value_pos + (1.0 - prob_pos) * value_neg; }
};

double two_point_sample(const TwoPointOracle& oracle, Rng& rng);

enum class BatchSampling {
  kWithReplacement,  // i.i.d. uniform indices
  kFullPass,         // deterministic sweep over every component
};

/// Average of batch_size component gradients.
Vector finite_sum_minibatch(const FiniteSumProblem& problem, std::span<const double> x,
                            std::size_t batch_size, Rng& rng,
                            BatchSampling sampling = BatchSampling::kWithReplacement);

/// Noise-free oracle returning grad f exactly.
struct ExactOracle {};

struct MiniBatchOracle {
  std::size_t batch_size = 1;
  BatchSampling sampling = BatchSampling::kWithReplacement;
};

using OracleSpec = std::variant<ExactOracle, GaussianOracleConfig, MiniBatchOracle>;

std::string describe(const OracleSpec& spec);

/// Draws g_k for the given oracle at x. Writes into out (size n).
/// Returns the number of component gradients evaluated (0 for non finite-sum
/// oracles).
std::size_t draw_gradient(const OracleSpec& spec, const Problem& problem,
                          std::span<const double> x, std::int64_t k, double alpha_k, Rng& rng,
                          std::span<double> out);

}  // namespace trish
