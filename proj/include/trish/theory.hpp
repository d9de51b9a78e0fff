#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>

#include "trish/core.hpp"
#include "trish/oracles.hpp"

namespace trish {

/// Coefficients bounding P[E] * E[grad f . g | E], where E is the event
/// grad f . g >= 0. Only the members relevant to one noise regime are set.
struct AssumptionConstants {
  std::optional<double> h1, h2;          // fixed noise:       h1 + h2 ||grad f||^2
  std::optional<double> h3, h4;          // stepsize-coupled:  h3 alpha_k + h4 ||grad f||^2
  std::optional<double> h5, h6, lambda;  // geometric decay:   h5 lambda^(k-1) + h6 ||grad f||^2

  void validate() const;
};

struct FixedNoise {
  double sigma = 0.0;  // bound on the per-coordinate noise std
};
struct StepsizeCoupledNoise {
  double alpha_bound = 0.0;  // bound on every alpha_k
  double multiplier = 1.0;   // sigma_k <= multiplier * alpha_k
};
struct GeometricNoise {
  double M3 = 0.0;  // sigma_k^2 <= M3 zeta^(k-1) per coordinate
  double zeta = 0.0;
};
using NoiseRegime = std::variant<FixedNoise, StepsizeCoupledNoise, GeometricNoise>;

/// h-constants implied by Gaussian noise. For isotropic noise in n
/// dimensions the same formulas hold with the per-coordinate sigma, since
/// grad f . g is normal with mean ||grad f||^2 and std sigma ||grad f||.
AssumptionConstants gaussian_h_constants(const NoiseRegime& regime);

/// Closed form of P[E] E[grad f . g | E] for g ~ N(grad f, sigma^2 I).
double gaussian_conditional_product(double grad_norm_sq, double sigma);

struct ConditionalInnerProductEstimate {
  double prob_event = 0.0;
  double conditional_mean = 0.0;
  double product = 0.0;
  double standard_error = 0.0;  // of product, bootstrap
  double complement_mean = 0.0;  // E[grad f . g | not E], 0 when not E never occurs
  double total_mean = 0.0;       // sample mean of grad f . g
  double total_standard_error = 0.0;
  std::int64_t n_samples = 0;
  bool degenerate = false;  // E never occurred

  double relative_error() const noexcept;
};

using GradientSampler = std::function<void(Rng&, std::span<double>)>;

/// Monte-Carlo estimate from n_samples draws of the sampler. Standard errors
/// come from 1000 bootstrap resamples of per-block sufficient statistics.
/// Throws UsageError for n_samples < 1000.
ConditionalInnerProductEstimate estimate_conditional_inner_product(
    std::span<const double> grad_true, const GradientSampler& sampler, std::int64_t n_samples,
    Rng& rng);

ConditionalInnerProductEstimate estimate_conditional_inner_product(
    std::span<const double> grad_true, const GaussianOracleConfig& oracle, std::int64_t k,
    double alpha_k, std::int64_t n_samples, Rng& rng);

ConditionalInnerProductEstimate estimate_conditional_inner_product(double grad_true,
                                                                   const TwoPointOracle& oracle,
                                                                   std::int64_t n_samples,
                                                                   Rng& rng);

/// Statistical checks allow the estimate 3 standard errors of slack.
bool check_assumption4(const ConditionalInnerProductEstimate& est, double h1, double h2,
                       double grad_norm_sq);
bool check_assumption5(const ConditionalInnerProductEstimate& est, double h3, double h4,
                       double alpha_k, double grad_norm_sq);
bool check_assumption6(const ConditionalInnerProductEstimate& est, double h5, double h6,
                       double lambda, std::int64_t k, double grad_norm_sq);

/// Upper bound on E_k[f(x_{k+1})] - f(x_k) for the given step case.
double lemma1_rhs(StepCase step_case, double grad_norm_sq, double alpha,
                  const TrishParams& params, double M1, double M2, double L,
                  double conditional_product);

/// Raw ingredients for the five convergence bounds. Which members are needed
/// depends on the theorem; missing or invalid ones raise HypothesisError.
struct TheoremInputs {
  TrishParams params{2.0, 1.0};
  double L = 0.0;
  double c = 0.0;  // unused by theorems 4 and 5
  double M1 = 0.0;
  double M2 = 0.0;
  double M3 = 0.0;
  double zeta = 0.0;
  double gap1 = 0.0;  // f(x_1) - f*
  AssumptionConstants h;
  double alpha = 0.0;  // fixed stepsize (theorems 1, 3, 4)
  double a = 0.0;      // alpha_k = a / (b + k) (theorems 2, 5)
  double b = 0.0;
};

struct TheoremConstants {
  int theorem = 0;
  double theta1 = 0.0, theta2 = 0.0;
  double beta1 = 0.0, beta2 = 0.0, nu = 0.0;
  double kappa1 = 0.0, kappa2 = 0.0, omega = 0.0, rho = 0.0;
  double lambda = 0.0, zeta = 0.0;
  double alpha = 0.0, a = 0.0, b = 0.0;
  double c = 0.0, L = 0.0, f_gap_initial = 0.0;
};

/// Validates the theorem's hypotheses and computes its constants.
TheoremConstants derive_theorem_constants(int theorem, const TheoremInputs& in);

/// Largest admissible fixed stepsize for theorems 1, 3 and 4 (the gamma
/// ratio hypothesis must already hold).
double theorem_stepsize_cap(int theorem, const TheoremInputs& in);

/// Theorem 1: bound on E[f(x_{k+1})] - f*.
/// Theorem 2: bound on E[f(x_k)] - f*, nu / (b + k).
/// Theorem 3: bound on E[f(x_k)] - f*, omega rho^(k-1).
/// Theorem 4: bound on (1/K) sum_{k<=K} E||grad f(x_k)||^2.
/// Theorem 5: bound on sum_{k<=K} alpha_k E||grad f(x_k)||^2.
double theorem_bound(int theorem, const TheoremConstants& constants, std::int64_t k);

/// Theorem 4 in summed form: K theta2/(alpha theta1) + gap1/(alpha theta1).
double theorem4_sum_bound(const TheoremConstants& constants, std::int64_t K);

/// rho = max{1 - alpha c kappa1, lambda, zeta}
double theorem3_rho(double alpha, double c, double kappa1, double lambda, double zeta);

/// Limit of the fixed-stepsize bound with alpha = 1/(gamma1 L M2) when every
/// step is normalized. gamma1 == gamma2 is accepted for the limit case.
double sg_comparison_bound(double gamma1, double gamma2, double h1, double h2, double c,
                           double L, double M2);

}  // namespace trish
