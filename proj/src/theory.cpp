#include "trish/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "trish/errors.hpp"

namespace trish {

namespace {

constexpr double kCapTolerance = 1e-12;
constexpr double kSlackStandardErrors = 3.0;
constexpr int kBootstrapResamples = 1000;
constexpr std::int64_t kBootstrapBlocks = 1000;

const double kTwoSqrtTwoPi = 2.0 * std::sqrt(2.0 * std::numbers::pi);

double require(const std::optional<double>& v, const char* name) {
  if (!v) throw HypothesisError("missing-constant", std::string(name) + " is required");
  return *v;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw HypothesisError("positive-constants", std::string(name) + " must be positive, got " +
                                                    std::to_string(v));
  }
}

void require_gt_one(double v, const char* name) {
  if (!(v > 1.0) || !std::isfinite(v)) {
    throw HypothesisError("positive-constants", std::string(name) + " must exceed 1, got " +
                                                    std::to_string(v));
  }
}

/// gamma1 - h (gamma1 - gamma2) > 0, i.e. gamma1/gamma2 < h/(h-1)
double ratio_margin(const TrishParams& p, double h, const char* hname) {
  const double margin = p.gamma1() - h * (p.gamma1() - p.gamma2());
  if (!(margin > 0.0)) {
    throw HypothesisError("gamma-ratio", "gamma1/gamma2 = " + std::to_string(p.gamma1() / p.gamma2()) +
                                             " must be below " + std::string(hname) + "/(" + hname +
                                             "-1) = " + std::to_string(h / (h - 1.0)));
  }
  return margin;
}

void require_at_most(double value, double cap, const char* what) {
  if (!(value > 0.0) || value > cap * (1.0 + kCapTolerance)) {
    throw HypothesisError("stepsize-cap", std::string(what) + " = " + std::to_string(value) +
                                              " must lie in (0, " + std::to_string(cap) + "]");
  }
}

}  // namespace

void AssumptionConstants::validate() const {
  auto pos = [](const std::optional<double>& v, const char* n) {
    if (v && !(*v > 0.0)) throw UsageError(std::string(n) + " must be positive");
  };
  auto gt1 = [](const std::optional<double>& v, const char* n) {
    if (v && !(*v > 1.0)) throw UsageError(std::string(n) + " must exceed 1");
  };
  pos(h1, "h1");
  pos(h3, "h3");
  pos(h5, "h5");
  gt1(h2, "h2");
  gt1(h4, "h4");
  gt1(h6, "h6");
  if (lambda && !(*lambda > 0.0 && *lambda < 1.0)) throw UsageError("lambda must lie in (0,1)");
}

AssumptionConstants gaussian_h_constants(const NoiseRegime& regime) {
  AssumptionConstants h;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, FixedNoise>) {
          if (!(r.sigma > 0.0)) throw UsageError("sigma bound must be positive");
          h.h1 = r.sigma / kTwoSqrtTwoPi;
          h.h2 = 1.0 + r.sigma / kTwoSqrtTwoPi;
        } else if constexpr (std::is_same_v<T, StepsizeCoupledNoise>) {
          if (!(r.alpha_bound > 0.0) || !(r.multiplier > 0.0)) {
            throw UsageError("stepsize bound and multiplier must be positive");
          }
          h.h3 = r.multiplier / kTwoSqrtTwoPi;
          h.h4 = 1.0 + r.multiplier * r.alpha_bound / kTwoSqrtTwoPi;
        } else {
          if (!(r.M3 > 0.0)) throw UsageError("M3 must be positive");
          if (!(r.zeta > 0.0 && r.zeta < 1.0)) throw UsageError("zeta must lie in (0,1)");
          h.h5 = std::sqrt(r.M3) / kTwoSqrtTwoPi;
          h.h6 = 1.0 + std::sqrt(r.M3) / kTwoSqrtTwoPi;
          h.lambda = std::sqrt(r.zeta);
        }
      },
      regime);
  return h;
}

double gaussian_conditional_product(double grad_norm_sq, double sigma) {
  if (grad_norm_sq < 0.0 || sigma < 0.0) throw DomainError("negative input");
  // grad f . g ~ N(m, s^2) with m = ||grad f||^2, s = sigma ||grad f||.
  const double m = grad_norm_sq;
  const double s = sigma * std::sqrt(grad_norm_sq);
  if (s == 0.0) return m;
  const double z = m / s;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return m * cdf + s * pdf;
}

double ConditionalInnerProductEstimate::relative_error() const noexcept {
  if (degenerate || product == 0.0) return std::numeric_limits<double>::infinity();
  return standard_error / std::abs(product);
}

ConditionalInnerProductEstimate estimate_conditional_inner_product(
    std::span<const double> grad_true, const GradientSampler& sampler, std::int64_t n_samples,
    Rng& rng) {
  if (n_samples < 1000) throw UsageError("at least 1000 samples are required");
  const std::int64_t blocks = std::min(kBootstrapBlocks, n_samples);
  struct Block {
    double n = 0.0, n_event = 0.0, sum_event = 0.0, sum = 0.0, sum_sq = 0.0;
  };
  std::vector<Block> stats(static_cast<std::size_t>(blocks));
  Vector g(grad_true.size());
  for (std::int64_t i = 0; i < n_samples; ++i) {
    sampler(rng, g);
    double y = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) y += grad_true[j] * g[j];
    Block& b = stats[static_cast<std::size_t>(i % blocks)];
    b.n += 1.0;
    b.sum += y;
    b.sum_sq += y * y;
    if (y >= 0.0) {
      b.n_event += 1.0;
      b.sum_event += y;
    }
  }
  Block tot;
  for (const Block& b : stats) {
    tot.n += b.n;
    tot.n_event += b.n_event;
    tot.sum_event += b.sum_event;
    tot.sum += b.sum;
    tot.sum_sq += b.sum_sq;
  }

  ConditionalInnerProductEstimate est;
  est.n_samples = n_samples;
  est.prob_event = tot.n_event / tot.n;
  est.total_mean = tot.sum / tot.n;
  const double var = std::max(0.0, tot.sum_sq / tot.n - est.total_mean * est.total_mean);
  est.total_standard_error = std::sqrt(var / (tot.n - 1.0));
  const double n_complement = tot.n - tot.n_event;
  est.complement_mean = n_complement > 0.0 ? (tot.sum - tot.sum_event) / n_complement : 0.0;
  if (tot.n_event == 0.0) {
    est.degenerate = true;
    return est;
  }
  est.conditional_mean = tot.sum_event / tot.n_event;
  est.product = est.prob_event * est.conditional_mean;

  // The product equals the mean of y * 1{y >= 0}; resample whole blocks.
  std::uniform_int_distribution<std::int64_t> pick(0, blocks - 1);
  double acc = 0.0, acc_sq = 0.0;
  for (int r = 0; r < kBootstrapResamples; ++r) {
    double n = 0.0, s = 0.0;
    for (std::int64_t j = 0; j < blocks; ++j) {
      const Block& b = stats[static_cast<std::size_t>(pick(rng))];
      n += b.n;
      s += b.sum_event;
    }
    const double p = s / n;
    acc += p;
    acc_sq += p * p;
  }
  const double mean = acc / kBootstrapResamples;
  est.standard_error =
      std::sqrt(std::max(0.0, (acc_sq - kBootstrapResamples * mean * mean) / (kBootstrapResamples - 1)));
  return est;
}

ConditionalInnerProductEstimate estimate_conditional_inner_product(
    std::span<const double> grad_true, const GaussianOracleConfig& oracle, std::int64_t k,
    double alpha_k, std::int64_t n_samples, Rng& rng) {
  oracle.validate();
  const double sigma = oracle.sigma_at(k, alpha_k);
  Vector mean(grad_true.begin(), grad_true.end());
  return estimate_conditional_inner_product(
      grad_true,
      [&](Rng& r, std::span<double> out) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = mean[j] + sigma * normal(r);
      },
      n_samples, rng);
}

ConditionalInnerProductEstimate estimate_conditional_inner_product(double grad_true,
                                                                   const TwoPointOracle& oracle,
                                                                   std::int64_t n_samples,
                                                                   Rng& rng) {
  oracle.validate();
  const double grad[1] = {grad_true};
  return estimate_conditional_inner_product(
      grad, [&](Rng& r, std::span<double> out) { out[0] = two_point_sample(oracle, r); },
      n_samples, rng);
}

bool check_assumption4(const ConditionalInnerProductEstimate& est, double h1, double h2,
                       double grad_norm_sq) {
  return est.product <= h1 + h2 * grad_norm_sq + kSlackStandardErrors * est.standard_error;
}

bool check_assumption5(const ConditionalInnerProductEstimate& est, double h3, double h4,
                       double alpha_k, double grad_norm_sq) {
  return est.product <= h3 * alpha_k + h4 * grad_norm_sq + kSlackStandardErrors * est.standard_error;
}

bool check_assumption6(const ConditionalInnerProductEstimate& est, double h5, double h6,
                       double lambda, std::int64_t k, double grad_norm_sq) {
  const double decay = std::pow(lambda, static_cast<double>(k - 1));
  return est.product <= h5 * decay + h6 * grad_norm_sq + kSlackStandardErrors * est.standard_error;
}

double lemma1_rhs(StepCase step_case, double grad_norm_sq, double alpha,
                  const TrishParams& params, double M1, double M2, double L,
                  double conditional_product) {
  if (grad_norm_sq < 0.0 || !(alpha > 0.0) || !(M1 > 0.0) || !(M2 > 0.0) || !(L > 0.0)) {
    throw DomainError("lemma1_rhs: constants must be positive");
  }
  const double g1 = params.gamma1();
  const double g2 = params.gamma2();
  switch (step_case) {
    case StepCase::kCase1:
      return -g1 * alpha * (1.0 - 0.5 * g1 * L * M2 * alpha) * grad_norm_sq +
             0.5 * g1 * g1 * L * M1 * alpha * alpha;
    case StepCase::kCase2:
      return -g1 * alpha * grad_norm_sq + (g1 - g2) * alpha * conditional_product +
             0.5 * L * alpha * alpha;
    case StepCase::kCase3:
      return -g2 * alpha * (1.0 - 0.5 * g2 * L * M2 * alpha) * grad_norm_sq +
             0.5 * g2 * g2 * L * M1 * alpha * alpha;
  }
  return 0.0;
}

TheoremConstants derive_theorem_constants(int theorem, const TheoremInputs& in) {
  const TrishParams& p = in.params;
  const double g1 = p.gamma1();
  const double g2 = p.gamma2();
  TheoremConstants k;
  k.theorem = theorem;
  require_positive(in.L, "L");
  if (in.gap1 < 0.0) throw HypothesisError("positive-constants", "initial gap must be nonnegative");
  k.L = in.L;
  k.f_gap_initial = in.gap1;

  switch (theorem) {
    case 1:
    case 4: {
      const double h1 = require(in.h.h1, "h1");
      const double h2 = require(in.h.h2, "h2");
      require_positive(h1, "h1");
      require_gt_one(h2, "h2");
      require_positive(in.M1, "M1");
      require_positive(in.M2, "M2");
      const double margin = ratio_margin(p, h2, "h2");
      k.theta1 = 0.5 * std::min(g2, margin);
      double cap = 1.0 / (g1 * in.L * in.M2);
      if (theorem == 1) {
        require_positive(in.c, "c");
        k.c = in.c;
        cap = std::min(cap, 1.0 / (2.0 * in.c * k.theta1));
      }
      require_at_most(in.alpha, cap, "alpha");
      k.alpha = in.alpha;
      k.theta2 = std::max(0.5 * g1 * g1 * in.L * in.M1 * in.alpha * in.alpha,
                          h1 * (g1 - g2) * in.alpha + 0.5 * in.L * in.alpha * in.alpha);
      break;
    }
    case 2:
    case 5: {
      const double h3 = require(in.h.h3, "h3");
      const double h4 = require(in.h.h4, "h4");
      require_positive(h3, "h3");
      require_gt_one(h4, "h4");
      require_positive(in.M1, "M1");
      require_positive(in.M2, "M2");
      require_positive(in.a, "a");
      require_positive(in.b, "b");
      const double margin = ratio_margin(p, h4, "h4");
      k.beta1 = 0.5 * std::min(g2, margin);
      k.beta2 = std::max(h3 * (g1 - g2) + 0.5 * in.L, 0.5 * g1 * g1 * in.L * in.M1);
      k.a = in.a;
      k.b = in.b;
      require_at_most(in.a / (in.b + 1.0), 1.0 / (g1 * in.L * in.M2), "alpha_1");
      if (theorem == 2) {
        require_positive(in.c, "c");
        k.c = in.c;
        const double lo = 1.0 / (2.0 * in.c * k.beta1);
        const double hi = (in.b + 1.0) / (2.0 * in.c * k.beta1);
        if (!(in.a > lo && in.a < hi)) {
          throw HypothesisError("a-interval", "a = " + std::to_string(in.a) + " must lie in (" +
                                                  std::to_string(lo) + ", " + std::to_string(hi) +
                                                  ")");
        }
        k.nu = std::max(in.a * in.a * k.beta2 / (2.0 * in.a * in.c * k.beta1 - 1.0),
                        (in.b + 1.0) * in.gap1);
      }
      break;
    }
    case 3: {
      const double h5 = require(in.h.h5, "h5");
      const double h6 = require(in.h.h6, "h6");
      const double lambda = require(in.h.lambda, "lambda");
      require_positive(h5, "h5");
      require_gt_one(h6, "h6");
      if (!(lambda > 0.0 && lambda < 1.0)) {
        throw HypothesisError("positive-constants", "lambda must lie in (0,1)");
      }
      require_positive(in.c, "c");
      require_positive(in.M3, "M3");
      if (!(in.zeta > 0.0 && in.zeta < 1.0)) {
        throw HypothesisError("positive-constants", "zeta must lie in (0,1)");
      }
      const double margin = ratio_margin(p, h6, "h6");
      k.c = in.c;
      k.kappa1 = 0.5 * std::min(g2, margin);
      const double cap = std::min({margin / (g1 * g1 * in.L), 1.0 / (g1 * in.L), 1.0 / (in.c * k.kappa1)});
      require_at_most(in.alpha, cap, "alpha");
      k.alpha = in.alpha;
      k.lambda = lambda;
      k.zeta = in.zeta;
      k.kappa2 = h5 * (g1 - g2) + 0.5 * g1 * g1 * in.alpha * in.L * in.M3;
      k.omega = std::max(in.gap1, k.kappa2 / (in.c * k.kappa1));
      k.rho = theorem3_rho(in.alpha, in.c, k.kappa1, lambda, in.zeta);
      break;
    }
    default:
      throw UsageError("theorem id must be 1..5, got " + std::to_string(theorem));
  }
  return k;
}

double theorem_stepsize_cap(int theorem, const TheoremInputs& in) {
  const double g1 = in.params.gamma1();
  const double g2 = in.params.gamma2();
  require_positive(in.L, "L");
  switch (theorem) {
    case 1:
    case 4: {
      const double h2 = require(in.h.h2, "h2");
      require_positive(in.M2, "M2");
      double cap = 1.0 / (g1 * in.L * in.M2);
      if (theorem == 1) {
        require_positive(in.c, "c");
        const double theta1 = 0.5 * std::min(g2, ratio_margin(in.params, h2, "h2"));
        cap = std::min(cap, 1.0 / (2.0 * in.c * theta1));
      }
      return cap;
    }
    case 3: {
      const double h6 = require(in.h.h6, "h6");
      require_positive(in.c, "c");
      const double margin = ratio_margin(in.params, h6, "h6");
      const double kappa1 = 0.5 * std::min(g2, margin);
      return std::min({margin / (g1 * g1 * in.L), 1.0 / (g1 * in.L), 1.0 / (in.c * kappa1)});
    }
    default:
      throw UsageError("theorem " + std::to_string(theorem) + " does not use a fixed stepsize");
  }
}

double theorem3_rho(double alpha, double c, double kappa1, double lambda, double zeta) {
  return std::max({1.0 - alpha * c * kappa1, lambda, zeta});
}

double theorem_bound(int theorem, const TheoremConstants& k, std::int64_t iter) {
  if (iter < 1) throw UsageError("iteration index must be >= 1");
  if (k.theorem != 0 && k.theorem != theorem) {
    throw UsageError("constants were derived for theorem " + std::to_string(k.theorem));
  }
  const double kk = static_cast<double>(iter);
  switch (theorem) {
    case 1: {
      require_positive(k.theta1, "theta1");
      require_positive(k.theta2, "theta2");
      require_positive(k.c, "c");
      require_positive(k.alpha, "alpha");
      const double q = 2.0 * k.c * k.alpha * k.theta1;
      if (q > 1.0 + kCapTolerance) {
        throw HypothesisError("stepsize-cap", "2 c alpha theta1 must not exceed 1");
      }
      const double limit = k.theta2 / q;
      return limit + std::pow(std::max(0.0, 1.0 - q), kk - 1.0) * (k.f_gap_initial - limit);
    }
    case 2:
      require_positive(k.nu, "nu");
      require_positive(k.b, "b");
      return k.nu / (k.b + kk);
    case 3:
      require_positive(k.omega, "omega");
      if (!(k.rho > 0.0 && k.rho < 1.0)) throw HypothesisError("rho-range", "rho must lie in (0,1)");
      return k.omega * std::pow(k.rho, kk - 1.0);
    case 4:
      return theorem4_sum_bound(k, iter) / kk;
    case 5: {
      require_positive(k.beta1, "beta1");
      require_positive(k.beta2, "beta2");
      require_positive(k.a, "a");
      require_positive(k.b, "b");
      double sum_sq = 0.0;
      for (std::int64_t j = 1; j <= iter; ++j) {
        const double a_j = k.a / (k.b + static_cast<double>(j));
        sum_sq += a_j * a_j;
      }
      return k.f_gap_initial / k.beta1 + k.beta2 / k.beta1 * sum_sq;
    }
    default:
      throw UsageError("theorem id must be 1..5, got " + std::to_string(theorem));
  }
}

double theorem4_sum_bound(const TheoremConstants& k, std::int64_t K) {
  if (K < 1) throw UsageError("K must be >= 1");
  require_positive(k.theta1, "theta1");
  require_positive(k.theta2, "theta2");
  require_positive(k.alpha, "alpha");
  return static_cast<double>(K) * k.theta2 / (k.alpha * k.theta1) +
         k.f_gap_initial / (k.alpha * k.theta1);
}

double sg_comparison_bound(double gamma1, double gamma2, double h1, double h2, double c,
                           double L, double M2) {
  if (!(gamma2 > 0.0) || gamma1 < gamma2) {
    throw HypothesisError("gamma-order", "requires gamma1 >= gamma2 > 0");
  }
  if (h1 < 0.0 || h2 < 1.0) throw HypothesisError("positive-constants", "requires h1 >= 0, h2 >= 1");
  require_positive(c, "c");
  require_positive(L, "L");
  require_positive(M2, "M2");
  const double margin = gamma1 - h2 * (gamma1 - gamma2);
  if (!(margin > 0.0)) {
    throw HypothesisError("gamma-ratio", "gamma1 - h2 (gamma1 - gamma2) must be positive");
  }
  const double alpha = 1.0 / (gamma1 * L * M2);
  return (h1 * (gamma1 - gamma2) + 0.5 * L * alpha) / (c * margin);
}

}  // namespace trish
