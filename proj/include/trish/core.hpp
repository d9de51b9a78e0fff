#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace trish {

using Vector = std::vector<double>;

/// Thresholds of the step rule. Gradient norms below 1/gamma1 take a scaled
/// gradient step with factor gamma1, norms above 1/gamma2 one with factor
/// gamma2, and everything in between a normalized step of length alpha.
class TrishParams {
 public:
  /// Throws DomainError unless gamma1 > gamma2 > 0 (both finite).
  TrishParams(double gamma1, double gamma2);

  double gamma1() const noexcept { return gamma1_; }
  double gamma2() const noexcept { return gamma2_; }
  double lower_threshold() const noexcept { return 1.0 / gamma1_; }
  double upper_threshold() const noexcept { return 1.0 / gamma2_; }

  friend bool operator==(const TrishParams&, const TrishParams&) = default;

 private:
  double gamma1_;
  double gamma2_;
};

enum class StepCase : int { kCase1 = 1, kCase2 = 2, kCase3 = 3 };

std::string_view to_string(StepCase c) noexcept;

/// Stepsize sequence indexed by the 1-based iteration counter.
class StepsizeSchedule {
 public:
  enum class Kind { kFixed, kHarmonic, kCustom };

  static StepsizeSchedule fixed(double alpha);
  /// alpha_k = a / (b + k)
  static StepsizeSchedule harmonic(double a, double b);
  static StepsizeSchedule custom(std::function<double(std::int64_t)> sequence);

  /// Throws DomainError for k < 1 or when a custom sequence yields a
  /// non-positive or non-finite value.
  double operator()(std::int64_t k) const;

  Kind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return p0_; }
  double a() const noexcept { return p0_; }
  double b() const noexcept { return p1_; }

 private:
  StepsizeSchedule(Kind kind, double p0, double p1,
                   std::function<double(std::int64_t)> seq)
      : kind_(kind), p0_(p0), p1_(p1), sequence_(std::move(seq)) {}

  Kind kind_;
  double p0_ = 0.0;
  double p1_ = 0.0;
  std::function<double(std::int64_t)> sequence_;
};

/// Iterate x_k together with the 1-based counter and per-case tallies.
/// case_counts always sums to k - 1.
struct IterateState {
  Vector x;
  std::int64_t k = 1;
  std::array<std::int64_t, 3> case_counts{0, 0, 0};

  void record(StepCase c) noexcept;
};

double squared_norm(std::span<const double> v) noexcept;
/// Naive summation; sufficient for the dimensions used here.
double euclidean_norm(std::span<const double> v) noexcept;

/// Endpoints 1/gamma1 and 1/gamma2 both belong to case 2.
StepCase classify_case(double g_norm, const TrishParams& params);

struct TrishStepResult {
  Vector x_next;
  StepCase step_case;
};

TrishStepResult trish_step(std::span<const double> x, std::span<const double> g,
                           double alpha, const TrishParams& params);

/// In-place variant used by the experiment loops.
StepCase trish_update(std::span<double> x, std::span<const double> g, double alpha,
                      const TrishParams& params);

Vector sg_step(std::span<const double> x, std::span<const double> g, double alpha);

void sg_update(std::span<double> x, std::span<const double> g, double alpha);

/// Length of the step the rule takes for a gradient estimate of norm g_norm.
double step_norm(double g_norm, double alpha, const TrishParams& params);

}  // namespace trish
