#include "trish/core.hpp"

#include <cmath>
#include <string>

#include "trish/errors.hpp"

namespace trish {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("stepsize must be positive and finite, got " + std::to_string(alpha));
  }
}

void check_step_inputs(std::span<const double> x, std::span<const double> g, double alpha) {
  if (x.size() != g.size()) {
    throw UsageError("dimension mismatch: x has " + std::to_string(x.size()) +
                     " entries, g has " + std::to_string(g.size()));
  }
  check_alpha(alpha);
  for (double v : g) {
    if (!std::isfinite(v)) throw DataError("stochastic gradient has a non-finite entry");
  }
}

}  // namespace

TrishParams::TrishParams(double gamma1, double gamma2) : gamma1_(gamma1), gamma2_(gamma2) {
  if (!std::isfinite(gamma1) || !std::isfinite(gamma2) || !(gamma2 > 0.0) ||
      !(gamma1 > gamma2)) {
    throw DomainError("TRish parameters require gamma1 > gamma2 > 0, got gamma1=" +
                      std::to_string(gamma1) + ", gamma2=" + std::to_string(gamma2));
  }
}

std::string_view to_string(StepCase c) noexcept {
  switch (c) {
    case StepCase::kCase1: return "case1";
    case StepCase::kCase2: return "case2";
    case StepCase::kCase3: return "case3";
  }
  return "unknown";
}

StepsizeSchedule StepsizeSchedule::fixed(double alpha) {
  check_alpha(alpha);
  return StepsizeSchedule(Kind::kFixed, alpha, 0.0, {});
}

StepsizeSchedule StepsizeSchedule::harmonic(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("harmonic schedule requires a > 0 and b > 0");
  }
  return StepsizeSchedule(Kind::kHarmonic, a, b, {});
}

StepsizeSchedule StepsizeSchedule::custom(std::function<double(std::int64_t)> sequence) {
  if (!sequence) throw UsageError("custom schedule requires a callable");
  return StepsizeSchedule(Kind::kCustom, 0.0, 0.0, std::move(sequence));
}

double StepsizeSchedule::operator()(std::int64_t k) const {
  if (k < 1) throw DomainError("iterations are 1-based, got k=" + std::to_string(k));
  switch (kind_) {
    case Kind::kFixed:
      return p0_;
    case Kind::kHarmonic:
      return p0_ / (p1_ + static_cast<double>(k));
    case Kind::kCustom: {
      const double v = sequence_(k);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError("custom schedule produced a non-positive stepsize at k=" +
                          std::to_string(k));
      }
      return v;
    }
  }
  return p0_;
}

void IterateState::record(StepCase c) noexcept {
  ++case_counts[static_cast<int>(c) - 1];
  ++k;
}

double squared_norm(std::span<const double> v) noexcept {
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

double euclidean_norm(std::span<const double> v) noexcept { return std::sqrt(squared_norm(v)); }

StepCase classify_case(double g_norm, const TrishParams& params) {
  if (std::isnan(g_norm) || g_norm < 0.0) {
    throw DomainError("gradient norm must be nonnegative, got " + std::to_string(g_norm));
  }
  if (g_norm < params.lower_threshold()) return StepCase::kCase1;
  if (g_norm <= params.upper_threshold()) return StepCase::kCase2;
  return StepCase::kCase3;
}

StepCase trish_update(std::span<double> x, std::span<const double> g, double alpha,
                      const TrishParams& params) {
  check_step_inputs(x, g, alpha);
  const double norm = euclidean_norm(g);
  const StepCase c = classify_case(norm, params);
  double scale = 0.0;
  switch (c) {
    case StepCase::kCase1: scale = params.gamma1() * alpha; break;
    case StepCase::kCase2: scale = alpha / norm; break;
    case StepCase::kCase3: scale = params.gamma2() * alpha; break;
  }
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= scale * g[i];
  return c;
}

TrishStepResult trish_step(std::span<const double> x, std::span<const double> g, double alpha,
                           const TrishParams& params) {
  TrishStepResult out{Vector(x.begin(), x.end()), StepCase::kCase1};
  check_step_inputs(x, g, alpha);
  out.step_case = trish_update(out.x_next, g, alpha, params);
  return out;
}

void sg_update(std::span<double> x, std::span<const double> g, double alpha) {
  check_step_inputs(x, g, alpha);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= alpha * g[i];
}

Vector sg_step(std::span<const double> x, std::span<const double> g, double alpha) {
  Vector out(x.begin(), x.end());
  check_step_inputs(x, g, alpha);
  sg_update(out, g, alpha);
  return out;
}

double step_norm(double g_norm, double alpha, const TrishParams& params) {
  check_alpha(alpha);
  switch (classify_case(g_norm, params)) {
    case StepCase::kCase1: return params.gamma1() * alpha * g_norm;
    case StepCase::kCase2: return alpha;
    case StepCase::kCase3: return params.gamma2() * alpha * g_norm;
  }
  return alpha;
}

}  // namespace trish
