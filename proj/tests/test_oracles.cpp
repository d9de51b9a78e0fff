#include <cmath>

#include "doctest.h"
#include "trish/errors.hpp"
#include "trish/oracles.hpp"
#include "trish/problems.hpp"

using namespace trish;

namespace {

QuadraticSumProblem small_quadratic_sum() {
  return QuadraticSumProblem(Vector{1.0, 3.0},
                             {Vector{1.0, 0.0}, Vector{-2.0, 1.0}, Vector{0.5, 4.0}, Vector{3.0, -1.0}});
}

}  // namespace

TEST_CASE("sigma schedules") {
  GaussianOracleConfig c;
  c.schedule = GeometricDecaySigma{4.0, 0.25};
  CHECK(c.sigma_at(3, 0.1) == doctest::Approx(0.5));
  CHECK(c.sigma_at(1, 0.1) == doctest::Approx(2.0));
  c.schedule = StepsizeCoupledSigma{2.0};
  CHECK(c.sigma_at(5, 0.25) == doctest::Approx(0.5));
  c.schedule = ConstantSigma{0.0};
  CHECK_THROWS_AS(c.validate(), UsageError);
  c.schedule = GeometricDecaySigma{1.0, 1.0};
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("gaussian oracle mean and variance") {
  GaussianOracleConfig c;
  c.schedule = ConstantSigma{1.0};
  Rng rng = make_rng(17);
  const Vector grad{1.0};
  const int n = 1'000'000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += gaussian_sample(grad, c, 1, 0.1, rng)[0];
  CHECK(std::abs(s / n - 1.0) <= 3.0 / 1000.0);

  c.schedule = ConstantSigma{2.0};
  double m = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = gaussian_sample(grad, c, 1, 0.1, rng)[0];
    m += v;
    m2 += v * v;
  }
  m /= n;
  const double var = m2 / n - m * m;
  CHECK(std::abs(var - 4.0) / 4.0 < 0.02);
}

TEST_CASE("declared moments") {
  GaussianOracleConfig c;
  c.schedule = ConstantSigma{0.5};
  OracleMoments m = c.moments(3, 0.0);
  CHECK(m.M1 == doctest::Approx(0.75));
  CHECK(m.M2 == 1.0);
  c.schedule = GeometricDecaySigma{2.0, 0.5};
  m = c.moments(2, 0.0);
  REQUIRE(m.M3);
  CHECK(*m.M3 == doctest::Approx(4.0));
  CHECK(*m.zeta == doctest::Approx(0.5));
  m.validate();

  // empirical E||g||^2 against M1 + M2 ||grad f||^2 for constant noise
  c.schedule = ConstantSigma{0.5};
  Rng rng = make_rng(3);
  const Vector grad{1.0, -2.0, 0.5};
  double acc = 0.0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    const Vector g = gaussian_sample(grad, c, 1, 0.0, rng);
    acc += g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
  }
  CHECK(acc / n == doctest::Approx(0.75 + 5.25).epsilon(0.01));
}

TEST_CASE("two-point oracle") {
  const TwoPointOracle o;
  CHECK(o.mean() == doctest::Approx(1.0));
  Rng rng = make_rng(99);
  const int n = 1'000'000;
  double s = 0.0;
  int neg = 0;
  for (int i = 0; i < n; ++i) {
    const double g = two_point_sample(o, rng);
    s += g;
    neg += g < 0.0;
  }
  CHECK(std::abs(s / n - 1.0) <= 0.02);
  CHECK(std::abs(static_cast<double>(neg) / n - 2.0 / 3.0) <= 0.01);

  TwoPointOracle sure;
  sure.prob_pos = 1.0;
  for (int i = 0; i < 1000; ++i) CHECK(two_point_sample(sure, rng) == sure.value_pos);

  TwoPointOracle bad;
  bad.prob_pos = 1.5;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("full-pass mini-batch equals the true gradient") {
  const auto p = small_quadratic_sum();
  Rng rng = make_rng(1);
  const Vector x{0.3, -0.7};
  const Vector g = finite_sum_minibatch(p, x, 4, rng, BatchSampling::kFullPass);
  const Vector t = p.gradient(x);
  CHECK(g[0] == doctest::Approx(t[0]));
  CHECK(g[1] == doctest::Approx(t[1]));
}

TEST_CASE("identical components give the exact gradient for any batch") {
  const QuadraticSumProblem p(Vector{2.0}, {Vector{1.5}, Vector{1.5}});
  Rng rng = make_rng(4);
  const Vector x{0.2};
  const Vector t = p.gradient(x);
  for (int i = 0; i < 50; ++i) {
    CHECK(finite_sum_minibatch(p, x, 1, rng)[0] == doctest::Approx(t[0]));
  }
}

TEST_CASE("with-replacement mini-batch is unbiased") {
  const auto p = small_quadratic_sum();
  const Vector x{0.3, -0.7};
  const Vector t = p.gradient(x);
  Rng rng = make_rng(8);
  const int n = 100'000;
  double s[2] = {0, 0}, s2[2] = {0, 0};
  for (int i = 0; i < n; ++i) {
    const Vector g = finite_sum_minibatch(p, x, 1, rng);
    for (int j = 0; j < 2; ++j) {
      s[j] += g[j];
      s2[j] += g[j] * g[j];
    }
  }
  for (int j = 0; j < 2; ++j) {
    const double mean = s[j] / n;
    const double se = std::sqrt((s2[j] / n - mean * mean) / n);
    CHECK(std::abs(mean - t[j]) <= 3.0 * se);
  }
}

TEST_CASE("draw_gradient contract") {
  const auto p = small_quadratic_sum();
  Rng rng = make_rng(2);
  Vector out(2);
  CHECK(draw_gradient(MiniBatchOracle{3}, p, Vector{0.0, 0.0}, 1, 1.0, rng, out) == 3);
  CHECK_THROWS_AS(draw_gradient(MiniBatchOracle{5}, p, Vector{0.0, 0.0}, 1, 1.0, rng, out),
                  UsageError);
  Vector wrong(3);
  CHECK_THROWS_AS(draw_gradient(ExactOracle{}, p, Vector{0.0, 0.0}, 1, 1.0, rng, wrong), UsageError);
  const QuadraticProblem q(Vector{1.0, 1.0}, Vector{0.0, 0.0});
  CHECK_THROWS_AS(draw_gradient(MiniBatchOracle{1}, q, Vector{0.0, 0.0}, 1, 1.0, rng, out),
                  UsageError);
  CHECK(draw_gradient(ExactOracle{}, q, Vector{1.0, 2.0}, 1, 1.0, rng, out) == 0);
  CHECK(out == Vector{1.0, 2.0});
}

TEST_CASE("seeded streams are reproducible") {
  GaussianOracleConfig c;
  c.schedule = ConstantSigma{1.0};
  Rng a = make_rng(42), b = make_rng(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(gaussian_sample(Vector{0.0, 1.0}, c, 1, 1.0, a) == gaussian_sample(Vector{0.0, 1.0}, c, 1, 1.0, b));
  }
}

TEST_CASE("describe") {
  CHECK(describe(ExactOracle{}) == "exact");
  CHECK(describe(MiniBatchOracle{10}) == "minibatch(b=10,replacement)");
  GaussianOracleConfig c;
  c.schedule = ConstantSigma{0.5};
  CHECK(describe(c) == "gaussian(sigma=0.5)");
}
