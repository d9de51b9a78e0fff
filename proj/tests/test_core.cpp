#include <cmath>
#include <random>

#include "doctest.h"
#include "support/oracles.hpp"
#include "trish/core.hpp"
#include "trish/errors.hpp"

using namespace trish;

TEST_CASE("params reject invalid gamma pairs") {
  CHECK_THROWS_AS(TrishParams(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(TrishParams(0.5, 1.0), DomainError);
  CHECK_THROWS_AS(TrishParams(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(TrishParams(INFINITY, 1.0), DomainError);
  CHECK_THROWS_AS(TrishParams(NAN, 1.0), DomainError);
  const TrishParams p(2.0, 0.5);
  CHECK(p.lower_threshold() == doctest::Approx(0.5));
  CHECK(p.upper_threshold() == doctest::Approx(2.0));
}

TEST_CASE("stepsize schedules") {
  const auto fixed = StepsizeSchedule::fixed(0.3);
  CHECK(fixed(1) == 0.3);
  CHECK(fixed(1000) == 0.3);
  CHECK_THROWS_AS(fixed(0), DomainError);
  CHECK_THROWS_AS(StepsizeSchedule::fixed(0.0), DomainError);
  CHECK_THROWS_AS(StepsizeSchedule::fixed(-1.0), DomainError);

  const auto h = StepsizeSchedule::harmonic(2.0, 3.0);
  CHECK(h(1) == doctest::Approx(0.5));
  CHECK(h(7) == doctest::Approx(0.2));
  for (std::int64_t k = 1; k < 200; ++k) CHECK(h(k + 1) < h(k));
  CHECK_THROWS_AS(StepsizeSchedule::harmonic(0.0, 1.0), DomainError);

  const auto bad = StepsizeSchedule::custom([](std::int64_t k) { return k < 3 ? 1.0 : -1.0; });
  CHECK(bad(2) == 1.0);
  CHECK_THROWS_AS(bad(3), DomainError);
}

TEST_CASE("case classification") {
  const TrishParams p(2.0, 0.5);
  CHECK(classify_case(0.0, p) == StepCase::kCase1);
  CHECK(classify_case(1.0, p) == StepCase::kCase2);
  CHECK(classify_case(5.0, p) == StepCase::kCase3);
  CHECK(classify_case(0.5, p) == StepCase::kCase2);  // closed interval
  CHECK(classify_case(2.0, p) == StepCase::kCase2);
  CHECK(classify_case(std::nextafter(0.5, 0.0), p) == StepCase::kCase1);
  CHECK(classify_case(std::nextafter(2.0, 3.0), p) == StepCase::kCase3);
  CHECK_THROWS_AS(classify_case(-1.0, p), DomainError);
  CHECK_THROWS_AS(classify_case(NAN, p), DomainError);
}

TEST_CASE("trish step hand-evaluated cases") {
  const TrishParams p(2.0, 0.5);
  SUBCASE("zero gradient does not move") {
    const auto r = trish_step(Vector{0.0, 0.0}, Vector{0.0, 0.0}, 0.7, p);
    CHECK(r.x_next == Vector{0.0, 0.0});
    CHECK(r.step_case == StepCase::kCase1);
  }
  SUBCASE("large gradient is scaled by gamma2") {
    const auto r = trish_step(Vector{1.0, 1.0}, Vector{3.0, 4.0}, 0.1, p);
    CHECK(r.step_case == StepCase::kCase3);
    CHECK(r.x_next[0] == doctest::Approx(0.85));
    CHECK(r.x_next[1] == doctest::Approx(0.8));
  }
  SUBCASE("unit gradient takes a normalized step") {
    const auto r = trish_step(Vector{0.0}, Vector{1.0}, 0.1, p);
    CHECK(r.step_case == StepCase::kCase2);
    CHECK(r.x_next[0] == doctest::Approx(-0.1));
  }
  SUBCASE("small gradient is scaled by gamma1") {
    const auto r = trish_step(Vector{1.0}, Vector{0.25}, 0.1, p);
    CHECK(r.step_case == StepCase::kCase1);
    CHECK(r.x_next[0] == doctest::Approx(1.0 - 2.0 * 0.1 * 0.25));
  }
}

TEST_CASE("trish step input checks") {
  const TrishParams p(2.0, 0.5);
  CHECK_THROWS_AS(trish_step(Vector{0.0}, Vector{1.0, 2.0}, 0.1, p), UsageError);
  CHECK_THROWS_AS(trish_step(Vector{0.0}, Vector{NAN}, 0.1, p), DataError);
  CHECK_THROWS_AS(trish_step(Vector{0.0}, Vector{INFINITY}, 0.1, p), DataError);
  CHECK_THROWS_AS(trish_step(Vector{0.0}, Vector{1.0}, 0.0, p), DomainError);
  CHECK_THROWS_AS(sg_step(Vector{0.0}, Vector{1.0}, -1.0), DomainError);
}

TEST_CASE("in-place update matches the functional step") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  const TrishParams p(3.0, 0.7);
  for (int t = 0; t < 200; ++t) {
    Vector x{n(rng), n(rng), n(rng)}, g{n(rng), n(rng), n(rng)};
    const auto r = trish_step(x, g, 0.2, p);
    const StepCase c = trish_update(x, g, 0.2, p);
    CHECK(c == r.step_case);
    CHECK(x == r.x_next);
  }
}

TEST_CASE("sg step hand-evaluated cases") {
  CHECK(sg_step(Vector{0.0, 0.0}, Vector{0.0, 0.0}, 1.0) == Vector{0.0, 0.0});
  CHECK(sg_step(Vector{1.0}, Vector{2.0}, 0.5)[0] == doctest::Approx(0.0));
  const Vector x = sg_step(Vector{1.0, 1.0}, Vector{1.0, -1.0}, 0.1);
  CHECK(x[0] == doctest::Approx(0.9));
  CHECK(x[1] == doctest::Approx(1.1));
}

TEST_CASE("step norm agrees with the case table and is continuous") {
  const TrishParams p(2.0, 0.5);
  CHECK(step_norm(0.5, 0.3, p) == doctest::Approx(0.3));
  CHECK(step_norm(2.0, 0.3, p) == doctest::Approx(0.3));
  CHECK(step_norm(4.0, 1.0, p) == doctest::Approx(2.0));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    const double g2 = 0.1 + 3.0 * u(rng);
    const double g1 = g2 * (1.01 + 5.0 * u(rng));
    const double alpha = 0.01 + u(rng);
    const TrishParams q(g1, g2);
    const double gnorm = 10.0 * u(rng) / g2;
    CHECK(step_norm(gnorm, alpha, q) ==
          doctest::Approx(testsupport::reference_step_length(gnorm, alpha, g1, g2)));
    // actual displacement length equals step_norm
    const Vector g{gnorm, 0.0};
    const auto r = trish_step(Vector{0.0, 0.0}, g, alpha, q);
    CHECK(euclidean_norm(r.x_next) == doctest::Approx(step_norm(gnorm, alpha, q)));
  }
}

TEST_CASE("iterate state tallies") {
  IterateState s;
  s.x = {1.0};
  s.record(StepCase::kCase2);
  s.record(StepCase::kCase2);
  s.record(StepCase::kCase3);
  CHECK(s.k == 4);
  CHECK(s.case_counts[0] + s.case_counts[1] + s.case_counts[2] == s.k - 1);
  CHECK(s.case_counts[1] == 2);
}
