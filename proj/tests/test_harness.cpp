#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "trish/errors.hpp"
#include "trish/harness.hpp"

using namespace trish;

namespace {

ExperimentConfig quadratic_config(Method m) {
  ExperimentConfig c;
  c.method = m;
  c.problem_id = "quadratic";
  c.oracle = ExactOracle{};
  c.schedule = StepsizeSchedule::fixed(1.0);
  c.max_iterations = 1;
  c.n_seeds = 1;
  c.x1 = Vector{1.0};
  c.record_wall_time = false;
  return c;
}

QuadraticSumProblem scattered_sum(std::size_t n) {
  std::vector<Vector> centers;
  for (std::size_t i = 0; i < n; ++i) centers.push_back(Vector{std::sin(1.0 + i) * 3.0});
  return QuadraticSumProblem(Vector{1.0}, centers);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("single exact steps on the 1-D quadratic") {
  const QuadraticProblem q(Vector{1.0}, Vector{0.0});
  const auto sg = run_experiment(quadratic_config(Method::kSg), q);
  REQUIRE(sg.size() == 1);
  CHECK(sg[0].final_checkpoint().train_loss == 0.0);  // x2 = 0

  ExperimentConfig t = quadratic_config(Method::kTrish);
  t.params = TrishParams(2.0, 0.5);
  t.schedule = StepsizeSchedule::fixed(0.1);
  const auto tr = run_experiment(t, q);
  const Checkpoint& cp = tr[0].final_checkpoint();
  CHECK(cp.train_loss == doctest::Approx(0.5 * 0.9 * 0.9));  // x2 = 0.9
  CHECK(cp.case_counts == std::array<std::int64_t, 3>{0, 1, 0});
}

TEST_CASE("runs are deterministic and seeds are isolated") {
  const auto p = scattered_sum(40);
  ExperimentConfig c;
  c.method = Method::kTrish;
  c.problem_id = "quadratic_sum";
  c.params = TrishParams(4.0, 1.6);
  c.schedule = StepsizeSchedule::fixed(0.05);
  c.oracle = MiniBatchOracle{3};
  c.epochs = 2;
  c.n_seeds = 4;
  c.checkpoint_fractions = {0.25, 0.5, 1.0};
  c.x1 = Vector{5.0};
  const auto a = run_experiment(c, p);
  const auto b = run_experiment(c, p);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == i);
    CHECK(same_trajectory(a[i], b[i]));
  }
  CHECK_FALSE(same_trajectory(a[0], a[1]));
  c.record_wall_time = false;
  CHECK(format_csv(run_experiment(c, p)) == format_csv(run_experiment(c, p)));

  const std::string h = c.config_hash();
  c.base_seed = 1234;
  CHECK(c.config_hash() == h);
  const auto shifted = run_experiment(c, p);
  CHECK_FALSE(same_trajectory(shifted[0], a[0]));
  c.schedule = StepsizeSchedule::fixed(0.06);
  CHECK(c.config_hash() != h);
}

TEST_CASE("checkpoints and budget accounting") {
  const auto p = scattered_sum(23);
  ExperimentConfig c;
  c.method = Method::kSg;
  c.schedule = StepsizeSchedule::fixed(0.1);
  c.oracle = MiniBatchOracle{5};
  c.epochs = 1;
  c.checkpoint_fractions = {0.2, 0.6, 1.0};
  c.x1 = Vector{0.0};
  CHECK(iterations_per_epoch(p, 5) == 5);
  const auto r = run_experiment(c, p);
  const auto& cps = r[0].checkpoints;
  REQUIRE(cps.size() == 3);
  CHECK(cps[0].iteration == 1);
  CHECK(cps[1].iteration == 3);
  CHECK(cps[2].iteration == 5);
  CHECK(r[0].component_evaluations >= 23);
  CHECK(r[0].component_evaluations < 23 + 5);

  ExperimentConfig t = c;
  t.method = Method::kTrish;
  t.params = TrishParams(3.0, 1.2);
  t.epochs = 3;
  const auto rt = run_experiment(t, p);
  std::array<std::int64_t, 3> prev{0, 0, 0};
  for (const Checkpoint& cp : rt[0].checkpoints) {
    for (int j = 0; j < 3; ++j) CHECK(cp.case_counts[j] >= prev[j]);
    CHECK(cp.case_counts[0] + cp.case_counts[1] + cp.case_counts[2] == cp.iteration);
    prev = cp.case_counts;
  }
}

TEST_CASE("config validation") {
  ExperimentConfig c = quadratic_config(Method::kTrish);
  CHECK_THROWS_AS(c.validate(), UsageError);  // no params
  c.params = TrishParams(2.0, 1.0);
  c.checkpoint_fractions = {0.5, 0.5};
  CHECK_THROWS_AS(c.validate(), UsageError);
  c.checkpoint_fractions = {0.5, 1.2};
  CHECK_THROWS_AS(c.validate(), UsageError);
  c.checkpoint_fractions = {1.0};
  c.n_seeds = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  const QuadraticProblem q(Vector{1.0}, Vector{0.0});
  c.n_seeds = 1;
  c.max_iterations.reset();
  CHECK_THROWS_AS(run_experiment(c, q), UsageError);  // epochs need a finite sum
}

TEST_CASE("divergent runs are flagged and excluded") {
  const auto p = scattered_sum(10);
  ExperimentConfig c;
  c.method = Method::kSg;
  c.oracle = MiniBatchOracle{2};
  c.max_iterations = 400;
  c.n_seeds = 3;
  c.x1 = Vector{1.0};
  c.record_wall_time = false;
  TuneGrid grid;
  grid.batch_sizes = {2};
  grid.alphas = {0.1, 50.0};
  const TuneResult r = tune_grid(c, grid, p);
  REQUIRE(r.table.size() == 2);
  CHECK_FALSE(r.table[0].excluded);
  CHECK(r.table[1].excluded);
  CHECK(r.table[1].metrics.divergent == 3);
  CHECK(r.best.alpha == 0.1);
}

TEST_CASE("single-point grid returns that point") {
  const auto p = scattered_sum(10);
  ExperimentConfig c;
  c.method = Method::kTrish;
  c.oracle = MiniBatchOracle{2};
  c.epochs = 1;
  c.x1 = Vector{1.0};
  TuneGrid grid;
  grid.batch_sizes = {2};
  grid.alphas = {0.3};
  grid.gamma1s = {5.0};
  const TuneResult r = tune_grid(c, grid, p);
  CHECK(r.table.size() == 1);
  CHECK(r.best.alpha == 0.3);
  CHECK(r.best.gamma1 == 5.0);
  CHECK(r.best.gamma2 == doctest::Approx(2.0));
  CHECK(r.best_config.params->gamma2() == doctest::Approx(2.0));
  CHECK_THROWS_AS(tune_grid(c, TuneGrid{}, p), UsageError);
}

TEST_CASE("aggregate means over seeds") {
  RunRecord a, b, d;
  a.checkpoints.push_back({1.0, 1, 1.0, 0.5, 2.0, 0.25, {}, 0.0});
  b.checkpoints.push_back({1.0, 1, 3.0, 1.0, 4.0, 0.75, {}, 0.0});
  d.divergent = true;
  const auto m = aggregate_final({a, b, d});
  CHECK(m.runs == 2);
  CHECK(m.divergent == 1);
  CHECK(m.train_loss == 2.0);
  CHECK(m.test_acc == 0.5);
}

TEST_CASE("csv output") {
  CHECK(format_csv(std::vector<RunRecord>{}) == std::string(kRunCsvHeader) + "\n");
  RunRecord r;
  r.seed = 7;
  r.checkpoints.push_back({0.5, 10, 0.123456789012, 0.9, NAN, NAN, {1, 2, 3}, 1.5});
  r.checkpoints.push_back({1.0, 20, 0.1, 0.95, 0.2, 0.9, {2, 4, 6}, 3.0});
  r.checkpoints.push_back({1.0, 20, 0.1, 0.95, 0.2, 0.9, {2, 4, 6}, 3.0});
  const std::string csv = format_csv({r});
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[1] == "7,0.5,10,0.123456789,0.9,nan,nan,1,2,3,1.5");

  const auto path = (std::filesystem::temp_directory_path() / "trish_harness.csv").string();
  emit_csv({r}, path);
  const std::string first = slurp(path);
  emit_csv({r}, path);
  CHECK(slurp(path) == first);
  CHECK(first == csv);
  std::filesystem::remove(path);
  try {
    emit_csv({r}, "/nonexistent-dir/x.csv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/x.csv") != std::string::npos);
  }
}

TEST_CASE("verification refuses bad hypotheses before running") {
  VerifySetup s = default_verify_setup(1);
  s.alpha *= 2.0;
  try {
    verify_theorem(s);
    FAIL("expected HypothesisError");
  } catch (const HypothesisError& e) {
    CHECK(e.condition() == "stepsize-cap");
  }
  VerifySetup w = default_verify_setup(2);
  w.oracle.schedule = ConstantSigma{0.1};
  CHECK_THROWS_AS(verify_theorem(w), HypothesisError);
  VerifySetup nc = default_verify_setup(1);
  nc.problem = std::make_shared<QuadraticSumProblem>(scattered_sum(3));
  nc.x1 = Vector{1.0};
  CHECK_NOTHROW(theorem_inputs(nc));
}

TEST_CASE("small verification runs") {
  for (int t = 1; t <= 5; ++t) {
    CAPTURE(t);
    VerifySetup s = default_verify_setup(t);
    s.n_seeds = 200;
    s.K = 40;
    const VerifyReport r = verify_theorem(s);
    CHECK(r.rows.size() == 40);
    CHECK(r.violations == 0);
    CHECK(r.rows.front().k == 1);
  }
  VerifySetup s = default_verify_setup(3);
  s.n_seeds = 100;
  s.K = 20;
  CHECK(format_csv(verify_theorem(s)) == format_csv(verify_theorem(s)));
}

TEST_CASE("noiseless fixed-stepsize trajectory stays under the bound") {
  const QuadraticProblem q(Vector{1.0}, Vector{0.0});
  TheoremInputs in;
  in.params = TrishParams(2.0, 1.9);
  in.L = in.c = in.M2 = 1.0;
  in.M1 = 1e-16;
  in.h = gaussian_h_constants(FixedNoise{1e-8});
  Vector x{1.0};
  in.gap1 = q.value(x);
  in.alpha = theorem_stepsize_cap(1, in);
  const auto k = derive_theorem_constants(1, in);
  for (std::int64_t it = 1; it <= 200; ++it) {
    trish_update(x, q.gradient(x), in.alpha, in.params);
    CHECK(q.value(x) <= theorem_bound(1, k, it) + 1e-15);
  }
}

TEST_CASE("log-log slope") {
  std::vector<VerifyRow> rows;
  for (int k = 1; k <= 100; ++k) rows.push_back({k, 3.0 / (k * k), 0.0, 0.0, false});
  CHECK(loglog_slope(rows, 10, 100) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(loglog_slope(rows, 200, 300), UsageError);
}

TEST_CASE("config files") {
  const KeyValues kv = parse_config_text(
      "# experiment\nmethod = trish\n gamma1=15 \nalpha = 5 # tuned\nbatch=10\nseeds = 5\n");
  CHECK(kv.at("gamma1") == "15");
  CHECK(kv.at("alpha") == "5");
  const ExperimentConfig c = build_config(kv);
  CHECK(c.params->gamma2() == doctest::Approx(6.0));
  CHECK(c.batch_size() == 10);
  CHECK(c.n_seeds == 5);
  CHECK(c.schedule(3) == 5.0);
  CHECK_THROWS_AS(parse_config_text("colour = red\n"), UsageError);
  CHECK_THROWS_AS(parse_config_text("alpha 5\n"), UsageError);
  CHECK_THROWS_AS(build_config({{"method", "adam"}}), UsageError);
  CHECK_THROWS_AS(build_config({{"method", "trish"}}), UsageError);  // gamma1 missing
  CHECK_THROWS_AS(build_config({{"method", "sg"}, {"alpha", "x"}}), UsageError);
  CHECK_THROWS_AS(build_problem({{"problem", "logistic"}}), UsageError);
  CHECK_THROWS_AS(build_problem({{"problem", "logistic"}, {"dataset", "/nonexistent.svm"}}), IoError);
  const auto q = build_problem({{"problem", "quadratic"}, {"dimension", "3"}});
  CHECK(q->dimension() == 3);

  const TuneGrid g = build_grid({{"grid_alpha", "1, 10,100"}});
  CHECK(g.alphas == std::vector<double>{1.0, 10.0, 100.0});
  CHECK(g.batch_sizes == std::vector<std::size_t>{5, 10, 20});
}
