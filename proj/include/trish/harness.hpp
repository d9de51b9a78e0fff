#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trish/core.hpp"
#include "trish/oracles.hpp"
#include "trish/problems.hpp"
#include "trish/theory.hpp"

namespace trish {

enum class Method { kTrish, kSg };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view s);

struct ExperimentConfig {
  Method method = Method::kTrish;
  std::string problem_id = "logistic";
  OracleSpec oracle = MiniBatchOracle{10};
  std::optional<TrishParams> params;  // required for trish
  StepsizeSchedule schedule = StepsizeSchedule::fixed(1.0);
  std::int64_t epochs = 1;
  std::optional<std::int64_t> max_iterations;  // overrides the epoch budget
  int n_seeds = 1;
  std::vector<double> checkpoint_fractions{1.0};
  std::uint64_t base_seed = 0;
  std::optional<Vector> x1;  // defaults to zeros
  bool record_wall_time = true;

  void validate() const;
  /// Mini-batch size, or 0 for oracles that are not mini-batch based.
  std::size_t batch_size() const noexcept;
  /// Stable 64-bit hash of everything except base_seed and wall-time flag.
  std::string config_hash() const;
};

struct Checkpoint {
  double fraction = 0.0;
  std::int64_t iteration = 0;  // steps taken so far
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
  std::array<std::int64_t, 3> case_counts{0, 0, 0};
  double wall_ms = 0.0;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::vector<Checkpoint> checkpoints;
  bool divergent = false;
  std::int64_t component_evaluations = 0;

  const Checkpoint& final_checkpoint() const { return checkpoints.back(); }
};

/// Equality of everything except wall-clock timings.
bool same_trajectory(const RunRecord& a, const RunRecord& b);

/// Iterations per epoch, ceil(N / batch), for mini-batch oracles on
/// finite-sum problems.
std::int64_t iterations_per_epoch(const Problem& problem, std::size_t batch_size);
std::int64_t total_iterations(const ExperimentConfig& config, const Problem& problem);

/// n_seeds runs with seeds base_seed + i from the same x1. Runs execute on a
/// worker pool; the result order is by seed.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const Problem& problem);

struct AggregateMetrics {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
  int runs = 0;
  int divergent = 0;
};

/// Arithmetic means of final metrics over non-divergent runs, in seed order.
AggregateMetrics aggregate_final(const std::vector<RunRecord>& records);

struct TuneGrid {
  std::vector<std::size_t> batch_sizes;
  std::vector<double> alphas;
  std::vector<double> gamma1s;             // ignored for sg
  std::vector<double> gamma2_ratios{0.4};  // gamma2 = ratio * gamma1
};

struct GridPoint {
  std::size_t batch = 0;
  double alpha = 0.0;
  double gamma1 = 0.0;  // 0 for sg
  double gamma2 = 0.0;

  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
};

struct GridRow {
  GridPoint point;
  AggregateMetrics metrics;
  bool excluded = false;  // every run diverged
};

struct TuneResult {
  GridPoint best;
  ExperimentConfig best_config;
  AggregateMetrics best_metrics;
  std::vector<GridRow> table;
};

/// Exhaustive search. Picks the highest mean final test accuracy (training
/// accuracy when there is no test set, negative loss when accuracy is
/// undefined); ties go to lower mean test loss, then to the smaller point.
TuneResult tune_grid(const ExperimentConfig& base, const TuneGrid& grid, const Problem& problem);

struct VerifySetup {
  int theorem = 1;
  std::shared_ptr<const Problem> problem;
  GaussianOracleConfig oracle;
  TrishParams params{2.0, 1.9};
  double alpha = 0.0;  // theorems 1, 3, 4
  double a = 0.0;      // theorems 2, 5
  double b = 0.0;
  int n_seeds = 2000;
  std::int64_t K = 200;
  std::uint64_t base_seed = 1;
  Vector x1;
};

struct VerifyRow {
  std::int64_t k = 0;
  double empirical = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;
  bool violated = false;
};

struct VerifyReport {
  int theorem = 0;
  TheoremInputs inputs;
  TheoremConstants constants;
  std::vector<VerifyRow> rows;
  std::size_t violations = 0;
  /// Theorem 1: limit of the bound, theta2 / (2 c alpha theta1).
  double limit = 0.0;
  /// Theorem 5: (1/A_K) sum alpha_k ||grad f(x_k)||^2 per K, and its SE.
  std::vector<double> weighted_average;
  std::vector<double> weighted_average_se;
};

/// Reference configurations with known constants for each theorem.
VerifySetup default_verify_setup(int theorem);

/// Collects L, c, f*, moment and h-constants from the problem and oracle.
/// Throws HypothesisError when the oracle does not match the theorem's
/// noise regime or the problem lacks a required constant.
TheoremInputs theorem_inputs(const VerifySetup& setup);

/// Runs n_seeds trajectories and compares the empirical mean of the bounded
/// quantity against the bound at each k, allowing 3 standard errors.
/// Hypotheses are checked before any run.
VerifyReport verify_theorem(const VerifySetup& setup);

/// Least-squares slope of log(y) against log(k) over rows with k in [lo, hi].
double loglog_slope(const std::vector<VerifyRow>& rows, std::int64_t lo, std::int64_t hi);

inline constexpr std::string_view kRunCsvHeader =
    "seed,checkpoint_fraction,iteration,train_loss,train_acc,test_loss,test_acc,case1,case2,"
    "case3,wall_ms";
inline constexpr std::string_view kVerifyCsvHeader = "k,empirical_gap,standard_error,bound,violated";

std::string format_csv(const std::vector<RunRecord>& records);
std::string format_csv(const VerifyReport& report);
/// Throws IoError naming the path on failure.
void emit_csv(const std::vector<RunRecord>& records, const std::string& path);
void emit_csv(const VerifyReport& report, const std::string& path);

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` file; '#' starts a comment. Throws IoError/UsageError.
KeyValues parse_config_text(const std::string& text);
KeyValues read_config_file(const std::string& path);

/// Builds an experiment config from documented keys. Unknown keys raise
/// UsageError.
ExperimentConfig build_config(const KeyValues& kv);
TuneGrid build_grid(const KeyValues& kv);
/// Constructs the synthetic problem named by `problem` (quadratic,
/// nonconvex_pl); logistic problems are loaded from `dataset`.
std::shared_ptr<const Problem> build_problem(const KeyValues& kv);

}  // namespace trish
