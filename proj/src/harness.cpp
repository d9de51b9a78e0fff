#include "trish/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "trish/errors.hpp"
#include "trish/ingest.hpp"

namespace trish {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Runs fn(i) for i in [0, n) on a small thread pool. The first exception
/// thrown by any task is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(n, hw);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

std::string fmt9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct Metrics {
  double train_loss = kNaN, train_acc = kNaN, test_loss = kNaN, test_acc = kNaN;
};

Metrics evaluate(const Problem& problem, std::span<const double> x) {
  Metrics m;
  if (const auto* lp = dynamic_cast<const LogisticProblem*>(&problem)) {
    m.train_loss = logistic_loss(x, lp->train());
    m.train_acc = classification_accuracy(x, lp->train());
    if (lp->test() && lp->test()->size() > 0) {
      m.test_loss = logistic_loss(x, *lp->test());
      m.test_acc = classification_accuracy(x, *lp->test());
    }
  } else {
    m.train_loss = problem.value(x);
  }
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

bool same_double(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

RunRecord run_single(const ExperimentConfig& config, const Problem& problem, std::uint64_t seed,
                     std::int64_t total, const std::vector<std::int64_t>& cp_iters) {
  using Clock = std::chrono::steady_clock;
  RunRecord rec;
  rec.seed = seed;
  Rng rng = make_rng(seed);
  Vector x = config.x1 ? *config.x1 : Vector(problem.dimension(), 0.0);
  Vector g(problem.dimension());
  std::array<std::int64_t, 3> counts{0, 0, 0};
  const auto start = Clock::now();
  std::size_t next_cp = 0;

  for (std::int64_t k = 1; k <= total && !rec.divergent; ++k) {
    const double alpha = config.schedule(k);
    rec.component_evaluations += static_cast<std::int64_t>(
        draw_gradient(config.oracle, problem, x, k, alpha, rng, g));
    try {
      if (config.method == Method::kTrish) {
        const StepCase c = trish_update(x, g, alpha, *config.params);
        ++counts[static_cast<int>(c) - 1];
      } else {
        sg_update(x, g, alpha);
      }
    } catch (const DataError&) {
      rec.divergent = true;
      break;
    }
    while (next_cp < cp_iters.size() && cp_iters[next_cp] == k) {
      Checkpoint cp;
      cp.fraction = config.checkpoint_fractions[next_cp];
      cp.iteration = k;
      cp.case_counts = counts;
      if (all_finite(x)) {
        const Metrics m = evaluate(problem, x);
        cp.train_loss = m.train_loss;
        cp.train_acc = m.train_acc;
        cp.test_loss = m.test_loss;
        cp.test_acc = m.test_acc;
      } else {
        cp.train_loss = kNaN;
      }
      if (!std::isfinite(cp.train_loss)) rec.divergent = true;
      if (config.record_wall_time) {
        cp.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      }
      rec.checkpoints.push_back(cp);
      ++next_cp;
    }
  }
  return rec;
}

}  // namespace

std::string_view to_string(Method m) noexcept { return m == Method::kTrish ? "trish" : "sg"; }

Method parse_method(std::string_view s) {
  if (s == "trish") return Method::kTrish;
  if (s == "sg") return Method::kSg;
  throw UsageError("unknown method '" + std::string(s) + "' (expected trish or sg)");
}

void ExperimentConfig::validate() const {
  if (n_seeds < 1) throw UsageError("n_seeds must be at least 1");
  if (epochs < 1 && !max_iterations) throw UsageError("epochs must be at least 1");
  if (max_iterations && *max_iterations < 1) throw UsageError("max_iterations must be at least 1");
  if (checkpoint_fractions.empty()) throw UsageError("at least one checkpoint fraction is required");
  double prev = 0.0;
  for (double f : checkpoint_fractions) {
    if (!(f > prev) || f > 1.0) {
      throw UsageError("checkpoint fractions must be strictly increasing within (0, 1]");
    }
    prev = f;
  }
  if (method == Method::kTrish && !params) throw UsageError("trish runs need gamma1 and gamma2");
  if (const auto* gc = std::get_if<GaussianOracleConfig>(&oracle)) gc->validate();
  if (const auto* mb = std::get_if<MiniBatchOracle>(&oracle)) {
    if (mb->batch_size == 0) throw UsageError("batch size must be positive");
  }
}

std::size_t ExperimentConfig::batch_size() const noexcept {
  if (const auto* mb = std::get_if<MiniBatchOracle>(&oracle)) return mb->batch_size;
  return 0;
}

std::string ExperimentConfig::config_hash() const {
  std::ostringstream os;
  os.precision(17);
  os << "method=" << to_string(method) << ";problem=" << problem_id << ";oracle=" << describe(oracle);
  if (params) os << ";gamma1=" << params->gamma1() << ";gamma2=" << params->gamma2();
  os << ";schedule=" << static_cast<int>(schedule.kind()) << "," << schedule.a() << ","
     << schedule.b();
  os << ";epochs=" << epochs << ";max_iterations=" << (max_iterations ? *max_iterations : -1)
     << ";seeds=" << n_seeds << ";checkpoints=";
  for (double f : checkpoint_fractions) os << f << ",";
  if (x1) {
    os << ";x1=";
    for (double v : *x1) os << v << ",";
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

bool same_trajectory(const RunRecord& a, const RunRecord& b) {
  if (a.seed != b.seed || a.divergent != b.divergent ||
      a.component_evaluations != b.component_evaluations ||
      a.checkpoints.size() != b.checkpoints.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    const Checkpoint& p = a.checkpoints[i];
    const Checkpoint& q = b.checkpoints[i];
    if (p.fraction != q.fraction || p.iteration != q.iteration || p.case_counts != q.case_counts ||
        !same_double(p.train_loss, q.train_loss) || !same_double(p.train_acc, q.train_acc) ||
        !same_double(p.test_loss, q.test_loss) || !same_double(p.test_acc, q.test_acc)) {
      return false;
    }
  }
  return true;
}

std::int64_t iterations_per_epoch(const Problem& problem, std::size_t batch_size) {
  const auto* fs = dynamic_cast<const FiniteSumProblem*>(&problem);
  if (fs == nullptr || batch_size == 0) {
    throw UsageError("epochs are only defined for mini-batch oracles on finite-sum problems");
  }
  const std::size_t n = fs->component_count();
  return static_cast<std::int64_t>((n + batch_size - 1) / batch_size);
}

std::int64_t total_iterations(const ExperimentConfig& config, const Problem& problem) {
  if (config.max_iterations) return *config.max_iterations;
  return config.epochs * iterations_per_epoch(problem, config.batch_size());
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const Problem& problem) {
  config.validate();
  if (config.x1 && config.x1->size() != problem.dimension()) {
    throw UsageError("x1 has the wrong dimension");
  }
  const std::int64_t total = total_iterations(config, problem);
  std::vector<std::int64_t> cp_iters;
  for (double f : config.checkpoint_fractions) {
    cp_iters.push_back(std::max<std::int64_t>(1, std::llround(f * static_cast<double>(total))));
  }
  std::vector<RunRecord> records(static_cast<std::size_t>(config.n_seeds));
  parallel_for(records.size(), [&](std::size_t i) {
    records[i] = run_single(config, problem, config.base_seed + i, total, cp_iters);
  });
  return records;
}

AggregateMetrics aggregate_final(const std::vector<RunRecord>& records) {
  AggregateMetrics m;
  for (const RunRecord& r : records) {
    if (r.divergent || r.checkpoints.empty()) {
      ++m.divergent;
      continue;
    }
    const Checkpoint& c = r.final_checkpoint();
    m.train_loss += c.train_loss;
    m.train_acc += c.train_acc;
    m.test_loss += c.test_loss;
    m.test_acc += c.test_acc;
    ++m.runs;
  }
  if (m.runs > 0) {
    m.train_loss /= m.runs;
    m.train_acc /= m.runs;
    m.test_loss /= m.runs;
    m.test_acc /= m.runs;
  } else {
    m.train_loss = m.train_acc = m.test_loss = m.test_acc = kNaN;
  }
  return m;
}

TuneResult tune_grid(const ExperimentConfig& base, const TuneGrid& grid, const Problem& problem) {
  if (grid.batch_sizes.empty() || grid.alphas.empty()) {
    throw UsageError("grid needs at least one batch size and one stepsize");
  }
  std::vector<GridPoint> points;
  if (base.method == Method::kTrish) {
    if (grid.gamma1s.empty() || grid.gamma2_ratios.empty()) {
      throw UsageError("trish grid needs gamma1 values and gamma2 ratios");
    }
    for (std::size_t b : grid.batch_sizes)
      for (double a : grid.alphas)
        for (double g1 : grid.gamma1s)
          for (double r : grid.gamma2_ratios) points.push_back({b, a, g1, r * g1});
  } else {
    for (std::size_t b : grid.batch_sizes)
      for (double a : grid.alphas) points.push_back({b, a, 0.0, 0.0});
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  auto make_config = [&](const GridPoint& p) {
    ExperimentConfig cfg = base;
    BatchSampling sampling = BatchSampling::kWithReplacement;
    if (const auto* mb = std::get_if<MiniBatchOracle>(&base.oracle)) sampling = mb->sampling;
    cfg.oracle = MiniBatchOracle{p.batch, sampling};
    cfg.schedule = StepsizeSchedule::fixed(p.alpha);
    if (base.method == Method::kTrish) cfg.params = TrishParams(p.gamma1, p.gamma2);
    return cfg;
  };

  TuneResult result;
  result.table.reserve(points.size());
  for (const GridPoint& p : points) {
    GridRow row;
    row.point = p;
    row.metrics = aggregate_final(run_experiment(make_config(p), problem));
    row.excluded = row.metrics.runs == 0;
    result.table.push_back(row);
  }

  auto score = [](const AggregateMetrics& m) {
    if (std::isfinite(m.test_acc)) return m.test_acc;
    if (std::isfinite(m.train_acc)) return m.train_acc;
    return -m.train_loss;
  };
  auto tie_loss = [](const AggregateMetrics& m) {
    return std::isfinite(m.test_loss) ? m.test_loss : m.train_loss;
  };
  const GridRow* best = nullptr;
  for (const GridRow& row : result.table) {
    if (row.excluded) continue;
    if (best == nullptr) {
      best = &row;
      continue;
    }
    const double s = score(row.metrics), sb = score(best->metrics);
    if (s > sb || (s == sb && tie_loss(row.metrics) < tie_loss(best->metrics))) best = &row;
  }
  if (best == nullptr) throw DataError("every grid configuration diverged");
  result.best = best->point;
  result.best_metrics = best->metrics;
  result.best_config = make_config(best->point);
  return result;
}

// ---------------------------------------------------------------------------

VerifySetup default_verify_setup(int theorem) {
  VerifySetup s;
  s.theorem = theorem;
  s.params = TrishParams(2.0, 1.9);
  s.n_seeds = 2000;
  s.base_seed = 1000 * static_cast<std::uint64_t>(theorem) + 1;
  auto quadratic = std::make_shared<QuadraticProblem>(Vector{1.0}, Vector{0.0});
  auto nonconvex = std::make_shared<NonconvexPLProblem>(2);
  switch (theorem) {
    case 1:
      s.problem = quadratic;
      s.oracle.schedule = ConstantSigma{0.1};
      s.K = 200;
      break;
    case 2:
      s.problem = quadratic;
      s.oracle.schedule = StepsizeCoupledSigma{1.0};
      s.a = 2.0;  // alpha_1 = 0.5 = 1/(gamma1 L M2)
      s.b = 3.0;
      s.K = 500;
      break;
    case 3:
      s.problem = quadratic;
      s.oracle.schedule = GeometricDecaySigma{1.0, 0.25};
      s.K = 100;
      break;
    case 4:
      s.problem = nonconvex;
      s.oracle.schedule = ConstantSigma{0.5};
      s.K = 200;
      break;
    case 5:
      s.problem = nonconvex;
      s.oracle.schedule = StepsizeCoupledSigma{1.0};
      s.a = 0.5;  // alpha_1 = 1/16 = 1/(gamma1 L M2)
      s.b = 7.0;
      s.K = 5000;
      break;
    default:
      throw UsageError("theorem id must be 1..5");
  }
  s.x1 = Vector(s.problem->dimension(), 1.0);
  if (theorem == 1 || theorem == 3 || theorem == 4) {
    s.alpha = 1.0;  // placeholder so theorem_inputs can run; replaced by the cap
    s.alpha = theorem_stepsize_cap(theorem, theorem_inputs(s));
  }
  return s;
}

TheoremInputs theorem_inputs(const VerifySetup& s) {
  if (!s.problem) throw UsageError("verify setup has no problem");
  if (s.theorem < 1 || s.theorem > 5) throw UsageError("theorem id must be 1..5");
  const Problem& p = *s.problem;
  const ProblemMetadata& meta = p.metadata();
  if (!meta.L) throw HypothesisError("missing-constant", p.name() + " does not declare L");
  if (!meta.f_star) throw HypothesisError("missing-constant", p.name() + " does not declare f*");
  const bool needs_c = s.theorem <= 3;
  if (needs_c && !meta.c) throw HypothesisError("missing-constant", p.name() + " does not declare c");
  if (s.x1.size() != p.dimension()) throw UsageError("x1 has the wrong dimension");
  s.oracle.validate();

  TheoremInputs in;
  in.params = s.params;
  in.L = *meta.L;
  in.c = needs_c ? *meta.c : 0.0;
  in.gap1 = p.value(s.x1) - *meta.f_star;
  in.alpha = s.alpha;
  in.a = s.a;
  in.b = s.b;
  const std::size_t n = p.dimension();

  auto wrong_regime = [&](const char* expected) {
    return HypothesisError("oracle-regime", "theorem " + std::to_string(s.theorem) + " needs " +
                                                expected + " noise, got " + describe(s.oracle));
  };
  switch (s.theorem) {
    case 1:
    case 4: {
      const auto* cs = std::get_if<ConstantSigma>(&s.oracle.schedule);
      if (cs == nullptr) throw wrong_regime("constant");
      const OracleMoments m = s.oracle.moments(n, 0.0);
      in.M1 = m.M1;
      in.M2 = m.M2;
      in.h = gaussian_h_constants(FixedNoise{cs->sigma});
      break;
    }
    case 2:
    case 5: {
      const auto* sc = std::get_if<StepsizeCoupledSigma>(&s.oracle.schedule);
      if (sc == nullptr) throw wrong_regime("stepsize-coupled");
      if (!(s.a > 0.0) || !(s.b > 0.0)) throw HypothesisError("positive-constants", "a and b must be positive");
      const double alpha1 = s.a / (s.b + 1.0);  // largest alpha_k
      const OracleMoments m = s.oracle.moments(n, alpha1);
      in.M1 = m.M1;
      in.M2 = m.M2;
      in.h = gaussian_h_constants(StepsizeCoupledNoise{alpha1, sc->multiplier});
      break;
    }
    case 3: {
      const auto* gd = std::get_if<GeometricDecaySigma>(&s.oracle.schedule);
      if (gd == nullptr) throw wrong_regime("geometrically decaying");
      const OracleMoments m = s.oracle.moments(n, 0.0);
      in.M1 = m.M1;
      in.M2 = m.M2;
      in.M3 = *m.M3;
      in.zeta = *m.zeta;
      in.h = gaussian_h_constants(GeometricNoise{gd->M3, gd->zeta});
      break;
    }
  }
  return in;
}

VerifyReport verify_theorem(const VerifySetup& s) {
  VerifyReport rep;
  rep.theorem = s.theorem;
  rep.inputs = theorem_inputs(s);
  rep.constants = derive_theorem_constants(s.theorem, rep.inputs);
  if (s.n_seeds < 2) throw UsageError("verification needs at least 2 seeds");
  if (s.K < 1) throw UsageError("K must be at least 1");
  if (s.theorem == 1) {
    const TheoremConstants& k = rep.constants;
    rep.limit = k.theta2 / (2.0 * k.c * k.alpha * k.theta1);
  }

  const int theorem = s.theorem;
  const StepsizeSchedule schedule = (theorem == 2 || theorem == 5)
                                        ? StepsizeSchedule::harmonic(s.a, s.b)
                                        : StepsizeSchedule::fixed(s.alpha);
  const Problem& p = *s.problem;
  const double f_star = *p.metadata().f_star;
  const std::size_t K = static_cast<std::size_t>(s.K);
  const std::size_t n_seeds = static_cast<std::size_t>(s.n_seeds);

  // Fixed seed chunks merged in chunk order keep the sums independent of
  // thread scheduling.
  const std::size_t chunks = std::min<std::size_t>(n_seeds, 64);
  struct Acc {
    std::vector<double> sum, sum_sq, wsum, wsum_sq;
  };
  std::vector<Acc> acc(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Acc& a = acc[c];
    a.sum.assign(K, 0.0);
    a.sum_sq.assign(K, 0.0);
    a.wsum.assign(K, 0.0);
    a.wsum_sq.assign(K, 0.0);
    const std::size_t lo = c * n_seeds / chunks;
    const std::size_t hi = (c + 1) * n_seeds / chunks;
    Vector x, grad(p.dimension()), g(p.dimension());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t seed = lo; seed < hi; ++seed) {
      Rng rng = make_rng(s.base_seed + seed);
      x = s.x1;
      double running = 0.0, weight_sum = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        const std::int64_t k = static_cast<std::int64_t>(j) + 1;
        const double alpha = schedule(k);
        p.gradient(x, grad);
        const double gn = squared_norm(grad);
        double stat = 0.0, wstat = 0.0;
        switch (theorem) {
          case 2:
          case 3:
            stat = p.value(x) - f_star;
            break;
          case 4:
            running += gn;
            stat = running / static_cast<double>(k);
            break;
          case 5:
            running += alpha * gn;
            weight_sum += alpha;
            stat = running;
            wstat = running / weight_sum;
            break;
          default:
            break;
        }
        const double sigma = s.oracle.sigma_at(k, alpha);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad[i] + sigma * normal(rng);
        trish_update(x, g, alpha, s.params);
        if (theorem == 1) stat = p.value(x) - f_star;
        a.sum[j] += stat;
        a.sum_sq[j] += stat * stat;
        a.wsum[j] += wstat;
        a.wsum_sq[j] += wstat * wstat;
      }
    }
  });

  std::vector<double> sum(K, 0.0), sum_sq(K, 0.0), wsum(K, 0.0), wsum_sq(K, 0.0);
  for (const Acc& a : acc) {
    for (std::size_t j = 0; j < K; ++j) {
      sum[j] += a.sum[j];
      sum_sq[j] += a.sum_sq[j];
      wsum[j] += a.wsum[j];
      wsum_sq[j] += a.wsum_sq[j];
    }
  }
  const double n = static_cast<double>(n_seeds);
  auto mean_se = [n](double s1, double s2) {
    const double mean = s1 / n;
    const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
    return std::pair{mean, std::sqrt(var / n)};
  };
  rep.rows.reserve(K);
  for (std::size_t j = 0; j < K; ++j) {
    VerifyRow row;
    row.k = static_cast<std::int64_t>(j) + 1;
    std::tie(row.empirical, row.standard_error) = mean_se(sum[j], sum_sq[j]);
    row.bound = theorem_bound(theorem, rep.constants, row.k);
    row.violated = !(row.empirical <= row.bound + 3.0 * row.standard_error + 1e-12);
    if (row.violated) ++rep.violations;
    rep.rows.push_back(row);
    if (theorem == 5) {
      const auto [wm, wse] = mean_se(wsum[j], wsum_sq[j]);
      rep.weighted_average.push_back(wm);
      rep.weighted_average_se.push_back(wse);
    }
  }
  return rep;
}

double loglog_slope(const std::vector<VerifyRow>& rows, std::int64_t lo, std::int64_t hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  double m = 0.0;
  for (const VerifyRow& r : rows) {
    if (r.k < lo || r.k > hi || !(r.empirical > 0.0)) continue;
    const double lx = std::log(static_cast<double>(r.k));
    const double ly = std::log(r.empirical);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    m += 1.0;
  }
  if (m < 2.0) throw UsageError("not enough positive points for a slope");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// ---------------------------------------------------------------------------

std::string format_csv(const std::vector<RunRecord>& records) {
  std::string out(kRunCsvHeader);
  out += '\n';
  for (const RunRecord& r : records) {
    for (const Checkpoint& c : r.checkpoints) {
      out += std::to_string(r.seed) + ',' + fmt9(c.fraction) + ',' + std::to_string(c.iteration) +
             ',' + fmt9(c.train_loss) + ',' + fmt9(c.train_acc) + ',' + fmt9(c.test_loss) + ',' +
             fmt9(c.test_acc) + ',' + std::to_string(c.case_counts[0]) + ',' +
             std::to_string(c.case_counts[1]) + ',' + std::to_string(c.case_counts[2]) + ',' +
             fmt9(c.wall_ms) + '\n';
    }
  }
  return out;
}

std::string format_csv(const VerifyReport& report) {
  std::string out(kVerifyCsvHeader);
  out += '\n';
  for (const VerifyRow& r : report.rows) {
    out += std::to_string(r.k) + ',' + fmt9(r.empirical) + ',' + fmt9(r.standard_error) + ',' +
           fmt9(r.bound) + ',' + (r.violated ? "1" : "0") + '\n';
  }
  return out;
}

namespace {
void write_file(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}
}  // namespace

void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  write_file(format_csv(records), path);
}

void emit_csv(const VerifyReport& report, const std::string& path) {
  write_file(format_csv(report), path);
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "method", "problem",      "dataset",   "test_dataset", "dimension",   "oracle",
      "sigma",  "batch",        "gamma1",    "gamma2",       "alpha",       "schedule",
      "a",      "b",            "epochs",    "max_iterations", "seeds",     "seed",
      "checkpoints", "grid_batch", "grid_alpha", "grid_gamma1", "gamma2_ratio", "timing"};
  return keys;
}

double get_double(const KeyValues& kv, const std::string& key, std::optional<double> fallback = {}) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    if (fallback) return *fallback;
    throw UsageError("missing required key '" + key + "'");
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("key '" + key + "' expects a number, got '" + it->second + "'");
  }
}

std::int64_t get_int(const KeyValues& kv, const std::string& key, std::int64_t fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("key '" + key + "' expects an integer, got '" + it->second + "'");
  }
}

std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::vector<double> get_list(const KeyValues& kv, const std::string& key) {
  std::vector<double> out;
  const auto it = kv.find(key);
  if (it == kv.end()) return out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    try {
      out.push_back(std::stod(t));
    } catch (const std::logic_error&) {
      throw UsageError("key '" + key + "' expects a comma-separated list of numbers");
    }
  }
  return out;
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (!known_keys().contains(key)) {
      throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    kv[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig build_config(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (!known_keys().contains(key)) throw UsageError("unknown key '" + key + "'");
  }
  ExperimentConfig cfg;
  cfg.method = parse_method(get_string(kv, "method", "trish"));
  cfg.problem_id = get_string(kv, "problem", "logistic");
  if (cfg.problem_id != "logistic" && cfg.problem_id != "quadratic" &&
      cfg.problem_id != "nonconvex_pl") {
    throw UsageError("unknown problem '" + cfg.problem_id + "'");
  }
  const bool logistic = cfg.problem_id == "logistic";
  const std::string oracle = get_string(kv, "oracle", logistic ? "minibatch" : "exact");
  if (oracle == "minibatch") {
    const std::int64_t b = get_int(kv, "batch", 10);
    if (b < 1) throw UsageError("batch must be positive");
    cfg.oracle = MiniBatchOracle{static_cast<std::size_t>(b)};
  } else if (oracle == "exact") {
    cfg.oracle = ExactOracle{};
  } else if (oracle == "gaussian") {
    GaussianOracleConfig g;
    g.schedule = ConstantSigma{get_double(kv, "sigma")};
    cfg.oracle = g;
  } else {
    throw UsageError("unknown oracle '" + oracle + "'");
  }
  if (cfg.method == Method::kTrish) {
    const double g1 = get_double(kv, "gamma1");
    const double g2 = get_double(kv, "gamma2", 0.4 * g1);
    try {
      cfg.params = TrishParams(g1, g2);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  const std::string schedule = get_string(kv, "schedule", "fixed");
  try {
    if (schedule == "fixed") {
      cfg.schedule = StepsizeSchedule::fixed(get_double(kv, "alpha", 1.0));
    } else if (schedule == "harmonic") {
      cfg.schedule = StepsizeSchedule::harmonic(get_double(kv, "a"), get_double(kv, "b"));
    } else {
      throw UsageError("unknown schedule '" + schedule + "'");
    }
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  cfg.epochs = get_int(kv, "epochs", 1);
  if (kv.contains("max_iterations")) cfg.max_iterations = get_int(kv, "max_iterations", 1);
  cfg.n_seeds = static_cast<int>(get_int(kv, "seeds", 5));
  cfg.base_seed = static_cast<std::uint64_t>(get_int(kv, "seed", 0));
  const std::vector<double> cps = get_list(kv, "checkpoints");
  cfg.checkpoint_fractions = cps.empty() ? std::vector<double>{0.25, 0.5, 0.75, 1.0} : cps;
  cfg.record_wall_time = get_int(kv, "timing", 1) != 0;
  if (!logistic) {
    const std::int64_t d = get_int(kv, "dimension", 1);
    if (d < 1) throw UsageError("dimension must be positive");
    cfg.x1 = Vector(static_cast<std::size_t>(d), 1.0);
    if (!cfg.max_iterations) cfg.max_iterations = 100;
  }
  cfg.validate();
  return cfg;
}

TuneGrid build_grid(const KeyValues& kv) {
  TuneGrid grid;
  for (double b : get_list(kv, "grid_batch")) {
    if (!(b >= 1.0)) throw UsageError("grid batch sizes must be positive");
    grid.batch_sizes.push_back(static_cast<std::size_t>(b));
  }
  grid.alphas = get_list(kv, "grid_alpha");
  grid.gamma1s = get_list(kv, "grid_gamma1");
  if (kv.contains("gamma2_ratio")) grid.gamma2_ratios = get_list(kv, "gamma2_ratio");
  if (grid.batch_sizes.empty()) grid.batch_sizes = {5, 10, 20};
  if (grid.alphas.empty()) grid.alphas = {1.0, 5.0, 10.0, 100.0};
  if (grid.gamma1s.empty()) grid.gamma1s = {7.0, 11.0, 15.0};
  return grid;
}

std::shared_ptr<const Problem> build_problem(const KeyValues& kv) {
  const std::string id = get_string(kv, "problem", "logistic");
  if (id == "logistic") {
    const auto ds = kv.find("dataset");
    if (ds == kv.end()) throw UsageError("logistic problems need --dataset");
    std::optional<std::string> test;
    if (const auto t = kv.find("test_dataset"); t != kv.end()) test = t->second;
    LoadedLogistic loaded = load_logistic_problem(ds->second, test);
    if (loaded.remapped_labels > 0) {
      std::cerr << "warning: " << loaded.remapped_labels
                << " labels outside {-1,+1} were mapped (0 -> -1, positive -> +1)\n";
    }
    return std::make_shared<LogisticProblem>(std::move(loaded.problem));
  }
  const std::int64_t d = get_int(kv, "dimension", 1);
  if (d < 1) throw UsageError("dimension must be positive");
  const auto n = static_cast<std::size_t>(d);
  if (id == "quadratic") return std::make_shared<QuadraticProblem>(Vector(n, 1.0), Vector(n, 0.0));
  if (id == "nonconvex_pl") return std::make_shared<NonconvexPLProblem>(n);
  throw UsageError("unknown problem '" + id + "'");
}

}  // namespace trish
