// trish: run, tune and verify TRish / SG experiments from the command line.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "trish/errors.hpp"
#include "trish/harness.hpp"
#include "trish/ingest.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kHypothesis = 3, kVerification = 4 };

struct CommonFlags {
  std::string config;
  std::string dataset;
  std::string test_dataset;
  std::optional<int> seeds;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> method;
  std::optional<double> gamma1, gamma2, alpha;
  std::optional<std::size_t> batch;
  std::optional<std::int64_t> epochs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--dataset", f.dataset, "LIBSVM training file");
  cmd->add_option("--test-dataset", f.test_dataset, "LIBSVM testing file");
  cmd->add_option("--seeds", f.seeds, "number of runs")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--method", f.method, "trish or sg")->check(CLI::IsMember({"trish", "sg"}));
  cmd->add_option("--gamma1", f.gamma1);
  cmd->add_option("--gamma2", f.gamma2);
  cmd->add_option("--alpha", f.alpha, "fixed stepsize");
  cmd->add_option("--batch", f.batch, "mini-batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", f.epochs)->check(CLI::PositiveNumber);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

trish::KeyValues merged_keys(const CommonFlags& f) {
  trish::KeyValues kv;
  if (!f.config.empty()) kv = trish::read_config_file(f.config);
  if (!f.dataset.empty()) kv["dataset"] = f.dataset;
  if (!f.test_dataset.empty()) kv["test_dataset"] = f.test_dataset;
  if (f.seeds) kv["seeds"] = std::to_string(*f.seeds);
  if (f.seed) kv["seed"] = std::to_string(*f.seed);
  if (f.method) kv["method"] = *f.method;
  if (f.gamma1) {
    kv["gamma1"] = num(*f.gamma1);
    if (!f.gamma2) kv.erase("gamma2");  // fall back to 0.4 gamma1
  }
  if (f.gamma2) kv["gamma2"] = num(*f.gamma2);
  if (f.alpha) {
    kv["alpha"] = num(*f.alpha);
    kv["schedule"] = "fixed";
  }
  if (f.batch) kv["batch"] = std::to_string(*f.batch);
  if (f.epochs) {
    kv["epochs"] = std::to_string(*f.epochs);
    kv.erase("max_iterations");
  }
  if (kv.contains("method") && kv.at("method") == "sg") {
    kv.erase("gamma1");
    kv.erase("gamma2");
  }
  return kv;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw trish::IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw trish::IoError("failed writing '" + path + "'");
}

void write_metadata(const std::string& csv_path, const trish::ExperimentConfig& cfg,
                    const trish::Problem& problem, const trish::KeyValues& kv) {
  nlohmann::json meta;
  meta["config_hash"] = cfg.config_hash();
  meta["base_seed"] = cfg.base_seed;
  meta["n_seeds"] = cfg.n_seeds;
  meta["method"] = std::string(trish::to_string(cfg.method));
  meta["problem"] = cfg.problem_id;
  meta["oracle"] = trish::describe(cfg.oracle);
  meta["rng"] = std::string(trish::kRngFamily);
  meta["x1"] = cfg.x1 ? "ones" : "zeros";
  meta["dimension"] = problem.dimension();
  meta["iterations"] = trish::total_iterations(cfg, problem);
  if (cfg.params) {
    meta["gamma1"] = cfg.params->gamma1();
    meta["gamma2"] = cfg.params->gamma2();
  }
  meta["config"] = kv;
  write_text(csv_path + ".meta.json", meta.dump(2) + "\n");
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string format_tune_table(const trish::TuneResult& r) {
  std::string s =
      "batch,alpha,gamma1,gamma2,train_loss,train_acc,test_loss,test_acc,runs,divergent,excluded\n";
  for (const auto& row : r.table) {
    const auto& m = row.metrics;
    s += std::to_string(row.point.batch) + ',' + fmt(row.point.alpha) + ',' + fmt(row.point.gamma1) +
         ',' + fmt(row.point.gamma2) + ',' + fmt(m.train_loss) + ',' + fmt(m.train_acc) + ',' +
         fmt(m.test_loss) + ',' + fmt(m.test_acc) + ',' + std::to_string(m.runs) + ',' +
         std::to_string(m.divergent) + ',' + (row.excluded ? "1" : "0") + '\n';
  }
  return s;
}

void print_metrics(const char* label, const trish::AggregateMetrics& m) {
  std::printf("%s: train_loss=%.6g train_acc=%.6g test_loss=%.6g test_acc=%.6g runs=%d divergent=%d\n",
              label, m.train_loss, m.train_acc, m.test_loss, m.test_acc, m.runs, m.divergent);
}

int cmd_run(const CommonFlags& f) {
  const trish::KeyValues kv = merged_keys(f);
  const trish::ExperimentConfig cfg = trish::build_config(kv);
  const auto problem = trish::build_problem(kv);
  const auto records = trish::run_experiment(cfg, *problem);
  if (!f.out.empty()) {
    trish::emit_csv(records, f.out);
    write_metadata(f.out, cfg, *problem, kv);
  } else {
    std::cout << trish::format_csv(records);
  }
  print_metrics("mean final", trish::aggregate_final(records));
  return kOk;
}

int cmd_tune(const CommonFlags& f) {
  const trish::KeyValues kv = merged_keys(f);
  trish::KeyValues base_kv = kv;
  if (!base_kv.contains("gamma1")) base_kv["gamma1"] = "1";  // placeholder; grid supplies gamma1
  const trish::ExperimentConfig base = trish::build_config(base_kv);
  trish::TuneGrid grid = trish::build_grid(kv);
  if (f.batch) grid.batch_sizes = {*f.batch};
  if (f.alpha) grid.alphas = {*f.alpha};
  if (f.gamma1) grid.gamma1s = {*f.gamma1};
  if (f.gamma1 && f.gamma2) grid.gamma2_ratios = {*f.gamma2 / *f.gamma1};
  const auto problem = trish::build_problem(kv);
  const trish::TuneResult result = trish::tune_grid(base, grid, *problem);
  const std::string table = format_tune_table(result);
  if (!f.out.empty()) {
    write_text(f.out, table);
    write_metadata(f.out, result.best_config, *problem, kv);
  } else {
    std::cout << table;
  }
  std::printf("best: method=%s batch=%zu alpha=%.9g", std::string(trish::to_string(base.method)).c_str(),
              result.best.batch, result.best.alpha);
  if (base.method == trish::Method::kTrish) {
    std::printf(" gamma1=%.9g gamma2=%.9g", result.best.gamma1, result.best.gamma2);
  }
  std::printf("\n");
  print_metrics("best mean final", result.best_metrics);
  return kOk;
}

int cmd_verify(int theorem, const CommonFlags& f, std::optional<std::int64_t> K) {
  trish::VerifySetup setup = trish::default_verify_setup(theorem);
  if (f.seeds) setup.n_seeds = *f.seeds;
  if (f.seed) setup.base_seed = *f.seed;
  if (f.gamma1 || f.gamma2) {
    setup.params = trish::TrishParams(f.gamma1.value_or(setup.params.gamma1()),
                                      f.gamma2.value_or(setup.params.gamma2()));
  }
  if (f.alpha) {
    setup.alpha = *f.alpha;
  } else if ((f.gamma1 || f.gamma2) && (theorem == 1 || theorem == 3 || theorem == 4)) {
    setup.alpha = trish::theorem_stepsize_cap(theorem, trish::theorem_inputs(setup));
  }
  if (K) setup.K = *K;
  const trish::VerifyReport rep = trish::verify_theorem(setup);
  if (!f.out.empty()) {
    trish::emit_csv(rep, f.out);
  } else {
    std::cout << trish::format_csv(rep);
  }
  const auto& c = rep.constants;
  std::printf("theorem %d: seeds=%d K=%lld alpha=%.6g a=%.6g b=%.6g\n", theorem, setup.n_seeds,
              static_cast<long long>(setup.K), c.alpha, c.a, c.b);
  switch (theorem) {
    case 1:
      std::printf("theta1=%.6g theta2=%.6g limit=%.6g\n", c.theta1, c.theta2, rep.limit);
      break;
    case 4:
      std::printf("theta1=%.6g theta2=%.6g\n", c.theta1, c.theta2);
      break;
    case 2:
      std::printf("beta1=%.6g beta2=%.6g nu=%.6g\n", c.beta1, c.beta2, c.nu);
      break;
    case 5:
      std::printf("beta1=%.6g beta2=%.6g\n", c.beta1, c.beta2);
      break;
    case 3:
      std::printf("kappa1=%.6g kappa2=%.6g omega=%.6g rho=%.6g\n", c.kappa1, c.kappa2, c.omega, c.rho);
      break;
    default:
      break;
  }
  std::printf("violations=%zu\n", rep.violations);
  return rep.violations == 0 ? kOk : kVerification;
}

int cmd_stats(const CommonFlags& f) {
  if (f.dataset.empty()) throw trish::UsageError("stats needs --dataset");
  const trish::ParsedDataset ds = trish::parse_libsvm_file(f.dataset);
  const std::string text = trish::format_stats(trish::dataset_stats(ds.rows));
  if (!f.out.empty()) {
    write_text(f.out, text);
  } else {
    std::cout << text;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TRish and SG experiment runner"};
  app.require_subcommand(1);
  CommonFlags flags;
  int theorem = 0;
  std::optional<std::int64_t> K;

  CLI::App* run = app.add_subcommand("run", "run one configuration over several seeds");
  add_common(run, flags);
  run->add_option("--out", flags.out, "CSV output path (stdout if omitted)");

  CLI::App* tune = app.add_subcommand("tune", "grid search; writes the full grid table");
  add_common(tune, flags);
  tune->add_option("--out", flags.out, "CSV output path (stdout if omitted)");

  CLI::App* verify = app.add_subcommand("verify", "Monte-Carlo check of a convergence bound");
  verify->add_option("--theorem", theorem, "theorem id")->required()->check(CLI::Range(1, 5));
  verify->add_option("--seeds", flags.seeds)->check(CLI::PositiveNumber);
  verify->add_option("--seed", flags.seed);
  verify->add_option("--gamma1", flags.gamma1);
  verify->add_option("--gamma2", flags.gamma2);
  verify->add_option("--alpha", flags.alpha);
  verify->add_option("--iterations", K, "override K")->check(CLI::PositiveNumber);
  verify->add_option("--out", flags.out, "CSV output path (stdout if omitted)");

  CLI::App* stats = app.add_subcommand("stats", "summarize a LIBSVM file");
  stats->add_option("--dataset", flags.dataset)->required();
  stats->add_option("--out", flags.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(flags);
    if (*tune) return cmd_tune(flags);
    if (*verify) return cmd_verify(theorem, flags, K);
    if (*stats) return cmd_stats(flags);
  } catch (const trish::HypothesisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kHypothesis;
  } catch (const trish::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const trish::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
