#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trish/errors.hpp"
#include "trish/harness.hpp"
#include "trish/ingest.hpp"

namespace py = pybind11;
using namespace trish;

namespace {

py::dict report_to_dict(const VerifyReport& r) {
  py::list rows;
  for (const VerifyRow& row : r.rows) {
    py::dict d;
    d["k"] = row.k;
    d["empirical_gap"] = row.empirical;
    d["standard_error"] = row.standard_error;
    d["bound"] = row.bound;
    d["violated"] = row.violated;
    rows.append(d);
  }
  py::dict c;
  const TheoremConstants& k = r.constants;
  c["theta1"] = k.theta1;
  c["theta2"] = k.theta2;
  c["beta1"] = k.beta1;
  c["beta2"] = k.beta2;
  c["nu"] = k.nu;
  c["kappa1"] = k.kappa1;
  c["kappa2"] = k.kappa2;
  c["omega"] = k.omega;
  c["rho"] = k.rho;
  c["alpha"] = k.alpha;
  c["a"] = k.a;
  c["b"] = k.b;
  py::dict out;
  out["theorem"] = r.theorem;
  out["rows"] = rows;
  out["constants"] = c;
  out["violations"] = r.violations;
  out["limit"] = r.limit;
  out["weighted_average"] = r.weighted_average;
  return out;
}

py::list records_to_list(const std::vector<RunRecord>& records) {
  py::list out;
  for (const RunRecord& r : records) {
    py::list cps;
    for (const Checkpoint& c : r.checkpoints) {
      py::dict d;
      d["fraction"] = c.fraction;
      d["iteration"] = c.iteration;
      d["train_loss"] = c.train_loss;
      d["train_acc"] = c.train_acc;
      d["test_loss"] = c.test_loss;
      d["test_acc"] = c.test_acc;
      d["case_counts"] = c.case_counts;
      cps.append(d);
    }
    py::dict d;
    d["seed"] = r.seed;
    d["divergent"] = r.divergent;
    d["checkpoints"] = cps;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_trish, m) {
  m.doc() = "TRish / SG step rules, theory constants and experiment harness";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<HypothesisError>(m, "HypothesisError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<TrishParams>(m, "TrishParams")
      .def(py::init<double, double>(), py::arg("gamma1"), py::arg("gamma2"))
      .def_property_readonly("gamma1", &TrishParams::gamma1)
      .def_property_readonly("gamma2", &TrishParams::gamma2)
      .def("__repr__", [](const TrishParams& p) {
        return "TrishParams(" + std::to_string(p.gamma1()) + ", " + std::to_string(p.gamma2()) + ")";
      });

  py::enum_<StepCase>(m, "StepCase")
      .value("CASE1", StepCase::kCase1)
      .value("CASE2", StepCase::kCase2)
      .value("CASE3", StepCase::kCase3);

  m.def("classify_case", &classify_case, py::arg("g_norm"), py::arg("params"));
  m.def(
      "trish_step",
      [](const Vector& x, const Vector& g, double alpha, const TrishParams& p) {
        auto r = trish_step(x, g, alpha, p);
        return py::make_tuple(r.x_next, r.step_case);
      },
      py::arg("x"), py::arg("g"), py::arg("alpha"), py::arg("params"),
      "Returns (x_next, step_case).");
  m.def(
      "sg_step", [](const Vector& x, const Vector& g, double alpha) { return sg_step(x, g, alpha); },
      py::arg("x"), py::arg("g"), py::arg("alpha"));
  m.def("step_norm", &step_norm, py::arg("g_norm"), py::arg("alpha"), py::arg("params"));

  m.def("gaussian_conditional_product", &gaussian_conditional_product, py::arg("grad_norm_sq"),
        py::arg("sigma"));
  m.def(
      "fixed_noise_h",
      [](double sigma) {
        const auto h = gaussian_h_constants(FixedNoise{sigma});
        return py::make_tuple(*h.h1, *h.h2);
      },
      py::arg("sigma"), "(h1, h2) for Gaussian noise with standard deviation sigma.");
  m.def("sg_comparison_bound", &sg_comparison_bound, py::arg("gamma1"), py::arg("gamma2"),
        py::arg("h1"), py::arg("h2"), py::arg("c"), py::arg("L"), py::arg("M2"));

  m.def(
      "parse_libsvm",
      [](const std::string& text) {
        const auto ds = parse_libsvm_string(text);
        py::list rows;
        for (const SparseRow& r : ds.rows) rows.append(py::make_tuple(r.label, r.indices, r.values));
        return rows;
      },
      py::arg("text"), "List of (label, indices, values) tuples.");
  m.def(
      "roundtrip_libsvm",
      [](const std::string& text) { return serialize_libsvm(parse_libsvm_string(text).rows); },
      py::arg("text"));
  m.def(
      "dataset_stats",
      [](const std::string& path) { return format_stats(dataset_stats(parse_libsvm_file(path).rows)); },
      py::arg("path"));

  m.def(
      "verify",
      [](int theorem, int n_seeds, std::int64_t K, std::uint64_t seed) {
        VerifySetup s = default_verify_setup(theorem);
        s.n_seeds = n_seeds;
        s.K = K;
        s.base_seed = seed;
        VerifyReport r;
        {
          py::gil_scoped_release release;
          r = verify_theorem(s);
        }
        return report_to_dict(r);
      },
      py::arg("theorem"), py::arg("n_seeds") = 2000, py::arg("K") = 200, py::arg("seed") = 1,
      "Monte-Carlo check of one convergence bound on its reference setup.");

  m.def(
      "run",
      [](const std::map<std::string, std::string>& config) {
        const ExperimentConfig cfg = build_config(config);
        const auto problem = build_problem(config);
        std::vector<RunRecord> records;
        {
          py::gil_scoped_release release;
          records = run_experiment(cfg, *problem);
        }
        return records_to_list(records);
      },
      py::arg("config"), "Runs a configuration given as the same keys the config file accepts.");
}
