#include "trish/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trish/errors.hpp"

namespace trish {

Rng make_rng(std::uint64_t seed) { return Rng(seed); }

void OracleMoments::validate() const {
  if (!(M1 > 0.0) || !(M2 > 0.0)) throw UsageError("oracle moments require M1 > 0 and M2 > 0");
  if (M3.has_value() != zeta.has_value()) {
    throw UsageError("M3 and zeta must be given together");
  }
  if (M3 && !(*M3 > 0.0)) throw UsageError("M3 must be positive");
  if (zeta && !(*zeta > 0.0 && *zeta < 1.0)) throw UsageError("zeta must lie in (0,1)");
}

void GaussianOracleConfig::validate() const {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantSigma>) {
          if (!(s.sigma > 0.0) || !std::isfinite(s.sigma)) {
            throw UsageError("constant sigma must be positive; use the exact oracle for sigma=0");
          }
        } else if constexpr (std::is_same_v<T, StepsizeCoupledSigma>) {
          if (!(s.multiplier > 0.0)) throw UsageError("sigma multiplier must be positive");
        } else {
          if (!(s.M3 > 0.0)) throw UsageError("geometric decay needs M3 > 0");
          if (!(s.zeta > 0.0 && s.zeta < 1.0)) throw UsageError("geometric decay needs zeta in (0,1)");
        }
      },
      schedule);
}

double GaussianOracleConfig::sigma_at(std::int64_t k, double alpha_k) const {
  if (k < 1) throw DomainError("iterations are 1-based");
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantSigma>) {
          return s.sigma;
        } else if constexpr (std::is_same_v<T, StepsizeCoupledSigma>) {
          return s.multiplier * alpha_k;
        } else {
          return std::sqrt(s.M3 * std::pow(s.zeta, static_cast<double>(k - 1)));
        }
      },
      schedule);
}

OracleMoments GaussianOracleConfig::moments(std::size_t n, double alpha_bound) const {
  validate();
  const double dim = static_cast<double>(n);
  OracleMoments m;
  m.M2 = 1.0;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantSigma>) {
          m.M1 = dim * s.sigma * s.sigma;
        } else if constexpr (std::is_same_v<T, StepsizeCoupledSigma>) {
          const double sig = s.multiplier * alpha_bound;
          m.M1 = dim * sig * sig;
        } else {
          // E||g - grad f||^2 = n * M3 * zeta^(k-1)
          m.M1 = dim * s.M3;
          m.M3 = dim * s.M3;
          m.zeta = s.zeta;
        }
      },
      schedule);
  return m;
}

Vector gaussian_sample(std::span<const double> grad_true, const GaussianOracleConfig& config,
                       std::int64_t k, double alpha_k, Rng& rng) {
  const double sigma = config.sigma_at(k, alpha_k);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector g(grad_true.begin(), grad_true.end());
  for (double& v : g) {
    if (!std::isfinite(v)) throw DataError("true gradient is not finite");
    v += sigma * normal(rng);
  }
  return g;
}

void TwoPointOracle::validate() const {
  if (!(prob_pos >= 0.0 && prob_pos <= 1.0)) throw UsageError("prob_pos must lie in [0,1]");
  if (!std::isfinite(value_pos) || !std::isfinite(value_neg)) {
    throw UsageError("two-point values must be finite");
  }
}

double two_point_sample(const TwoPointOracle& oracle, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < oracle.prob_pos ? oracle.value_pos : oracle.value_neg;
}

Vector finite_sum_minibatch(const FiniteSumProblem& problem, std::span<const double> x,
                            std::size_t batch_size, Rng& rng, BatchSampling sampling) {
  Vector g(problem.dimension(), 0.0);
  draw_gradient(MiniBatchOracle{batch_size, sampling}, problem, x, 1, 1.0, rng, g);
  return g;
}

std::string describe(const OracleSpec& spec) {
  std::ostringstream os;
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, ExactOracle>) {
          os << "exact";
        } else if constexpr (std::is_same_v<T, MiniBatchOracle>) {
          os << "minibatch(b=" << o.batch_size
             << (o.sampling == BatchSampling::kFullPass ? ",full" : ",replacement") << ")";
        } else {
          std::visit(
              [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, ConstantSigma>) {
                  os << "gaussian(sigma=" << s.sigma << ")";
                } else if constexpr (std::is_same_v<S, StepsizeCoupledSigma>) {
                  os << "gaussian(sigma=" << s.multiplier << "*alpha_k)";
                } else {
                  os << "gaussian(M3=" << s.M3 << ",zeta=" << s.zeta << ")";
                }
              },
              o.schedule);
        }
      },
      spec);
  return os.str();
}

std::size_t draw_gradient(const OracleSpec& spec, const Problem& problem,
                          std::span<const double> x, std::int64_t k, double alpha_k, Rng& rng,
                          std::span<double> out) {
  if (out.size() != problem.dimension() || x.size() != problem.dimension()) {
    throw UsageError("draw_gradient: dimension mismatch");
  }
  if (const auto* mb = std::get_if<MiniBatchOracle>(&spec)) {
    const auto* fs = dynamic_cast<const FiniteSumProblem*>(&problem);
    if (fs == nullptr) throw UsageError(problem.name() + " is not a finite-sum problem");
    if (mb->batch_size == 0) throw UsageError("batch size must be positive");
    const std::size_t n_comp = fs->component_count();
    std::fill(out.begin(), out.end(), 0.0);
    if (mb->sampling == BatchSampling::kFullPass) {
      const double w = 1.0 / static_cast<double>(n_comp);
      for (std::size_t i = 0; i < n_comp; ++i) fs->add_component_gradient(i, x, w, out);
      return n_comp;
    }
    if (mb->batch_size > n_comp) throw UsageError("batch size exceeds the number of components");
    std::uniform_int_distribution<std::size_t> pick(0, n_comp - 1);
    const double w = 1.0 / static_cast<double>(mb->batch_size);
    for (std::size_t j = 0; j < mb->batch_size; ++j) fs->add_component_gradient(pick(rng), x, w, out);
    return mb->batch_size;
  }
  problem.gradient(x, out);
  if (const auto* gc = std::get_if<GaussianOracleConfig>(&spec)) {
    const double sigma = gc->sigma_at(k, alpha_k);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out) v += sigma * normal(rng);
  }
  return 0;
}

}  // namespace trish
