#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trish/core.hpp"

namespace trish {

/// Known constants of an objective. L bounds the quadratic upper model,
/// c is the Polyak-Lojasiewicz constant and f_star the infimum.
struct ProblemMetadata {
  std::size_t dimension = 0;
  std::optional<double> L;
  std::optional<double> c;
  std::optional<double> f_star;

  /// Throws UsageError for a zero dimension, non-positive constants or c > L.
  void validate() const;
};

class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual const ProblemMetadata& metadata() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;

  Vector gradient(std::span<const double> x) const;
  std::size_t dimension() const { return metadata().dimension; }

 protected:
  void check_dimension(std::size_t n) const;
};

/// f(x) = (1/N) sum_i f_i(x) with individually evaluable component gradients.
class FiniteSumProblem : public Problem {
 public:
  virtual std::size_t component_count() const = 0;
  /// out += weight * grad f_i(x)
  virtual void add_component_gradient(std::size_t i, std::span<const double> x, double weight,
                                      std::span<double> out) const = 0;
};

/// f(x) = 1/2 sum d_i x_i^2 - sum b_i x_i with every d_i > 0.
class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(Vector diag, Vector shift);

  std::string name() const override { return "quadratic"; }
  const ProblemMetadata& metadata() const override { return meta_; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  using Problem::gradient;

  const Vector& diag() const noexcept { return diag_; }
  const Vector& shift() const noexcept { return shift_; }
  Vector minimizer() const;

 private:
  Vector diag_;
  Vector shift_;
  ProblemMetadata meta_;
};

/// Coordinatewise sum of x^2 + 3 sin^2(x). Nonconvex but P-L with c = 1/32,
/// smooth with L = 8, minimum 0 at the origin.
class NonconvexPLProblem final : public Problem {
 public:
  explicit NonconvexPLProblem(std::size_t dimension);

  std::string name() const override { return "nonconvex_pl"; }
  const ProblemMetadata& metadata() const override { return meta_; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  using Problem::gradient;

 private:
  ProblemMetadata meta_;
};

/// Finite sum of separable quadratics f_i(x) = 1/2 sum_j d_j (x_j - c_ij)^2.
/// Small test bed for mini-batch estimators with closed-form gradients.
class QuadraticSumProblem final : public FiniteSumProblem {
 public:
  /// centers holds N rows of length diag.size(), row-major.
  QuadraticSumProblem(Vector diag, std::vector<Vector> centers);

  std::string name() const override { return "quadratic_sum"; }
  const ProblemMetadata& metadata() const override { return meta_; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  using Problem::gradient;
  std::size_t component_count() const override { return centers_.size(); }
  void add_component_gradient(std::size_t i, std::span<const double> x, double weight,
                              std::span<double> out) const override;

 private:
  Vector diag_;
  std::vector<Vector> centers_;
  Vector mean_center_;
  double f_star_offset_ = 0.0;
  ProblemMetadata meta_;
};

/// Compressed sparse rows. Column indices are 0-based and strictly increasing
/// within a row.
struct SparseMatrix {
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  std::size_t rows() const noexcept { return row_ptr.size() - 1; }
  std::size_t nnz() const noexcept { return val.size(); }
  double dot_row(std::size_t r, std::span<const double> w) const noexcept;
  double row_squared_norm(std::size_t r) const noexcept;
  /// out += scale * row r
  void axpy_row(std::size_t r, double scale, std::span<double> out) const noexcept;
};

struct LabeledData {
  SparseMatrix features;
  Vector labels;  // each +1 or -1

  std::size_t size() const noexcept { return labels.size(); }
  void validate() const;
};

/// Mean logistic loss (1/N) sum log(1 + exp(-y_i w.z_i)) over the training
/// set, with an optional held-out set for reporting.
class LogisticProblem final : public FiniteSumProblem {
 public:
  explicit LogisticProblem(LabeledData train, std::optional<LabeledData> test = std::nullopt);

  std::string name() const override { return "logistic"; }
  const ProblemMetadata& metadata() const override { return meta_; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  using Problem::gradient;
  std::size_t component_count() const override { return train_.size(); }
  void add_component_gradient(std::size_t i, std::span<const double> x, double weight,
                              std::span<double> out) const override;

  const LabeledData& train() const noexcept { return train_; }
  const std::optional<LabeledData>& test() const noexcept { return test_; }

 private:
  LabeledData train_;
  std::optional<LabeledData> test_;
  ProblemMetadata meta_;
};

/// log(1 + e^t) without overflow.
double log1p_exp(double t) noexcept;
/// 1 / (1 + e^{-t}) without overflow.
double sigmoid(double t) noexcept;

/// Mean log-loss over the whole set or over the listed rows. Throws
/// UsageError on an empty slice or when the weight vector is shorter than the
/// feature dimension.
double logistic_loss(std::span<const double> w, const LabeledData& data);
double logistic_loss(std::span<const double> w, const LabeledData& data,
                     std::span<const std::size_t> rows);
Vector logistic_gradient(std::span<const double> w, const LabeledData& data);
Vector logistic_gradient(std::span<const double> w, const LabeledData& data,
                         std::span<const std::size_t> rows);
/// Fraction of rows with sign(w.z) == y; a zero margin counts as wrong.
double classification_accuracy(std::span<const double> w, const LabeledData& data);
double classification_accuracy(std::span<const double> w, const LabeledData& data,
                               std::span<const std::size_t> rows);

struct PLCheckResult {
  bool holds = true;
  double worst_ratio = 0.0;  // max of 2c(f - f*) / ||grad f||^2
  std::size_t points = 0;
};

/// Checks 2c(f(x) - f*) <= ||grad f(x)||^2 + 1e-12 at every point.
PLCheckResult verify_pl_constant(const Problem& problem, std::span<const Vector> points);

}  // namespace trish
