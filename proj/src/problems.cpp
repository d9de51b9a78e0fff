#include "trish/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "trish/errors.hpp"

namespace trish {

void ProblemMetadata::validate() const {
  if (dimension == 0) throw UsageError("problem dimension must be positive");
  if (L && !(*L > 0.0)) throw UsageError("L must be positive");
  if (c && !(*c > 0.0)) throw UsageError("c must be positive");
  if (L && c && *c > *L) throw UsageError("P-L constant c cannot exceed L");
}

Vector Problem::gradient(std::span<const double> x) const {
  Vector g(dimension());
  gradient(x, g);
  return g;
}

void Problem::check_dimension(std::size_t n) const {
  if (n != dimension()) {
    throw UsageError(name() + ": expected dimension " + std::to_string(dimension()) + ", got " +
                     std::to_string(n));
  }
}

// ---------------------------------------------------------------------------

QuadraticProblem::QuadraticProblem(Vector diag, Vector shift)
    : diag_(std::move(diag)), shift_(std::move(shift)) {
  if (diag_.empty() || diag_.size() != shift_.size()) {
    throw UsageError("quadratic: diag and shift must be nonempty and of equal length");
  }
  for (double d : diag_) {
    if (!(d > 0.0) || !std::isfinite(d)) throw UsageError("quadratic: diag entries must be positive");
  }
  meta_.dimension = diag_.size();
  meta_.L = *std::max_element(diag_.begin(), diag_.end());
  meta_.c = *std::min_element(diag_.begin(), diag_.end());
  double fs = 0.0;
  for (std::size_t i = 0; i < diag_.size(); ++i) fs -= 0.5 * shift_[i] * shift_[i] / diag_[i];
  meta_.f_star = fs;
}

double QuadraticProblem::value(std::span<const double> x) const {
  check_dimension(x.size());
  double f = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) f += 0.5 * diag_[i] * x[i] * x[i] - shift_[i] * x[i];
  return f;
}

void QuadraticProblem::gradient(std::span<const double> x, std::span<double> out) const {
  check_dimension(x.size());
  check_dimension(out.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = diag_[i] * x[i] - shift_[i];
}

Vector QuadraticProblem::minimizer() const {
  Vector x(diag_.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = shift_[i] / diag_[i];
  return x;
}

// ---------------------------------------------------------------------------

NonconvexPLProblem::NonconvexPLProblem(std::size_t dimension) {
  meta_.dimension = dimension;
  meta_.L = 8.0;
  meta_.c = 1.0 / 32.0;
  meta_.f_star = 0.0;
  meta_.validate();
}

double NonconvexPLProblem::value(std::span<const double> x) const {
  check_dimension(x.size());
  double f = 0.0;
  for (double v : x) {
    const double s = std::sin(v);
    f += v * v + 3.0 * s * s;
  }
  return f;
}

void NonconvexPLProblem::gradient(std::span<const double> x, std::span<double> out) const {
  check_dimension(x.size());
  check_dimension(out.size());
  // d/dx 3 sin^2 x = 3 sin 2x
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = 2.0 * x[i] + 3.0 * std::sin(2.0 * x[i]);
}

// ---------------------------------------------------------------------------

QuadraticSumProblem::QuadraticSumProblem(Vector diag, std::vector<Vector> centers)
    : diag_(std::move(diag)), centers_(std::move(centers)) {
  if (diag_.empty() || centers_.empty()) throw UsageError("quadratic_sum: empty input");
  for (double d : diag_) {
    if (!(d > 0.0)) throw UsageError("quadratic_sum: diag entries must be positive");
  }
  const std::size_t n = diag_.size();
  mean_center_.assign(n, 0.0);
  for (const Vector& c : centers_) {
    if (c.size() != n) throw UsageError("quadratic_sum: center dimension mismatch");
    for (std::size_t j = 0; j < n; ++j) mean_center_[j] += c[j];
  }
  const double inv_n = 1.0 / static_cast<double>(centers_.size());
  for (double& m : mean_center_) m *= inv_n;
  // f(x) = 1/2 sum_j d_j (x_j - m_j)^2 + f*, with f* the mean spread of centers.
  double spread = 0.0;
  for (const Vector& c : centers_) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = c[j] - mean_center_[j];
      spread += 0.5 * diag_[j] * d * d;
    }
  }
  f_star_offset_ = spread * inv_n;
  meta_.dimension = n;
  meta_.L = *std::max_element(diag_.begin(), diag_.end());
  meta_.c = *std::min_element(diag_.begin(), diag_.end());
  meta_.f_star = f_star_offset_;
}

double QuadraticSumProblem::value(std::span<const double> x) const {
  check_dimension(x.size());
  double f = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - mean_center_[j];
    f += 0.5 * diag_[j] * d * d;
  }
  return f + f_star_offset_;
}

void QuadraticSumProblem::gradient(std::span<const double> x, std::span<double> out) const {
  check_dimension(x.size());
  check_dimension(out.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = diag_[j] * (x[j] - mean_center_[j]);
}

void QuadraticSumProblem::add_component_gradient(std::size_t i, std::span<const double> x,
                                                 double weight, std::span<double> out) const {
  const Vector& c = centers_.at(i);
  for (std::size_t j = 0; j < x.size(); ++j) out[j] += weight * diag_[j] * (x[j] - c[j]);
}

// ---------------------------------------------------------------------------

double SparseMatrix::dot_row(std::size_t r, std::span<const double> w) const noexcept {
  double s = 0.0;
  for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) s += val[p] * w[col[p]];
  return s;
}

double SparseMatrix::row_squared_norm(std::size_t r) const noexcept {
  double s = 0.0;
  for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) s += val[p] * val[p];
  return s;
}

void SparseMatrix::axpy_row(std::size_t r, double scale, std::span<double> out) const noexcept {
  for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) out[col[p]] += scale * val[p];
}

void LabeledData::validate() const {
  if (features.rows() != labels.size()) {
    throw UsageError("feature rows and labels differ in count");
  }
  for (double y : labels) {
    if (y != 1.0 && y != -1.0) throw DataError("logistic labels must be +1 or -1");
  }
}

double log1p_exp(double t) noexcept {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

void check_slice(std::span<const double> w, const LabeledData& data, std::size_t count) {
  if (count == 0) throw UsageError("empty data slice");
  if (w.size() < data.features.cols) {
    throw UsageError("weight dimension " + std::to_string(w.size()) +
                     " is smaller than the feature dimension " +
                     std::to_string(data.features.cols));
  }
}

template <typename RowVisitor>
void for_rows(const LabeledData& data, std::span<const std::size_t> rows, RowVisitor&& visit) {
  if (rows.empty()) {
    for (std::size_t r = 0; r < data.size(); ++r) visit(r);
  } else {
    for (std::size_t r : rows) {
      if (r >= data.size()) throw UsageError("row index out of range");
      visit(r);
    }
  }
}

double loss_impl(std::span<const double> w, const LabeledData& data,
                 std::span<const std::size_t> rows) {
  const std::size_t count = rows.empty() ? data.size() : rows.size();
  check_slice(w, data, count);
  double total = 0.0;
  for_rows(data, rows, [&](std::size_t r) {
    total += log1p_exp(-data.labels[r] * data.features.dot_row(r, w));
  });
  return total / static_cast<double>(count);
}

Vector gradient_impl(std::span<const double> w, const LabeledData& data,
                     std::span<const std::size_t> rows) {
  const std::size_t count = rows.empty() ? data.size() : rows.size();
  check_slice(w, data, count);
  Vector g(w.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(count);
  for_rows(data, rows, [&](std::size_t r) {
    const double y = data.labels[r];
    const double margin = y * data.features.dot_row(r, w);
    data.features.axpy_row(r, -y * sigmoid(-margin) * inv, g);
  });
  return g;
}

double accuracy_impl(std::span<const double> w, const LabeledData& data,
                     std::span<const std::size_t> rows) {
  const std::size_t count = rows.empty() ? data.size() : rows.size();
  check_slice(w, data, count);
  std::size_t correct = 0;
  for_rows(data, rows, [&](std::size_t r) {
    if (data.labels[r] * data.features.dot_row(r, w) > 0.0) ++correct;
  });
  return static_cast<double>(correct) / static_cast<double>(count);
}

}  // namespace

double logistic_loss(std::span<const double> w, const LabeledData& data) {
  return loss_impl(w, data, {});
}
double logistic_loss(std::span<const double> w, const LabeledData& data,
                     std::span<const std::size_t> rows) {
  if (rows.empty()) throw UsageError("empty data slice");
  return loss_impl(w, data, rows);
}
Vector logistic_gradient(std::span<const double> w, const LabeledData& data) {
  return gradient_impl(w, data, {});
}
Vector logistic_gradient(std::span<const double> w, const LabeledData& data,
                         std::span<const std::size_t> rows) {
  if (rows.empty()) throw UsageError("empty data slice");
  return gradient_impl(w, data, rows);
}
double classification_accuracy(std::span<const double> w, const LabeledData& data) {
  return accuracy_impl(w, data, {});
}
double classification_accuracy(std::span<const double> w, const LabeledData& data,
                               std::span<const std::size_t> rows) {
  if (rows.empty()) throw UsageError("empty data slice");
  return accuracy_impl(w, data, rows);
}

LogisticProblem::LogisticProblem(LabeledData train, std::optional<LabeledData> test)
    : train_(std::move(train)), test_(std::move(test)) {
  train_.validate();
  if (train_.size() == 0) throw UsageError("logistic: empty training set");
  if (test_) {
    test_->validate();
    // Shared weight vector across train and test.
    const std::size_t cols = std::max(train_.features.cols, test_->features.cols);
    train_.features.cols = cols;
    test_->features.cols = cols;
  }
  meta_.dimension = std::max<std::size_t>(train_.features.cols, 1);
  train_.features.cols = meta_.dimension;
  if (test_) test_->features.cols = meta_.dimension;
  double sq = 0.0;
  for (std::size_t r = 0; r < train_.size(); ++r) sq += train_.features.row_squared_norm(r);
  const double bound = sq / (4.0 * static_cast<double>(train_.size()));
  if (bound > 0.0) meta_.L = bound;
  meta_.f_star = 0.0;  // a valid lower bound; the infimum itself is unknown
}

double LogisticProblem::value(std::span<const double> x) const {
  check_dimension(x.size());
  return loss_impl(x, train_, {});
}

void LogisticProblem::gradient(std::span<const double> x, std::span<double> out) const {
  check_dimension(x.size());
  check_dimension(out.size());
  std::fill(out.begin(), out.end(), 0.0);
  const double inv = 1.0 / static_cast<double>(train_.size());
  for (std::size_t r = 0; r < train_.size(); ++r) add_component_gradient(r, x, inv, out);
}

void LogisticProblem::add_component_gradient(std::size_t i, std::span<const double> x,
                                             double weight, std::span<double> out) const {
  const double y = train_.labels[i];
  const double margin = y * train_.features.dot_row(i, x);
  train_.features.axpy_row(i, -weight * y * sigmoid(-margin), out);
}

// ---------------------------------------------------------------------------

PLCheckResult verify_pl_constant(const Problem& problem, std::span<const Vector> points) {
  const ProblemMetadata& meta = problem.metadata();
  if (!meta.c || !meta.f_star) {
    throw UsageError(problem.name() + ": P-L check needs both c and f_star");
  }
  constexpr double kTolerance = 1e-12;
  PLCheckResult result;
  Vector g(problem.dimension());
  for (const Vector& x : points) {
    const double gap = problem.value(x) - *meta.f_star;
    problem.gradient(x, g);
    const double lhs = 2.0 * *meta.c * gap;
    const double rhs = squared_norm(g);
    if (lhs > rhs + kTolerance) result.holds = false;
    double ratio = 0.0;
    if (rhs > 0.0) {
      ratio = lhs / rhs;
    } else if (lhs > kTolerance) {
      ratio = std::numeric_limits<double>::infinity();
    }
    result.worst_ratio = std::max(result.worst_ratio, ratio);
    ++result.points;
  }
  return result;
}

}  // namespace trish
