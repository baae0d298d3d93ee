#include "dearest/objective.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>

#include "dearest/error.hpp"
#include "dearest/topology.hpp"

namespace dearest {

namespace {

// log(1 + exp(-z)) without overflow.
double logistic_loss(double z) { return std::log1p(std::exp(-std::abs(z))) + std::max(-z, 0.0); }

// sigma(-z) = 1 / (1 + exp(z)).
double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace

void FiniteSumObjective::check_indices(int i, int j) const {
  if (i < 0 || i >= agents() || j < 0 || j >= samples())
    throw ValidationError("component (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") out of range for m = " + std::to_string(agents()) +
                          ", n = " + std::to_string(samples()));
}

Vector FiniteSumObjective::component_grad(int i, int j, const Vector &x) const {
  Vector g = Vector::Zero(dim());
  add_component_grad(i, j, x, 1.0, g);
  return g;
}

double FiniteSumObjective::local_value(int i, const Vector &x) const {
  double s = 0.0;
  for (int j = 0; j < samples(); ++j) s += component_value(i, j, x);
  return s / samples();
}

Vector FiniteSumObjective::local_grad(int i, const Vector &x) const {
  Vector g = Vector::Zero(dim());
  const double w = 1.0 / samples();
  for (int j = 0; j < samples(); ++j) add_component_grad(i, j, x, w, g);
  return g;
}

void FiniteSumObjective::add_batch_difference(int i, std::span<const int> batch,
                                              const Vector &x_new, const Vector &x_old,
                                              Vector &out) const {
  if (batch.empty()) return;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (int j : batch) {
    add_component_grad(i, j, x_new, w, out);
    add_component_grad(i, j, x_old, -w, out);
  }
}

double FiniteSumObjective::global_value(const Vector &x) const {
  double s = 0.0;
  for (int i = 0; i < agents(); ++i) s += local_value(i, x);
  return s / agents();
}

Vector FiniteSumObjective::global_grad(const Vector &x) const {
  Vector g = Vector::Zero(dim());
  for (int i = 0; i < agents(); ++i) g += local_grad(i, x);
  return g / agents();
}

// ---------------------------------------------------------------------------

LogisticNCObjective::LogisticNCObjective(std::vector<SparseRows> features,
                                         std::vector<Vector> labels, double lambda)
    : features_(std::move(features)), labels_(std::move(labels)), lambda_(lambda) {
  if (features_.empty()) throw ValidationError("logistic objective needs at least one agent");
  if (labels_.size() != features_.size())
    throw ValidationError("feature and label lists have different agent counts");
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_))
    throw ValidationError("regularization weight must be a nonnegative finite number");
  n_ = static_cast<int>(features_[0].rows());
  d_ = static_cast<int>(features_[0].cols());
  if (n_ < 1 || d_ < 1) throw ValidationError("logistic objective needs n >= 1 and d >= 1");

  for (std::size_t i = 0; i < features_.size(); ++i) {
    auto &a = features_[i];
    if (a.rows() != n_ || a.cols() != d_)
      throw ValidationError("agent " + std::to_string(i) + " has a " +
                            std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                            " feature block, expected " + std::to_string(n_) + "x" +
                            std::to_string(d_));
    if (labels_[i].size() != n_)
      throw ValidationError("agent " + std::to_string(i) + " label count mismatch");
    for (int j = 0; j < n_; ++j)
      if (labels_[i][j] != 1.0 && labels_[i][j] != -1.0)
        throw ValidationError("label of sample " + std::to_string(j) + " on agent " +
                              std::to_string(i) + " is not +-1");
    a.makeCompressed();

    double sum_sq = 0.0;
    for (int j = 0; j < n_; ++j) {
      const double l = a.row(j).squaredNorm() / 4.0 + 2.0 * lambda_;
      sum_sq += l * l;
    }
    smoothness_ = std::max(smoothness_, std::sqrt(sum_sq / n_));
  }
}

double LogisticNCObjective::regularizer(const Vector &x) const {
  const auto sq = x.array().square();
  return lambda_ * (sq / (1.0 + sq)).sum();
}

Vector LogisticNCObjective::regularizer_grad(const Vector &x) const {
  const auto denom = (1.0 + x.array().square()).square();
  return (lambda_ * 2.0 * x.array() / denom).matrix();
}

double LogisticNCObjective::component_value(int i, int j, const Vector &x) const {
  check_indices(i, j);
  const double z = labels_[i][j] * features_[i].row(j).dot(x);
  return logistic_loss(z) + regularizer(x);
}

void LogisticNCObjective::add_component_grad(int i, int j, const Vector &x, double scale,
                                             Vector &out) const {
  check_indices(i, j);
  const double b = labels_[i][j];
  const double z = b * features_[i].row(j).dot(x);
  const double coef = -scale * b * sigmoid_neg(z);
  for (SparseRows::InnerIterator it(features_[i], j); it; ++it) out[it.col()] += coef * it.value();
  if (lambda_ != 0.0) out += scale * regularizer_grad(x);
}

double LogisticNCObjective::local_value(int i, const Vector &x) const {
  const Vector z = labels_[i].cwiseProduct(features_[i] * x);
  double s = 0.0;
  for (int j = 0; j < n_; ++j) s += logistic_loss(z[j]);
  return s / n_ + regularizer(x);
}

Vector LogisticNCObjective::local_grad(int i, const Vector &x) const {
  const Vector &b = labels_[i];
  const Vector z = b.cwiseProduct(features_[i] * x);
  Vector coef(n_);
  for (int j = 0; j < n_; ++j) coef[j] = -b[j] * sigmoid_neg(z[j]) / n_;
  Vector g = features_[i].transpose() * coef;
  if (lambda_ != 0.0) g += regularizer_grad(x);
  return g;
}

void LogisticNCObjective::add_batch_difference(int i, std::span<const int> batch,
                                               const Vector &x_new, const Vector &x_old,
                                               Vector &out) const {
  if (batch.empty()) return;
  const double w = 1.0 / static_cast<double>(batch.size());
  const auto &a = features_[i];
  for (int j : batch) {
    check_indices(i, j);
    const double b = labels_[i][j];
    double dot_new = 0.0, dot_old = 0.0;
    for (SparseRows::InnerIterator it(a, j); it; ++it) {
      dot_new += it.value() * x_new[it.col()];
      dot_old += it.value() * x_old[it.col()];
    }
    const double coef = -w * b * (sigmoid_neg(b * dot_new) - sigmoid_neg(b * dot_old));
    for (SparseRows::InnerIterator it(a, j); it; ++it) out[it.col()] += coef * it.value();
  }
  // The regularizer is shared by all components, so its batch mean is exact.
  if (lambda_ != 0.0) out += regularizer_grad(x_new) - regularizer_grad(x_old);
}

// ---------------------------------------------------------------------------

QuadraticObjective::QuadraticObjective(std::vector<Matrix> blocks, std::vector<Vector> targets,
                                       int rows)
    : blocks_(std::move(blocks)), targets_(std::move(targets)), rows_(rows) {
  if (blocks_.empty()) throw ValidationError("quadratic objective needs at least one agent");
  if (targets_.size() != blocks_.size())
    throw ValidationError("block and target lists have different agent counts");
  if (rows_ < 1) throw ValidationError("quadratic blocks need at least one row");
  const auto total_rows = blocks_[0].rows();
  if (total_rows % rows_ != 0 || total_rows == 0)
    throw ValidationError("stacked block height is not a multiple of the row count");
  n_ = static_cast<int>(total_rows / rows_);
  d_ = static_cast<int>(blocks_[0].cols());
  if (d_ < 1) throw ValidationError("quadratic objective needs d >= 1");

  Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(d_, d_);
  Vector rhs = Vector::Zero(d_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].rows() != total_rows || blocks_[i].cols() != d_ ||
        targets_[i].size() != total_rows)
      throw ValidationError("agent " + std::to_string(i) + " has mismatched quadratic data");
    hessian += blocks_[i].transpose() * blocks_[i];
    rhs += blocks_[i].transpose() * targets_[i];

    double sum_sq = 0.0;
    for (int j = 0; j < n_; ++j) {
      const auto a = blocks_[i].middleRows(static_cast<Eigen::Index>(j) * rows_, rows_);
      const Eigen::MatrixXd gram = a.transpose() * a;
      const double l = symmetric_eigenvalues(gram).front();
      sum_sq += l * l;
    }
    smoothness_ = std::max(smoothness_, std::sqrt(sum_sq / n_));
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
    throw NumericalError("quadratic objective has a singular Hessian");
  minimizer_ = ldlt.solve(rhs);
  min_value_ = global_value(minimizer_);
}

double QuadraticObjective::component_value(int i, int j, const Vector &x) const {
  check_indices(i, j);
  const auto off = static_cast<Eigen::Index>(j) * rows_;
  return 0.5 * (blocks_[i].middleRows(off, rows_) * x - targets_[i].segment(off, rows_))
                   .squaredNorm();
}

void QuadraticObjective::add_component_grad(int i, int j, const Vector &x, double scale,
                                            Vector &out) const {
  check_indices(i, j);
  const auto off = static_cast<Eigen::Index>(j) * rows_;
  const auto a = blocks_[i].middleRows(off, rows_);
  const Vector r = a * x - targets_[i].segment(off, rows_);
  out.noalias() += scale * (a.transpose() * r);
}

Vector QuadraticObjective::local_grad(int i, const Vector &x) const {
  const Vector r = blocks_[i] * x - targets_[i];
  return blocks_[i].transpose() * r / n_;
}

QuadraticObjective make_quadratic(int m, int n, int d, std::uint64_t seed) {
  if (m < 1 || n < 1 || d < 1) throw ValidationError("make_quadratic needs positive m, n, d");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> block_entry(0.0, std::sqrt(0.25 / d));
  std::normal_distribution<double> target_entry(0.0, std::sqrt(0.002));
  std::vector<Matrix> blocks;
  std::vector<Vector> targets;
  for (int i = 0; i < m; ++i) {
    Matrix a(static_cast<Eigen::Index>(n) * d, d);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < d; ++c) a(r, c) = block_entry(rng);
    Vector c(a.rows());
    for (Eigen::Index r = 0; r < c.size(); ++r) c[r] = target_entry(rng);
    blocks.push_back(std::move(a));
    targets.push_back(std::move(c));
  }
  return QuadraticObjective(std::move(blocks), std::move(targets), d);
}

}  // namespace dearest
