#ifndef DEAREST_OBJECTIVE_HPP
#define DEAREST_OBJECTIVE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "dearest/types.hpp"

namespace dearest {

/// f(x) = (1/m) sum_i f_i(x),  f_i(x) = (1/n) sum_j f_ij(x).
///
/// Implementations are immutable after construction and every member is
/// safe to call concurrently.
class FiniteSumObjective {
 public:
  virtual ~FiniteSumObjective() = default;

  virtual int agents() const = 0;
  virtual int samples() const = 0;
  virtual int dim() const = 0;

  virtual double component_value(int i, int j, const Vector &x) const = 0;

  /// out += scale * grad f_ij(x)
  virtual void add_component_grad(int i, int j, const Vector &x, double scale,
                                  Vector &out) const = 0;

  Vector component_grad(int i, int j, const Vector &x) const;

  virtual double local_value(int i, const Vector &x) const;
  virtual Vector local_grad(int i, const Vector &x) const;

  /// out += (1/|batch|) sum_{j in batch} (grad f_ij(x_new) - grad f_ij(x_old)).
  /// Indices may repeat.
  virtual void add_batch_difference(int i, std::span<const int> batch, const Vector &x_new,
                                    const Vector &x_old, Vector &out) const;

  double global_value(const Vector &x) const;
  Vector global_grad(const Vector &x) const;

  /// An upper bound on the average-smoothness constant L.
  virtual double smoothness() const = 0;

  /// A lower bound on inf f, used to bound f(x0) - f*.
  virtual double lower_bound() const = 0;

 protected:
  void check_indices(int i, int j) const;
};

/// Logistic loss with the nonconvex regularizer lambda * sum_k x_k^2 / (1 + x_k^2):
///   f_ij(x) = log(1 + exp(-b_ij a_ij^T x)) + lambda * sum_k x_k^2 / (1 + x_k^2).
class LogisticNCObjective final : public FiniteSumObjective {
 public:
  using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  /// One n x d sparse feature matrix and one label vector (entries +-1) per
  /// agent. All agents must hold the same n and d.
  LogisticNCObjective(std::vector<SparseRows> features, std::vector<Vector> labels,
                      double lambda);

  int agents() const override { return static_cast<int>(features_.size()); }
  int samples() const override { return n_; }
  int dim() const override { return d_; }
  double lambda() const noexcept { return lambda_; }
  const SparseRows &features(int i) const { return features_[i]; }
  const Vector &labels(int i) const { return labels_[i]; }

  double component_value(int i, int j, const Vector &x) const override;
  void add_component_grad(int i, int j, const Vector &x, double scale,
                          Vector &out) const override;
  double local_value(int i, const Vector &x) const override;
  Vector local_grad(int i, const Vector &x) const override;
  void add_batch_difference(int i, std::span<const int> batch, const Vector &x_new,
                            const Vector &x_old, Vector &out) const override;

  /// max_i sqrt((1/n) sum_j l_ij^2) with l_ij = |a_ij|^2 / 4 + 2 lambda.
  double smoothness() const override { return smoothness_; }

  /// Every f_ij is nonnegative.
  double lower_bound() const override { return 0.0; }

  double regularizer(const Vector &x) const;
  Vector regularizer_grad(const Vector &x) const;

 private:
  std::vector<SparseRows> features_;
  std::vector<Vector> labels_;
  double lambda_;
  int n_ = 0;
  int d_ = 0;
  double smoothness_ = 0.0;
};

/// Least squares f_ij(x) = 0.5 * |A_ij x - c_ij|^2 with a closed-form
/// minimizer, used as an oracle objective.
class QuadraticObjective final : public FiniteSumObjective {
 public:
  /// `blocks[i]` stacks the n matrices A_i1..A_in (each `rows` x d) and
  /// `targets[i]` stacks c_i1..c_in.
  QuadraticObjective(std::vector<Matrix> blocks, std::vector<Vector> targets, int rows);

  int agents() const override { return static_cast<int>(blocks_.size()); }
  int samples() const override { return n_; }
  int dim() const override { return d_; }
  int rows() const noexcept { return rows_; }

  double component_value(int i, int j, const Vector &x) const override;
  void add_component_grad(int i, int j, const Vector &x, double scale,
                          Vector &out) const override;
  Vector local_grad(int i, const Vector &x) const override;

  /// max_i sqrt((1/n) sum_j lambda_max(A_ij^T A_ij)^2).
  double smoothness() const override { return smoothness_; }

  /// Exact minimum value f(x*).
  double lower_bound() const override { return min_value_; }
  const Vector &minimizer() const noexcept { return minimizer_; }

 private:
  std::vector<Matrix> blocks_;
  std::vector<Vector> targets_;
  int rows_;
  int n_ = 0;
  int d_ = 0;
  double smoothness_ = 0.0;
  Vector minimizer_;
  double min_value_ = 0.0;
};

/// Seeded random least-squares instance with square d x d blocks. Block
/// entries are N(0, 0.25 / d) and target entries N(0, 0.002), which keeps
/// L near 1 and f(0) - f* small enough for desk-scale runs.
QuadraticObjective make_quadratic(int m, int n, int d, std::uint64_t seed);

}  // namespace dearest

#endif  // DEAREST_OBJECTIVE_HPP
