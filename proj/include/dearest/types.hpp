#ifndef DEAREST_TYPES_HPP
#define DEAREST_TYPES_HPP

#include <Eigen/Core>

namespace dearest {

/// Aggregate variables are stored one agent per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Column means of an m x d aggregate, i.e. the network average.
inline Vector row_mean(const Matrix &u) { return u.colwise().mean().transpose(); }

/// Squared Frobenius distance of an aggregate from its consensus 1 * mean^T.
inline double consensus_distance_sq(const Matrix &u) {
  const Eigen::RowVectorXd mean = u.colwise().mean();
  return (u.rowwise() - mean).squaredNorm();
}

}  // namespace dearest

#endif  // DEAREST_TYPES_HPP
