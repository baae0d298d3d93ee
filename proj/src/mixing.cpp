#include "dearest/mixing.hpp"

#include <cmath>
#include <string>

#include "dearest/error.hpp"

namespace dearest {

namespace {

constexpr double kLambdaFloor = 1e-15;

double checked_lambda2(double lambda2) {
  if (std::abs(lambda2) < kLambdaFloor) return 0.0;
  if (!(lambda2 >= 0.0 && lambda2 < 1.0))
    throw ValidationError("FastMix needs lambda2(W) in [0, 1), got " + std::to_string(lambda2));
  return lambda2;
}

}  // namespace

double chebyshev_momentum(double lambda2) {
  const double l2 = checked_lambda2(lambda2);
  const double r = std::sqrt(1.0 - l2 * l2);
  return (1.0 - r) / (1.0 + r);
}

double contraction_factor(double lambda2, int k) {
  return std::pow(1.0 - std::sqrt(1.0 - checked_lambda2(lambda2)), k);
}

MixResult fastmix(const Matrix &u0, const GossipMatrix &w, int k) {
  if (u0.rows() != w.size())
    throw ValidationError("FastMix input has " + std::to_string(u0.rows()) +
                          " rows but the gossip matrix has " + std::to_string(w.size()));
  if (k < 0) throw ValidationError("FastMix round count must be nonnegative");
  const double eta = chebyshev_momentum(w.lambda2());
  if (k == 0) return {u0, 0};

  const auto &sw = w.sparse();
  Matrix prev = u0;
  Matrix cur = u0;
  Matrix next(u0.rows(), u0.cols());
  for (int step = 0; step <= k; ++step) {
    next.noalias() = sw * cur;
    next = (1.0 + eta) * next - eta * prev;
    prev.swap(cur);
    cur.swap(next);
  }
  return {std::move(cur), k + 1};
}

}  // namespace dearest
