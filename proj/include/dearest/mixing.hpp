#ifndef DEAREST_MIXING_HPP
#define DEAREST_MIXING_HPP

#include "dearest/topology.hpp"
#include "dearest/types.hpp"

namespace dearest {

struct MixResult {
  Matrix u;
  int rounds_used = 0;  // multiplications by W actually performed
};

/// Momentum of the Chebyshev recurrence,
/// (1 - sqrt(1 - lambda2^2)) / (1 + sqrt(1 - lambda2^2)).
double chebyshev_momentum(double lambda2);

/// (1 - sqrt(1 - lambda2))^k, the consensus contraction guaranteed per call.
double contraction_factor(double lambda2, int k);

/// Chebyshev-accelerated gossip (FastMix).
///
/// Starting from u(-1) = u(0) = u0 it iterates
///   u(k+1) = (1 + eta_u) W u(k) - eta_u u(k-1)
/// for k = 0, 1, ..., K and returns the last iterate, so K >= 1 costs K + 1
/// multiplications by W. K = 0 returns u0 untouched. Column means are
/// preserved exactly up to rounding.
///
/// Throws ValidationError if u0 has the wrong number of rows, K < 0, or
/// lambda2(W) is outside [0, 1).
MixResult fastmix(const Matrix &u0, const GossipMatrix &w, int k);

}  // namespace dearest

#endif  // DEAREST_MIXING_HPP
