#ifndef DEAREST_OPTIMIZER_HPP
#define DEAREST_OPTIMIZER_HPP

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "dearest/metrics.hpp"
#include "dearest/objective.hpp"
#include "dearest/state.hpp"
#include "dearest/topology.hpp"

namespace dearest {

/// Decentralized probabilistic recursive gradient descent with gradient
/// tracking and Chebyshev multi-consensus.
///
/// Every agent holds a row of x (iterate), g (local gradient estimator) and
/// s (tracker of the network-average estimator). One iteration:
///
///   y_t ~ Bernoulli(p), drawn from a stream shared by all agents
///   K_t = K if y_t = 1 else K_hat
///   x_{t+1} = FastMix(x_t - eta s_t, K_t)
///   g_{t+1}(i) = grad f_i(x_{t+1}(i))                                if y_t = 1
///              = g_t(i) + (1/b) sum_j [grad f_{i,xi_j}(x_{t+1}(i))
///                                      - grad f_{i,xi_j}(x_t(i))]    otherwise
///   s_{t+1} = FastMix(s_t + g_{t+1} - g_t, K_t)
///
/// Since FastMix preserves column means, sbar_t = gbar_t and
/// xbar_{t+1} = xbar_t - eta sbar_t hold along every sample path.

/// Stepsize, batch, probability, round counts and horizon that guarantee
/// E|grad f(x_out)| <= epsilon:
///   eta = 1/(2L), b = ceil(6 sqrt(n/m)), p = b/(b+n),
///   T = ceil(16 L delta0 / epsilon^2),
///   K = ceil(max{12, ln((sqrt(mn)+6)/(24m))} / (2 sqrt(1-lambda2))),
///   K_hat = ceil(6 / sqrt(1-lambda2)),
///   K_in = max(0, ceil(ln(g0_consensus_sq / (m epsilon^2)) / sqrt(1-lambda2))).
/// `delta0` bounds f(xbar_0) - f*; `g0_consensus_sq` is |g_0 - 1 gbar_0|^2.
/// T is at least 1. Seeds are left at their defaults; see assign_seeds.
///
/// Throws ConfigError if L <= 0, lambda2 is outside [0, 1), epsilon <= 0 or
/// delta0 < 0.
RunConfig theorem1_config(int m, int n, double L, double lambda2, double epsilon,
                          double delta0, double g0_consensus_sq);

/// theorem1_config with L, delta0 = f(x0_bar) - obj.lower_bound() and the
/// initial gradient disagreement taken from the instance.
RunConfig theorem1_config_for(const FiniteSumObjective &obj, const GossipMatrix &w,
                              const Vector &x0_bar, double epsilon);

/// x_0 = 1 x0_bar^T, g_0 = exact local gradients (n IFO per agent),
/// s_0 = FastMix(g_0, K_in). Random streams are seeded from `cfg`.
AggregateState init(const FiniteSumObjective &obj, const GossipMatrix &w, const RunConfig &cfg,
                    const Vector &x0_bar);

/// Draws y_t from the shared stream.
int draw_refresh(AggregateState &state, const RunConfig &cfg);

/// g_{t+1} for the given switch and next iterate. Mini-batch indices come
/// from each agent's private stream (uniform, with replacement). Charges
/// n IFO per agent on refresh and b IFO per agent otherwise.
Matrix estimator_update(AggregateState &state, const FiniteSumObjective &obj,
                        const RunConfig &cfg, int y, const Matrix &x_next);

/// One full iteration. Throws DivergenceError if any entry becomes
/// non-finite or |x|_F exceeds 1e12.
void step(AggregateState &state, const FiniteSumObjective &obj, const GossipMatrix &w,
          const RunConfig &cfg);

/// Snapshots needed to realize the uniform output rule over
/// {x_t(i) : t < T, i < m}. Keeps every x_t when that fits the budget,
/// otherwise only the rows selected for output.
class IterateHistory {
 public:
  struct Site {
    long long t;
    int agent;
    bool operator==(const Site &) const = default;
  };

  IterateHistory() = default;
  IterateHistory(std::vector<Site> sites, bool keep_all);

  void record(long long t, const Matrix &x);

  bool keeps_all() const noexcept { return keep_all_; }
  long long recorded() const noexcept { return recorded_; }
  const std::vector<Site> &sites() const noexcept { return sites_; }
  /// Row selected by the k-th output draw.
  const Vector &draw(std::size_t k) const { return draws_.at(k); }
  /// Full-mode access to x_t(i).
  Vector at(long long t, int agent) const;

 private:
  std::vector<Site> sites_;
  std::vector<Vector> draws_;
  std::vector<Matrix> snapshots_;
  bool keep_all_ = false;
  long long recorded_ = 0;
};

struct RunOptions {
  long long telemetry_stride = 1;  // 0 disables telemetry
  int output_draws = 1;
  std::size_t history_budget = std::size_t{1} << 24;  // doubles kept for full history
  /// Called after initialization and after every step.
  std::function<void(const AggregateState &)> observer;
};

struct RunResult {
  Vector x_out;
  std::vector<Vector> draws;  // all output draws; draws[0] == x_out
  IterateHistory history;
  std::vector<TelemetryRecord> telemetry;
  AggregateState final_state;
};

/// Runs T = cfg.t_max iterations and samples x_out uniformly from the m*T
/// iterates x_t(i), t < T, using cfg.output_seed. Telemetry is recorded at
/// every `telemetry_stride`-th iteration and at t = T.
///
/// Throws ConfigError if T = 0 (empty output set).
RunResult run(const FiniteSumObjective &obj, const GossipMatrix &w, const RunConfig &cfg,
              const Vector &x0_bar, const RunOptions &options = {});

}  // namespace dearest

#endif  // DEAREST_OPTIMIZER_HPP
