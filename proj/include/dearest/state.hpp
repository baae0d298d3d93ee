#ifndef DEAREST_STATE_HPP
#define DEAREST_STATE_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "dearest/types.hpp"

namespace dearest {

/// Hyperparameters of one run. Field names follow their role: `big_k` is the
/// round count after a full refresh, `hat_k` the count after a mini-batch
/// step, `k_in` the count used once at initialization.
struct RunConfig {
  double eta = 0.0;
  int b = 1;
  double p = 1.0;
  int big_k = 1;
  int hat_k = 1;
  int k_in = 0;
  long long t_max = 0;
  double epsilon = 0.0;

  std::uint64_t shared_seed = 0;            // Bernoulli refresh switch, shared by all agents
  std::vector<std::uint64_t> agent_seeds;   // private mini-batch sampling, one per agent
  std::uint64_t output_seed = 0;            // selection of x_out

  int threads = 1;  // agent-level parallelism; results do not depend on it

  /// Throws ConfigError unless 0 < p <= 1, b >= 1, eta > 0, big_k >= hat_k >= 0,
  /// k_in >= 0, t_max >= 0, threads >= 1 and there are exactly m agent seeds.
  void validate(int m) const;
};

/// Fills shared_seed, agent_seeds and output_seed from one base seed.
void assign_seeds(RunConfig &cfg, std::uint64_t base_seed, int m);

struct RandomStreams {
  std::mt19937_64 shared;
  std::vector<std::mt19937_64> agents;
};

/// Aggregate iterate x_t, estimators g_t and trackers s_t (one agent per row)
/// plus the oracle and communication counters.
struct AggregateState {
  Matrix x;
  Matrix g;
  Matrix s;
  long long t = 0;

  long long ifo_count = 0;        // paired differences charged once
  long long ifo_evaluations = 0;  // every component gradient evaluated
  long long comm_rounds = 0;      // K_in + sum_t K_t (one charge per step)
  long long comm_rounds_both = 0; // K_in + sum_t 2 K_t (x-mix and s-mix charged separately)
  long long gossip_products = 0;  // multiplications by W actually performed

  int last_y = 1;  // switch of the step that produced this state; 1 at t = 0
  int last_k = 0;  // round count of that step; K_in at t = 0

  RandomStreams streams;

  int agents() const noexcept { return static_cast<int>(x.rows()); }
  int dim() const noexcept { return static_cast<int>(x.cols()); }
};

}  // namespace dearest

#endif  // DEAREST_STATE_HPP
