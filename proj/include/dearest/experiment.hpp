#ifndef DEAREST_EXPERIMENT_HPP
#define DEAREST_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dearest/optimizer.hpp"

namespace dearest {

/// Flat `key = value` experiment description.
///
///   objective = logistic | quadratic          (required)
///   topology  = ring | complete | path | random | file   (required)
///   m         = agent count >= 2              (required)
///   epsilon   = target stationarity           (required)
///   seeds     = comma-separated run seeds     (required)
///   dataset   = LIBSVM path or `synthetic`    (logistic)
///   dim       = feature dimension override
///   samples, features   size of the synthetic logistic set
///   n, d      = per-agent components and dimension (quadratic)
///   normalize = true | false                  unit-norm rows (default false)
///   lambda    = regularization weight (default 1e-4)
///   edge_prob = edge probability for `random`
///   graph     = edge-list path for `file`
///   data_seed = seed for synthetic data, partition and random graph
///   eta, b, p, big_k, hat_k, k_in, t_max      override derived values
///   output_dir, telemetry_stride, threads, output_draws
struct ExperimentSpec {
  std::string objective;
  std::string topology;
  int m = 0;
  double epsilon = 0.0;
  std::vector<std::uint64_t> seeds;

  std::string dataset;
  std::optional<int> dim;
  int synthetic_samples = 0;
  int synthetic_features = 0;
  int n = 0;
  int d = 0;
  bool normalize = false;
  double lambda = 1e-4;
  double edge_prob = 0.0;
  std::string graph;
  std::uint64_t data_seed = 1;

  std::optional<double> eta;
  std::optional<int> b;
  std::optional<double> p;
  std::optional<int> big_k;
  std::optional<int> hat_k;
  std::optional<int> k_in;
  std::optional<long long> t_max;

  std::string output_dir = ".";
  long long telemetry_stride = 1;
  int threads = 1;
  int output_draws = 1;
};

/// Throws ConfigError naming the key and line for unknown keys, repeated keys
/// and values of the wrong type; a description without the required keys
/// is rejected with the list of missing ones.
ExperimentSpec parse_spec(std::istream &in);
ExperimentSpec load_spec(const std::string &path);

/// Environment variable that replaces `output_dir` when set.
inline constexpr const char *kOutputDirEnv = "DEAREST_OUTPUT_DIR";

struct SummaryRow {
  std::uint64_t seed = 0;
  int m = 0;
  int n = 0;
  int d = 0;
  long long t_max = 0;
  double grad_norm_out = 0.0;
  double f_out = 0.0;
  long long ifo = 0;
  long long ifo_evaluations = 0;
  long long comm_rounds = 0;       // one charge of K_t per step
  long long comm_rounds_both = 0;  // x-mix and s-mix charged separately
  long long gossip_products = 0;
  double wall_seconds = 0.0;
};

inline constexpr const char *kSummaryHeader =
    "seed,m,n,d,t_max,grad_norm_out,f_out,ifo,ifo_evaluations,comm_rounds,comm_rounds_both,"
    "gossip_products,wall_seconds";

/// The configuration `run_experiment` would use, before seeds are assigned.
RunConfig resolve_config(const ExperimentSpec &spec, const FiniteSumObjective &obj,
                         const GossipMatrix &w, const Vector &x0_bar);

/// Builds the instance, runs every seed and writes telemetry_<seed>.csv and
/// summary.csv. Nothing is written unless every seed completes. Throws on
/// any error.
std::vector<SummaryRow> execute_experiment(const ExperimentSpec &spec, std::ostream &log);

/// execute_experiment with errors reported on `err`; returns the exit code.
int run_experiment(const ExperimentSpec &spec, std::ostream &log, std::ostream &err);

}  // namespace dearest

#endif  // DEAREST_EXPERIMENT_HPP
