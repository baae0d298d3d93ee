#include "dearest/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "dearest/error.hpp"
#include "dearest/mixing.hpp"

namespace dearest {

namespace {

constexpr double kDivergenceNorm = 1e12;

std::uint64_t derive_seed(std::uint64_t base, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32), tag};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// Runs fn(i) for every agent. Agents are split into contiguous blocks, one per
// worker; each fn(i) touches only row i, so the result does not depend on
// the worker count.
template <class Fn>
void for_each_agent(int m, int threads, Fn &&fn) {
  const int workers = std::min(threads, m);
  if (workers <= 1) {
    for (int i = 0; i < m; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      const int lo = static_cast<int>(static_cast<long long>(m) * w / workers);
      const int hi = static_cast<int>(static_cast<long long>(m) * (w + 1) / workers);
      pool.emplace_back([&, w, lo, hi] {
        try {
          for (int i = lo; i < hi; ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

void exact_local_grads(const FiniteSumObjective &obj, const Matrix &x, int threads, Matrix &out) {
  for_each_agent(static_cast<int>(x.rows()), threads, [&](int i) {
    out.row(i) = obj.local_grad(i, x.row(i).transpose()).transpose();
  });
}

void check_finite(const AggregateState &state) {
  if (!state.x.allFinite() || !state.g.allFinite() || !state.s.allFinite())
    throw DivergenceError("non-finite entry in the iterate, estimator or tracker", state.t);
  const double norm = state.x.norm();
  if (norm > kDivergenceNorm)
    throw DivergenceError("|x|_F = " + std::to_string(norm) + " exceeds 1e12", state.t);
}

}  // namespace

void RunConfig::validate(int m) const {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p must lie in (0, 1], got " + std::to_string(p));
  if (b < 1) throw ConfigError("mini-batch size b must be >= 1, got " + std::to_string(b));
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw ConfigError("stepsize eta must be positive and finite, got " + std::to_string(eta));
  if (hat_k < 0) throw ConfigError("K_hat must be >= 0");
  if (big_k < hat_k)
    throw ConfigError("K (" + std::to_string(big_k) + ") must be >= K_hat (" +
                      std::to_string(hat_k) + ")");
  if (k_in < 0) throw ConfigError("K_in must be >= 0");
  if (t_max < 0) throw ConfigError("T must be >= 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (static_cast<int>(agent_seeds.size()) != m)
    throw ConfigError("expected " + std::to_string(m) + " agent seeds, got " +
                      std::to_string(agent_seeds.size()));
}

void assign_seeds(RunConfig &cfg, std::uint64_t base_seed, int m) {
  cfg.shared_seed = derive_seed(base_seed, 0);
  cfg.output_seed = derive_seed(base_seed, 1);
  cfg.agent_seeds.resize(static_cast<std::size_t>(std::max(m, 0)));
  for (int i = 0; i < m; ++i)
    cfg.agent_seeds[i] = derive_seed(base_seed, 2 + static_cast<std::uint32_t>(i));
}

RunConfig theorem1_config(int m, int n, double L, double lambda2, double epsilon,
                          double delta0, double g0_consensus_sq) {
  if (m < 1 || n < 1) throw ConfigError("m and n must be positive");
  if (!(L > 0.0) || !std::isfinite(L))
    throw ConfigError("smoothness L must be positive, got " + std::to_string(L));
  if (!(lambda2 >= 0.0 && lambda2 < 1.0))
    throw ConfigError("lambda2 must lie in [0, 1), got " + std::to_string(lambda2));
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(delta0 >= 0.0) || !std::isfinite(delta0))
    throw ConfigError("f(x0) - f* bound must be a finite nonnegative number");

  RunConfig cfg;
  const double root_gap = std::sqrt(1.0 - lambda2);
  cfg.eta = 1.0 / (2.0 * L);
  cfg.b = static_cast<int>(std::ceil(6.0 * std::sqrt(static_cast<double>(n) / m)));
  cfg.p = static_cast<double>(cfg.b) / (cfg.b + n);

  const double horizon = std::ceil(16.0 * L * delta0 / (epsilon * epsilon));
  if (!(horizon < 1e15)) throw ConfigError("iteration count T overflows");
  cfg.t_max = std::max(1LL, static_cast<long long>(horizon));

  const double mn = static_cast<double>(m) * n;
  const double log_term = std::log((std::sqrt(mn) + 6.0) / (24.0 * m));
  cfg.big_k = static_cast<int>(std::ceil(std::max(12.0, log_term) / (2.0 * root_gap)));
  cfg.hat_k = static_cast<int>(std::ceil(6.0 / root_gap));
  cfg.big_k = std::max(cfg.big_k, cfg.hat_k);

  if (g0_consensus_sq > 0.0) {
    const double k_in = std::ceil(std::log(g0_consensus_sq / (m * epsilon * epsilon)) / root_gap);
    cfg.k_in = k_in > 0.0 ? static_cast<int>(k_in) : 0;
  }
  cfg.epsilon = epsilon;
  return cfg;
}

RunConfig theorem1_config_for(const FiniteSumObjective &obj, const GossipMatrix &w,
                              const Vector &x0_bar, double epsilon) {
  const int m = obj.agents();
  if (w.size() != m) throw ValidationError("gossip matrix size does not match agent count");
  if (x0_bar.size() != obj.dim()) throw ValidationError("x0 has the wrong dimension");
  const double delta0 = std::max(0.0, obj.global_value(x0_bar) - obj.lower_bound());
  Matrix g0(m, obj.dim());
  for (int i = 0; i < m; ++i) g0.row(i) = obj.local_grad(i, x0_bar).transpose();
  return theorem1_config(m, obj.samples(), obj.smoothness(), w.lambda2(), epsilon, delta0,
                         consensus_distance_sq(g0));
}

AggregateState init(const FiniteSumObjective &obj, const GossipMatrix &w, const RunConfig &cfg,
                    const Vector &x0_bar) {
  const int m = obj.agents();
  const int n = obj.samples();
  if (w.size() != m)
    throw ValidationError("gossip matrix has " + std::to_string(w.size()) +
                          " agents, objective has " + std::to_string(m));
  if (x0_bar.size() != obj.dim())
    throw ValidationError("x0 has dimension " + std::to_string(x0_bar.size()) + ", expected " +
                          std::to_string(obj.dim()));
  cfg.validate(m);

  AggregateState st;
  st.x = x0_bar.transpose().replicate(m, 1);
  st.g.resize(m, obj.dim());
  exact_local_grads(obj, st.x, cfg.threads, st.g);
  auto mixed = fastmix(st.g, w, cfg.k_in);
  st.s = std::move(mixed.u);

  st.ifo_count = static_cast<long long>(m) * n;
  st.ifo_evaluations = st.ifo_count;
  st.comm_rounds = cfg.k_in;
  st.comm_rounds_both = cfg.k_in;
  st.gossip_products = mixed.rounds_used;
  st.last_y = 1;
  st.last_k = cfg.k_in;

  st.streams.shared.seed(cfg.shared_seed);
  st.streams.agents.clear();
  for (auto seed : cfg.agent_seeds) st.streams.agents.emplace_back(seed);
  return st;
}

int draw_refresh(AggregateState &state, const RunConfig &cfg) {
  if (cfg.p >= 1.0) return 1;
  std::bernoulli_distribution coin(cfg.p);
  return coin(state.streams.shared) ? 1 : 0;
}

Matrix estimator_update(AggregateState &state, const FiniteSumObjective &obj,
                        const RunConfig &cfg, int y, const Matrix &x_next) {
  const int m = state.agents();
  const int n = obj.samples();
  Matrix g_next(m, state.dim());
  if (y == 1) {
    exact_local_grads(obj, x_next, cfg.threads, g_next);
    state.ifo_count += static_cast<long long>(m) * n;
    state.ifo_evaluations += static_cast<long long>(m) * n;
    return g_next;
  }

  for_each_agent(m, cfg.threads, [&](int i) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<int> batch(static_cast<std::size_t>(cfg.b));
    for (int &j : batch) j = pick(state.streams.agents[i]);
    Vector acc = state.g.row(i).transpose();
    obj.add_batch_difference(i, batch, x_next.row(i).transpose(), state.x.row(i).transpose(),
                             acc);
    g_next.row(i) = acc.transpose();
  });
  state.ifo_count += static_cast<long long>(m) * cfg.b;
  state.ifo_evaluations += 2LL * m * cfg.b;
  return g_next;
}

void step(AggregateState &state, const FiniteSumObjective &obj, const GossipMatrix &w,
          const RunConfig &cfg) {
  const int y = draw_refresh(state, cfg);
  const int k = y == 1 ? cfg.big_k : cfg.hat_k;

  auto x_mix = fastmix(state.x - cfg.eta * state.s, w, k);
  Matrix g_next = estimator_update(state, obj, cfg, y, x_mix.u);
  auto s_mix = fastmix(state.s + g_next - state.g, w, k);

  state.x = std::move(x_mix.u);
  state.g = std::move(g_next);
  state.s = std::move(s_mix.u);
  ++state.t;
  state.comm_rounds += k;
  state.comm_rounds_both += 2LL * k;
  state.gossip_products += x_mix.rounds_used + s_mix.rounds_used;
  state.last_y = y;
  state.last_k = k;
  check_finite(state);
}

IterateHistory::IterateHistory(std::vector<Site> sites, bool keep_all)
    : sites_(std::move(sites)), draws_(sites_.size()), keep_all_(keep_all) {}

void IterateHistory::record(long long t, const Matrix &x) {
  if (keep_all_) snapshots_.push_back(x);
  for (std::size_t k = 0; k < sites_.size(); ++k)
    if (sites_[k].t == t) draws_[k] = x.row(sites_[k].agent).transpose();
  recorded_ = std::max(recorded_, t + 1);
}

Vector IterateHistory::at(long long t, int agent) const {
  if (!keep_all_) throw ValidationError("iterate history keeps only the sampled rows");
  const auto &snap = snapshots_.at(static_cast<std::size_t>(t));
  if (agent < 0 || agent >= snap.rows()) throw ValidationError("agent index out of range");
  return snap.row(agent).transpose();
}

RunResult run(const FiniteSumObjective &obj, const GossipMatrix &w, const RunConfig &cfg,
              const Vector &x0_bar, const RunOptions &options) {
  const int m = obj.agents();
  const long long horizon = cfg.t_max;
  if (horizon <= 0) throw ConfigError("T = 0 leaves the output set empty");
  if (options.output_draws < 1) throw ConfigError("need at least one output draw");

  AggregateState state = init(obj, w, cfg, x0_bar);

  std::mt19937_64 out_rng(cfg.output_seed);
  std::uniform_int_distribution<long long> pick(0, horizon * m - 1);
  std::vector<IterateHistory::Site> sites;
  for (int k = 0; k < options.output_draws; ++k) {
    const long long flat = pick(out_rng);
    sites.push_back({flat / m, static_cast<int>(flat % m)});
  }
  const double full_size = static_cast<double>(horizon) * m * obj.dim();
  RunResult result;
  result.history = IterateHistory(std::move(sites),
                                  full_size <= static_cast<double>(options.history_budget));

  const long long stride = options.telemetry_stride;
  auto maybe_record = [&](bool force) {
    if (stride > 0 && (force || state.t % stride == 0))
      result.telemetry.push_back(make_record(state, obj, cfg));
  };

  if (options.observer) options.observer(state);
  for (long long t = 0; t < horizon; ++t) {
    result.history.record(t, state.x);
    maybe_record(false);
    step(state, obj, w, cfg);
    if (options.observer) options.observer(state);
  }
  maybe_record(true);

  for (std::size_t k = 0; k < result.history.sites().size(); ++k)
    result.draws.push_back(result.history.draw(k));
  result.x_out = result.draws.front();
  result.final_state = std::move(state);
  return result;
}

}  // namespace dearest
