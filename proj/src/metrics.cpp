#include "dearest/metrics.hpp"

#include <charconv>
#include <ostream>
#include <string>

namespace dearest {

namespace {

struct EstimationErrors {
  double u;
  double v;
};

EstimationErrors estimation_errors(const AggregateState &state, const FiniteSumObjective &obj) {
  const int m = state.agents();
  Vector mean_err = Vector::Zero(state.dim());
  double sq_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const Vector err = state.g.row(i).transpose() - obj.local_grad(i, state.x.row(i).transpose());
    mean_err += err;
    sq_sum += err.squaredNorm();
  }
  mean_err /= m;
  return {mean_err.squaredNorm(), sq_sum / m};
}

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

double global_estimation_error(const AggregateState &state, const FiniteSumObjective &obj) {
  return estimation_errors(state, obj).u;
}

double local_estimation_error(const AggregateState &state, const FiniteSumObjective &obj) {
  return estimation_errors(state, obj).v;
}

double consensus_error(const AggregateState &state, double eta) {
  return consensus_distance_sq(state.x) + eta * eta * consensus_distance_sq(state.s);
}

double lyapunov(const AggregateState &state, const FiniteSumObjective &obj,
                const RunConfig &cfg) {
  return make_record(state, obj, cfg).phi_t;
}

TelemetryRecord make_record(const AggregateState &state, const FiniteSumObjective &obj,
                            const RunConfig &cfg) {
  TelemetryRecord rec;
  rec.t = state.t;
  rec.y_t = state.last_y;
  rec.k_t = state.last_k;
  const Vector xbar = row_mean(state.x);
  rec.f_bar = obj.global_value(xbar);
  rec.grad_norm = obj.global_grad(xbar).norm();
  const auto [u, v] = estimation_errors(state, obj);
  rec.u_t = u;
  rec.v_t = v;
  rec.c_t = consensus_error(state, cfg.eta);
  rec.phi_t = rec.f_bar + (cfg.eta / cfg.p) * (u + v) + rec.c_t / (state.agents() * cfg.eta);
  rec.ifo_cum = state.ifo_count;
  rec.comm_cum = state.comm_rounds;
  return rec;
}

void write_telemetry_csv(std::ostream &out, const std::vector<TelemetryRecord> &records) {
  out << kTelemetryHeader << '\n';
  for (const auto &r : records) {
    out << r.t << ',' << r.y_t << ',' << r.k_t << ',' << fmt(r.f_bar) << ',' << fmt(r.grad_norm)
        << ',' << fmt(r.u_t) << ',' << fmt(r.v_t) << ',' << fmt(r.c_t) << ',' << fmt(r.phi_t)
        << ',' << r.ifo_cum << ',' << r.comm_cum << '\n';
  }
}

}  // namespace dearest
