#ifndef DEAREST_METRICS_HPP
#define DEAREST_METRICS_HPP

#include <iosfwd>
#include <vector>

#include "dearest/objective.hpp"
#include "dearest/state.hpp"

namespace dearest {

// Diagnostics evaluate exact gradients out of band; none of them touch the
// IFO or communication counters of the state.

/// U_t = |(1/m) sum_i (g_t(i) - grad f_i(x_t(i)))|^2
double global_estimation_error(const AggregateState &state, const FiniteSumObjective &obj);

/// V_t = (1/m) |g_t - grad f(x_t)|_F^2, the realized (sample-path) value.
double local_estimation_error(const AggregateState &state, const FiniteSumObjective &obj);

/// C_t = |x_t - 1 xbar_t|^2 + eta^2 |s_t - 1 sbar_t|^2
double consensus_error(const AggregateState &state, double eta);

/// Phi_t = f(xbar_t) + (eta/p) U_t + (eta/p) V_t + C_t / (m eta)
double lyapunov(const AggregateState &state, const FiniteSumObjective &obj,
                const RunConfig &cfg);

struct TelemetryRecord {
  long long t = 0;
  int y_t = 0;  // refresh switch of the step that produced x_t (1 at t = 0)
  int k_t = 0;  // rounds charged for that step (K_in at t = 0)
  double f_bar = 0.0;
  double grad_norm = 0.0;  // |grad f(xbar_t)|
  double u_t = 0.0;
  double v_t = 0.0;
  double c_t = 0.0;
  double phi_t = 0.0;
  long long ifo_cum = 0;
  long long comm_cum = 0;  // K_t charged once per step
};

/// All diagnostics of one state from a single pass over the exact local
/// gradients.
TelemetryRecord make_record(const AggregateState &state, const FiniteSumObjective &obj,
                            const RunConfig &cfg);

inline constexpr const char *kTelemetryHeader =
    "t,y_t,k_t,f_bar,grad_norm,u_t,v_t,c_t,phi_t,ifo_cum,comm_cum";

/// Header line followed by one row per record; reals use the shortest
/// round-trip representation, so equal records give byte-equal files.
void write_telemetry_csv(std::ostream &out, const std::vector<TelemetryRecord> &records);

}  // namespace dearest

#endif  // DEAREST_METRICS_HPP
