#pragma once

// Time-ordered propagation by exponential midpoint steps,
//   U = prod_n exp(-i H(t_n + dt/2) dt),
// which is second-order accurate and unitary to rounding at every step.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tpump/linalg.hpp"

namespace tpump {

using Generator = std::function<CMat(double)>;

struct PropagatorConfig {
  int steps_per_cycle = 4096;
  double unitarity_tol = 1e-9;
  // Length of one cycle. When positive, an interval of length T gets
  // steps_per_cycle * T / cycle steps; otherwise the interval itself counts
  // as one cycle.
  double cycle = 0.0;

  void validate() const {
    if (steps_per_cycle < 64) throw ConfigError("steps_per_cycle must be at least 64");
    if (!(unitarity_tol > 0.0)) throw ConfigError("unitarity_tol must be positive");
  }

  long steps_for(double t0, double t1) const {
    if (cycle <= 0.0) return steps_per_cycle;
    return std::max(1L, std::lround(steps_per_cycle * (t1 - t0) / cycle));
  }
};

namespace detail {

inline CMat checked_sample(const Generator& gen, double t) {
  CMat h = gen(t);
  require_hermitian(h, 1e-10, "propagate");
  return h;
}

inline void check_unitary(const CMat& u, const PropagatorConfig& cfg, double t) {
  const double d = unitarity_defect(u);
  if (d > cfg.unitarity_tol)
    throw NumericalError("propagate: unitarity defect " + std::to_string(d) + " at t=" +
                         std::to_string(t));
}

/// exp(-i H dt), reusing the previous step when the sampled generator has
/// not changed (frozen schedules).
class StepCache {
 public:
  const CMat& step(const CMat& h, double dt) {
    if (!(h.rows() == last_h_.rows() && h == last_h_ && dt == last_dt_)) {
      last_h_ = h;
      last_dt_ = dt;
      step_ = expm_hermitian(h, dt);
    }
    return step_;
  }

 private:
  CMat last_h_, step_;
  double last_dt_ = 0.0;
};

}  // namespace detail

/// Propagator from t0 to t1.
inline CMat propagate(const Generator& gen, double t0, double t1, const PropagatorConfig& cfg) {
  cfg.validate();
  if (!(t1 > t0)) throw ValidationError("propagate: t1 must exceed t0");
  const long n = cfg.steps_for(t0, t1);
  const double dt = (t1 - t0) / static_cast<double>(n);
  CMat u;
  detail::StepCache cache;
  for (long s = 0; s < n; ++s) {
    const double tm = t0 + (static_cast<double>(s) + 0.5) * dt;
    const CMat& step = cache.step(detail::checked_sample(gen, tm), dt);
    u = (s == 0) ? step : CMat(step * u);
  }
  detail::check_unitary(u, cfg, t1);
  return u;
}

/// Propagators U(t_i, t0) at the n_out + 1 equally spaced times
/// t_i = t0 + i (t1 - t0) / n_out; the first entry is the identity.
/// All checkpoints lie on one uniform step grid.
inline std::vector<CMat> propagate_series(const Generator& gen, double t0, double t1, int n_out,
                                          const PropagatorConfig& cfg) {
  cfg.validate();
  if (!(t1 > t0)) throw ValidationError("propagate_series: t1 must exceed t0");
  if (n_out < 1) throw ValidationError("propagate_series: need at least one output interval");
  const long per = std::max(1L, std::lround(static_cast<double>(cfg.steps_for(t0, t1)) / n_out));
  const long n = per * n_out;
  const double dt = (t1 - t0) / static_cast<double>(n);

  const Eigen::Index d = gen(t0).rows();
  std::vector<CMat> out;
  out.reserve(static_cast<std::size_t>(n_out) + 1);
  CMat u = CMat::Identity(d, d);
  out.push_back(u);
  detail::StepCache cache;
  for (long s = 0; s < n; ++s) {
    const double tm = t0 + (static_cast<double>(s) + 0.5) * dt;
    u = cache.step(detail::checked_sample(gen, tm), dt) * u;
    if ((s + 1) % per == 0) {
      detail::check_unitary(u, cfg, tm + 0.5 * dt);
      out.push_back(u);
    }
  }
  return out;
}

}  // namespace tpump
