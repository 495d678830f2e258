#pragma once

// Bloch Hamiltonians, pump schedules and the momentum grid.

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "tpump/linalg.hpp"

namespace tpump {

/// Instantaneous Rice-Mele parameters.
struct RmParams {
  double t1 = 0.0;
  double t2 = 0.0;
  double delta = 0.0;
};

/// Two-band Rice-Mele Bloch matrix
///   [[ delta,              -t1 - t2 e^{-ik} ],
///    [ -t1 - t2 e^{ik},    -delta           ]].
inline CMat rmm_bloch(double k, double t1, double t2, double delta) {
  CMat h(2, 2);
  const cplx off = -t1 - t2 * std::exp(-I * k);
  h(0, 0) = delta;
  h(0, 1) = off;
  h(1, 0) = std::conj(off);
  h(1, 1) = -delta;
  return h;
}

inline CMat rmm_bloch(double k, const RmParams& p) { return rmm_bloch(k, p.t1, p.t2, p.delta); }

enum class ScheduleVariant { fig2, fig3, custom };

inline std::string to_string(ScheduleVariant v) {
  switch (v) {
    case ScheduleVariant::fig2: return "fig2";
    case ScheduleVariant::fig3: return "fig3";
    case ScheduleVariant::custom: return "custom";
  }
  return "?";
}

/// A closed cycle t -> (t1, t2, delta) with period tau.
struct PumpSchedule {
  double tau = 1.0;
  ScheduleVariant variant = ScheduleVariant::custom;
  double omega0 = 1.0;  // energy scale of the fig2 cycle; unused otherwise
  std::function<RmParams(double)> params;

  /// Parameters at t reduced modulo tau.
  RmParams at(double t) const {
    double s = std::fmod(t, tau);
    if (s < 0) s += tau;
    return params(s);
  }
};

/// t_{1,2} = -(omega0/4)(1 +- cos(2 pi t/tau)), delta = (omega0/2) sin(2 pi t/tau)
inline PumpSchedule fig2_schedule(double omega0, double tau) {
  PumpSchedule s;
  s.tau = tau;
  s.variant = ScheduleVariant::fig2;
  s.omega0 = omega0;
  s.params = [omega0, tau](double t) {
    const double ph = 2.0 * pi * t / tau;
    return RmParams{-0.25 * omega0 * (1.0 + std::cos(ph)), -0.25 * omega0 * (1.0 - std::cos(ph)),
                    0.5 * omega0 * std::sin(ph)};
  };
  return s;
}

/// t_{1,2} = 1 +- cos(2 pi t/tau), delta = -2 sin(2 pi t/tau)
inline PumpSchedule fig3_schedule(double tau) {
  PumpSchedule s;
  s.tau = tau;
  s.variant = ScheduleVariant::fig3;
  s.params = [tau](double t) {
    const double ph = 2.0 * pi * t / tau;
    return RmParams{1.0 + std::cos(ph), 1.0 - std::cos(ph), -2.0 * std::sin(ph)};
  };
  return s;
}

/// Time-independent parameters; a degenerate cycle used for checks.
inline PumpSchedule constant_schedule(RmParams p, double tau) {
  PumpSchedule s;
  s.tau = tau;
  s.variant = ScheduleVariant::custom;
  s.params = [p](double) { return p; };
  return s;
}

/// Schedule frozen at one point of another schedule's cycle.
inline PumpSchedule frozen_schedule(const PumpSchedule& base, double t_frozen, double tau) {
  return constant_schedule(base.at(t_frozen), tau);
}

inline RmParams schedule_eval(const PumpSchedule& s, double t) {
  if (!(t >= 0.0 && t <= s.tau)) {
    std::ostringstream os;
    os << "schedule_eval: t=" << t << " outside [0, " << s.tau << "]";
    throw RangeError(os.str());
  }
  return s.params(t);
}

/// Maps (k, t) to a p x p Hermitian Bloch matrix.
struct BlochSampler {
  int p = 2;
  std::function<CMat(double, double)> eval;

  CMat operator()(double k, double t) const { return eval(k, t); }
};

inline BlochSampler rmm_sampler(PumpSchedule s) {
  return BlochSampler{2, [s = std::move(s)](double k, double t) { return rmm_bloch(k, s.at(t)); }};
}

/// k_j = 2 pi j / L for j = 0..L-1, folded into [-pi, pi).
struct MomentumGrid {
  int L = 32;

  explicit MomentumGrid(int cells = 32) : L(cells) {
    if (L < 1) throw ValidationError("MomentumGrid: L must be positive");
  }
  double k(int j) const {
    double q = 2.0 * pi * static_cast<double>(j) / static_cast<double>(L);
    if (q >= pi) q -= 2.0 * pi;
    return q;
  }
  double spacing() const { return 2.0 * pi / static_cast<double>(L); }
  int size() const { return L; }
  std::vector<double> points() const {
    std::vector<double> ks(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) ks[static_cast<std::size_t>(j)] = k(j);
    return ks;
  }
};

/// Smallest splitting between adjacent bands over an Nk x Nt sampling of the
/// (k, t) torus. Throws GapClosedError naming the worst point if it is below
/// `threshold`.
inline double min_gap(const PumpSchedule& s, const BlochSampler& sampler, int nk, int nt,
                      double threshold = 1e-9) {
  if (nk < 8 || nt < 8) throw ValidationError("min_gap: Nk and Nt must be at least 8");
  double best = std::numeric_limits<double>::infinity();
  double best_k = 0.0, best_t = 0.0;
  Eigen::SelfAdjointEigenSolver<CMat> es;
  for (int it = 0; it < nt; ++it) {
    const double t = s.tau * it / nt;
    for (int ik = 0; ik < nk; ++ik) {
      const double k = -pi + 2.0 * pi * ik / nk;
      es.compute(sampler(k, t), Eigen::EigenvaluesOnly);
      const auto& e = es.eigenvalues();
      for (Eigen::Index b = 0; b + 1 < e.size(); ++b) {
        const double g = e(b + 1) - e(b);
        if (g < best) {
          best = g;
          best_k = k;
          best_t = t;
        }
      }
    }
  }
  if (best < threshold) {
    std::ostringstream os;
    os << "band gap closes (gap " << best << ") at k=" << best_k << ", t=" << best_t;
    throw GapClosedError(os.str());
  }
  return best;
}

}  // namespace tpump
