#pragma once

// Gauge-fixed eigensystems, smooth band fields, Wilson loops and the lattice
// Chern number on the (k, t) torus.

#include <cmath>
#include <sstream>
#include <vector>

#include "tpump/linalg.hpp"
#include "tpump/model.hpp"
#include "tpump/parallel.hpp"

namespace tpump {

struct GaugedEigensystem {
  RVec energies;  // ascending
  CMat states;    // columns, orthonormal
};

namespace detail {

/// Rotates v so that its largest-modulus component is real and positive.
/// Components within a relative 1e-12 of the maximum count as ties and the
/// lowest index wins.
inline void fix_gauge(Eigen::Ref<CVec> v) {
  const double vmax = v.cwiseAbs().maxCoeff();
  if (vmax == 0.0) return;
  Eigen::Index pick = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= vmax * (1.0 - 1e-12)) {
      pick = i;
      break;
    }
  }
  const cplx c = v(pick);
  v *= std::conj(c) / std::abs(c);
}

inline double min_band_separation(const RVec& e, int band) {
  double g = std::numeric_limits<double>::infinity();
  if (band > 0) g = std::min(g, e(band) - e(band - 1));
  if (band + 1 < e.size()) g = std::min(g, e(band + 1) - e(band));
  return g;
}

}  // namespace detail

inline GaugedEigensystem eigh_gauged(const CMat& h) {
  require_hermitian(h, 1e-10, "eigh_gauged");
  const CMat hs = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(hs);
  GaugedEigensystem out{es.eigenvalues(), es.eigenvectors()};
  for (Eigen::Index b = 0; b < out.states.cols(); ++b) detail::fix_gauge(out.states.col(b));
  return out;
}

/// One band's Bloch spinors on the momentum grid, in a parallel-transport
/// gauge whose closing phase is spread evenly over all links. Every link
/// overlap <phi_j|phi_{j+1}> then carries the same phase, -zak/L.
struct SmoothBandField {
  int band = 0;
  std::vector<CVec> phi;  // indexed like MomentumGrid
};

/// Degeneracy threshold used when following a band across the grid.
inline constexpr double band_gap_tolerance = 1e-9;

inline SmoothBandField smooth_band(const BlochSampler& sampler, const MomentumGrid& grid, double t,
                                   int band) {
  if (band < 0 || band >= sampler.p) throw ValidationError("smooth_band: band out of range");
  const int L = grid.size();
  SmoothBandField f;
  f.band = band;
  f.phi.resize(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) {
    const auto es = eigh_gauged(sampler(grid.k(j), t));
    if (detail::min_band_separation(es.energies, band) < band_gap_tolerance) {
      std::ostringstream os;
      os << "smooth_band: band " << band << " degenerate at k=" << grid.k(j) << ", t=" << t;
      throw DegenerateBandError(os.str());
    }
    f.phi[static_cast<std::size_t>(j)] = es.states.col(band);
  }
  // parallel transport along the grid
  for (int j = 1; j < L; ++j) {
    auto& cur = f.phi[static_cast<std::size_t>(j)];
    const cplx ov = f.phi[static_cast<std::size_t>(j - 1)].dot(cur);
    if (std::abs(ov) > 0.0) cur *= std::conj(ov) / std::abs(ov);
  }
  // closing link carries the full loop phase; distribute it
  const cplx close = f.phi.back().dot(f.phi.front());
  const double theta = std::arg(close);
  for (int j = 1; j < L; ++j)
    f.phi[static_cast<std::size_t>(j)] *= std::exp(I * (theta * j / static_cast<double>(L)));
  return f;
}

/// Berry phase of a closed discrete loop of states, -arg prod <v_j|v_{j+1}>,
/// returned in (-pi, pi].
inline double wilson_loop_phase(const std::vector<CVec>& loop) {
  cplx w{1.0, 0.0};
  const std::size_t n = loop.size();
  for (std::size_t j = 0; j < n; ++j) {
    const cplx ov = loop[j].dot(loop[(j + 1) % n]);
    if (std::abs(ov) < 1e-8)
      throw IllConditionedLoopError("wilson loop: vanishing link overlap at index " +
                                    std::to_string(j));
    w *= ov / std::abs(ov);
  }
  double z = -std::arg(w);
  if (z <= -pi) z += 2.0 * pi;
  return z;
}

inline double zak_phase(const SmoothBandField& field) { return wilson_loop_phase(field.phi); }

/// Lattice field-strength Chern number from a periodic Nt x Nk grid of
/// states, states[it][ik]. The k index runs along the first link direction.
inline int chern_number_from_states(const std::vector<std::vector<CVec>>& states) {
  const std::size_t nt = states.size();
  const std::size_t nk = states.front().size();
  auto link = [](const CVec& a, const CVec& b) {
    const cplx ov = a.dot(b);
    if (std::abs(ov) < 1e-8)
      throw IllConditionedLoopError("chern_number: vanishing link, refine the (k, t) grid");
    return ov / std::abs(ov);
  };
  std::vector<double> row_sum(nt, 0.0);
  parallel_for(nt, [&](std::size_t it) {
    const std::size_t it1 = (it + 1) % nt;
    double acc = 0.0;
    for (std::size_t ik = 0; ik < nk; ++ik) {
      const std::size_t ik1 = (ik + 1) % nk;
      const cplx u1 = link(states[it][ik], states[it][ik1]);
      const cplx u2 = link(states[it][ik1], states[it1][ik1]);
      const cplx u3 = link(states[it1][ik], states[it1][ik1]);
      const cplx u4 = link(states[it][ik], states[it1][ik]);
      acc += std::arg(u1 * u2 * std::conj(u3) * std::conj(u4));
    }
    row_sum[it] = acc;
  });
  double total = 0.0;
  for (double r : row_sum) total += r;
  const double c = total / (2.0 * pi);
  const double rounded = std::round(c);
  if (std::abs(c - rounded) > 1e-6)
    throw NumericalError("chern_number: plaquette sum is not integral (" + std::to_string(c) + ")");
  return static_cast<int>(rounded);
}

/// Chern number of `band` over the (k, t) torus, one full cycle of `schedule`.
/// Positive values mean transport towards increasing cell index.
inline int chern_number(const BlochSampler& sampler, const PumpSchedule& schedule, int band,
                        int nk = 64, int nt = 64) {
  if (band < 0 || band >= sampler.p) throw ValidationError("chern_number: band out of range");
  std::vector<std::vector<CVec>> states(static_cast<std::size_t>(nt),
                                        std::vector<CVec>(static_cast<std::size_t>(nk)));
  parallel_for(static_cast<std::size_t>(nt), [&](std::size_t it) {
    const double t = schedule.tau * static_cast<double>(it) / nt;
    for (int ik = 0; ik < nk; ++ik) {
      const double k = 2.0 * pi * ik / nk;
      const auto es = eigh_gauged(sampler(k, t));
      if (detail::min_band_separation(es.energies, band) < band_gap_tolerance) {
        std::ostringstream os;
        os << "chern_number: band " << band << " degenerate at k=" << k << ", t=" << t;
        throw DegenerateBandError(os.str());
      }
      states[it][static_cast<std::size_t>(ik)] = es.states.col(band);
    }
  });
  return chern_number_from_states(states);
}

/// Spectral norm of (d r/dt) r^{-1}, with r the eigenvector matrix of h(k, t)
/// and the derivative a central difference. The neighbouring eigenbases are
/// phase-aligned with the one at t, so the norm measures the interband
/// (non-adiabatic) coupling and not gauge jumps.
inline double nonadiabatic_norm(const BlochSampler& sampler, const PumpSchedule& schedule, double k,
                                double t, double dt = 0.0) {
  if (dt <= 0.0) dt = schedule.tau / 1024.0;
  auto basis = [&](double tt) {
    const auto es = eigh_gauged(sampler(k, tt));
    for (int b = 0; b < sampler.p; ++b) {
      if (detail::min_band_separation(es.energies, b) < band_gap_tolerance)
        throw DegenerateBandError("nonadiabatic_norm: degenerate bands at t=" +
                                  std::to_string(tt));
    }
    return es.states;
  };
  const CMat r0 = basis(t);
  CMat rp = basis(t + dt);
  CMat rm = basis(t - dt);
  for (int b = 0; b < sampler.p; ++b) {
    for (CMat* r : {&rp, &rm}) {
      const cplx ov = r0.col(b).dot(r->col(b));
      if (std::abs(ov) > 0.0) r->col(b) *= std::conj(ov) / std::abs(ov);
    }
  }
  const CMat d = (rp - rm) / (2.0 * dt) * r0.adjoint();
  Eigen::JacobiSVD<CMat> svd(d);
  return svd.singularValues()(0);
}

}  // namespace tpump
