#pragma once

// Single-particle pumping in a (possibly mean-field) band structure: Wannier
// initial states, per-momentum evolution, the unit-cell distribution P_n and
// its moments.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "tpump/evolve.hpp"
#include "tpump/model.hpp"
#include "tpump/parallel.hpp"
#include "tpump/spectral.hpp"

namespace tpump {

/// Spinors psi(k_j) on the momentum grid, one unit-norm p-vector per k. The
/// 1/sqrt(L) of the Bloch expansion lives in the transform: the unit-cell
/// amplitudes are u_n = (1/L) sum_j e^{i n k_j} psi(k_j).
struct SpinorField {
  std::vector<CVec> psi;

  int L() const { return static_cast<int>(psi.size()); }
  MomentumGrid grid() const { return MomentumGrid(L()); }
};

struct PositionDistribution {
  std::vector<double> P;  // per unit cell, n = 0..L-1
  Eigen::MatrixXd site;   // L x p, per (cell, orbital)

  int L() const { return static_cast<int>(P.size()); }
  double total() const {
    double s = 0.0;
    for (double x : P) s += x;
    return s;
  }
};

/// Wannier state of `band` at t = 0 centred on cell n0:
/// psi(k) = e^{-i n0 k} phi_band(k) in the smooth gauge.
inline SpinorField init_wannier(const BlochSampler& sampler, const MomentumGrid& grid, int band,
                                int n0, double t0 = 0.0) {
  const auto sb = smooth_band(sampler, grid, t0, band);
  SpinorField f;
  f.psi.resize(sb.phi.size());
  for (int j = 0; j < grid.size(); ++j)
    f.psi[static_cast<std::size_t>(j)] = std::exp(-I * (n0 * grid.k(j))) * sb.phi[static_cast<std::size_t>(j)];
  return f;
}

/// Snapshots of the field at n_out + 1 equally spaced times in [t0, t1].
inline std::vector<SpinorField> evolve_field_series(const SpinorField& field,
                                                    const BlochSampler& gen, double t0, double t1,
                                                    int n_out, const PropagatorConfig& cfg) {
  const MomentumGrid grid = field.grid();
  const int L = grid.size();
  std::vector<SpinorField> out(static_cast<std::size_t>(n_out) + 1);
  for (auto& s : out) s.psi.resize(static_cast<std::size_t>(L));

  parallel_for(static_cast<std::size_t>(L), [&](std::size_t j) {
    const double k = grid.k(static_cast<int>(j));
    std::vector<CMat> us;
    try {
      us = propagate_series([&](double t) { return gen(k, t); }, t0, t1, n_out, cfg);
    } catch (const NumericalError& e) {
      throw NumericalError("k=" + std::to_string(k) + ": " + e.what());
    }
    for (std::size_t i = 0; i < us.size(); ++i) out[i].psi[j] = us[i] * field.psi[j];
  });
  return out;
}

inline SpinorField evolve_field(const SpinorField& field, const BlochSampler& gen, double t0,
                                double t1, const PropagatorConfig& cfg) {
  return evolve_field_series(field, gen, t0, t1, 1, cfg).back();
}

inline PositionDistribution position_distribution(const SpinorField& field) {
  const MomentumGrid grid = field.grid();
  const int L = grid.size();
  const Eigen::Index p = field.psi.front().size();
  PositionDistribution out;
  out.P.assign(static_cast<std::size_t>(L), 0.0);
  out.site = Eigen::MatrixXd::Zero(L, p);
  for (int n = 0; n < L; ++n) {
    CVec u = CVec::Zero(p);
    for (int j = 0; j < L; ++j) u += std::exp(I * (n * grid.k(j))) * field.psi[static_cast<std::size_t>(j)];
    u /= static_cast<double>(L);
    out.site.row(n) = u.cwiseAbs2().transpose();
    out.P[static_cast<std::size_t>(n)] = u.squaredNorm();
  }
  return out;
}

/// Ring offset of cell n from n_ref, folded into (-L/2, L/2].
inline int ring_offset(int n, int n_ref, int L) {
  int d = (n - n_ref) % L;
  if (d < 0) d += L;
  if (2 * d > L) d -= L;
  return d;
}

struct Moments {
  double R = 0.0;    // centre of mass relative to n_ref, in cells
  double Var = 0.0;  // variance, in cells^2
};

/// Centre of mass and variance with cells unwrapped into the window
/// (n_ref - L/2, n_ref + L/2]. Throws WraparoundError when the two edge cells
/// of the window carry more than `edge_limit` of the weight (L >= 8 only).
inline Moments com_dispersion(const std::vector<double>& P, int n_ref, double edge_limit = 0.2) {
  const int L = static_cast<int>(P.size());
  double m1 = 0.0, m2 = 0.0, edge = 0.0;
  const int dmax = L / 2;
  const int dmin = -((L - 1) / 2);
  for (int n = 0; n < L; ++n) {
    const int d = ring_offset(n, n_ref, L);
    const double w = P[static_cast<std::size_t>(n)];
    m1 += d * w;
    m2 += static_cast<double>(d) * d * w;
    if (d == dmax || d == dmin) edge += w;
  }
  if (L >= 8 && edge > edge_limit)
    throw WraparoundError("com_dispersion: " + std::to_string(edge) +
                          " of the weight sits at the window edges; lattice too small");
  return {m1, m2 - m1 * m1};
}

inline Moments com_dispersion(const PositionDistribution& P, int n_ref, double edge_limit = 0.2) {
  return com_dispersion(P.P, n_ref, edge_limit);
}

struct DispersionTerms {
  double A = 0.0;       // <d psi| (1 - |psi><psi|) |d psi>, averaged over q
  double B = 0.0;       // q-average of |<psi|d psi>|^2 minus R^2
  double R_conn = 0.0;  // centre of mass from the Berry connection
};

/// Splits the position variance of a field into the band-flatness part A and
/// the geometric part B. d_q is a periodic central difference on the grid and
/// the q integral a periodic trapezoid rule. R is the connection estimate
/// q-average of i<psi|d psi>, so that A + B approximates the variance at the
/// same resolution.
inline DispersionTerms dispersion_terms(const SpinorField& field) {
  const int L = field.L();
  const double dq = 2.0 * pi / L;
  for (int j = 0; j < L; ++j) {
    const double ov = std::abs(field.psi[static_cast<std::size_t>(j)].dot(
        field.psi[static_cast<std::size_t>((j + 1) % L)]));
    if (ov < 0.5)
      throw GaugeError("dispersion_terms: gauge discontinuity between k-points " +
                       std::to_string(j) + " and " + std::to_string((j + 1) % L));
  }
  double a_sum = 0.0, b_sum = 0.0, r_sum = 0.0;
  for (int j = 0; j < L; ++j) {
    const CVec& psi = field.psi[static_cast<std::size_t>(j)];
    const CVec d = (field.psi[static_cast<std::size_t>((j + 1) % L)] -
                    field.psi[static_cast<std::size_t>((j + L - 1) % L)]) /
                   (2.0 * dq);
    const cplx conn = psi.dot(d);
    a_sum += d.squaredNorm() - std::norm(conn);
    b_sum += std::norm(conn);
    r_sum += std::real(I * conn);
  }
  DispersionTerms out;
  out.R_conn = r_sum / L;
  out.A = a_sum / L;
  out.B = b_sum / L - out.R_conn * out.R_conn;
  return out;
}

/// FNV-1a hash of the link phases arg <psi_j|psi_{j+1}>, rounded to 1e-9 rad.
/// Identifies the gauge a run was started in.
inline std::string gauge_fingerprint(const SpinorField& field) {
  std::uint64_t h = 1469598103934665603ULL;
  const int L = field.L();
  for (int j = 0; j < L; ++j) {
    const double ph = std::arg(field.psi[static_cast<std::size_t>(j)].dot(
        field.psi[static_cast<std::size_t>((j + 1) % L)]));
    const long long q = std::llround(ph * 1e9);
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint64_t>((q >> (8 * b)) & 0xff);
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tpump
