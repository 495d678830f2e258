#pragma once

// Exact reduced dynamics of one auxiliary particle coupled to a thermal
// lattice through eta sum_k c^dag_mu(k) c_nu(k) a^dag_mu(k) a_nu(k).
//
// The coupling is diagonal in k and the thermal state is a product over k,
// so the auxiliary amplitude at momentum k only entangles with system sector
// k. Per momentum we propagate
//   W_k : system sector k (x) auxiliary spinor at k   (dimension 2^p p)
//   V_k : system sector k alone                        (dimension 2^p)
// and reduce with A_mu = <mu|W_k|phi0_k>, a 2^p x 2^p block:
//   g_{k,mu}     = Tr[A_mu rho_k V_k^dag]
//   G_{k,mu nu}  = Tr[A_mu rho_k A_nu^dag].
// The auxiliary density matrix then has blocks C_k conj(C_k') g_k g_k'^dag
// off the momentum diagonal and |C_k|^2 G_k on it.

#include <algorithm>
#include <string>
#include <vector>

#include "tpump/evolve.hpp"
#include "tpump/fock.hpp"
#include "tpump/model.hpp"
#include "tpump/pump_single.hpp"
#include "tpump/thermal.hpp"

namespace tpump {

/// Kronecker product a (x) b.
inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Matrix unit E_{mu nu} of size p.
inline CMat matrix_unit(Eigen::Index p, Eigen::Index mu, Eigen::Index nu) {
  CMat e = CMat::Zero(p, p);
  e(mu, nu) = 1.0;
  return e;
}

/// H = K (x) 1_p + eta sum_{mu nu} c^dag_mu c_nu (x) E_{mu nu}, with
/// K = sum (h_k)_{mu nu} c^dag_mu c_nu. Index = fock * p + orbital.
inline CMat joint_generator(const CMat& h_k, double eta, const FockOperatorSet& ops) {
  const Eigen::Index p = ops.modes;
  CMat h = kron(quadratic_form(h_k, ops), CMat::Identity(p, p));
  if (eta != 0.0)
    for (int mu = 0; mu < p; ++mu)
      for (int nu = 0; nu < p; ++nu) h += eta * kron(ops.hop[mu][nu], matrix_unit(p, mu, nu));
  return h;
}

struct JointBlock {
  CVec g;  // coherence vector, p entries
  CMat G;  // diagonal block, p x p
};

/// Output times t_i = i t_end / n_out, i = 0..n_out.
struct OutputGrid {
  double t_end = 1.0;
  int n_out = 64;

  double time(int i) const { return t_end * i / n_out; }
};

/// (g_k, G_k) at every output time for one momentum. The system starts in
/// the thermal state of h(k, 0); phi0_k is the auxiliary spinor at k.
inline std::vector<JointBlock> gk_Gk(double k, const BlochSampler& sampler, const ThermalParams& tp,
                                     double eta, const CVec& phi0_k, const PropagatorConfig& cfg,
                                     const OutputGrid& out, double trace_tol = 1e-9) {
  if (std::abs(phi0_k.norm() - 1.0) > 1e-10) throw ValidationError("gk_Gk: phi0_k must be normalised");
  const int p = sampler.p;
  const auto ops = build_fock_ops(p);
  const Eigen::Index df = ops.dim();
  const CMat rho = thermal_fock_state(sampler(k, 0.0), tp, ops);

  const auto W = propagate_series([&](double t) { return joint_generator(sampler(k, t), eta, ops); },
                                  0.0, out.t_end, out.n_out, cfg);
  const auto V = propagate_series([&](double t) { return quadratic_form(sampler(k, t), ops); }, 0.0,
                                  out.t_end, out.n_out, cfg);

  std::vector<JointBlock> res(W.size());
  std::vector<CMat> A(static_cast<std::size_t>(p), CMat(df, df));
  for (std::size_t i = 0; i < W.size(); ++i) {
    const CMat& w = W[i];
    for (int mu = 0; mu < p; ++mu) {
      CMat& a = A[static_cast<std::size_t>(mu)];
      for (Eigen::Index f = 0; f < df; ++f)
        for (Eigen::Index f2 = 0; f2 < df; ++f2) {
          cplx s{0.0, 0.0};
          for (int nu = 0; nu < p; ++nu) s += w(f * p + mu, f2 * p + nu) * phi0_k(nu);
          a(f, f2) = s;
        }
    }
    JointBlock b{CVec(p), CMat(p, p)};
    const CMat rv = rho * V[i].adjoint();
    for (int mu = 0; mu < p; ++mu) {
      const CMat arho = A[static_cast<std::size_t>(mu)] * rho;
      b.g(mu) = (A[static_cast<std::size_t>(mu)] * rv).trace();
      for (int nu = 0; nu < p; ++nu) b.G(mu, nu) = (arho * A[static_cast<std::size_t>(nu)].adjoint()).trace();
    }
    const double drift = std::abs(b.G.trace() - 1.0);
    if (drift > trace_tol)
      throw NumericalError("gk_Gk: trace drift " + std::to_string(drift) + " at k=" + std::to_string(k));
    res[i] = std::move(b);
  }
  return res;
}

/// Auxiliary density matrix in the (k, orbital) basis, index j * p + mu.
struct AuxDensityMatrix {
  int L = 0;
  int p = 0;
  CMat rho;

  /// Same operator in the (cell, orbital) basis, via
  /// <n mu|k nu> = delta_{mu nu} e^{i k n} / sqrt(L).
  CMat position_basis() const {
    const MomentumGrid grid(L);
    CMat F = CMat::Zero(L * p, L * p);
    const double s = 1.0 / std::sqrt(static_cast<double>(L));
    for (int n = 0; n < L; ++n)
      for (int j = 0; j < L; ++j)
        for (int mu = 0; mu < p; ++mu) F(n * p + mu, j * p + mu) = s * std::exp(I * (grid.k(j) * n));
    return F * rho * F.adjoint();
  }
};

/// blocks[j] holds (g, G) of momentum k_j at a common time; C[j] the initial
/// momentum amplitudes with sum |C_j|^2 = 1.
inline AuxDensityMatrix assemble_rho_aux(const std::vector<JointBlock>& blocks, const std::vector<cplx>& C) {
  const int L = static_cast<int>(blocks.size());
  if (static_cast<int>(C.size()) != L) throw ValidationError("assemble_rho_aux: size mismatch");
  double norm = 0.0;
  for (const cplx& c : C) norm += std::norm(c);
  if (std::abs(norm - 1.0) > 1e-10) throw ValidationError("assemble_rho_aux: sum |C_k|^2 != 1");
  const int p = static_cast<int>(blocks.front().g.size());
  AuxDensityMatrix out{L, p, CMat(L * p, L * p)};
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) {
      const auto& ba = blocks[static_cast<std::size_t>(a)];
      const auto& bb = blocks[static_cast<std::size_t>(b)];
      const cplx w = C[static_cast<std::size_t>(a)] * std::conj(C[static_cast<std::size_t>(b)]);
      out.rho.block(a * p, b * p, p, p) = (a == b) ? CMat(w * ba.G) : CMat(w * ba.g * bb.g.adjoint());
    }
  return out;
}

/// Assembles per-momentum series into one density matrix per output time.
inline std::vector<AuxDensityMatrix> assemble_rho_series(const std::vector<std::vector<JointBlock>>& per_k,
                                                         const std::vector<cplx>& C) {
  const std::size_t nt = per_k.front().size();
  for (const auto& s : per_k)
    if (s.size() != nt) throw ValidationError("assemble_rho_aux: inconsistent time grids");
  std::vector<AuxDensityMatrix> out;
  out.reserve(nt);
  std::vector<JointBlock> at(per_k.size());
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < per_k.size(); ++j) at[j] = per_k[j][i];
    out.push_back(assemble_rho_aux(at, C));
  }
  return out;
}

inline PositionDistribution rho_to_position(const AuxDensityMatrix& rho) {
  const CMat pos = rho.position_basis();
  PositionDistribution out;
  out.P.assign(static_cast<std::size_t>(rho.L), 0.0);
  out.site = Eigen::MatrixXd::Zero(rho.L, rho.p);
  for (int n = 0; n < rho.L; ++n)
    for (int mu = 0; mu < rho.p; ++mu) {
      const double w = std::real(pos(n * rho.p + mu, n * rho.p + mu));
      out.site(n, mu) = w;
      out.P[static_cast<std::size_t>(n)] += w;
    }
  return out;
}

enum class OffsetEstimator { minimum, median };

struct PeakShift {
  int peak_shift = 0;    // argmax displacement in cells, unwrapped on the ring
  double offset = 0.0;   // subtracted homogeneous background per cell
  double R_sub = 0.0;    // COM displacement of the subtracted distributions
  double Var_sub = 0.0;  // variance of the subtracted distribution
  std::vector<double> P_sub;
};

namespace detail {

inline int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline double estimate_offset(const std::vector<double>& P, OffsetEstimator est) {
  if (est == OffsetEstimator::minimum) return *std::min_element(P.begin(), P.end());
  std::vector<double> s = P;
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return (n % 2) ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

/// (P - offset) / (1 - L offset), clipped at zero and renormalised.
inline std::vector<double> subtract_offset(const std::vector<double>& P, double offset) {
  const double L = static_cast<double>(P.size());
  if (1.0 - L * offset < 0.1)
    throw NoPeakError("offset subtraction: distribution is nearly uniform, no peak to track");
  std::vector<double> out(P.size());
  double s = 0.0;
  for (std::size_t n = 0; n < P.size(); ++n) {
    out[n] = std::max(0.0, P[n] - offset);
    s += out[n];
  }
  for (double& x : out) x /= s;
  return out;
}

}  // namespace detail

/// Removes the homogeneous background from P and from the reference P0 and
/// compares peak positions and centres of mass.
inline PeakShift offset_subtract_peak(const std::vector<double>& P, const std::vector<double>& P0,
                                      OffsetEstimator est = OffsetEstimator::minimum) {
  const int L = static_cast<int>(P.size());
  PeakShift r;
  r.offset = detail::estimate_offset(P, est);
  r.P_sub = detail::subtract_offset(P, r.offset);
  const auto P0_sub = detail::subtract_offset(P0, detail::estimate_offset(P0, est));
  const int pk = detail::argmax(r.P_sub);
  const int pk0 = detail::argmax(P0_sub);
  r.peak_shift = ring_offset(pk, pk0, L);
  const Moments m = com_dispersion(r.P_sub, pk);
  const Moments m0 = com_dispersion(P0_sub, pk0);
  r.R_sub = r.peak_shift + m.R - m0.R;
  r.Var_sub = m.Var;
  return r;
}

inline PeakShift offset_subtract_peak(const PositionDistribution& P, const PositionDistribution& P0,
                                      OffsetEstimator est = OffsetEstimator::minimum) {
  return offset_subtract_peak(P.P, P0.P, est);
}

}  // namespace tpump
