#pragma once

// Thermal two-point functions, the mean-field auxiliary Hamiltonian and the
// exact thermal state on one momentum sector's Fock space.

#include <cmath>
#include <limits>

#include "tpump/fock.hpp"
#include "tpump/linalg.hpp"
#include "tpump/spectral.hpp"

namespace tpump {

struct ThermalParams {
  double beta = std::numeric_limits<double>::infinity();  // 1/(k_B T); +inf is T = 0
  double mu_c = 0.0;                                      // chemical potential

  bool zero_temperature() const { return std::isinf(beta); }

  static ThermalParams from_temperature(double T, double mu_c = 0.0) {
    if (T < 0.0) throw ValidationError("temperature must be non-negative");
    return {T == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / T, mu_c};
  }
};

/// 1 / (1 + e^x), written as (1 - tanh(x/2)) / 2 for stability at large |x|.
inline double fermi_factor(double x) { return 0.5 * (1.0 - std::tanh(0.5 * x)); }

/// Occupation of a level at `energy`; at T = 0 the level at mu_c is half filled.
inline double occupation(double energy, const ThermalParams& tp) {
  if (tp.zero_temperature()) {
    if (energy < tp.mu_c) return 1.0;
    if (energy > tp.mu_c) return 0.0;
    return 0.5;
  }
  return fermi_factor(tp.beta * (energy - tp.mu_c));
}

/// m_{mu nu} = <c^dag_mu c_nu>, i.e. the transpose of f(h) with f the Fermi
/// function.
inline CMat covariance(const CMat& h, const ThermalParams& tp) {
  if (tp.beta < 0.0) throw ValidationError("covariance: beta must be non-negative");
  const auto es = eigh_gauged(h);
  const Eigen::Index p = h.rows();
  CMat f = CMat::Zero(p, p);
  for (Eigen::Index b = 0; b < p; ++b) {
    const double occ = occupation(es.energies(b), tp);
    f += occ * es.states.col(b) * es.states.col(b).adjoint();
  }
  return f.transpose();
}

/// Single-particle matrix of eta sum m_{mu nu} a^dag_mu a_nu.
inline CMat meanfield_h(const CMat& m, double eta) { return eta * m; }

/// Bloch sampler of the mean-field Hamiltonian generated by `system` at fixed
/// temperature. The covariance follows the instantaneous system Hamiltonian.
inline BlochSampler meanfield_sampler(BlochSampler system, ThermalParams tp, double eta) {
  const int p = system.p;
  return BlochSampler{p, [system = std::move(system), tp, eta](double k, double t) {
                        return meanfield_h(covariance(system(k, t), tp), eta);
                      }};
}

/// rho = exp(-beta K) / Z on the Fock space of `ops`, with
/// K = sum (h - mu_c)_{mu nu} c^dag_mu c_nu.
inline CMat thermal_fock_state(const CMat& h, const ThermalParams& tp, const FockOperatorSet& ops) {
  require_hermitian(h, 1e-10, "thermal_fock_state");
  if (h.rows() != ops.modes)
    throw ValidationError("thermal_fock_state: h does not match the operator set");
  const Eigen::Index dim = ops.dim();
  if (tp.beta == 0.0) return CMat::Identity(dim, dim) / static_cast<double>(dim);

  const CMat hs = 0.5 * (h + h.adjoint()) - tp.mu_c * CMat::Identity(h.rows(), h.cols());
  Eigen::SelfAdjointEigenSolver<CMat> es(quadratic_form(hs, ops));
  const RVec& e = es.eigenvalues();
  RVec w(dim);
  if (tp.zero_temperature()) {
    if (dim > 1 && e(1) - e(0) < 1e-10)
      throw PhysicsError("thermal_fock_state: degenerate many-body ground state at T = 0");
    w.setZero();
    w(0) = 1.0;
  } else {
    for (Eigen::Index i = 0; i < dim; ++i) w(i) = std::exp(-tp.beta * (e(i) - e(0)));
    w /= w.sum();
  }
  return es.eigenvectors() * w.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace tpump
