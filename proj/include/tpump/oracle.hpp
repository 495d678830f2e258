#pragma once

// Brute-force reference for tiny lattices: the whole system Fock space
// (all L*p modes under one Jordan-Wigner string) times the auxiliary
// single-particle space, evolved as a dense density matrix and traced over
// the system at every output time. Test fixture, not a production path.

#include <numeric>
#include <vector>

#include "tpump/evolve.hpp"
#include "tpump/fock.hpp"
#include "tpump/model.hpp"
#include "tpump/pump_full.hpp"
#include "tpump/thermal.hpp"

namespace tpump {

/// How the (k, orbital) system modes are laid out along the global string.
enum class ModeOrder { momentum_major, orbital_major, reversed };

inline std::vector<int> global_mode_order(int L, int p, ModeOrder order) {
  std::vector<int> m(static_cast<std::size_t>(L * p));
  for (int j = 0; j < L; ++j)
    for (int mu = 0; mu < p; ++mu) {
      int idx = j * p + mu;
      if (order == ModeOrder::orbital_major) idx = mu * L + j;
      if (order == ModeOrder::reversed) idx = L * p - 1 - (j * p + mu);
      m[static_cast<std::size_t>(j * p + mu)] = idx;
    }
  return m;
}

inline constexpr int oracle_max_cells = 3;

/// Reduced auxiliary state at each output time. phi0[j] is the unit spinor at
/// k_j and C[j] the momentum amplitude (sum |C_j|^2 = 1).
inline std::vector<AuxDensityMatrix> brute_force_rho_aux(
    const BlochSampler& sampler, const MomentumGrid& grid, const ThermalParams& tp, double eta,
    const std::vector<CVec>& phi0, const std::vector<cplx>& C, const PropagatorConfig& cfg,
    const OutputGrid& out, ModeOrder order = ModeOrder::momentum_major, double trace_tol = 1e-9) {
  const int L = grid.size();
  const int p = sampler.p;
  if (L > oracle_max_cells || p != 2)
    throw ValidationError("brute_force_rho_aux: limited to L <= 3 and p = 2");
  const int modes = L * p;
  const auto ops = detail::build_fock_ops_unchecked(modes);
  const auto mode = global_mode_order(L, p, order);
  const Eigen::Index daux = modes;

  auto system_matrix = [&](double t) {
    CMat hb = CMat::Zero(modes, modes);
    for (int j = 0; j < L; ++j) {
      const CMat h = sampler(grid.k(j), t);
      for (int mu = 0; mu < p; ++mu)
        for (int nu = 0; nu < p; ++nu)
          hb(mode[static_cast<std::size_t>(j * p + mu)], mode[static_cast<std::size_t>(j * p + nu)]) = h(mu, nu);
    }
    return hb;
  };

  CMat coupling = CMat::Zero(ops.dim() * daux, ops.dim() * daux);
  if (eta != 0.0)
    for (int j = 0; j < L; ++j)
      for (int mu = 0; mu < p; ++mu)
        for (int nu = 0; nu < p; ++nu) {
          const int a = mode[static_cast<std::size_t>(j * p + mu)];
          const int b = mode[static_cast<std::size_t>(j * p + nu)];
          coupling += eta * kron(ops.hop[a][b], matrix_unit(daux, j * p + mu, j * p + nu));
        }
  const CMat id_aux = CMat::Identity(daux, daux);
  auto generator = [&](double t) {
    return CMat(kron(quadratic_form(system_matrix(t), ops), id_aux) + coupling);
  };

  CVec aux0(daux);
  for (int j = 0; j < L; ++j)
    for (int mu = 0; mu < p; ++mu) aux0(j * p + mu) = C[static_cast<std::size_t>(j)] * phi0[static_cast<std::size_t>(j)](mu);
  if (std::abs(aux0.norm() - 1.0) > 1e-10) throw ValidationError("brute_force_rho_aux: initial state not normalised");

  const CMat rho_sys = thermal_fock_state(system_matrix(0.0), tp, ops);
  const CMat rho0 = kron(rho_sys, aux0 * aux0.adjoint());
  const auto U = propagate_series(generator, 0.0, out.t_end, out.n_out, cfg);

  std::vector<AuxDensityMatrix> res;
  res.reserve(U.size());
  for (const CMat& u : U) {
    const CMat r = u * rho0 * u.adjoint();
    CMat red = CMat::Zero(daux, daux);
    for (Eigen::Index f = 0; f < ops.dim(); ++f) red += r.block(f * daux, f * daux, daux, daux);
    const double drift = std::abs(red.trace() - 1.0);
    if (drift > trace_tol) throw NumericalError("brute_force_rho_aux: trace drift " + std::to_string(drift));
    res.push_back(AuxDensityMatrix{L, p, red});
  }
  return res;
}

/// Factorised route for the same inputs, for direct comparison with the
/// brute-force result.
inline std::vector<AuxDensityMatrix> factorised_rho_aux(const BlochSampler& sampler, const MomentumGrid& grid,
                                                        const ThermalParams& tp, double eta,
                                                        const std::vector<CVec>& phi0,
                                                        const std::vector<cplx>& C,
                                                        const PropagatorConfig& cfg, const OutputGrid& out) {
  std::vector<std::vector<JointBlock>> per_k(static_cast<std::size_t>(grid.size()));
  parallel_for(per_k.size(), [&](std::size_t j) {
    per_k[j] = gk_Gk(grid.k(static_cast<int>(j)), sampler, tp, eta, phi0[j], cfg, out);
  });
  return assemble_rho_series(per_k, C);
}

}  // namespace tpump
