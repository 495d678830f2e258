#pragma once

// Jordan-Wigner fermion operators on the occupation basis of a few modes.
// Basis index s = sum_mu n_mu 2^mu, so mode 0 is the fastest-varying bit:
// for two modes the order is |00>, |10>, |01>, |11>.

#include <vector>

#include "tpump/linalg.hpp"

namespace tpump {

struct FockOperatorSet {
  int modes = 0;
  std::vector<CMat> c;                  // annihilators
  std::vector<CMat> cdag;               // creators
  std::vector<std::vector<CMat>> hop;   // hop[mu][nu] = c^dag_mu c_nu

  Eigen::Index dim() const { return Eigen::Index{1} << modes; }
  const CMat& bilinear(int mu, int nu) const { return hop[mu][nu]; }
  const CMat& number(int mu) const { return hop[mu][mu]; }
};

namespace detail {

inline FockOperatorSet build_fock_ops_unchecked(int modes) {
  FockOperatorSet ops;
  ops.modes = modes;
  const Eigen::Index dim = ops.dim();
  for (int mu = 0; mu < modes; ++mu) {
    CMat cm = CMat::Zero(dim, dim);
    const Eigen::Index bit = Eigen::Index{1} << mu;
    for (Eigen::Index s = 0; s < dim; ++s) {
      if (!(s & bit)) continue;
      // string over the modes that precede mu
      const int below = __builtin_popcountll(static_cast<unsigned long long>(s & (bit - 1)));
      cm(s ^ bit, s) = (below % 2) ? -1.0 : 1.0;
    }
    ops.cdag.push_back(cm.adjoint());
    ops.c.push_back(std::move(cm));
  }
  ops.hop.assign(static_cast<std::size_t>(modes), std::vector<CMat>(static_cast<std::size_t>(modes)));
  for (int mu = 0; mu < modes; ++mu)
    for (int nu = 0; nu < modes; ++nu) ops.hop[mu][nu] = ops.cdag[mu] * ops.c[nu];
  return ops;
}

}  // namespace detail

/// Operators for the p orbitals of one momentum sector, 1 <= p <= 4.
inline FockOperatorSet build_fock_ops(int p) {
  if (p < 1 || p > 4) throw ValidationError("build_fock_ops: p must lie in [1, 4]");
  return detail::build_fock_ops_unchecked(p);
}

/// Second-quantised sum_{mu nu} h_{mu nu} c^dag_mu c_nu.
inline CMat quadratic_form(const CMat& h, const FockOperatorSet& ops) {
  CMat k = CMat::Zero(ops.dim(), ops.dim());
  for (int mu = 0; mu < ops.modes; ++mu)
    for (int nu = 0; nu < ops.modes; ++nu)
      if (h(mu, nu) != cplx{0.0, 0.0}) k += h(mu, nu) * ops.hop[mu][nu];
  return k;
}

}  // namespace tpump
