#pragma once

#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "tpump/error.hpp"

namespace tpump {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Largest |a_ij - conj(a_ji)|.
inline double hermiticity_defect(const CMat& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline double max_abs(const CMat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

inline void require_hermitian(const CMat& h, double tol, const char* who) {
  if (h.rows() != h.cols())
    throw ValidationError(std::string(who) + ": matrix is not square");
  const double d = hermiticity_defect(h);
  if (d > tol)
    throw ValidationError(std::string(who) + ": non-Hermitian input (defect " +
                          std::to_string(d) + ")");
}

/// ||U^dagger U - 1||_max
inline double unitarity_defect(const CMat& u) {
  return max_abs(u.adjoint() * u - CMat::Identity(u.cols(), u.cols()));
}

/// exp(-i h dt) for Hermitian h through its spectral decomposition.
inline CMat expm_hermitian(const CMat& h, double dt) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const CVec phases = (-I * dt * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Wrap an angle into [-pi, pi).
inline double wrap_angle(double x) {
  x = std::fmod(x + pi, 2.0 * pi);
  if (x < 0) x += 2.0 * pi;
  return x - pi;
}

}  // namespace tpump
