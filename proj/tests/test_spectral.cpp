#include <gtest/gtest.h>

#include <random>

#include "tpump/spectral.hpp"

using namespace tpump;

namespace {

// Winding degree of the unit vector d(k, t)/|d| of h = d.sigma over the
// torus, from signed solid angles of grid triangles.
double d_vector_degree(const PumpSchedule& s, int n) {
  auto dhat = [&](double k, double t) {
    const CMat h = rmm_bloch(k, s.at(t));
    Eigen::Vector3d d(h(0, 1).real(), -h(0, 1).imag(), h(0, 0).real());
    return Eigen::Vector3d(d.normalized());
  };
  auto solid = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    const double num = a.dot(b.cross(c));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
  };
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double k0 = 2 * pi * i / n, k1 = 2 * pi * (i + 1) / n;
      const double t0 = s.tau * j / n, t1 = s.tau * (j + 1) / n;
      const auto a = dhat(k0, t0), b = dhat(k1, t0), c = dhat(k1, t1), d = dhat(k0, t1);
      total += solid(a, b, c) + solid(a, c, d);
    }
  return total / (4 * pi);
}

}  // namespace

TEST(Spectral, GaugeLargestComponentRealPositive) {
  CMat h(2, 2);
  h << 0.3, cplx(0.2, -0.7), cplx(0.2, 0.7), -0.1;
  const auto es = eigh_gauged(h);
  for (int b = 0; b < 2; ++b) {
    const CVec v = es.states.col(b);
    Eigen::Index i;
    v.cwiseAbs().maxCoeff(&i);
    EXPECT_NEAR(v(i).imag(), 0.0, 1e-15);
    EXPECT_GT(v(i).real(), 0.0);
    EXPECT_LT((h * v - es.energies(b) * v).norm(), 1e-13);
  }
  EXPECT_LT(es.energies(0), es.energies(1));
}

TEST(Spectral, GaugeTieGoesToLowestIndex) {
  // equal-modulus components: lower band (1,-1)/sqrt2 with the first entry positive
  CMat h(2, 2);
  h << 0.0, 1.0, 1.0, 0.0;
  const auto es = eigh_gauged(h);
  EXPECT_NEAR(es.states(0, 0).real(), 1 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(es.states(1, 0).real(), -1 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(es.states(0, 1).real(), 1 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(es.states(1, 1).real(), 1 / std::sqrt(2.0), 1e-14);
}

TEST(Spectral, NonHermitianInputRejected) {
  CMat h(2, 2);
  h << 0.0, 1.0, 0.5, 0.0;
  EXPECT_THROW(eigh_gauged(h), ValidationError);
}

TEST(Spectral, SmoothBandLinksCarryEqualPhase) {
  const PumpSchedule s = fig3_schedule(1.0);
  const MomentumGrid g(24);
  const auto f = smooth_band(rmm_sampler(s), g, 0.13, 0);
  const double z = zak_phase(f);
  for (int j = 0; j < g.size(); ++j) {
    const cplx ov = f.phi[j].dot(f.phi[(j + 1) % g.size()]);
    EXPECT_NEAR(wrap_angle(std::arg(ov) + z / g.size()), 0.0, 1e-10) << j;
  }
}

TEST(Spectral, ZakPhaseOfDimerisedLimits) {
  const MomentumGrid g(32);
  // intercell hopping only: Zak phase pi; intracell only: 0
  const auto topo = smooth_band(rmm_sampler(constant_schedule({0.0, 1.0, 0.0}, 1.0)), g, 0.0, 0);
  const auto triv = smooth_band(rmm_sampler(constant_schedule({1.0, 0.0, 0.0}, 1.0)), g, 0.0, 0);
  EXPECT_NEAR(std::abs(zak_phase(topo)), pi, 1e-10);
  EXPECT_NEAR(zak_phase(triv), 0.0, 1e-10);
}

TEST(Spectral, ZakPhaseGaugeInvariant) {
  const PumpSchedule s = fig2_schedule(1.0, 1.0);
  const MomentumGrid g(40);
  auto f = smooth_band(rmm_sampler(s), g, 0.31, 0);
  const double z0 = zak_phase(f);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ph(-pi, pi);
  for (auto& v : f.phi) v *= std::exp(I * ph(rng));
  EXPECT_NEAR(wrap_angle(zak_phase(f) - z0), 0.0, 1e-10);
}

TEST(Spectral, WilsonLoopIllConditioned) {
  CVec a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  EXPECT_THROW(wilson_loop_phase({a, b}), IllConditionedLoopError);
}

TEST(Spectral, ChernMagnitudeMatchesWindingDegree) {
  for (const PumpSchedule& s : {fig2_schedule(1.0, 1.0), fig3_schedule(1.0)}) {
    const int c0 = chern_number(rmm_sampler(s), s, 0);
    const int c1 = chern_number(rmm_sampler(s), s, 1);
    const double deg = d_vector_degree(s, 200);
    EXPECT_NEAR(std::abs(deg), 1.0, 1e-6);
    EXPECT_EQ(std::abs(c0), static_cast<int>(std::lround(std::abs(deg))));
    EXPECT_EQ(c0 + c1, 0);
  }
  // the two cycles run in opposite directions
  const PumpSchedule s2 = fig2_schedule(1.0, 1.0), s3 = fig3_schedule(1.0);
  EXPECT_EQ(chern_number(rmm_sampler(s2), s2, 0), 1);
  EXPECT_EQ(chern_number(rmm_sampler(s3), s3, 0), -1);
}

TEST(Spectral, ChernGaugeInvariantAndGridStable) {
  const PumpSchedule s = fig3_schedule(1.0);
  const BlochSampler h = rmm_sampler(s);
  const int nk = 24, nt = 24;
  std::vector<std::vector<CVec>> st(nt, std::vector<CVec>(nk));
  for (int it = 0; it < nt; ++it)
    for (int ik = 0; ik < nk; ++ik) st[it][ik] = eigh_gauged(h(2 * pi * ik / nk, s.tau * it / nt)).states.col(0);
  const int c = chern_number_from_states(st);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ph(-pi, pi);
  for (auto& row : st)
    for (auto& v : row) v *= std::exp(I * ph(rng));
  EXPECT_EQ(chern_number_from_states(st), c);
  EXPECT_EQ(chern_number(h, s, 0, 128, 128), c);
}

TEST(Spectral, ChernDegenerateBandRejected) {
  const PumpSchedule s = constant_schedule({1.0, 1.0, 0.0}, 1.0);
  EXPECT_THROW(chern_number(rmm_sampler(s), s, 0), DegenerateBandError);
}

TEST(Spectral, NonadiabaticNormScalesInverseTau) {
  const double phase = 0.3;
  const PumpSchedule a = fig3_schedule(10.0), b = fig3_schedule(40.0);
  const double na = nonadiabatic_norm(rmm_sampler(a), a, 0.4, phase * a.tau);
  const double nb = nonadiabatic_norm(rmm_sampler(b), b, 0.4, phase * b.tau);
  EXPECT_GT(na, 0.0);
  EXPECT_NEAR(na / nb, 4.0, 1e-6);
}
