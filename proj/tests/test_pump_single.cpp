#include <gtest/gtest.h>

#include <random>

#include "tpump/pipeline.hpp"
#include "tpump/pump_single.hpp"

using namespace tpump;

namespace {

SpinorField constant_field(int L, const CVec& v) {
  SpinorField f;
  f.psi.assign(static_cast<std::size_t>(L), v);
  return f;
}

}  // namespace

TEST(PumpSingle, WannierAtFig2StartIsOneCellEvenlySplit) {
  const PumpSchedule s = fig2_schedule(1.0, 100.0);
  const auto f = init_wannier(rmm_sampler(s), MomentumGrid(32), 0, 4);
  const auto P = position_distribution(f);
  EXPECT_NEAR(P.P[4], 1.0, 1e-12);
  for (int n = 0; n < 32; ++n)
    if (n != 4) EXPECT_LE(P.P[n], 1e-12);
  EXPECT_NEAR(P.site(4, 0), 0.5, 1e-12);
  EXPECT_NEAR(P.site(4, 1), 0.5, 1e-12);
}

TEST(PumpSingle, WannierTranslationCovariance) {
  const PumpSchedule s = fig3_schedule(1.0);
  const MomentumGrid g(32);
  const auto a = init_wannier(rmm_sampler(s), g, 0, 0);
  const auto b = init_wannier(rmm_sampler(s), g, 0, 5);
  for (int j = 0; j < 32; ++j) EXPECT_LT((b.psi[j] - std::exp(-5.0 * I * g.k(j)) * a.psi[j]).norm(), 1e-14);
  const auto Pa = position_distribution(a), Pb = position_distribution(b);
  for (int n = 0; n < 32; ++n) EXPECT_NEAR(Pb.P[(n + 5) % 32], Pa.P[n], 1e-14);
}

TEST(PumpSingle, WannierLocalisedAtGenericPoint) {
  const PumpSchedule s = fig3_schedule(1.0);
  const auto P = position_distribution(init_wannier(rmm_sampler(s), MomentumGrid(32), 0, 0)).P;
  const double peak = *std::max_element(P.begin(), P.end());
  EXPECT_EQ(detail::argmax(P), 0);
  for (int d = 3; d <= 16; ++d) {
    EXPECT_LT(P[d], 1e-2 * peak) << d;
    EXPECT_LT(P[(32 - d) % 32], 1e-2 * peak) << d;
  }
}

TEST(PumpSingle, PositionDistributionExamples) {
  CVec v(2);
  v << cplx(0.6, 0.0), cplx(0.0, 0.8);
  const auto P = position_distribution(constant_field(16, v));
  EXPECT_NEAR(P.P[0], 1.0, 1e-14);
  SpinorField f;
  const MomentumGrid g(16);
  for (int j = 0; j < 16; ++j) f.psi.push_back(std::exp(-3.0 * I * g.k(j)) * v);
  EXPECT_NEAR(position_distribution(f).P[3], 1.0, 1e-14);

  std::mt19937 rng(1);
  std::normal_distribution<double> nd;
  SpinorField r;
  for (int j = 0; j < 20; ++j) {
    CVec w(2);
    w << cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng));
    r.psi.push_back(w.normalized());
  }
  const auto Pr = position_distribution(r);
  EXPECT_NEAR(Pr.total(), 1.0, 1e-12);
  for (double x : Pr.P) EXPECT_GE(x, -1e-14);
}

TEST(PumpSingle, ComDispersionExamples) {
  std::vector<double> d3(16, 0.0);
  d3[3] = 1.0;
  auto m = com_dispersion(d3, 0);
  EXPECT_DOUBLE_EQ(m.R, 3.0);
  EXPECT_DOUBLE_EQ(m.Var, 0.0);
  std::vector<double> two(16, 0.0);
  two[0] = two[1] = 0.5;
  m = com_dispersion(two, 0);
  EXPECT_DOUBLE_EQ(m.R, 0.5);
  EXPECT_DOUBLE_EQ(m.Var, 0.25);
  std::vector<double> sym(16, 0.0);
  sym[5] = 0.4;
  sym[3] = 0.3;
  sym[7] = 0.3;
  EXPECT_NEAR(com_dispersion(sym, 5).R, 0.0, 1e-15);
  // negative offsets unwrap across the ring
  std::vector<double> left(16, 0.0);
  left[15] = 1.0;
  EXPECT_DOUBLE_EQ(com_dispersion(left, 0).R, -1.0);
  std::vector<double> flat(16, 1.0 / 16);
  EXPECT_THROW(com_dispersion(std::vector<double>{0, 0, 0, 0, 0, 0, 0.5, 0.5, 0, 0, 0, 0}, 0), WraparoundError);
  EXPECT_NO_THROW(com_dispersion(flat, 0));
}

TEST(PumpSingle, EvolutionTrivialGenerators) {
  const PumpSchedule s = fig3_schedule(1.0);
  const auto f = init_wannier(rmm_sampler(s), MomentumGrid(16), 0, 2);
  PropagatorConfig cfg;
  cfg.steps_per_cycle = 64;
  const BlochSampler zero{2, [](double, double) { return CMat(CMat::Zero(2, 2)); }};
  const auto g = evolve_field(f, zero, 0.0, 3.0, cfg);
  for (int j = 0; j < 16; ++j) EXPECT_LT((g.psi[j] - f.psi[j]).norm(), 1e-14);

  CMat h0(2, 2);
  h0 << 0.4, cplx(0.1, 0.3), cplx(0.1, -0.3), -0.2;
  const BlochSampler flat{2, [&](double, double) { return h0; }};
  const auto P0 = position_distribution(f).P;
  const auto P1 = position_distribution(evolve_field(f, flat, 0.0, 3.0, cfg)).P;
  for (int n = 0; n < 16; ++n) EXPECT_NEAR(P1[n], P0[n], 1e-13);
}

TEST(PumpSingle, DispersionTermsVanishWithoutKDependence) {
  // t2 = 0 at all times: the evolved field is k-independent
  const PumpSchedule s = constant_schedule({0.7, 0.0, 0.3}, 5.0);
  const auto f0 = init_wannier(rmm_sampler(s), MomentumGrid(16), 0, 0);
  PropagatorConfig cfg;
  const BlochSampler drive{2, [](double k, double t) { return rmm_bloch(k, 0.7, 0.0, std::sin(t)); }};
  const auto f = evolve_field(f0, drive, 0.0, 5.0, cfg);
  const auto d = dispersion_terms(f);
  EXPECT_NEAR(d.A, 0.0, 1e-12);
  EXPECT_NEAR(d.B, 0.0, 1e-12);
  const auto m = com_dispersion(position_distribution(f), 0);
  EXPECT_NEAR(m.Var, 0.0, 1e-12);
}

TEST(PumpSingle, DispersionTermsNonNegativeAndGaugeGuard) {
  const PumpSchedule s = fig3_schedule(1.0);
  const auto f = init_wannier(rmm_sampler(s), MomentumGrid(32), 0, 0);
  const auto d = dispersion_terms(f);
  EXPECT_GE(d.A, -1e-10);
  EXPECT_GE(d.B, -1e-10);
  const auto m = com_dispersion(position_distribution(f), 0);
  EXPECT_NEAR(d.A + d.B, m.Var, 2e-2);
  SpinorField broken = f;
  const CVec& v = broken.psi[16];
  CVec w(2);
  w << -std::conj(v(1)), std::conj(v(0));  // orthogonal spinor at one k
  broken.psi[16] = w;
  EXPECT_THROW(dispersion_terms(broken), GaugeError);
}

TEST(PumpSingle, GaugeFingerprintTracksLinkPhases) {
  const PumpSchedule s = fig3_schedule(1.0);
  const auto f = init_wannier(rmm_sampler(s), MomentumGrid(32), 0, 0);
  SpinorField g = f;
  for (auto& v : g.psi) v *= std::exp(0.3 * I);  // global phase: same links
  EXPECT_EQ(gauge_fingerprint(f), gauge_fingerprint(g));
  g.psi[3] *= std::exp(0.1 * I);
  EXPECT_NE(gauge_fingerprint(f), gauge_fingerprint(g));
  EXPECT_EQ(gauge_fingerprint(f).size(), 16u);
}

TEST(PumpSingle, RingOffset) {
  EXPECT_EQ(ring_offset(31, 0, 32), -1);
  EXPECT_EQ(ring_offset(16, 0, 32), 16);
  EXPECT_EQ(ring_offset(17, 0, 32), -15);
  EXPECT_EQ(ring_offset(2, 30, 32), 4);
}

TEST(PumpSingle, ShortCycleNormalisationAndRun) {
  RunSpec spec;
  spec.schedule = fig2_schedule(1.0, 20.0);
  spec.L = 16;
  spec.cfg.steps_per_cycle = 512;
  spec.n_out = 8;
  const RunResult r = run(spec);
  ASSERT_EQ(r.P.size(), 9u);
  for (const auto& P : r.P) {
    double s = 0.0;
    for (double x : P) s += x;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_EQ(r.chern_system, 1);
  EXPECT_EQ(r.expected_shift, 1);
  EXPECT_NEAR(r.obs.front().R, 0.0, 1e-12);
  EXPECT_GT(r.final().R, 0.5);
}
