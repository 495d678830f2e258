#include <gtest/gtest.h>

#include <random>

#include "tpump/pipeline.hpp"
#include "tpump/pump_full.hpp"

using namespace tpump;

namespace {

CVec unit_spinor(double a, double b) {
  CVec v(2);
  v << std::cos(a), std::sin(a) * std::exp(I * b);
  return v;
}

std::vector<cplx> wannier_amplitudes(int L, int n0) {
  const MomentumGrid g(L);
  std::vector<cplx> C;
  for (int j = 0; j < L; ++j) C.push_back(std::exp(-I * (n0 * g.k(j))) / std::sqrt(double(L)));
  return C;
}

}  // namespace

TEST(PumpFull, JointGeneratorDecoupledAndHermitian) {
  const auto ops = build_fock_ops(2);
  const CMat h = rmm_bloch(0.6, 0.8, 0.3, -0.2);
  const CMat h0 = joint_generator(h, 0.0, ops);
  EXPECT_LT(max_abs(h0 - kron(quadratic_form(h, ops), CMat::Identity(2, 2))), 1e-15);
  const CMat hc = joint_generator(CMat::Zero(2, 2), 0.7, ops);
  EXPECT_LT(hermiticity_defect(hc), 1e-15);
  EXPECT_LT(hermiticity_defect(joint_generator(h, 0.7, ops)), 1e-15);
}

TEST(PumpFull, JointGeneratorSectors) {
  // system vacuum: no coupling; double occupancy: shift eta on the spinor;
  // one system fermion: eta acts as the projector c^dag_mu c_nu -> E_{mu nu}
  const auto ops = build_fock_ops(2);
  const double eta = 0.3;
  const CMat h = rmm_bloch(1.0, 0.5, 0.9, 0.4);
  const CMat H = joint_generator(h, eta, ops);
  EXPECT_LT(max_abs(H.block(0, 0, 2, 2)), 1e-15);
  EXPECT_LT(max_abs(H.block(6, 6, 2, 2) - (h.trace() + eta) * CMat::Identity(2, 2)), 1e-15);
  // spectrum of the one-system-fermion sector: h (x) 1 + eta * swap-like coupling
  Eigen::SelfAdjointEigenSolver<CMat> es(CMat(H.block(2, 2, 4, 4)));
  CMat ref(4, 4);  // basis (sys orbital a, aux orbital b) -> index a*2+b
  ref.setZero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      for (int a2 = 0; a2 < 2; ++a2) ref(a * 2 + b, a2 * 2 + b) += h(a, a2);
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2)
          if (a == b && a2 == b2) ref(a * 2 + b, a2 * 2 + b2) += eta;
    }
  Eigen::SelfAdjointEigenSolver<CMat> er(ref);
  EXPECT_LT((es.eigenvalues() - er.eigenvalues()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(PumpFull, DecoupledBlocksAreStatic) {
  const PumpSchedule s = fig3_schedule(20.0);
  PropagatorConfig cfg;
  cfg.steps_per_cycle = 256;
  cfg.cycle = 20.0;
  const CVec phi = unit_spinor(0.4, 1.1);
  const auto res = gk_Gk(0.3, rmm_sampler(s), ThermalParams{1.0, 0.0}, 0.0, phi, cfg, OutputGrid{20.0, 4});
  for (const auto& b : res) {
    EXPECT_LT((b.g - phi).norm(), 1e-12);
    EXPECT_LT(max_abs(b.G - phi * phi.adjoint()), 1e-12);
  }
}

TEST(PumpFull, BlockInvariants) {
  const PumpSchedule s = fig3_schedule(30.0);
  PropagatorConfig cfg;
  cfg.steps_per_cycle = 512;
  cfg.cycle = 30.0;
  const auto res = gk_Gk(-1.2, rmm_sampler(s), ThermalParams{0.7, 0.0}, 0.4, unit_spinor(1.0, 0.2), cfg,
                         OutputGrid{30.0, 6});
  for (const auto& b : res) {
    EXPECT_NEAR(b.G.trace().real(), 1.0, 1e-11);
    EXPECT_LT(hermiticity_defect(b.G), 1e-12);
    Eigen::SelfAdjointEigenSolver<CMat> es(b.G);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-11);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 1.0 + 1e-11);
  }
  CVec bad(2);
  bad << 1.0, 1.0;
  EXPECT_THROW(gk_Gk(0.0, rmm_sampler(s), ThermalParams{}, 0.1, bad, cfg, OutputGrid{1.0, 1}), ValidationError);
}

TEST(PumpFull, ZeroTemperatureStaysNearMeanfield) {
  // beta = inf, eta = 0.01 gap: G_k stays near the projector on the mean-field-evolved
  // spinor. The residual comes from virtual excitations of the system, whose
  // second-order energy shift ~ eta^2 / gap accumulates over the cycle; 0.05 is
  // the measured bound at tau = 100 (about 0.02) with margin.
  const double tau = 100.0, eta = 0.04;
  const PumpSchedule s = fig3_schedule(tau);
  const BlochSampler sys = rmm_sampler(s);
  const ThermalParams tp{};
  const BlochSampler mf = meanfield_sampler(sys, tp, eta);
  PropagatorConfig cfg;
  cfg.steps_per_cycle = 1024;
  cfg.cycle = tau;
  const double k = 0.9;
  const CVec phi = eigh_gauged(mf(k, 0.0)).states.col(0);
  const auto blocks = gk_Gk(k, sys, tp, eta, phi, cfg, OutputGrid{tau, 4});
  const auto U = propagate_series([&](double t) { return mf(k, t); }, 0.0, tau, 4, cfg);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const CVec v = U[i] * phi;
    EXPECT_LT(max_abs(blocks[i].G - v * v.adjoint()), 0.05) << i;
  }
}

TEST(PumpFull, FiniteTemperatureMixesTheSpinor) {
  const double tau = 200.0;
  const PumpSchedule s = fig3_schedule(tau);
  PropagatorConfig cfg;
  cfg.steps_per_cycle = 1024;
  cfg.cycle = tau;
  double min_purity = 1.0;
  for (double k : {-2.5, -1.0, 0.5, 2.0}) {
    const auto b = gk_Gk(k, rmm_sampler(s), ThermalParams{0.25, 0.0}, 0.04, unit_spinor(0.7, 0.0), cfg,
                         OutputGrid{tau, 1});
    min_purity = std::min(min_purity, (b.back().G * b.back().G).trace().real());
  }
  EXPECT_LT(min_purity, 1.0 - 1e-6);
}

TEST(PumpFull, AssemblyExamples) {
  const CVec phi = unit_spinor(0.3, 0.5);
  const JointBlock pure{phi, phi * phi.adjoint()};
  // single populated momentum
  std::vector<cplx> C{0.0, 1.0, 0.0};
  CMat G(2, 2);
  G << 0.7, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.3;
  const JointBlock mixed{CVec::Zero(2), G};
  const auto r = assemble_rho_aux({pure, mixed, pure}, C);
  EXPECT_LT(max_abs(r.rho.block(2, 2, 2, 2) - G), 1e-15);
  EXPECT_NEAR(r.rho.trace().real(), 1.0, 1e-15);
  // pure decoupled state is the Wannier projector, localised in cell n0
  const auto w = assemble_rho_aux({pure, pure, pure, pure}, wannier_amplitudes(4, 1));
  EXPECT_NEAR(std::abs((w.rho * w.rho).trace() - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(rho_to_position(w).P[1], 1.0, 1e-14);
  EXPECT_THROW(assemble_rho_aux({pure, pure}, {1.0, 1.0}), ValidationError);
}

TEST(PumpFull, MaximallyMixedGivesUniformP) {
  AuxDensityMatrix m{5, 2, CMat::Identity(10, 10) / 10.0};
  const auto P = rho_to_position(m);
  for (double x : P.P) EXPECT_NEAR(x, 0.2, 1e-15);
}

TEST(PumpFull, OffsetSubtractionExamples) {
  const int L = 16;
  // zero background
  std::vector<double> P0(L, 0.0), P(L, 0.0);
  P0[0] = 1.0;
  P[2] = 0.6;
  P[3] = 0.4;
  auto r = offset_subtract_peak(P, P0);
  EXPECT_EQ(r.peak_shift, 2);
  EXPECT_DOUBLE_EQ(r.offset, 0.0);
  EXPECT_NEAR(r.R_sub, 2.4, 1e-14);
  // constant background plus a peak
  for (double c : {0.01, 0.04}) {
    std::vector<double> Q(L, c);
    Q[13] += 1.0 - L * c;
    r = offset_subtract_peak(Q, P0);
    EXPECT_EQ(r.peak_shift, -3);
    EXPECT_NEAR(r.offset, c, 1e-15);
    EXPECT_NEAR(r.R_sub, -3.0, 1e-12);
  }
  std::vector<double> flat(L, 1.0 / L);
  flat[4] += 1e-3;
  flat[5] -= 1e-3;
  EXPECT_THROW(offset_subtract_peak(flat, P0), NoPeakError);
  // median estimator on a background with one dip
  std::vector<double> Q(L, 0.02);
  Q[7] = 0.0;
  Q[0] = 1.0 - 0.02 * (L - 2);
  r = offset_subtract_peak(Q, P0, OffsetEstimator::median);
  EXPECT_NEAR(r.offset, 0.02, 1e-15);
  EXPECT_EQ(r.peak_shift, 0);
}

TEST(PumpFull, ShortRunStructure) {
  RunSpec spec;
  spec.pipeline = Pipeline::full;
  spec.schedule = fig3_schedule(100.0);
  spec.L = 8;
  spec.eta = 0.3;
  spec.tp = ThermalParams{0.5, 0.0};
  spec.cfg.steps_per_cycle = 256;
  spec.n_out = 4;
  const RunResult r = run(spec);
  for (const auto& P : r.P) {
    double s = 0.0;
    for (double x : P) s += x;
    EXPECT_NEAR(s, 1.0, 1e-10);
  }
  EXPECT_EQ(r.chern_system, -1);
  ASSERT_TRUE(r.chern_meanfield.has_value());
  EXPECT_EQ(*r.chern_meanfield, -1);
  EXPECT_LT(r.min_purity, 1.0);
  spec.eta = 0.0;
  EXPECT_THROW(run(spec), ConfigError);
}
