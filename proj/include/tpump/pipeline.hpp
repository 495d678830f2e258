#pragma once

// End-to-end runs: single-particle pumping, the mean-field channel and the
// full coupled dynamics, each reduced to per-time observables.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tpump/evolve.hpp"
#include "tpump/model.hpp"
#include "tpump/pump_full.hpp"
#include "tpump/pump_single.hpp"
#include "tpump/spectral.hpp"
#include "tpump/thermal.hpp"

namespace tpump {

enum class Pipeline { single, meanfield, full };

inline std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::single: return "single";
    case Pipeline::meanfield: return "meanfield";
    case Pipeline::full: return "full";
  }
  return "?";
}

/// Which Hamiltonian's lowest band defines the auxiliary Wannier state of the
/// full dynamics.
enum class InitialBand { meanfield, system };

struct RunSpec {
  Pipeline pipeline = Pipeline::single;
  PumpSchedule schedule = fig2_schedule(1.0, 100.0);
  int L = 32;
  ThermalParams tp{};
  double eta = 0.0;
  int n0 = 0;
  int band = 0;
  PropagatorConfig cfg{};
  int n_out = 64;
  InitialBand initial = InitialBand::meanfield;
  OffsetEstimator offset_estimator = OffsetEstimator::minimum;
};

struct ObservableRow {
  double t = 0.0;
  double R = 0.0;
  double Var = 0.0;
  double A = std::numeric_limits<double>::quiet_NaN();
  double B = std::numeric_limits<double>::quiet_NaN();
  int peak = 0;
  double offset = 0.0;
  double R_sub = 0.0;
  double Var_sub = 0.0;
};

struct RunResult {
  std::vector<double> times;
  std::vector<std::vector<double>> P;  // P[time][cell]
  std::vector<ObservableRow> obs;
  std::string gauge_fingerprint;
  double gap_system = 0.0;
  double gap_generator = 0.0;  // gap of the Hamiltonian driving the particle
  int chern_system = 0;
  std::optional<int> chern_meanfield;
  int expected_shift = 0;  // Chern number of the band the particle starts in
  double min_purity = 1.0; // smallest Tr G_k^2 at the final time (full only)

  const ObservableRow& final() const { return obs.back(); }
};

namespace detail {

/// Fills per-time observables from the P_n series. The unwrapping window
/// starts at n0 and follows the running peak.
inline void reduce_observables(const RunSpec& spec, RunResult& res) {
  const int L = spec.L;
  int ref = spec.n0;
  res.obs.clear();
  for (std::size_t i = 0; i < res.P.size(); ++i) {
    const auto& P = res.P[i];
    ref += ring_offset(detail::argmax(P), ref, L);
    const Moments m = com_dispersion(P, ref);
    ObservableRow row;
    row.t = res.times[i];
    row.R = (ref - spec.n0) + m.R;
    row.Var = m.Var;
    row.peak = ref - spec.n0;
    try {
      const PeakShift ps = offset_subtract_peak(P, res.P.front(), spec.offset_estimator);
      row.offset = ps.offset;
      row.R_sub = ps.R_sub;
      row.Var_sub = ps.Var_sub;
    } catch (const NoPeakError&) {
      // a washed-out distribution mid-cycle is recorded; at the end it is fatal
      if (i + 1 == res.P.size()) throw;
      row.offset = row.R_sub = row.Var_sub = std::numeric_limits<double>::quiet_NaN();
    }
    res.obs.push_back(row);
  }
}

inline std::vector<double> output_times(double t_end, int n_out) {
  std::vector<double> t(static_cast<std::size_t>(n_out) + 1);
  for (int i = 0; i <= n_out; ++i) t[static_cast<std::size_t>(i)] = t_end * i / n_out;
  return t;
}

}  // namespace detail

/// Single-particle or mean-field channel.
inline RunResult run_band_pump(const RunSpec& spec) {
  const MomentumGrid grid(spec.L);
  const BlochSampler system = rmm_sampler(spec.schedule);
  RunResult res;
  res.gap_system = min_gap(spec.schedule, system, 64, 64);
  res.chern_system = chern_number(system, spec.schedule, spec.band);

  BlochSampler gen = system;
  if (spec.pipeline == Pipeline::meanfield) {
    gen = meanfield_sampler(system, spec.tp, spec.eta);
    res.gap_generator = min_gap(spec.schedule, gen, 64, 64);
    res.chern_meanfield = chern_number(gen, spec.schedule, spec.band);
    res.expected_shift = *res.chern_meanfield;
  } else {
    res.gap_generator = res.gap_system;
    res.expected_shift = res.chern_system;
  }

  PropagatorConfig cfg = spec.cfg;
  cfg.cycle = spec.schedule.tau;
  const SpinorField psi0 = init_wannier(gen, grid, spec.band, spec.n0);
  res.gauge_fingerprint = gauge_fingerprint(psi0);
  const auto fields = evolve_field_series(psi0, gen, 0.0, spec.schedule.tau, spec.n_out, cfg);

  res.times = detail::output_times(spec.schedule.tau, spec.n_out);
  for (const auto& f : fields) res.P.push_back(position_distribution(f).P);
  detail::reduce_observables(spec, res);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const DispersionTerms d = dispersion_terms(fields[i]);
    res.obs[i].A = d.A;
    res.obs[i].B = d.B;
  }
  return res;
}

/// Initial auxiliary spinors and momentum amplitudes of the full dynamics.
struct AuxInitialState {
  std::vector<CVec> phi0;
  std::vector<cplx> C;
  std::string gauge_fingerprint;
};

inline AuxInitialState full_initial_state(const RunSpec& spec) {
  const MomentumGrid grid(spec.L);
  const BlochSampler system = rmm_sampler(spec.schedule);
  const BlochSampler source =
      spec.initial == InitialBand::meanfield ? meanfield_sampler(system, spec.tp, spec.eta) : system;
  const auto sb = smooth_band(source, grid, 0.0, spec.band);
  AuxInitialState s;
  s.phi0 = sb.phi;
  const double norm = 1.0 / std::sqrt(static_cast<double>(spec.L));
  for (int j = 0; j < spec.L; ++j) s.C.push_back(norm * std::exp(-I * (spec.n0 * grid.k(j))));
  s.gauge_fingerprint = gauge_fingerprint(SpinorField{sb.phi});
  return s;
}

/// Full coupled dynamics via the per-momentum factorisation.
inline RunResult run_full(const RunSpec& spec) {
  if (spec.eta <= 0.0) throw ConfigError("full dynamics needs a positive coupling");
  const MomentumGrid grid(spec.L);
  const BlochSampler system = rmm_sampler(spec.schedule);
  const BlochSampler mf = meanfield_sampler(system, spec.tp, spec.eta);
  RunResult res;
  res.gap_system = min_gap(spec.schedule, system, 64, 64);
  res.chern_system = chern_number(system, spec.schedule, spec.band);
  res.gap_generator = min_gap(spec.schedule, mf, 64, 64);
  res.chern_meanfield = chern_number(mf, spec.schedule, spec.band);
  res.expected_shift = spec.initial == InitialBand::meanfield ? *res.chern_meanfield : res.chern_system;

  const AuxInitialState init = full_initial_state(spec);
  res.gauge_fingerprint = init.gauge_fingerprint;

  PropagatorConfig cfg = spec.cfg;
  cfg.cycle = spec.schedule.tau;
  const OutputGrid out{spec.schedule.tau, spec.n_out};
  std::vector<std::vector<JointBlock>> per_k(static_cast<std::size_t>(spec.L));
  parallel_for(per_k.size(), [&](std::size_t j) {
    per_k[j] = gk_Gk(grid.k(static_cast<int>(j)), system, spec.tp, spec.eta, init.phi0[j], cfg, out);
  });
  for (const auto& series : per_k)
    res.min_purity = std::min(res.min_purity, (series.back().G * series.back().G).trace().real());

  res.times = detail::output_times(spec.schedule.tau, spec.n_out);
  for (const auto& rho : assemble_rho_series(per_k, init.C)) res.P.push_back(rho_to_position(rho).P);
  detail::reduce_observables(spec, res);
  return res;
}

inline RunResult run(const RunSpec& spec) {
  return spec.pipeline == Pipeline::full ? run_full(spec) : run_band_pump(spec);
}

}  // namespace tpump
