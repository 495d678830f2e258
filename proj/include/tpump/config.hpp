#pragma once

// Run configuration: JSON text with a schema version and explicit unit tags.
// Needs nlohmann/json.hpp on the include path.
//
// Dimensioned quantities are objects {"value": x, "unit": u}:
//   energies (eta, mu_c, custom hoppings):  u in {gap, omega0, abs}
//   times (tau, duration):                  u in {inverse_gap, inverse_omega0, abs}
//   inverse temperature (beta):             u in {inverse_gap, abs}
// "gap" is the minimum instantaneous band gap of the system Hamiltonian over
// the cycle, "omega0" the energy scale of the fig2 cycle, "abs" raw
// Hamiltonian units. A bare number where a unit is needed is rejected.
// Temperatures may instead be given as a dimensionless list T_over_gap.
//
// tau can also be set by a rule:
//   {"rule": "meanfield_adiabaticity", "value": a}
// gives every temperature point its own tau = a / gap_mf(T), with gap_mf the
// minimum splitting of the mean-field Hamiltonian at that temperature
// (requires eta). With "reference_T_over_gap": T0 added, one common
// tau = a / gap_mf(T0) is used for all points instead.

#include <charconv>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpump/oracle.hpp"
#include "tpump/pipeline.hpp"

namespace tpump {

inline constexpr int schema_version = 1;
inline constexpr const char* library_version = "tpump 0.1.0";

struct ThermalPoint {
  std::string label;  // subdirectory name, e.g. "T_0.5"
  double T_over_gap = 0.0;
  ThermalParams tp;
  double tau = 0.0;  // per-point cycle time; 0 means the config's schedule
};

struct RunConfig {
  std::string pipeline;  // single, meanfield, full, oracle-check, chern
  PumpSchedule schedule;
  std::function<PumpSchedule(double)> schedule_with_tau;
  double gap = 0.0;
  int L = 32;
  int n0 = 0;
  int band = 0;
  int steps_per_cycle = 4096;
  int output_times = 64;
  double eta = 0.0;
  double mu_c = 0.0;
  std::vector<ThermalPoint> temperatures;  // empty: no thermal sector
  InitialBand initial = InitialBand::meanfield;
  OffsetEstimator offset_estimator = OffsetEstimator::minimum;
  std::optional<double> freeze_at;  // oracle-check: schedule frozen at this fraction of the cycle
  double duration = 0.0;            // oracle-check: evolution time, 0 means one cycle
  nlohmann::json resolved;          // echo of the resolved values, for meta.json

  RunSpec spec_for(const ThermalPoint* tpt) const {
    RunSpec s;
    s.pipeline = pipeline == "full" ? Pipeline::full : pipeline == "meanfield" ? Pipeline::meanfield : Pipeline::single;
    s.schedule = (tpt && tpt->tau > 0.0) ? schedule_with_tau(tpt->tau) : schedule;
    s.L = L;
    s.n0 = n0;
    s.band = band;
    s.eta = eta;
    s.cfg.steps_per_cycle = steps_per_cycle;
    s.n_out = output_times;
    s.initial = initial;
    s.offset_estimator = offset_estimator;
    if (tpt) s.tp = tpt->tp;
    return s;
  }
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ConfigError(std::string(where) + ": missing '" + key + "'");
  return j.at(key);
}

inline void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError(std::string(where) + ": unknown key '" + k + "'");
}

inline double number(const json& j, const char* where) {
  if (!j.is_number()) throw ConfigError(std::string(where) + ": expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const char* where) {
  if (!j.is_number_integer()) throw ConfigError(std::string(where) + ": expected an integer");
  return j.get<int>();
}

inline std::pair<double, std::string> tagged(const json& j, const char* where) {
  if (!j.is_object())
    throw ConfigError(std::string(where) + ": ambiguous quantity, give {\"value\": x, \"unit\": ...}");
  reject_unknown(j, {"value", "unit"}, where);
  const double v = number(require(j, "value", where), where);
  const json& u = require(j, "unit", where);
  if (!u.is_string()) throw ConfigError(std::string(where) + ": unit must be a string");
  return {v, u.get<std::string>()};
}

/// Energy in Hamiltonian units.
inline double energy(const json& j, const char* where, double gap, std::optional<double> omega0) {
  const auto [v, u] = tagged(j, where);
  if (u == "gap") return v * gap;
  if (u == "abs") return v;
  if (u == "omega0") {
    if (!omega0) throw ConfigError(std::string(where) + ": unit 'omega0' needs the fig2 schedule");
    return v * *omega0;
  }
  throw ConfigError(std::string(where) + ": unknown energy unit '" + u + "'");
}

inline double duration(const json& j, const char* where, double gap, std::optional<double> omega0) {
  const auto [v, u] = tagged(j, where);
  if (u == "inverse_gap") return v / gap;
  if (u == "abs") return v;
  if (u == "inverse_omega0") {
    if (!omega0) throw ConfigError(std::string(where) + ": unit 'inverse_omega0' needs the fig2 schedule");
    return v / *omega0;
  }
  throw ConfigError(std::string(where) + ": unknown time unit '" + u + "'");
}

inline std::string point_label(const char* prefix, double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(prefix) + std::string(buf, r.ptr);
}

}  // namespace detail

/// Parses and resolves a configuration. Throws ConfigError on anything
/// missing, unknown or ambiguous, GapClosedError if the cycle is gapless.
inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::json;
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  detail::reject_unknown(j,
                         {"schema_version", "pipeline", "schedule", "L", "n0", "band", "steps_per_cycle",
                          "output_times", "eta", "mu_c", "temperature", "initial_band", "offset_estimator",
                          "freeze_at", "duration"},
                         "config");
  const int ver = detail::integer(detail::require(j, "schema_version", "config"), "schema_version");
  if (ver != schema_version)
    throw ConfigError("config: schema_version " + std::to_string(ver) + " not supported (expected " +
                      std::to_string(schema_version) + ")");

  RunConfig c;
  const json& pj = detail::require(j, "pipeline", "config");
  if (!pj.is_string()) throw ConfigError("pipeline: expected a string");
  c.pipeline = pj.get<std::string>();
  static const std::set<std::string> pipelines{"single", "meanfield", "full", "oracle-check", "chern"};
  if (!pipelines.count(c.pipeline)) throw ConfigError("pipeline: unknown value '" + c.pipeline + "'");

  // schedule shape first, with a placeholder period; the gap does not depend on tau
  const json& sj = detail::require(j, "schedule", "config");
  if (!sj.is_object()) throw ConfigError("schedule: expected an object");
  const json& vj = detail::require(sj, "variant", "schedule");
  const std::string variant = vj.is_string() ? vj.get<std::string>() : "";
  std::optional<double> omega0;
  PumpSchedule shape;
  if (variant == "fig2") {
    detail::reject_unknown(sj, {"variant", "omega0", "tau"}, "schedule");
    omega0 = detail::number(detail::require(sj, "omega0", "schedule"), "schedule.omega0");
    if (!(*omega0 > 0.0)) throw ConfigError("schedule.omega0 must be positive");
    shape = fig2_schedule(*omega0, 1.0);
  } else if (variant == "fig3") {
    detail::reject_unknown(sj, {"variant", "tau"}, "schedule");
    shape = fig3_schedule(1.0);
  } else if (variant == "custom") {
    detail::reject_unknown(sj, {"variant", "t1", "t2", "delta", "tau"}, "schedule");
    RmParams p;
    p.t1 = detail::energy(detail::require(sj, "t1", "schedule"), "schedule.t1", 1.0, {});
    p.t2 = detail::energy(detail::require(sj, "t2", "schedule"), "schedule.t2", 1.0, {});
    p.delta = detail::energy(detail::require(sj, "delta", "schedule"), "schedule.delta", 1.0, {});
    for (const char* key : {"t1", "t2", "delta"})
      if (detail::tagged(sj.at(key), key).second != "abs")
        throw ConfigError(std::string("schedule.") + key + ": a custom schedule defines the gap, use unit 'abs'");
    shape = constant_schedule(p, 1.0);
  } else {
    throw ConfigError("schedule.variant: expected fig2, fig3 or custom");
  }
  c.gap = min_gap(shape, rmm_sampler(shape), 64, 64);

  if (j.contains("L")) c.L = detail::integer(j.at("L"), "L");
  if (j.contains("n0")) c.n0 = detail::integer(j.at("n0"), "n0");
  if (j.contains("band")) c.band = detail::integer(j.at("band"), "band");
  if (j.contains("steps_per_cycle")) c.steps_per_cycle = detail::integer(j.at("steps_per_cycle"), "steps_per_cycle");
  if (j.contains("output_times")) c.output_times = detail::integer(j.at("output_times"), "output_times");
  if (c.L < 2) throw ConfigError("L must be at least 2");
  if (c.band < 0 || c.band > 1) throw ConfigError("band must be 0 or 1");
  if (c.steps_per_cycle < 64) throw ConfigError("steps_per_cycle must be at least 64");
  if (c.output_times < 1) throw ConfigError("output_times must be at least 1");
  if (c.n0 < 0 || c.n0 >= c.L) throw ConfigError("n0 must lie in [0, L)");

  if (j.contains("eta")) c.eta = detail::energy(j.at("eta"), "eta", c.gap, omega0);
  if (c.eta < 0.0) throw ConfigError("eta must be non-negative");
  if (j.contains("mu_c")) c.mu_c = detail::energy(j.at("mu_c"), "mu_c", c.gap, omega0);

  if (j.contains("temperature")) {
    const json& tj = j.at("temperature");
    if (!tj.is_object()) throw ConfigError("temperature: expected an object");
    detail::reject_unknown(tj, {"T_over_gap", "beta"}, "temperature");
    if (tj.contains("T_over_gap") == tj.contains("beta"))
      throw ConfigError("temperature: give exactly one of T_over_gap or beta");
    if (tj.contains("T_over_gap")) {
      const json& list = tj.at("T_over_gap");
      if (!list.is_array() || list.empty()) throw ConfigError("temperature.T_over_gap: expected a non-empty list");
      for (const json& x : list) {
        const double T = detail::number(x, "temperature.T_over_gap");
        if (T < 0.0) throw ConfigError("temperature.T_over_gap: negative temperature");
        c.temperatures.push_back({detail::point_label("T_", T), T, ThermalParams::from_temperature(T * c.gap, c.mu_c)});
      }
    } else {
      const auto [v, u] = detail::tagged(tj.at("beta"), "temperature.beta");
      double beta = 0.0;
      if (u == "inverse_gap") beta = v / c.gap;
      else if (u == "abs") beta = v;
      else throw ConfigError("temperature.beta: unit must be inverse_gap or abs");
      if (beta < 0.0) throw ConfigError("temperature.beta must be non-negative");
      ThermalParams tp{beta, c.mu_c};
      c.temperatures.push_back({detail::point_label("beta_", beta), beta > 0.0 ? 1.0 / (beta * c.gap) : std::numeric_limits<double>::infinity(), tp});
    }
  }
  const bool thermal = c.pipeline == "meanfield" || c.pipeline == "full" || c.pipeline == "oracle-check";
  if (thermal && c.temperatures.empty()) throw ConfigError("pipeline " + c.pipeline + " needs a temperature");
  if ((c.pipeline == "meanfield" || c.pipeline == "full") && !(c.eta > 0.0))
    throw ConfigError("pipeline " + c.pipeline + " needs a positive eta");

  if (j.contains("initial_band")) {
    const std::string s = j.at("initial_band").is_string() ? j.at("initial_band").get<std::string>() : "";
    if (s == "meanfield") c.initial = InitialBand::meanfield;
    else if (s == "system") c.initial = InitialBand::system;
    else throw ConfigError("initial_band: expected meanfield or system");
  }
  if (j.contains("offset_estimator")) {
    const std::string s = j.at("offset_estimator").is_string() ? j.at("offset_estimator").get<std::string>() : "";
    if (s == "minimum") c.offset_estimator = OffsetEstimator::minimum;
    else if (s == "median") c.offset_estimator = OffsetEstimator::median;
    else throw ConfigError("offset_estimator: expected minimum or median");
  }
  if (j.contains("freeze_at")) {
    c.freeze_at = detail::number(j.at("freeze_at"), "freeze_at");
    if (*c.freeze_at < 0.0 || *c.freeze_at > 1.0) throw ConfigError("freeze_at: expected a cycle fraction in [0, 1]");
  }
  if (c.pipeline == "oracle-check" && c.L > oracle_max_cells)
    throw ConfigError("oracle-check: L must be at most " + std::to_string(oracle_max_cells));

  // period
  const json& tau_j = detail::require(sj, "tau", "schedule");
  double tau = 0.0;
  bool per_point = false;
  if (tau_j.is_object() && tau_j.contains("rule")) {
    detail::reject_unknown(tau_j, {"rule", "value", "reference_T_over_gap"}, "schedule.tau");
    if (tau_j.at("rule") != "meanfield_adiabaticity")
      throw ConfigError("schedule.tau.rule: expected meanfield_adiabaticity");
    if (!(c.eta > 0.0)) throw ConfigError("schedule.tau: the meanfield_adiabaticity rule needs eta");
    const double a = detail::number(detail::require(tau_j, "value", "schedule.tau"), "schedule.tau.value");
    if (!(a > 0.0)) throw ConfigError("schedule.tau.value must be positive");
    auto matched = [&](const ThermalParams& tp) {
      return a / min_gap(shape, meanfield_sampler(rmm_sampler(shape), tp, c.eta), 64, 64);
    };
    if (tau_j.contains("reference_T_over_gap")) {
      const double Tref = detail::number(tau_j.at("reference_T_over_gap"), "schedule.tau.reference_T_over_gap");
      tau = matched(ThermalParams::from_temperature(Tref * c.gap, c.mu_c));
    } else {
      if (c.temperatures.empty()) throw ConfigError("schedule.tau: the per-temperature rule needs a temperature");
      per_point = true;
      for (auto& t : c.temperatures) t.tau = matched(t.tp);
      tau = c.temperatures.front().tau;
    }
  } else {
    tau = detail::duration(tau_j, "schedule.tau", c.gap, omega0);
  }
  if (!(tau > 0.0)) throw ConfigError("schedule.tau must be positive");
  c.schedule_with_tau = [variant, omega0, fixed = shape.at(0.0), freeze = c.freeze_at](double period) {
    PumpSchedule out = variant == "fig2"   ? fig2_schedule(*omega0, period)
                       : variant == "fig3" ? fig3_schedule(period)
                                           : constant_schedule(fixed, period);
    return freeze ? frozen_schedule(out, *freeze * period, period) : out;
  };
  c.schedule = c.schedule_with_tau(tau);
  if (per_point && (c.pipeline == "oracle-check" || j.contains("duration")))
    throw ConfigError("schedule.tau: per-temperature cycle times are not supported with a fixed duration");

  c.duration = tau;
  if (j.contains("duration") && c.pipeline != "oracle-check")
    throw ConfigError("duration: only used by the oracle-check pipeline");
  if (j.contains("duration")) c.duration = detail::duration(j.at("duration"), "duration", c.gap, omega0);
  if (!(c.duration > 0.0)) throw ConfigError("duration must be positive");

  json& r = c.resolved;
  r["schema_version"] = schema_version;
  r["pipeline"] = c.pipeline;
  r["schedule"] = {{"variant", variant}, {"tau_abs", per_point ? json(nullptr) : json(tau)}};
  if (omega0) r["schedule"]["omega0"] = *omega0;
  if (variant == "custom") {
    const RmParams p = shape.at(0.0);
    r["schedule"]["t1_abs"] = p.t1;
    r["schedule"]["t2_abs"] = p.t2;
    r["schedule"]["delta_abs"] = p.delta;
  }
  if (c.freeze_at) r["freeze_at"] = *c.freeze_at;
  r["gap_abs"] = c.gap;
  r["L"] = c.L;
  r["n0"] = c.n0;
  r["band"] = c.band;
  r["steps_per_cycle"] = c.steps_per_cycle;
  r["output_times"] = c.output_times;
  r["eta_abs"] = c.eta;
  r["mu_c_abs"] = c.mu_c;
  r["duration_abs"] = c.duration;
  json temps = json::array();
  for (const auto& t : c.temperatures)
    temps.push_back({{"label", t.label},
                     {"T_over_gap", t.T_over_gap},
                     {"beta_abs", t.tp.zero_temperature() ? json(nullptr) : json(t.tp.beta)},
                     {"tau_abs", t.tau > 0.0 ? t.tau : tau},
                     {"eta_tau", c.eta * (t.tau > 0.0 ? t.tau : tau)}});
  r["temperatures"] = temps;
  r["initial_band"] = c.initial == InitialBand::meanfield ? "meanfield" : "system";
  r["offset_estimator"] = c.offset_estimator == OffsetEstimator::minimum ? "minimum" : "median";
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace tpump
