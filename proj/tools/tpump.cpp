// tpump: experiment runner.
//
//   tpump run <config.json> [--out DIR] [--steps N] [--check-convergence]
//   tpump chern <config.json>
//
// Exit codes: 0 ok, 1 config error, 2 physics guard, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tpump/config.hpp"
#include "tpump/io.hpp"
#include "tpump/oracle.hpp"
#include "tpump/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tpump;

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  int steps = 0;
  bool check_convergence = false;
};

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

RunConfig load(const Options& o) {
  RunConfig c = parse_config_text(read_text(o.config));
  if (o.steps > 0) {
    if (o.steps < 64) throw ConfigError("--steps must be at least 64");
    c.steps_per_cycle = o.steps;
    c.resolved["steps_per_cycle"] = o.steps;
  }
  return c;
}

json num_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json row_json(const ObservableRow& r) {
  return {{"t", r.t},           {"R", r.R},           {"Var", r.Var},
          {"A", num_or_null(r.A)}, {"B", num_or_null(r.B)}, {"peak", r.peak},
          {"offset", num_or_null(r.offset)}, {"R_sub", num_or_null(r.R_sub)}, {"Var_sub", num_or_null(r.Var_sub)}};
}

json convergence_report(const RunResult& a, const RunResult& b, int steps) {
  double dp = 0.0;
  for (std::size_t i = 0; i < a.P.size(); ++i)
    for (std::size_t n = 0; n < a.P[i].size(); ++n) dp = std::max(dp, std::abs(a.P[i][n] - b.P[i][n]));
  const auto& fa = a.final();
  const auto& fb = b.final();
  json rep = {{"steps_per_cycle", steps},
              {"steps_per_cycle_doubled", 2 * steps},
              {"max_abs_delta_P", dp},
              {"delta_R_final", std::abs(fa.R - fb.R)},
              {"delta_Var_final", std::abs(fa.Var - fb.Var)}};
  if (std::isfinite(fa.R_sub) && std::isfinite(fb.R_sub)) rep["delta_R_sub_final"] = std::abs(fa.R_sub - fb.R_sub);
  return rep;
}

void write_point(const fs::path& dir, const RunConfig& c, const ThermalPoint* tpt, const RunResult& res,
                 const json& convergence) {
  fs::create_directories(dir);
  std::ostringstream pn, obs;
  write_pn_csv(pn, res);
  write_obs_csv(obs, res);
  write_file((dir / "series_pn.csv").string(), pn.str());
  write_file((dir / "series_obs.csv").string(), obs.str());

  json meta;
  meta["library_version"] = library_version;
  meta["schema_version"] = schema_version;
  meta["config"] = c.resolved;
  if (tpt)
    meta["point"] = {{"label", tpt->label},
                     {"T_over_gap", num_or_null(tpt->T_over_gap)},
                     {"beta_abs", tpt->tp.zero_temperature() ? json(nullptr) : json(tpt->tp.beta)}};
  meta["gauge_fingerprint"] = res.gauge_fingerprint;
  meta["gap_system"] = res.gap_system;
  meta["gap_generator"] = res.gap_generator;
  meta["chern_system"] = res.chern_system;
  meta["chern_meanfield"] = res.chern_meanfield ? json(*res.chern_meanfield) : json(nullptr);
  meta["expected_shift"] = res.expected_shift;
  if (c.pipeline == "full") meta["min_purity"] = res.min_purity;
  meta["final"] = row_json(res.final());
  meta["columns"] = {{"series_pn.csv", pn_header}, {"series_obs.csv", obs_header}};
  meta["convergence"] = convergence;
  write_file((dir / "meta.json").string(), meta.dump(2) + "\n");
}

void print_final(const std::string& label, const RunResult& res) {
  const auto& f = res.final();
  std::cout << label << ": R=" << fmt_num(f.R) << " Var=" << fmt_num(f.Var) << " peak=" << f.peak
            << " R_sub=" << fmt_num(f.R_sub) << " C=" << res.expected_shift << '\n';
}

int cmd_run_pipeline(const Options& o, const RunConfig& c) {
  const fs::path out(o.out);
  std::vector<const ThermalPoint*> points;
  if (c.temperatures.empty()) points.push_back(nullptr);
  for (const auto& t : c.temperatures) points.push_back(&t);

  for (const ThermalPoint* tpt : points) {
    const RunSpec spec = c.spec_for(tpt);
    if (spec.pipeline == Pipeline::full && spec.eta * spec.schedule.tau < 5.0)
      std::cerr << "warning: eta*tau = " << fmt_num(spec.eta * spec.schedule.tau)
                << " < 5; the auxiliary particle cannot follow adiabatically\n";
    const RunResult res = run(spec);
    json conv = nullptr;
    if (o.check_convergence) {
      RunSpec fine = spec;
      fine.cfg.steps_per_cycle *= 2;
      conv = convergence_report(res, run(fine), spec.cfg.steps_per_cycle);
    }
    const fs::path dir = tpt ? out / tpt->label : out;
    write_point(dir, c, tpt, res, conv);
    print_final(tpt ? tpt->label : c.pipeline, res);
  }
  return 0;
}

int cmd_oracle_check(const Options& o, const RunConfig& c) {
  const MomentumGrid grid(c.L);
  const BlochSampler sys = rmm_sampler(c.schedule);
  PropagatorConfig cfg;
  cfg.steps_per_cycle = c.steps_per_cycle;
  cfg.cycle = c.schedule.tau;
  const OutputGrid out{c.duration, c.output_times};
  json points = json::array();
  double worst = 0.0;
  for (const auto& tpt : c.temperatures) {
    const RunSpec spec = c.spec_for(&tpt);
    const AuxInitialState init = full_initial_state(spec);
    const auto a = brute_force_rho_aux(sys, grid, tpt.tp, c.eta, init.phi0, init.C, cfg, out);
    const auto b = factorised_rho_aux(sys, grid, tpt.tp, c.eta, init.phi0, init.C, cfg, out);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, max_abs(a[i].rho - b[i].rho));
    worst = std::max(worst, dev);
    points.push_back({{"label", tpt.label}, {"max_deviation", dev}});
    std::cout << tpt.label << ": max deviation " << fmt_num(dev) << '\n';
  }
  fs::create_directories(o.out);
  json rep = {{"library_version", library_version},
              {"config", c.resolved},
              {"points", points},
              {"max_deviation", worst},
              {"tolerance", 1e-8}};
  write_file((fs::path(o.out) / "oracle.json").string(), rep.dump(2) + "\n");
  std::cout << "max deviation " << fmt_num(worst) << '\n';
  if (worst > 1e-8) throw NumericalError("oracle-check: factorised and brute-force states differ by " + fmt_num(worst));
  return 0;
}

int cmd_run(const Options& o) {
  const RunConfig c = load(o);
  if (c.pipeline == "oracle-check") return cmd_oracle_check(o, c);
  if (c.pipeline == "chern") throw ConfigError("pipeline 'chern' is served by the chern command");
  return cmd_run_pipeline(o, c);
}

int cmd_chern(const Options& o) {
  const RunConfig c = load(o);
  const BlochSampler sys = rmm_sampler(c.schedule);
  json rep;
  rep["gap_system"] = c.gap;
  rep["chern_system"] = {chern_number(sys, c.schedule, 0), chern_number(sys, c.schedule, 1)};
  json mf = json::array();
  if (c.eta > 0.0)
    for (const auto& t : c.temperatures) {
      const BlochSampler m = meanfield_sampler(sys, t.tp, c.eta);
      mf.push_back({{"label", t.label},
                    {"gap", min_gap(c.schedule, m, 64, 64)},
                    {"chern", {chern_number(m, c.schedule, 0), chern_number(m, c.schedule, 1)}}});
    }
  rep["meanfield"] = mf;
  std::cout << rep.dump(2) << '\n';
  return 0;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::config:
    case ErrorKind::validation: return 1;
    case ErrorKind::physics: return 2;
    case ErrorKind::numerical: return 3;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thouless pump simulator"};
  app.require_subcommand(1);
  Options o;
  auto* run = app.add_subcommand("run", "run the pipeline named in the config");
  run->add_option("config", o.config, "config file (JSON)")->required();
  run->add_option("--out", o.out, "output directory");
  run->add_option("--steps", o.steps, "override steps per cycle");
  run->add_flag("--check-convergence", o.check_convergence, "rerun with doubled steps and report deltas");
  auto* chern = app.add_subcommand("chern", "Chern numbers of the system and mean-field bands");
  chern->add_option("config", o.config, "config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    return run->parsed() ? cmd_run(o) : cmd_chern(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
