#include "cavpa/scenarios.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "cavpa/analytics.hpp"
#include "cavpa/collective.hpp"
#include "cavpa/optimizer.hpp"
#include "cavpa/single_pair.hpp"
#include "cavpa/units.hpp"
#include "cavpa/validation.hpp"

namespace cavpa::scenarios {

namespace {

using nlohmann::json;

std::string fmt(double v) { return fmt::format("{:.17g}", v); }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // LF line endings on every platform
  if (!f) throw ConfigError(fmt::format("cannot open output file '{}'", path));
  return f;
}

void write_json(const std::string& path, const json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto f = open_out(path);
  f << "t_us";
  for (const auto& name : traj.observable_names) f << ',' << name;
  f << ",eta_cum\n";
  const auto& eta = traj.accumulator("eta_cum");
  for (size_t i = 0; i < traj.times.size(); ++i) {
    f << fmt(units::s_to_us(traj.times[i]));
    for (const auto& series : traj.observables) f << ',' << fmt(series[i]);
    f << ',' << fmt(eta[i]) << '\n';
  }
}

json params_echo(const SystemParams& p) {
  return json{{"g_mhz", units::angular_to_mhz(p.g)},
              {"kappa_mhz", units::angular_to_mhz(p.kappa)},
              {"gamma_mhz", units::angular_to_mhz(p.gamma_total())},
              {"omega_mhz", units::angular_to_mhz(p.omega)},
              {"delta1_mhz", units::angular_to_mhz(p.delta1)},
              {"delta2_mhz", units::angular_to_mhz(p.delta2)},
              {"cooperativity", p.cooperativity()}};
}

json efficiency_json(const single_pair::EfficiencyResult& e) {
  return json{{"eta_cavity", e.eta_cavity},   {"eta_direct", e.eta_direct},
              {"eta_lost", e.eta_lost},       {"p_i0_final", e.p_i0_final},
              {"residual", e.residual},       {"bookkeeping_gap", e.bookkeeping_gap()}};
}

// Rough full-span estimate used only to size the fixed sample grid.
double horizon_estimate(const SystemParams& p, double omega, std::optional<double> t_p) {
  const double gamma = p.gamma_total();
  double pulse = 0.0;
  if (t_p) {
    pulse = *t_p;
  } else if (omega > 0.0) {
    const double coop = p.kappa > 0.0 ? p.cooperativity() : p.g * p.g / (gamma * gamma);
    pulse = std::log(1e3) / analytics::rate_wd(omega, gamma, coop);
  }
  const double floor_rate = p.kappa > 0.0 ? std::min(gamma, 2.0 * p.kappa) : gamma;
  return pulse + 25.0 / floor_rate;
}

IntegratorConfig integrator_for_span(const RunConfig& cfg, double span, long default_samples) {
  IntegratorConfig ic = make_integrator(cfg);
  const long n = cfg.sample_count ? *cfg.sample_count : default_samples;
  ic.sample_interval = span / static_cast<double>(n);
  return ic;
}

int emit_pulse_run(const RunConfig& cfg, const SystemParams& params,
                   const single_pair::RunResult& run, const std::string& scenario,
                   std::ostream& out) {
  write_trajectory_csv(cfg.trajectory_csv, run.trajectory);
  json j;
  j["scenario"] = scenario;
  j["params"] = params_echo(params);
  j.update(efficiency_json(run.efficiency));
  j["t_p_us"] = units::s_to_us(run.t_p);
  j["omega_mhz"] = units::angular_to_mhz(params.omega);
  j["eta_wd_ref"] = analytics::eta_wd(params.cooperativity(), params.delta2, params.kappa);
  if (params.omega > 0.0) {
    try {
      j["transfer_rate_per_s"] = validation::fit_exponential_rate(
          run.trajectory.times, run.trajectory.observable("p_i0"), 0.5, 0.05);
    } catch (const ConvergenceError&) {
      // too few samples inside the fit window; leave the key out
    }
  }
  write_json(cfg.summary_json, j);
  out << fmt::format("{}: eta_cavity = {:.6f} (weak-drive reference {:.6f}), t_p = {:.6g} us\n",
                     scenario, run.efficiency.eta_cavity, j["eta_wd_ref"].get<double>(),
                     units::s_to_us(run.t_p));
  out << fmt::format("wrote {} and {}\n", cfg.trajectory_csv, cfg.summary_json);
  return 0;
}

}  // namespace

int run_params(const RunConfig& cfg, std::ostream& out) {
  const CavityGeometry geom = make_geometry(cfg);
  const TransitionSpec trans = make_transition(cfg);
  const SystemParams params = make_system_params(cfg);

  const double volume = analytics::mode_volume(geom);
  const double kappa_fin = analytics::kappa_from_finesse(geom);
  const double gmax_dipole = analytics::coupling_gmax(trans, volume);
  const double gmax_cfg = units::mhz_to_angular(cfg.gmax_mhz);
  const double gamma = units::mhz_to_angular(cfg.gamma_mhz);
  const double cmax = analytics::cooperativity(gmax_cfg, params.kappa, gamma);
  const auto scaled = analytics::scale_by_fc(gmax_cfg, cmax, cfg.f_fc);
  const double coop = params.cooperativity();
  const double eta_wd = analytics::eta_wd(coop);
  const double eta_pi = analytics::eta_pi(params.g, params.kappa, gamma);
  const double kappa_thr = analytics::pi_pulse_kappa_threshold(params.g, gamma, cfg.epsilon);

  out << "derived quantities\n";
  out << fmt::format("  mode volume V              = {:.6g} m^3\n", volume);
  out << fmt::format("  kappa from finesse         = {:.6g} MHz  (configured {:.6g} MHz)\n",
                     units::angular_to_mhz(kappa_fin), cfg.kappa_mhz);
  out << fmt::format("  g_max from dipole formula  = {:.6g} MHz\n",
                     units::angular_to_mhz(gmax_dipole));
  out << fmt::format("  g_max configured           = {:.6g} MHz\n", cfg.gmax_mhz);
  out << fmt::format(
      "  note: the dipole/mode-volume value differs from the configured g_max by a factor "
      "{:.3f}; no orientation or polarization averaging is applied to the dipole moment, and the "
      "configured value is the one used downstream.\n",
      gmax_dipole / gmax_cfg);
  out << fmt::format("  C_max                      = {:.6g}\n", cmax);
  out << fmt::format("  g = g_max sqrt(f_fc)       = {:.6g} MHz  (f_fc = {:.4g})\n",
                     units::angular_to_mhz(scaled.g), cfg.f_fc);
  out << fmt::format("  C = C_max f_fc             = {:.6g}\n", coop);
  out << fmt::format("  eta_wd                     = {:.6g}\n", eta_wd);
  out << fmt::format("  eta_pi                     = {:.6g}\n", eta_pi);
  out << fmt::format("  kappa threshold (eps={:g})  = {:.6g} MHz\n", cfg.epsilon,
                     units::angular_to_mhz(kappa_thr));

  json j;
  j["scenario"] = "params";
  j["mode_volume_m3"] = volume;
  j["kappa_from_finesse_mhz"] = units::angular_to_mhz(kappa_fin);
  j["gmax_from_dipole_mhz"] = units::angular_to_mhz(gmax_dipole);
  j["gmax_configured_mhz"] = cfg.gmax_mhz;
  j["gmax_ratio"] = gmax_dipole / gmax_cfg;
  j["c_max"] = cmax;
  j["g_mhz"] = units::angular_to_mhz(scaled.g);
  j["cooperativity"] = coop;
  j["eta_wd"] = eta_wd;
  j["eta_pi"] = eta_pi;
  j["kappa_threshold_mhz"] = units::angular_to_mhz(kappa_thr);
  j["f_fc"] = cfg.f_fc;
  j["kappa_mhz"] = cfg.kappa_mhz;
  j["gamma_mhz"] = cfg.gamma_mhz;
  write_json(cfg.summary_json, j);
  out << fmt::format("wrote {}\n", cfg.summary_json);
  return 0;
}

int run_simulate(const RunConfig& cfg, std::ostream& out) {
  const SystemParams params = make_system_params(cfg);
  const double omega = resolved_omega(cfg);
  std::optional<double> t_p;
  if (cfg.t_p_us) t_p = units::us_to_s(*cfg.t_p_us);
  const IntegratorConfig ic =
      integrator_for_span(cfg, horizon_estimate(params, omega, t_p), 32768);
  auto run = single_pair::run_square_pulse(params, omega, t_p, ic);
  SystemParams echo = params;
  echo.omega = omega;
  return emit_pulse_run(cfg, echo, run, "simulate", out);
}

int run_delta(const RunConfig& cfg, std::ostream& out) {
  SystemParams params = make_system_params(cfg);
  params.omega = 0.0;
  const IntegratorConfig ic =
      integrator_for_span(cfg, horizon_estimate(params, 0.0, std::nullopt), 32768);
  auto run = single_pair::run_delta_pulse(params, ic);
  return emit_pulse_run(cfg, params, run, "delta", out);
}

int run_optimize(const RunConfig& cfg, std::ostream& out) {
  SystemParams params = make_system_params(cfg);
  params.omega = 0.0;
  optimizer::OptimizerOptions opts;
  opts.integrator = make_integrator(cfg);
  const auto opt = optimizer::optimize_pulse(params, cfg.epsilon, opts);

  json j;
  j["scenario"] = "optimize";
  j["params"] = params_echo(params);
  j["epsilon"] = opt.epsilon;
  j["omega_star_mhz"] = units::angular_to_mhz(opt.omega_star);
  j["t_p_star_us"] = units::s_to_us(opt.t_p_star);
  j["eta"] = opt.eta;
  j["eta_wd_ref"] = opt.eta_wd_ref;
  j["inefficiency"] = 1.0 - opt.eta;
  j["omega_unbounded"] = opt.omega_unbounded;
  j["used_fallback_scan"] = opt.used_fallback_scan;
  write_json(cfg.summary_json, j);
  out << fmt::format(
      "optimize: Omega* = {:.6g} MHz, t_p* = {:.6g} us, eta = {:.6f} (eta_wd = {:.6f})\n",
      units::angular_to_mhz(opt.omega_star), units::s_to_us(opt.t_p_star), opt.eta,
      opt.eta_wd_ref);
  out << fmt::format("wrote {}\n", cfg.summary_json);
  return 0;
}

int run_scan(const RunConfig& cfg, std::ostream& out) {
  std::vector<double> kappas;
  for (double k : cfg.scan_kappa_mhz) kappas.push_back(units::mhz_to_angular(k));
  optimizer::OptimizerOptions opts;
  opts.integrator = make_integrator(cfg);
  const auto rows =
      optimizer::scan_kappa(cfg.scan_f_fc, kappas, cfg.epsilon,
                            units::mhz_to_angular(cfg.gmax_mhz),
                            units::mhz_to_angular(cfg.gamma_mhz), opts);

  auto f = open_out(cfg.scan_csv);
  f << "f_fc,kappa_mhz,omega_star_mhz,t_p_us,inefficiency,omega_unbounded,used_fallback,status\n";
  int failures = 0;
  for (const auto& r : rows) {
    if (r.status != "ok") ++failures;
    f << fmt(r.f_fc) << ',' << fmt(units::angular_to_mhz(r.kappa)) << ','
      << fmt(units::angular_to_mhz(r.omega_star)) << ',' << fmt(units::s_to_us(r.t_p_star)) << ','
      << fmt(r.inefficiency) << ',' << (r.omega_unbounded ? 1 : 0) << ','
      << (r.used_fallback_scan ? 1 : 0) << ',' << (r.status == "ok" ? "ok" : "error") << '\n';
  }
  json j;
  j["scenario"] = "scan";
  j["rows"] = rows.size();
  j["failures"] = failures;
  j["scan_csv"] = cfg.scan_csv;
  write_json(cfg.summary_json, j);
  out << fmt::format("scan: {} rows ({} failures), wrote {}\n", rows.size(), failures,
                     cfg.scan_csv);
  return 0;
}

int run_collective(const RunConfig& cfg, std::ostream& out) {
  const SystemParams params = make_system_params(cfg);
  const double gamma = params.gamma_total();
  const double floor_rate = params.kappa > 0.0 ? std::min(gamma, 2.0 * params.kappa) : gamma;
  const IntegratorConfig ic = integrator_for_span(cfg, 25.0 / floor_rate, 4096);
  const auto run = collective::run_collective_decay(cfg.n_molecules, params, ic);

  auto f = open_out(cfg.collective_csv);
  f << "t,mean_excited,mean_photon,cavity_yield_cumulative\n";
  const auto& excited = run.trajectory.observable("mean_excited");
  const auto& photon = run.trajectory.observable("mean_photon");
  const auto& yield = run.trajectory.accumulator("cavity_yield");
  for (size_t i = 0; i < run.trajectory.times.size(); ++i) {
    f << fmt(units::s_to_us(run.trajectory.times[i])) << ',' << fmt(excited[i]) << ','
      << fmt(photon[i]) << ',' << fmt(yield[i] / cfg.n_molecules) << '\n';
  }

  json j;
  j["scenario"] = "collective";
  j["params"] = params_echo(params);
  j["n_molecules"] = run.summary.n_molecules;
  j["cavity_yield_per_molecule"] = run.summary.cavity_yield_per_molecule;
  j["direct_g_per_molecule"] = run.summary.direct_g_per_molecule;
  j["lost_per_molecule"] = run.summary.lost_per_molecule;
  j["residual"] = run.summary.residual;
  j["eta_pi_reference"] =
      analytics::eta_pi(params.g, params.kappa, gamma);
  write_json(cfg.summary_json, j);
  out << fmt::format("collective: N = {}, cavity yield per molecule = {:.6f}\n",
                     run.summary.n_molecules, run.summary.cavity_yield_per_molecule);
  out << fmt::format("wrote {} and {}\n", cfg.collective_csv, cfg.summary_json);
  return 0;
}

int run_validate(const RunConfig& cfg, std::ostream& out) {
  (void)cfg;
  const auto reports = validation::weak_drive_suite();
  out << fmt::format("{:<34} {:<40} {:>14} {:>14} {:>10} {:>8} {}\n", "check", "inputs", "engine",
                     "oracle", "rel.err", "tol", "status");
  bool all_pass = true;
  for (const auto& r : reports) {
    all_pass = all_pass && r.pass;
    out << fmt::format("{:<34} {:<40} {:>14.8g} {:>14.8g} {:>10.3g} {:>8.2g} {}\n", r.name,
                       r.inputs, r.engine_value, r.oracle_value, r.relative_error, r.tolerance,
                       r.pass ? "pass" : "FAIL");
  }
  out << (all_pass ? "all oracle checks passed\n" : "oracle check failures present\n");
  return all_pass ? 0 : 1;
}

int run_scenario(const std::string& name, const RunConfig& cfg, std::ostream& out) {
  if (name == "params") return run_params(cfg, out);
  if (name == "simulate") return run_simulate(cfg, out);
  if (name == "delta") return run_delta(cfg, out);
  if (name == "optimize") return run_optimize(cfg, out);
  if (name == "scan") return run_scan(cfg, out);
  if (name == "collective") return run_collective(cfg, out);
  if (name == "validate") return run_validate(cfg, out);
  throw ConfigError(fmt::format("unknown scenario '{}'", name));
}

}  // namespace cavpa::scenarios
