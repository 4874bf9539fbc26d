#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cavpa/lindblad.hpp"
#include "cavpa/params.hpp"

namespace cavpa {

// Parsed `key = value` configuration. Frequencies are linear MHz (the _mhz
// suffix is mandatory in key names), lengths in um, times in us. Defaults
// describe the reference cavity/transition set.
struct RunConfig {
  // geometry and transition
  double cavity_length_um = 280.0;
  double waist_um = 4.8;
  double finesse = 5e4;
  double d_el_cm = 3e-29;  // C*m
  double wavelength_nm = 744.0;

  // rates and detunings
  double gmax_mhz = 80.0;
  double kappa_mhz = 5.4;
  double gamma_mhz = 12.0;
  double f_fc = 0.37;
  std::optional<double> g_mhz;      // direct override of g = gmax sqrt(f_fc)
  std::optional<double> omega_mhz;  // default: kappa/2
  double delta1_mhz = 0.0;
  double delta2_mhz = 0.0;

  // pulse and optimization
  std::optional<double> t_p_us;  // absent: 99.9% transfer rule
  double epsilon = 0.1;

  // collective run
  int n_molecules = 2;

  // scan grids
  std::vector<double> scan_kappa_mhz = {1.0, 3.0, 10.0, 30.0};
  std::vector<double> scan_f_fc = {0.37, 0.1, 0.05, 0.01};

  // integrator
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  std::optional<double> max_step_us;
  std::optional<long> sample_count;  // default: scenario-specific

  // output paths
  std::string trajectory_csv = "trajectory.csv";
  std::string summary_json = "summary.json";
  std::string scan_csv = "scan.csv";
  std::string collective_csv = "collective.csv";
};

// Line-oriented `key = value` text, '#' comments. Unknown keys, duplicate
// keys, unparseable numbers and violated preconditions are errors that name
// the key and line number.
RunConfig parse_config(std::string_view text);

RunConfig load_config_file(const std::string& path);

// Resolved physical parameters in angular units (rad/s).
SystemParams make_system_params(const RunConfig& cfg);
CavityGeometry make_geometry(const RunConfig& cfg);
TransitionSpec make_transition(const RunConfig& cfg);
IntegratorConfig make_integrator(const RunConfig& cfg);
double resolved_omega(const RunConfig& cfg);  // rad/s

}  // namespace cavpa
