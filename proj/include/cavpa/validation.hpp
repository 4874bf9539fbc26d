#pragma once

#include <span>
#include <string>
#include <vector>

#include "cavpa/lindblad.hpp"
#include "cavpa/params.hpp"

namespace cavpa::validation {

struct OracleReport {
  std::string name;
  std::string inputs;
  double engine_value = 0.0;
  double oracle_value = 0.0;
  double relative_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Exact cavity yield after instantaneous excitation to |e,0>:
//   eta = kappa g^2 / ((kappa + Gamma/2)(g^2 + kappa Gamma/2)).
// Independent route: the amplitude equations
//   c_e' = -(Gamma/2) c_e - i g c_g1,   c_g1' = -kappa c_g1 - i g c_e,
// with c_e(0)=1 give, in Laplace space, c_g1(s) = -i g / D(s) with
// D(s) = s^2 + b s + a, a = g^2 + kappa Gamma / 2, b = kappa + Gamma/2.
// Plancherel then yields int_0^inf |c_g1|^2 dt = g^2 / (2 a b), and
// eta = 2 kappa * that.
double delta_pulse_exact(double g, double kappa, double gamma);

// Numeric root in kappa of (1 - eta_pi) = (1 + epsilon)(1 - eta_wd), located
// by bisection; cross-checks the closed form in analytics.
double pi_pulse_threshold_numeric(double g, double gamma, double epsilon);

// Classical fixed-step RK4 on dense matrices through model.hamiltonian(t);
// deliberately shares no numerical kernels with evolve().
Trajectory fixed_step_reference(const LindbladModel& model, const DensityMatrix& rho0, double dt,
                                double t_end, std::span<const ObservableSpec> observables = {},
                                std::span<const AccumulatorSpec> accumulators = {});

// Least-squares exponential rate of `values` over the window where they lie
// in [v_lo, v_hi]: fits ln v = c - rate * t. Throws if fewer than
// min_points samples fall inside the window.
double fit_exponential_rate(std::span<const double> times, std::span<const double> values,
                            double v_hi, double v_lo, int min_points = 10);

// Weak-drive cross-checks on a grid of parameter points (Omega <= kappa/50):
// (a) simulated efficiency vs the closed-form weak-drive value, (b) transfer
// rate vs the closed-form rate, (c) quasi-steady-state populations vs the
// dark-state amplitudes, (d) repump-rate independence of the population
// ratio. Empty grid selects the default two-point grid (C=10 at delta2=0 and
// delta2=kappa).
std::vector<OracleReport> weak_drive_suite(std::span<const SystemParams> grid = {});

}  // namespace cavpa::validation
