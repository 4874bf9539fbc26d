#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cavpa/lindblad.hpp"
#include "cavpa/params.hpp"

namespace cavpa::optimizer {

struct PulseOptimum {
  double omega_star = 0.0;   // rad/s
  double t_p_star = 0.0;     // s, from the 99.9% transfer rule at omega_star
  double eta = 0.0;          // completed-transfer efficiency at omega_star
  double eta_wd_ref = 0.0;   // weak-driving reference efficiency
  double epsilon = 0.0;
  bool omega_unbounded = false;    // feasible all the way to the search cap
  bool used_fallback_scan = false; // bisection trace was not monotone
};

struct OptimizerOptions {
  double omega_lo_factor = 0.01;     // omega_lo = kappa / 100
  double omega_cap_factor = 1024.0;  // search cap = 2^10 kappa
  double omega_rel_tol = 0.01;       // bisection precision in omega
  IntegratorConfig integrator{};
};

// Largest Omega whose completed square-pulse transfer keeps
// 1 - eta <= (1 + epsilon)(1 - eta_wd), found by bisection on log Omega;
// the reported t_p_star is the 99.9% transfer time at that Omega.
// Requires delta1 = delta2 = 0.
PulseOptimum optimize_pulse(const SystemParams& base, double epsilon,
                            const OptimizerOptions& options = {});

struct ScanRow {
  double f_fc = 0.0;
  double kappa = 0.0;        // rad/s
  double omega_star = 0.0;   // rad/s
  double t_p_star = 0.0;     // s
  double inefficiency = 0.0; // 1 - eta at the optimum
  bool omega_unbounded = false;
  bool used_fallback_scan = false;
  std::string status = "ok"; // or the error message for this grid point
};

// optimize_pulse on every (f_fc, kappa) grid point, g = g_max sqrt(f_fc),
// Gamma split as Gamma_g = f_fc Gamma. Rows come out in grid order; failures
// are recorded per row and do not abort the scan.
std::vector<ScanRow> scan_kappa(std::span<const double> f_fc_list,
                                std::span<const double> kappa_grid, double epsilon, double g_max,
                                double gamma_total, const OptimizerOptions& options = {});

namespace detail {

// Largest x in [lo, cap] with objective(x) <= budget for a nondecreasing
// objective. `lo` is assumed feasible and only evaluated if the bracket
// collapses onto it; the evaluation trace is kept for the monotonicity audit.
struct SearchOutcome {
  double best = 0.0;
  double best_value = 0.0;
  bool hit_cap = false;
  bool lo_feasible = true;
  double lo_value = 0.0;  // meaningful only when lo was evaluated
  bool monotone = true;
  std::vector<std::pair<double, double>> trials;  // (x, objective) in call order
};

SearchOutcome max_feasible(const std::function<double(double)>& objective, double budget,
                           double lo, double start, double cap, double rel_tol);

}  // namespace detail

}  // namespace cavpa::optimizer
