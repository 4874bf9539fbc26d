#pragma once

#include <optional>
#include <vector>

#include "cavpa/lindblad.hpp"
#include "cavpa/params.hpp"

namespace cavpa::single_pair {

// Basis ordering of the five-level scheme. The ordering is part of the
// external contract (CSV column order).
enum FiveLevelIndex : int { kI0 = 0, kE0 = 1, kG1 = 2, kG0 = 3, kH0 = 4 };
inline constexpr int kDim = 5;

const std::vector<std::string>& basis_labels();  // {"i0","e0","g1","g0","h0"}

struct SquarePulse {
  double omega = 0.0;  // Rabi frequency during the pulse (rad/s)
  double t_p = 0.0;    // duration (s); Omega(t) = omega for t in [0, t_p), 0 after
};

struct EfficiencyResult {
  double eta_cavity = 0.0;  // 2 kappa int rho_g1g1 dt, the heralded channel
  double eta_direct = 0.0;  // Gamma_g int rho_e0e0 dt: right state, no herald photon
  double eta_lost = 0.0;    // Gamma_h int rho_e0e0 dt
  double p_i0_final = 0.0;  // population still in |i,0> at truncation
  double residual = 0.0;    // rho_e0e0 + rho_g1g1 at truncation

  // |eta_cavity + eta_direct + eta_lost + p_i0_final + residual - 1|
  double bookkeeping_gap() const;
};

struct RunResult {
  Trajectory trajectory;
  EfficiencyResult efficiency;
  double t_p = 0.0;  // pulse duration actually used (s); 0 for the delta pulse
};

// H = delta1 |e0><e0| + delta2 |g1><g1| + Omega(t)/2 (|e0><i0| + h.c.)
//   + g (|g1><e0| + h.c.), collapses sqrt(2 kappa)|g0><g1|,
// sqrt(Gamma_g)|g0><e0|, sqrt(Gamma_h)|h0><e0|. Without a pulse the drive is
// constant at params.omega.
LindbladModel build_five_level(const SystemParams& params,
                               const std::optional<SquarePulse>& pulse = std::nullopt);

// Square PA pulse starting from |i,0>. If t_p is absent it is set by the
// 99.9% transfer rule (rho_i0i0 < 1e-3). After the pulse the system decays
// freely until rho_e0e0 + rho_g1g1 < residual_threshold.
RunResult run_square_pulse(const SystemParams& params, double omega,
                           std::optional<double> t_p = std::nullopt,
                           const IntegratorConfig& config = {}, double residual_threshold = 1e-8);

// Earliest time at which rho_i0i0 < 1e-3 under constant drive, refined by
// bisection to 1e-3 relative precision in time.
double transfer_time_99_9(const SystemParams& params, double omega,
                          const IntegratorConfig& config = {});

// Constant drive from |i,0> held on until the undecayed population
// rho_i0 + rho_e0 + rho_g1 drops below active_threshold: the efficiency of
// the completed transfer at this Rabi frequency. RunResult.t_p reports the
// time the drive was on.
RunResult run_cw_complete(const SystemParams& params, double omega,
                          const IntegratorConfig& config = {}, double active_threshold = 1e-8);

// Instantaneous pi-pulse limit: initialize in |e,0> with the drive off.
RunResult run_delta_pulse(const SystemParams& params, const IntegratorConfig& config = {},
                          double residual_threshold = 1e-8);

}  // namespace cavpa::single_pair
