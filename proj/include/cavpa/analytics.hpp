#pragma once

#include <array>
#include <complex>

#include "cavpa/params.hpp"

namespace cavpa::analytics {

// Mode volume of the fundamental TEM00 mode, V = pi w0^2 L / 4.
double mode_volume(const CavityGeometry& geometry);

// Coupling of a closed two-level transition to the mode,
// g_max = d_el * sqrt(omega_ge / (2 hbar epsilon0 V)), omega_ge = 2 pi c / lambda.
double coupling_gmax(const TransitionSpec& transition, double mode_volume);

struct CouplingScale {
  double g;
  double cooperativity;
};

// Franck-Condon scaling g = g_max sqrt(f_fc), C = C_max f_fc.
CouplingScale scale_by_fc(double g_max, double c_max, double f_fc);

// Field decay rate of a symmetric Fabry-Perot cavity, kappa = pi c / (2 L F).
double kappa_from_finesse(const CavityGeometry& geometry);

// C = g^2 / (kappa Gamma).
double cooperativity(double g, double kappa, double gamma);

// Transfer efficiency in the weak-driving limit,
// eta_wd = 2C / (2C + 1 + (delta2/kappa)^2).
double eta_wd(double coop, double delta2 = 0.0, double kappa = 1.0);

// Exponential transfer rate in the weak-driving limit,
// R_wd = Omega^2 / (Gamma (2C+1)); tends to kappa Omega^2 / (2 g^2) for C >> 1.
double rate_wd(double omega, double gamma, double coop);

// Efficiency of the instantaneous (pi-pulse) scheme on two-photon resonance,
// eta_pi = [2 kappa / (2 kappa + Gamma)] * [2C / (2C+1)].
double eta_pi(double g, double kappa, double gamma);

// Smallest kappa for which the instantaneous pulse satisfies
// (1 - eta_pi) <= (1 + epsilon)(1 - eta_wd):
// kappa_min = Gamma (sqrt(g^2/(epsilon Gamma^2) + 1/16) - 1/4).
double pi_pulse_kappa_threshold(double g, double gamma, double epsilon);

// Quasi-steady superposition amplitudes over (|i,0>, |e,0>, |g,1>) to first
// order in Omega, normalized:
//   |D> ~ |i,0> + Omega [ (i kappa + delta2)|e,0> - g|g,1> ]
//                 / (2 g^2 + (Gamma - 2 i delta1)(kappa - i delta2)).
// The O(Omega^2) truncation means the result is the leading-order state, not
// an exact eigenvector.
std::array<std::complex<double>, 3> dark_state(const SystemParams& params);

}  // namespace cavpa::analytics
