#include "cavpa/analytics.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "cavpa/units.hpp"

namespace cavpa::analytics {

using std::numbers::pi;

double mode_volume(const CavityGeometry& geometry) {
  geometry.validate();
  return pi * geometry.waist * geometry.waist * geometry.length / 4.0;
}

double coupling_gmax(const TransitionSpec& transition, double mode_volume) {
  transition.validate();
  if (!(mode_volume > 0.0))
    throw InvalidParameterError(fmt::format("mode volume must be > 0, got {}", mode_volume));
  const double omega_ge = units::two_pi * units::c_light / transition.wavelength;
  // No orientation or polarization averaging is applied; the dipole moment
  // enters as given.
  return transition.d_el * std::sqrt(omega_ge / (2.0 * units::hbar * units::epsilon0 * mode_volume));
}

CouplingScale scale_by_fc(double g_max, double c_max, double f_fc) {
  if (!(f_fc >= 0.0 && f_fc <= 1.0))
    throw InvalidParameterError(fmt::format("f_fc must lie in [0,1], got {}", f_fc));
  return {g_max * std::sqrt(f_fc), c_max * f_fc};
}

double kappa_from_finesse(const CavityGeometry& geometry) {
  geometry.validate();
  return pi * units::c_light / (2.0 * geometry.length * geometry.finesse);
}

double cooperativity(double g, double kappa, double gamma) {
  if (!(kappa > 0.0) || !(gamma > 0.0))
    throw InvalidParameterError("cooperativity requires kappa > 0 and Gamma > 0");
  return g * g / (kappa * gamma);
}

double eta_wd(double coop, double delta2, double kappa) {
  if (coop < 0.0) throw InvalidParameterError(fmt::format("C must be >= 0, got {}", coop));
  double detuning_term = 0.0;
  if (delta2 != 0.0) {
    if (!(kappa > 0.0))
      throw InvalidParameterError("eta_wd with delta2 != 0 requires kappa > 0");
    detuning_term = (delta2 / kappa) * (delta2 / kappa);
  }
  return 2.0 * coop / (2.0 * coop + 1.0 + detuning_term);
}

double rate_wd(double omega, double gamma, double coop) {
  if (!(gamma > 0.0)) throw InvalidParameterError("rate_wd requires Gamma > 0");
  if (coop < 0.0) throw InvalidParameterError(fmt::format("C must be >= 0, got {}", coop));
  return omega * omega / (gamma * (2.0 * coop + 1.0));
}

double eta_pi(double g, double kappa, double gamma) {
  if (!(kappa > 0.0) || !(gamma > 0.0))
    throw InvalidParameterError("eta_pi requires kappa > 0 and Gamma > 0");
  const double coop = cooperativity(g, kappa, gamma);
  return (2.0 * kappa / (2.0 * kappa + gamma)) * (2.0 * coop / (2.0 * coop + 1.0));
}

double pi_pulse_kappa_threshold(double g, double gamma, double epsilon) {
  if (!(epsilon > 0.0))
    throw InvalidParameterError(fmt::format("epsilon must be > 0, got {}", epsilon));
  if (!(gamma > 0.0)) throw InvalidParameterError("threshold requires Gamma > 0");
  const double x = g / gamma;
  return gamma * (std::sqrt(x * x / epsilon + 1.0 / 16.0) - 0.25);
}

std::array<std::complex<double>, 3> dark_state(const SystemParams& params) {
  params.validate();
  using C = std::complex<double>;
  const double gamma = params.gamma_total();
  const C denom = C(2.0 * params.g * params.g, 0.0) +
                  C(gamma, -2.0 * params.delta1) * C(params.kappa, -params.delta2);
  // Weak-drive validity (Omega << Gamma, g^2/kappa) is the caller's business;
  // only the outright pole is rejected here.
  const double scale = 2.0 * params.g * params.g + gamma * params.kappa +
                       std::abs(params.delta1 * params.delta2) + gamma * std::abs(params.delta2) +
                       params.kappa * std::abs(params.delta1);
  if (std::abs(denom) <= 1e-14 * scale || denom == C(0.0, 0.0))
    throw SingularParameterError("dark_state denominator 2g^2 + (Gamma - 2i d1)(kappa - i d2) vanishes");

  const C amp_e = params.omega * C(params.delta2, params.kappa) / denom;
  const C amp_g1 = -params.omega * params.g / denom;
  const double norm =
      std::sqrt(1.0 + std::norm(amp_e) + std::norm(amp_g1));
  return {C(1.0, 0.0) / norm, amp_e / norm, amp_g1 / norm};
}

}  // namespace cavpa::analytics
