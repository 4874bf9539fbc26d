#pragma once

#include "cavpa/errors.hpp"

namespace cavpa {

// Electronic transition of the molecule. The Franck-Condon factor is the
// branching ratio Gamma_g/Gamma of the decay into the target level.
struct TransitionSpec {
  double d_el = 0.0;        // electric dipole moment (C*m)
  double wavelength = 0.0;  // transition wavelength (m)
  double gamma = 0.0;       // excited-state energy decay rate (rad/s)
  double f_fc = 0.0;        // Franck-Condon factor in [0,1]

  double gamma_g() const { return f_fc * gamma; }
  double gamma_h() const { return (1.0 - f_fc) * gamma; }

  void validate() const;
};

// Fabry-Perot resonator, fundamental TEM00 mode.
struct CavityGeometry {
  double length = 0.0;   // mirror separation L (m)
  double waist = 0.0;    // mode waist w0 (m)
  double finesse = 0.0;  // dimensionless, > 1

  void validate() const;
};

// All rates and detunings of the five-level scheme in one validated record,
// angular units (rad/s).
struct SystemParams {
  double g = 0.0;        // molecule-cavity coupling
  double kappa = 0.0;    // cavity field decay rate
  double gamma_g = 0.0;  // spontaneous decay into the target state
  double gamma_h = 0.0;  // spontaneous decay into all other states
  double omega = 0.0;    // PA laser Rabi frequency
  double delta1 = 0.0;   // one-photon detuning
  double delta2 = 0.0;   // two-photon detuning

  double gamma_total() const { return gamma_g + gamma_h; }
  double cooperativity() const;

  void validate() const;
};

}  // namespace cavpa
