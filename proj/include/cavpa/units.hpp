#pragma once

#include <numbers>

namespace cavpa::units {

// CODATA 2018, SI.
inline constexpr double c_light = 299792458.0;        // m/s
inline constexpr double hbar = 1.054571817e-34;       // J*s
inline constexpr double epsilon0 = 8.8541878128e-12;  // F/m

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Every rate and detuning inside the library is an angular frequency in
// rad/s. Config files, CSV and JSON quote linear frequencies nu = omega/2pi
// in MHz. These two helpers are the only place the 2pi crosses.
inline constexpr double mhz_to_angular(double nu_mhz) { return two_pi * 1e6 * nu_mhz; }
inline constexpr double angular_to_mhz(double omega) { return omega / (two_pi * 1e6); }

inline constexpr double us_to_s(double t_us) { return 1e-6 * t_us; }
inline constexpr double s_to_us(double t_s) { return 1e6 * t_s; }

}  // namespace cavpa::units
