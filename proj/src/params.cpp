#include "cavpa/params.hpp"

#include <cmath>
#include <fmt/format.h>

namespace cavpa {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameterError(what);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void TransitionSpec::validate() const {
  require(finite(d_el) && d_el > 0.0, fmt::format("d_el must be > 0, got {}", d_el));
  require(finite(wavelength) && wavelength > 0.0,
          fmt::format("wavelength must be > 0, got {}", wavelength));
  require(finite(gamma) && gamma > 0.0, fmt::format("Gamma must be > 0, got {}", gamma));
  require(finite(f_fc) && f_fc >= 0.0 && f_fc <= 1.0,
          fmt::format("f_fc must lie in [0,1], got {}", f_fc));
}

void CavityGeometry::validate() const {
  require(finite(length) && length > 0.0, fmt::format("cavity length must be > 0, got {}", length));
  require(finite(waist) && waist > 0.0, fmt::format("mode waist must be > 0, got {}", waist));
  require(finite(finesse) && finesse > 1.0, fmt::format("finesse must be > 1, got {}", finesse));
}

double SystemParams::cooperativity() const {
  const double gamma = gamma_total();
  if (kappa <= 0.0 || gamma <= 0.0)
    throw InvalidParameterError("cooperativity requires kappa > 0 and Gamma > 0");
  return g * g / (kappa * gamma);
}

void SystemParams::validate() const {
  require(finite(g) && g >= 0.0, fmt::format("g must be >= 0, got {}", g));
  require(finite(kappa) && kappa >= 0.0, fmt::format("kappa must be >= 0, got {}", kappa));
  require(finite(gamma_g) && gamma_g >= 0.0, fmt::format("Gamma_g must be >= 0, got {}", gamma_g));
  require(finite(gamma_h) && gamma_h >= 0.0, fmt::format("Gamma_h must be >= 0, got {}", gamma_h));
  require(gamma_g + gamma_h > 0.0, "Gamma_g + Gamma_h must be > 0");
  require(finite(omega) && omega >= 0.0, fmt::format("Omega must be >= 0, got {}", omega));
  require(finite(delta1), "delta1 must be finite");
  require(finite(delta2), "delta2 must be finite");
}

}  // namespace cavpa
