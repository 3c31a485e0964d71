#pragma once

#include <cmath>

#include "common.hpp"

// Conversions between physical units and the internal H0 = 1 units. Only the
// CLI boundary uses these.
namespace slecosmo::units {

inline constexpr double hubble_gev_per_h = 2.1332e-42;     // 100 km/s/Mpc in GeV
inline constexpr double planck_mass_gev = 1.220890e19;     // G = 1/M_pl^2
inline constexpr double boltzmann_gev_per_kelvin = 8.617333262e-14;
inline constexpr double default_little_h = 0.674;

inline double hubble_gev(double little_h) { return hubble_gev_per_h * little_h; }

// Newton's constant in units of H0^-2.
inline double physical_newton_constant(double little_h) {
    const double r = hubble_gev(little_h) / planck_mass_gev;
    return r * r;
}

inline double mass_in_h0(double mass_gev, double little_h) { return mass_gev / hubble_gev(little_h); }

// Comoving inverse temperature (a = 1 normalisation) in units of 1/H0.
inline double beta_from_kelvin(double kelvin, double little_h) {
    if (!(kelvin > 0.0)) throw domain_error("temperature must be positive");
    return hubble_gev(little_h) / (boltzmann_gev_per_kelvin * kelvin);
}

}  // namespace slecosmo::units
