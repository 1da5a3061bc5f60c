#pragma once

#include <numbers>

namespace h2mem {

/// CODATA 2018 exact SI values.
namespace constants {
inline constexpr double speed_of_light = 299792458.0;         // m/s
inline constexpr double speed_of_light_cm = 2.99792458e10;    // cm/s
inline constexpr double planck = 6.62607015e-34;              // J s
inline constexpr double boltzmann = 1.380649e-23;             // J/K
/// Second radiation constant hc/k_B in cm K.
inline constexpr double hc_over_k_cm_k = 1.438776877;
inline constexpr double pascal_per_bar = 1.0e5;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace constants

namespace units {
inline constexpr double fs = 1.0e-15;
inline constexpr double ps = 1.0e-12;
inline constexpr double ns = 1.0e-9;
inline constexpr double nm = 1.0e-9;
inline constexpr double um = 1.0e-6;
inline constexpr double uj = 1.0e-6;
inline constexpr double nj = 1.0e-9;
}  // namespace units

/// cm^-1 -> Hz (ordinary frequency).
constexpr double wavenumber_to_hz(double cm1) { return cm1 * constants::speed_of_light_cm; }
constexpr double wavenumber_to_thz(double cm1) { return wavenumber_to_hz(cm1) * 1.0e-12; }
/// cm^-1 -> rad/s.
constexpr double wavenumber_to_angular(double cm1) { return constants::two_pi * wavenumber_to_hz(cm1); }
constexpr double hz_to_wavenumber(double hz) { return hz / constants::speed_of_light_cm; }

}  // namespace h2mem
