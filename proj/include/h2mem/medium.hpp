#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "h2mem/error.hpp"
#include "h2mem/spectroscopy.hpp"
#include "h2mem/units.hpp"

namespace h2mem {

/// Gamma(p) = c_diff / p + c_coll * p: diffusion (Dicke-narrowed) branch at
/// low pressure, collisional branch at high pressure.
struct DephasingModel {
  double c_diff = 1.5e9;      ///< bar/s
  double c_coll = 1.0e9 / 6;  ///< 1/(s bar)

  double optimum_pressure() const { return std::sqrt(c_diff / c_coll); }
};

inline double gamma_of_pressure(double pressure_bar, const DephasingModel& model) {
  if (!(pressure_bar > 0.0)) throw DomainError("gamma_of_pressure: pressure must be > 0");
  return model.c_diff / pressure_bar + model.c_coll * pressure_bar;
}

/// Ideal-gas number density, m^-3.
inline double number_density(double pressure_bar, double temperature_k) {
  return pressure_bar * constants::pascal_per_bar / (constants::boltzmann * temperature_k);
}

/// Pressure-independent description of the gas cell.
struct MediumModel {
  DephasingModel dephasing;
  /// g * Gamma / n, m^4/J. g*Gamma is linear in density by construction.
  double g_gamma_per_density = 1.0e-28;
  /// Effective interaction length; default is twice the write Rayleigh range.
  std::optional<double> length_m;
  /// Replaces Gamma(p) everywhere (coupling g*Gamma is unaffected).
  std::optional<double> gamma_override;
};

struct MediumState {
  double pressure_bar = 0.0;
  double temperature_k = 0.0;
  double number_density = 0.0;  ///< m^-3
  double g_gamma = 0.0;         ///< steady-state gain times dephasing rate, m/J
  double gamma = 0.0;           ///< coherence amplitude decay rate, 1/s
  double length_m = 0.0;
  PopulationTable populations;

  /// Steady-state Raman intensity gain coefficient, m/W.
  double g() const { return gamma > 0.0 ? g_gamma / gamma : std::numeric_limits<double>::infinity(); }
};

inline MediumState make_medium(double pressure_bar, double temperature_k, const MediumModel& model,
                               PopulationTable populations, double default_length_m) {
  if (!(temperature_k > 0.0)) throw DomainError("make_medium: temperature must be > 0");
  MediumState m;
  m.pressure_bar = pressure_bar;
  m.temperature_k = temperature_k;
  m.number_density = number_density(pressure_bar, temperature_k);
  m.g_gamma = model.g_gamma_per_density * m.number_density;
  m.gamma = model.gamma_override ? *model.gamma_override : gamma_of_pressure(pressure_bar, model.dephasing);
  if (m.gamma < 0.0) throw DomainError("make_medium: gamma must be >= 0");
  m.length_m = model.length_m.value_or(default_length_m);
  if (!(m.length_m > 0.0)) throw DomainError("make_medium: interaction length must be > 0");
  m.populations = std::move(populations);
  return m;
}

}  // namespace h2mem
