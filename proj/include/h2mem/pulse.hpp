#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "h2mem/error.hpp"
#include "h2mem/units.hpp"

namespace h2mem {

enum class EnvelopeShape { gaussian, sech2 };

inline std::string to_string(EnvelopeShape s) { return s == EnvelopeShape::gaussian ? "gaussian" : "sech2"; }

inline EnvelopeShape parse_envelope_shape(const std::string& s) {
  if (s == "gaussian") return EnvelopeShape::gaussian;
  if (s == "sech2") return EnvelopeShape::sech2;
  throw InputError("unknown envelope shape '" + s + "' (expected gaussian or sech2)");
}

/// One of the signal, write or read pulses.
struct PulseSpec {
  double center_wavelength_nm = 800.0;
  double duration_s = 100.0 * units::fs;  ///< intensity FWHM
  double energy_j = 0.0;
  double waist_m = 30.0 * units::um;  ///< 1/e^2 intensity radius
  EnvelopeShape shape = EnvelopeShape::gaussian;
  double center_s = 0.0;  ///< pulse centre in the co-moving local-time frame

  void validate() const {
    if (!(duration_s > 0.0)) throw DomainError("PulseSpec: duration must be > 0");
    if (energy_j < 0.0) throw DomainError("PulseSpec: energy must be >= 0");
    if (!(waist_m > 0.0)) throw DomainError("PulseSpec: waist must be > 0");
    if (!(center_wavelength_nm > 0.0)) throw DomainError("PulseSpec: wavelength must be > 0");
  }

  /// Intensity envelope normalized to 1 at the pulse centre.
  double profile(double tau) const {
    const double x = (tau - center_s) / duration_s;
    if (shape == EnvelopeShape::gaussian) return std::exp(-4.0 * std::numbers::ln2 * x * x);
    const double s = 1.0 / std::cosh(2.0 * std::acosh(std::numbers::sqrt2) * x);
    return s * s;
  }

  /// (integral of profile dt) / duration.
  double shape_factor() const {
    if (shape == EnvelopeShape::gaussian) return std::sqrt(std::numbers::pi / (4.0 * std::numbers::ln2));
    return 1.0 / std::acosh(std::numbers::sqrt2);
  }

  double beam_area() const { return 0.5 * std::numbers::pi * waist_m * waist_m; }

  /// Peak on-axis intensity, W/m^2.
  double peak_intensity() const { return energy_j / (shape_factor() * duration_s * beam_area()); }

  double rayleigh_range() const { return std::numbers::pi * waist_m * waist_m / (center_wavelength_nm * units::nm); }
};

}  // namespace h2mem
