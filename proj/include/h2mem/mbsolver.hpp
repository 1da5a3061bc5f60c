#pragma once

// One-dimensional linearized Maxwell-Bloch solver for the write (Raman
// absorption of the signal) and read (anti-Stokes retrieval) stages.
//
// In the co-moving frame (z, tau = t - z/v_g), with a(z,tau) the signal
// envelope and B(z,tau) the vibrational coherence:
//
//   write:  da/dz = -k(tau) B,   dB/dtau = +k(tau) a - Gamma B
//   read:   da/dz = +k(tau) B,   dB/dtau = -k(tau) a - Gamma B
//
// with k(tau)^2 = g Gamma I(tau) / 2 (g the steady-state intensity gain).
// Normalization: integral |a|^2 dtau and integral |B|^2 dz are both
// energies, so with Gamma = 0 the write stage conserves their sum.
//
// Discretization: a lives on z-edges per tau-cell, B on tau-edges per
// z-cell. Every (dz, dtau) cell is advanced with the trapezoidal rule in
// both directions, which is a local 2x2 linear solve. For Gamma = 0 the
// cell map is a Cayley transform of a skew-Hermitian matrix and therefore
// conserves dtau |a|^2 + dz |B|^2 exactly; the scheme is second order.

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "h2mem/coherence.hpp"
#include "h2mem/error.hpp"
#include "h2mem/medium.hpp"
#include "h2mem/pulse.hpp"

namespace h2mem {

struct GridSpec {
  int nz = 64;
  int nt = 256;
  double window_s = 1.2 * units::ps;  ///< local-time span, centred on tau = 0

  double dt() const { return window_s / nt; }
  /// Centre of tau-cell i.
  double tau(int i) const { return -0.5 * window_s + (i + 0.5) * dt(); }

  std::string describe() const {
    std::ostringstream os;
    os << "grid(nz=" << nz << ", nt=" << nt << ", window=" << window_s / units::fs << " fs, dt=" << dt() / units::fs
       << " fs)";
    return os.str();
  }
};

/// Refuses grids that do not resolve the pulse or the medium.
inline void check_grid(const GridSpec& grid, const PulseSpec& pulse, const std::string& stage) {
  std::ostringstream why;
  if (grid.nz < 64) why << "nz=" << grid.nz << " < 64; ";
  if (grid.nt < 2 || !(grid.window_s > 0.0)) why << "empty tau grid; ";
  if (grid.nt >= 2 && grid.window_s > 0.0) {
    const double per_fwhm = pulse.duration_s / grid.dt();
    if (per_fwhm < 16.0) why << per_fwhm << " points per pulse FWHM < 16; ";
    if (std::abs(pulse.center_s) + 3.0 * pulse.duration_s > 0.5 * grid.window_s) {
      why << "pulse centre " << pulse.center_s / units::fs << " fs +- 3 FWHM leaves the window; ";
    }
  }
  if (!why.str().empty()) throw SolverError(stage + ": unresolved " + grid.describe() + ": " + why.str());
}

struct StageResult {
  std::vector<cplx> signal_out;  ///< a(L, tau) per tau-cell
  std::vector<cplx> coherence;   ///< B(z) per z-cell after the pulse
  double efficiency = 0.0;       ///< eta_w (write) or eta_r (read)
  double input_energy = 0.0;     ///< write: signal in; read: stored before storage time
  double output_energy = 0.0;    ///< integral |a(L)|^2 dtau
  double stored_energy = 0.0;    ///< integral |B(z)|^2 dz at stage end
  int nz = 0;
  int nt = 0;
  double dz = 0.0;
  double dt = 0.0;
};

struct CouplingParameter {
  double G = 0.0;
  double g = 0.0;          ///< m/W
  double intensity = 0.0;  ///< peak write intensity, W/m^2
  double length = 0.0;     ///< m
  double gamma = 0.0;      ///< 1/s
  double tau = 0.0;        ///< write FWHM, s
};

/// G = g I_w z Gamma tau_w (evaluated through the finite product g Gamma).
inline CouplingParameter coupling_parameter(const MediumState& medium, const PulseSpec& write) {
  write.validate();
  CouplingParameter c;
  c.g = medium.g();
  c.intensity = write.peak_intensity();
  c.length = medium.length_m;
  c.gamma = medium.gamma;
  c.tau = write.duration_s;
  c.G = medium.g_gamma * c.intensity * c.length * c.tau;
  return c;
}

/// Pulse-integrated coupling C = L * integral k^2 dtau = G * shape_factor / 2.
inline double integrated_coupling(const MediumState& medium, const PulseSpec& pulse) {
  return 0.5 * coupling_parameter(medium, pulse).G * pulse.shape_factor();
}

/// Square-root of the pulse intensity envelope, scaled so integral |a|^2 dtau = energy.
inline std::vector<cplx> make_signal_envelope(const PulseSpec& signal, const GridSpec& grid) {
  signal.validate();
  std::vector<cplx> a(grid.nt);
  double e = 0.0;
  for (int i = 0; i < grid.nt; ++i) {
    a[i] = std::sqrt(signal.profile(grid.tau(i)));
    e += std::norm(a[i]) * grid.dt();
  }
  const double scale = e > 0.0 ? std::sqrt(signal.energy_j / e) : 0.0;
  for (auto& v : a) v *= scale;
  return a;
}

inline double envelope_energy(const std::vector<cplx>& a, double step) {
  double e = 0.0;
  for (const auto& v : a) e += std::norm(v);
  return e * step;
}

namespace detail {

/// Marches the coupled system through the whole (z, tau) rectangle.
/// sign = +1: write equations, -1: read equations. a_in and B are updated in place.
inline void integrate_stage(std::vector<cplx>& a, std::vector<cplx>& b, const std::vector<double>& k, double dz,
                            double dt, double gamma, double sign) {
  const double r = 0.5 * gamma * dt;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double p = 0.5 * sign * k[j] * dz;
    const double q = 0.5 * sign * k[j] * dt;
    const double det = (1.0 + r) + p * q;
    cplx av = a[j];
    for (auto& bv : b) {
      const cplx r1 = av - p * bv;
      const cplx r2 = (1.0 - r) * bv + q * av;
      const cplx ao = ((1.0 + r) * r1 - p * r2) / det;
      bv = (r2 + q * ao) / (1.0 + r);
      av = ao;
    }
    a[j] = av;
  }
}

inline std::vector<double> coupling_profile(const MediumState& medium, const PulseSpec& pulse, const GridSpec& grid) {
  const double peak = medium.g_gamma * pulse.peak_intensity();
  std::vector<double> k(grid.nt);
  for (int i = 0; i < grid.nt; ++i) k[i] = std::sqrt(0.5 * peak * pulse.profile(grid.tau(i)));
  return k;
}

inline void check_finite(const StageResult& r, const GridSpec& grid, const std::string& stage) {
  auto bad = [](const std::vector<cplx>& v) {
    for (const auto& x : v) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return true;
    }
    return false;
  };
  if (bad(r.signal_out) || bad(r.coherence) || !std::isfinite(r.efficiency)) {
    throw SolverError(stage + ": non-finite values on " + grid.describe());
  }
}

inline double clamp_unit(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace detail

/// Raman absorption of the signal by the write pulse.
inline StageResult write_stage(const std::vector<cplx>& signal_in, const PulseSpec& write, const MediumState& medium,
                               const GridSpec& grid) {
  write.validate();
  check_grid(grid, write, "write_stage");
  if (static_cast<int>(signal_in.size()) != grid.nt) throw DomainError("write_stage: signal length != grid.nt");

  StageResult res;
  res.nz = grid.nz;
  res.nt = grid.nt;
  res.dz = medium.length_m / grid.nz;
  res.dt = grid.dt();
  res.signal_out = signal_in;
  res.coherence.assign(grid.nz, cplx{});
  detail::integrate_stage(res.signal_out, res.coherence, detail::coupling_profile(medium, write, grid), res.dz, res.dt,
                          medium.gamma, +1.0);
  res.input_energy = envelope_energy(signal_in, res.dt);
  res.output_energy = envelope_energy(res.signal_out, res.dt);
  res.stored_energy = envelope_energy(res.coherence, res.dz);
  res.efficiency = res.input_energy > 0.0 ? detail::clamp_unit(1.0 - res.output_energy / res.input_energy) : 0.0;
  detail::check_finite(res, grid, "write_stage");
  return res;
}

/// Net complex factor applied to the stored coherence by free evolution
/// over storage_time: (sum_J a_J e^{-i w_J t} e^{-Gamma t}) / sum_J a_J.
inline cplx storage_factor(const CoherenceEnsemble& ensemble, double storage_time) {
  if (storage_time < 0.0) throw DomainError("storage_factor: storage time must be >= 0");
  const cplx before = retrieved_amplitude(ensemble);
  if (std::norm(before) == 0.0) throw DomainError("storage_factor: zero net coherence");
  return retrieved_amplitude(evolve(ensemble, ensemble.t0 + storage_time)) / before;
}

/// Anti-Stokes retrieval of a stored coherence after `storage_time`.
/// Without an ensemble the coherence only decays at the medium's Gamma.
inline StageResult read_stage(const std::vector<cplx>& coherence_in, const PulseSpec& read, const MediumState& medium,
                              double storage_time, const GridSpec& grid,
                              const std::optional<CoherenceEnsemble>& ensemble = std::nullopt) {
  read.validate();
  check_grid(grid, read, "read_stage");
  if (static_cast<int>(coherence_in.size()) != grid.nz) throw DomainError("read_stage: coherence length != grid.nz");
  if (storage_time < 0.0) throw DomainError("read_stage: storage time must be >= 0");

  const cplx factor = ensemble ? storage_factor(*ensemble, storage_time) : cplx(std::exp(-medium.gamma * storage_time));

  StageResult res;
  res.nz = grid.nz;
  res.nt = grid.nt;
  res.dz = medium.length_m / grid.nz;
  res.dt = grid.dt();
  res.coherence = coherence_in;
  for (auto& b : res.coherence) b *= factor;
  res.signal_out.assign(grid.nt, cplx{});
  detail::integrate_stage(res.signal_out, res.coherence, detail::coupling_profile(medium, read, grid), res.dz, res.dt,
                          medium.gamma, -1.0);
  res.input_energy = envelope_energy(coherence_in, res.dz);
  res.output_energy = envelope_energy(res.signal_out, res.dt);
  res.stored_energy = envelope_energy(res.coherence, res.dz);
  res.efficiency = res.input_energy > 0.0 ? detail::clamp_unit(res.output_energy / res.input_energy) : 0.0;
  detail::check_finite(res, grid, "read_stage");
  return res;
}

inline double total_efficiency(const StageResult& write_result, const StageResult& read_result) {
  return write_result.efficiency * read_result.efficiency;
}

}  // namespace h2mem
