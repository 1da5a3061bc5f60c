#pragma once

// Multi-J vibrational coherence bookkeeping between the write and read
// pulses: free evolution at the Q01(J) frequencies with collisional decay,
// stroboscopic read-efficiency delay scans, and their beat spectrum.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "h2mem/error.hpp"
#include "h2mem/spectroscopy.hpp"
#include "h2mem/units.hpp"

namespace h2mem {

using cplx = std::complex<double>;

struct CoherenceChannel {
  int j = 0;
  cplx amplitude{};    ///< in the frame rotating at CoherenceEnsemble::reference_omega
  double omega = 0.0;  ///< 2 pi c Q01(J), rad/s
};

/// Snapshot of the per-J coherences at epoch t0.
///
/// Amplitudes are kept in a frame rotating at `reference_omega` (the Q01
/// frequency of the most populated J). The lab-frame amplitude is
/// amplitude * exp(-i reference_omega (t0 - t_create)); every observable
/// used here depends only on frequency differences.
struct CoherenceEnsemble {
  std::vector<CoherenceChannel> channels;  ///< sorted by J
  double gamma = 0.0;                      ///< amplitude decay rate, 1/s
  double t0 = 0.0;                         ///< s
  double reference_omega = 0.0;           ///< rad/s

  double total_weight() const {
    double s = 0.0;
    for (const auto& ch : channels) s += std::norm(ch.amplitude);
    return s;
  }
};

/// One channel per populated J; amplitude proportional to the population
/// fraction with zero relative phase (equal write coupling across J).
/// Levels above J = 5 (no Q-branch line here; < 2e-5 of the population at
/// room temperature) do not get a channel.
inline CoherenceEnsemble init_ensemble(const PopulationTable& populations, const SpectroscopicConstants& constants,
                                       double gamma) {
  if (populations.fractions.empty()) throw DomainError("init_ensemble: empty population table");
  if (gamma < 0.0) throw DomainError("init_ensemble: gamma must be >= 0");
  CoherenceEnsemble e;
  e.gamma = gamma;
  double best = -1.0;
  for (const auto& [j, f] : populations.fractions) {
    if (f <= 0.0 || j > 5) continue;
    const double omega = wavenumber_to_angular(q_branch_frequency(constants, j));
    e.channels.push_back(CoherenceChannel{j, cplx(f, 0.0), omega});
    if (f > best) {
      best = f;
      e.reference_omega = omega;
    }
  }
  if (e.channels.empty()) throw DomainError("init_ensemble: no populated J level");
  return e;
}

namespace detail {
/// exp(-i (omega - reference) dt) evaluated with an extended-precision phase.
inline cplx rotation(double omega, double reference, double dt) {
  const long double phase =
      std::fmod((static_cast<long double>(omega) - static_cast<long double>(reference)) * static_cast<long double>(dt),
                static_cast<long double>(constants::two_pi));
  return {static_cast<double>(std::cos(phase)), static_cast<double>(-std::sin(phase))};
}
}  // namespace detail

/// Free evolution to absolute time t (t >= t0).
inline CoherenceEnsemble evolve(const CoherenceEnsemble& e, double t) {
  if (t < e.t0) throw DomainError("evolve: cannot evolve backwards in time");
  const double dt = t - e.t0;
  const double decay = std::exp(-e.gamma * dt);
  CoherenceEnsemble out = e;
  for (auto& ch : out.channels) ch.amplitude *= detail::rotation(ch.omega, e.reference_omega, dt) * decay;
  out.t0 = t;
  return out;
}

/// Sum of channel amplitudes with equal readout weights.
inline cplx retrieved_amplitude(const CoherenceEnsemble& e) {
  cplx s{};
  for (const auto& ch : e.channels) s += ch.amplitude;
  return s;
}

/// |sum_J a_J e^{-i w_J t}|^2 / |sum_J a_J|^2 without the decay factor.
inline double rephasing_factor(const CoherenceEnsemble& e, double delay) {
  const cplx norm = retrieved_amplitude(e);
  if (std::norm(norm) == 0.0) throw DomainError("rephasing_factor: zero net coherence");
  cplx s{};
  for (const auto& ch : e.channels) s += ch.amplitude * detail::rotation(ch.omega, e.reference_omega, delay);
  return std::norm(s) / std::norm(norm);
}

/// Period of the dominant beat (channel pair with the largest amplitude product).
inline double principal_recurrence_period(const CoherenceEnsemble& e) {
  double best = 0.0;
  double period = 0.0;
  for (std::size_t a = 0; a < e.channels.size(); ++a) {
    for (std::size_t b = a + 1; b < e.channels.size(); ++b) {
      const double w = std::abs(e.channels[a].amplitude) * std::abs(e.channels[b].amplitude);
      const double dw = std::abs(e.channels[a].omega - e.channels[b].omega);
      if (w > best && dw > 0.0) {
        best = w;
        period = constants::two_pi / dw;
      }
    }
  }
  return period;
}

enum class ScanKind { read_efficiency, write_efficiency };

inline std::string to_string(ScanKind k) {
  return k == ScanKind::read_efficiency ? "read_efficiency" : "write_efficiency";
}

struct DelayScan {
  std::vector<double> delays;  ///< s, strictly increasing, uniform
  std::vector<double> values;  ///< efficiencies
  ScanKind kind = ScanKind::read_efficiency;

  double spacing() const { return delays.size() > 1 ? (delays.back() - delays.front()) / (delays.size() - 1) : 0.0; }

  void validate() const {
    if (delays.size() != values.size()) throw DomainError("DelayScan: delays and values differ in length");
    for (std::size_t i = 1; i < delays.size(); ++i) {
      if (!(delays[i] > delays[i - 1])) throw DomainError("DelayScan: delays must be strictly increasing");
    }
    const double h = spacing();
    for (std::size_t i = 1; i < delays.size(); ++i) {
      if (std::abs((delays[i] - delays[i - 1]) - h) > 1e-6 * h) throw DomainError("DelayScan: non-uniform delay grid");
    }
    for (double v : values) {
      if (std::isfinite(v) && (v < 0.0 || v > 1.0 + 1e-12)) throw DomainError("DelayScan: efficiency outside [0,1]");
    }
  }
};

/// Uniform grid of n points on [start, stop].
inline std::vector<double> uniform_grid(double start, double stop, std::size_t n) {
  if (n < 2) return {start};
  std::vector<double> g(n);
  const double h = (stop - start) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = start + h * static_cast<double>(i);
  return g;
}

/// Stroboscopic read efficiency
///   eta(t) = eta_r0 |sum a_J e^{-i w_J t}|^2 / |sum a_J|^2 e^{-2 Gamma t}.
/// Delays are measured from the ensemble epoch.
inline DelayScan retrieval_envelope(const CoherenceEnsemble& e, const std::vector<double>& delays, double eta_r0 = 1.0) {
  for (double t : delays) {
    if (t < 0.0 || t > 2.0 * units::ns * (1.0 + 1e-12)) throw DomainError("retrieval_envelope: delays must lie in [0, 2 ns]");
  }
  DelayScan scan;
  scan.kind = ScanKind::read_efficiency;
  scan.delays = delays;
  scan.values.reserve(delays.size());
  for (double t : delays) scan.values.push_back(eta_r0 * rephasing_factor(e, t) * std::exp(-2.0 * e.gamma * t));
  return scan;
}

struct SpectrumPeak {
  double wavenumber = 0.0;  ///< cm^-1, parabolically interpolated
  double height = 0.0;
  double prominence = 0.0;
};

struct PowerSpectrum {
  std::vector<double> frequencies;  ///< cm^-1
  std::vector<double> power;
  std::vector<SpectrumPeak> peaks;  ///< ascending in frequency
};

enum class WindowKind { hann, none };

struct SpectrumOptions {
  WindowKind window = WindowKind::hann;
  int zero_pad_factor = 16;
  double prominence_fraction = 0.01;  ///< relative to the largest power above the floor
  /// Peaks below this are ignored; default 2 / (span c), i.e. two raw resolution bins.
  std::optional<double> min_wavenumber;
};

/// |DFT|^2 of the mean-subtracted, windowed scan with frequencies in cm^-1.
inline PowerSpectrum power_spectrum(const DelayScan& scan, const SpectrumOptions& opt = {}) {
  scan.validate();
  const std::size_t n = scan.values.size();
  if (n < 256) throw DomainError("power_spectrum: need at least 256 points");
  const double span = scan.delays.back() - scan.delays.front();
  if (span < 20.0 * units::ps * (1.0 - 1e-9)) throw DomainError("power_spectrum: scan must span at least 20 ps");
  const double dt = scan.spacing();

  const double mean = static_cast<double>(std::accumulate(scan.values.begin(), scan.values.end(), 0.0L) /
                                          static_cast<long double>(n));
  std::size_t nfft = 1;
  while (nfft < n * static_cast<std::size_t>(std::max(1, opt.zero_pad_factor))) nfft <<= 1;
  std::vector<double> x(nfft, 0.0);
  // residue of the mean subtraction, so a constant scan has exactly zero power
  const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(mean);
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (opt.window == WindowKind::hann) w = 0.5 - 0.5 * std::cos(constants::two_pi * i / static_cast<double>(n - 1));
    double d = scan.values[i] - mean;
    if (std::abs(d) <= roundoff) d = 0.0;
    x[i] = d * w;
  }
  Eigen::FFT<double> fft;
  std::vector<cplx> spectrum;
  fft.fwd(spectrum, x);

  PowerSpectrum out;
  const std::size_t half = nfft / 2 + 1;
  out.frequencies.resize(half);
  out.power.resize(half);
  const double df = hz_to_wavenumber(1.0 / (dt * static_cast<double>(nfft)));
  for (std::size_t k = 0; k < half; ++k) {
    out.frequencies[k] = df * static_cast<double>(k);
    out.power[k] = std::norm(spectrum[k]);
  }

  const double floor = opt.min_wavenumber.value_or(2.0 * hz_to_wavenumber(1.0 / span));
  const auto& p = out.power;
  std::size_t first = 1;
  while (first < half && out.frequencies[first] < floor) ++first;
  double pmax = 0.0;
  for (std::size_t k = first; k < half; ++k) pmax = std::max(pmax, p[k]);
  if (pmax <= 0.0) return out;
  const double threshold = opt.prominence_fraction * pmax;

  for (std::size_t k = std::max<std::size_t>(first, 1); k + 1 < half; ++k) {
    if (!(p[k] > p[k - 1] && p[k] >= p[k + 1]) || p[k] < threshold) continue;
    double left_min = p[k];
    for (std::size_t i = k; i-- > 0;) {
      if (p[i] > p[k]) break;
      left_min = std::min(left_min, p[i]);
    }
    double right_min = p[k];
    for (std::size_t i = k + 1; i < half; ++i) {
      if (p[i] > p[k]) break;
      right_min = std::min(right_min, p[i]);
    }
    const double prominence = p[k] - std::max(left_min, right_min);
    if (prominence < threshold) continue;
    const double a = p[k - 1], b = p[k], c = p[k + 1];
    const double denom = a - 2.0 * b + c;
    const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
    out.peaks.push_back(SpectrumPeak{out.frequencies[k] + shift * df, b, prominence});
  }
  return out;
}

struct RephasingMaxima {
  std::vector<double> times;  ///< ascending
  bool complete = true;       ///< false when fewer than the requested count exist
};

/// The `count` largest local maxima of the scan (endpoints included when
/// they exceed their neighbour), returned in ascending time.
inline RephasingMaxima find_rephasing_maxima(const DelayScan& scan, std::size_t count) {
  scan.validate();
  const std::size_t n = scan.values.size();
  if (n < 2) throw DomainError("find_rephasing_maxima: scan too short");
  const double span = scan.delays.back() - scan.delays.front();
  if (span < static_cast<double>(count) * 6.0 * units::ps * (1.0 - 1e-9)) {
    throw DomainError("find_rephasing_maxima: scan must cover at least count * 6 ps");
  }
  const auto& v = scan.values;
  std::vector<std::size_t> idx;
  if (v[0] > v[1]) idx.push_back(0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) idx.push_back(i);
  }
  if (v[n - 1] > v[n - 2]) idx.push_back(n - 1);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  RephasingMaxima out;
  out.complete = idx.size() >= count;
  if (idx.size() > count) idx.resize(count);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i : idx) out.times.push_back(scan.delays[i]);
  return out;
}

/// Strongest maximum of the decay-free rephasing factor within
/// [nominal - half_window, nominal + half_window]; half_window defaults to
/// half the principal recurrence period.
inline double snap_to_rephasing(const CoherenceEnsemble& e, double nominal, std::optional<double> half_window = {}) {
  const double hw = half_window.value_or(0.5 * principal_recurrence_period(e));
  if (hw <= 0.0 || e.channels.size() < 2) return nominal;
  const double lo = std::max(0.0, nominal - hw);
  const double hi = nominal + hw;
  const double step = 5.0 * units::fs;
  double best_t = lo;
  double best_v = -1.0;
  for (double t = lo; t <= hi; t += step) {
    const double r = rephasing_factor(e, t);
    if (r > best_v) {
      best_v = r;
      best_t = t;
    }
  }
  // golden-section refinement on the bracketing interval
  double a = std::max(lo, best_t - step);
  double b = std::min(hi, best_t + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = rephasing_factor(e, c);
  double fd = rephasing_factor(e, d);
  for (int it = 0; it < 60 && (b - a) > 1e-19; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = rephasing_factor(e, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = rephasing_factor(e, d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace h2mem
