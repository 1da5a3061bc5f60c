#pragma once

// Experiment configuration as stored on disk (JSON, units in key names),
// and its conversion to the SI MemoryProtocol used by the solvers.
//
// The in-memory ExperimentConfig mirrors the file field-for-field and in
// the file's units, so a load/save cycle is lossless.
//
// Schema (every key optional; missing keys keep the defaults below):
//
//   {
//     "calibration_id": "h2-295K-v1",
//     "output_dir": "out", "jobs": 1, "seed": 0,
//     "medium": {
//       "pressure_bar": 3, "temperature_k": 295, "j_max": 7, "single_j": null,
//       "line_mode": "dunham" | "empirical",
//       "constants_file": "", "lines_file": "",
//       "c_diff_bar_per_s": 1.5e9, "c_coll_per_s_per_bar": 1.6667e8,
//       "g_gamma_per_density_m4_per_j": ...,
//       "length_mm": null, "gamma_override_per_s": null
//     },
//     "pulses": { "signal" | "write" | "read": {
//       "wavelength_nm", "duration_fs", "energy_uj", "waist_um", "center_fs",
//       "shape": "gaussian" | "sech2" } },
//     "grid": { "nz": 64, "nt": 256, "window_fs": 1200 },
//     "protocol": { "mode_match_alpha": 0.35, "control_delay_ps": 16, "snap_to_rephasing": true },
//     "scan": {
//       "delay_ps": { "start": 0, "stop": 100, "points": 2001 },
//       "pressure_bar": { "start": 1, "stop": 13, "points": 49 },
//       "signal_energy_nj": [5, 10, 20, 50, 100, 150]
//     },
//     "spectrum": { "window": "hann" | "none", "zero_pad_factor": 16,
//                   "prominence_fraction": 0.01, "min_wavenumber_cm1": null }
//   }

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "h2mem/coherence.hpp"
#include "h2mem/error.hpp"
#include "h2mem/protocol.hpp"

namespace h2mem {

using json = nlohmann::json;

/// Frozen output of `h2mem calibrate` on the default configuration.
namespace calibrated {
inline constexpr double g_gamma_per_density_m4_per_j = 1.0838708028591437e-28;
inline constexpr double write_center_fs = -9.365631836238302;
}  // namespace calibrated

struct PulseConfig {
  double wavelength_nm = 800.0;
  double duration_fs = 100.0;
  double energy_uj = 0.0;
  double waist_um = 30.0;
  double center_fs = 0.0;
  std::string shape = "gaussian";
  bool operator==(const PulseConfig&) const = default;
};

struct MediumConfig {
  double pressure_bar = 3.0;
  double temperature_k = 295.0;
  int j_max = 7;
  std::optional<int> single_j;
  std::string line_mode = "dunham";
  std::string constants_file;
  std::string lines_file;
  double c_diff_bar_per_s = 1.5e9;
  double c_coll_per_s_per_bar = 1.0e9 / 6.0;
  double g_gamma_per_density_m4_per_j = calibrated::g_gamma_per_density_m4_per_j;
  std::optional<double> length_mm;
  std::optional<double> gamma_override_per_s;
  bool operator==(const MediumConfig&) const = default;
};

struct GridConfig {
  int nz = 64;
  int nt = 256;
  double window_fs = 1200.0;
  bool operator==(const GridConfig&) const = default;
};

struct ProtocolConfig {
  double mode_match_alpha = 0.35;
  double control_delay_ps = 16.0;
  bool snap_to_rephasing = true;
  bool operator==(const ProtocolConfig&) const = default;
};

struct AxisConfig {
  double start = 0.0;
  double stop = 0.0;
  int points = 0;
  std::vector<double> values() const {
    if (points < 1) throw InputError("scan axis needs at least one point");
    return uniform_grid(start, stop, static_cast<std::size_t>(points));
  }
  bool operator==(const AxisConfig&) const = default;
};

struct ScanConfig {
  AxisConfig delay_ps{0.0, 100.0, 2001};
  AxisConfig pressure_bar{1.0, 13.0, 49};
  std::vector<double> signal_energy_nj{5.0, 10.0, 20.0, 50.0, 100.0, 150.0};
  bool operator==(const ScanConfig&) const = default;
};

struct SpectrumConfig {
  std::string window = "hann";
  int zero_pad_factor = 16;
  double prominence_fraction = 0.01;
  std::optional<double> min_wavenumber_cm1;
  bool operator==(const SpectrumConfig&) const = default;

  SpectrumOptions options() const {
    SpectrumOptions o;
    if (window == "hann") {
      o.window = WindowKind::hann;
    } else if (window == "none") {
      o.window = WindowKind::none;
    } else {
      throw InputError("spectrum.window must be 'hann' or 'none'");
    }
    o.zero_pad_factor = zero_pad_factor;
    o.prominence_fraction = prominence_fraction;
    o.min_wavenumber = min_wavenumber_cm1;
    return o;
  }
};

struct ExperimentConfig {
  std::string calibration_id = "h2-295K-v1";
  std::string output_dir = "out";
  int jobs = 1;
  std::uint64_t seed = 0;  ///< reserved for stochastic extensions; recorded in metadata
  MediumConfig medium;
  PulseConfig signal{600.0, 100.0, 0.05, 30.0, 0.0, "gaussian"};
  PulseConfig write{800.0, 100.0, 40.0, 30.0, calibrated::write_center_fs, "gaussian"};
  PulseConfig read{800.0, 100.0, 34.0, 30.0, 0.0, "gaussian"};
  GridConfig grid;
  ProtocolConfig protocol;
  ScanConfig scan;
  SpectrumConfig spectrum;
  bool operator==(const ExperimentConfig&) const = default;
};

inline PulseSpec to_pulse(const PulseConfig& c) {
  PulseSpec p;
  p.center_wavelength_nm = c.wavelength_nm;
  p.duration_s = c.duration_fs * units::fs;
  p.energy_j = c.energy_uj * units::uj;
  p.waist_m = c.waist_um * units::um;
  p.center_s = c.center_fs * units::fs;
  p.shape = parse_envelope_shape(c.shape);
  p.validate();
  return p;
}

inline SpectroscopicConstants load_spectroscopy(const MediumConfig& m) {
  SpectroscopicConstants c = m.constants_file.empty() ? default_h2_constants() : load_constants(m.constants_file);
  if (m.line_mode == "empirical") {
    c = with_empirical_lines(c, m.lines_file.empty() ? default_h2_q_lines() : load_empirical_lines(m.lines_file));
  } else if (m.line_mode != "dunham") {
    throw InputError("medium.line_mode must be 'dunham' or 'empirical'");
  }
  c.validate();
  return c;
}

/// SI protocol for the configured experiment.
inline MemoryProtocol to_protocol(const ExperimentConfig& cfg) {
  MemoryProtocol p;
  p.constants = load_spectroscopy(cfg.medium);
  p.temperature_k = cfg.medium.temperature_k;
  p.j_max = cfg.medium.j_max;
  p.single_j = cfg.medium.single_j;
  p.medium.dephasing = DephasingModel{cfg.medium.c_diff_bar_per_s, cfg.medium.c_coll_per_s_per_bar};
  p.medium.g_gamma_per_density = cfg.medium.g_gamma_per_density_m4_per_j;
  if (cfg.medium.length_mm) p.medium.length_m = *cfg.medium.length_mm * 1e-3;
  p.medium.gamma_override = cfg.medium.gamma_override_per_s;
  p.signal = to_pulse(cfg.signal);
  p.write = to_pulse(cfg.write);
  p.read = to_pulse(cfg.read);
  p.grid = GridSpec{cfg.grid.nz, cfg.grid.nt, cfg.grid.window_fs * units::fs};
  p.alpha = cfg.protocol.mode_match_alpha;
  if (p.alpha < 0.0 || p.alpha > 1.0) throw InputError("protocol.mode_match_alpha must lie in [0,1]");
  p.control_delay_s = cfg.protocol.control_delay_ps * units::ps;
  p.snap_to_rephasing = cfg.protocol.snap_to_rephasing;
  return p;
}

inline MemoryProtocol default_protocol() { return to_protocol(ExperimentConfig{}); }

// ---- JSON ----------------------------------------------------------------

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw InputError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_key(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void read_key(const json& j, const char* key, std::optional<T>& out, const std::string& where) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read_key(j, key, v, where);
  out = v;
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace detail

inline json pulse_to_json(const PulseConfig& p) {
  return json{{"wavelength_nm", p.wavelength_nm}, {"duration_fs", p.duration_fs}, {"energy_uj", p.energy_uj},
              {"waist_um", p.waist_um},           {"center_fs", p.center_fs},     {"shape", p.shape}};
}

inline void pulse_from_json(const json& j, PulseConfig& p, const std::string& where) {
  detail::reject_unknown(j, {"wavelength_nm", "duration_fs", "energy_uj", "waist_um", "center_fs", "shape"}, where);
  detail::read_key(j, "wavelength_nm", p.wavelength_nm, where);
  detail::read_key(j, "duration_fs", p.duration_fs, where);
  detail::read_key(j, "energy_uj", p.energy_uj, where);
  detail::read_key(j, "waist_um", p.waist_um, where);
  detail::read_key(j, "center_fs", p.center_fs, where);
  detail::read_key(j, "shape", p.shape, where);
}

inline json axis_to_json(const AxisConfig& a) {
  return json{{"start", a.start}, {"stop", a.stop}, {"points", a.points}};
}

inline void axis_from_json(const json& j, AxisConfig& a, const std::string& where) {
  detail::reject_unknown(j, {"start", "stop", "points"}, where);
  detail::read_key(j, "start", a.start, where);
  detail::read_key(j, "stop", a.stop, where);
  detail::read_key(j, "points", a.points, where);
}

inline json to_json(const ExperimentConfig& c) {
  const auto& m = c.medium;
  return json{
      {"calibration_id", c.calibration_id},
      {"output_dir", c.output_dir},
      {"jobs", c.jobs},
      {"seed", c.seed},
      {"medium",
       {{"pressure_bar", m.pressure_bar},
        {"temperature_k", m.temperature_k},
        {"j_max", m.j_max},
        {"single_j", detail::optional_json(m.single_j)},
        {"line_mode", m.line_mode},
        {"constants_file", m.constants_file},
        {"lines_file", m.lines_file},
        {"c_diff_bar_per_s", m.c_diff_bar_per_s},
        {"c_coll_per_s_per_bar", m.c_coll_per_s_per_bar},
        {"g_gamma_per_density_m4_per_j", m.g_gamma_per_density_m4_per_j},
        {"length_mm", detail::optional_json(m.length_mm)},
        {"gamma_override_per_s", detail::optional_json(m.gamma_override_per_s)}}},
      {"pulses", {{"signal", pulse_to_json(c.signal)}, {"write", pulse_to_json(c.write)}, {"read", pulse_to_json(c.read)}}},
      {"grid", {{"nz", c.grid.nz}, {"nt", c.grid.nt}, {"window_fs", c.grid.window_fs}}},
      {"protocol",
       {{"mode_match_alpha", c.protocol.mode_match_alpha},
        {"control_delay_ps", c.protocol.control_delay_ps},
        {"snap_to_rephasing", c.protocol.snap_to_rephasing}}},
      {"scan",
       {{"delay_ps", axis_to_json(c.scan.delay_ps)},
        {"pressure_bar", axis_to_json(c.scan.pressure_bar)},
        {"signal_energy_nj", c.scan.signal_energy_nj}}},
      {"spectrum",
       {{"window", c.spectrum.window},
        {"zero_pad_factor", c.spectrum.zero_pad_factor},
        {"prominence_fraction", c.spectrum.prominence_fraction},
        {"min_wavenumber_cm1", detail::optional_json(c.spectrum.min_wavenumber_cm1)}}},
  };
}

inline ExperimentConfig config_from_json(const json& j) {
  using detail::read_key;
  ExperimentConfig c;
  detail::reject_unknown(j, {"calibration_id", "output_dir", "jobs", "seed", "medium", "pulses", "grid", "protocol", "scan", "spectrum"},
                         "config");
  read_key(j, "calibration_id", c.calibration_id, "config");
  read_key(j, "output_dir", c.output_dir, "config");
  read_key(j, "jobs", c.jobs, "config");
  read_key(j, "seed", c.seed, "config");
  if (j.contains("medium")) {
    const auto& m = j.at("medium");
    const std::string w = "medium";
    detail::reject_unknown(m,
                           {"pressure_bar", "temperature_k", "j_max", "single_j", "line_mode", "constants_file",
                            "lines_file", "c_diff_bar_per_s", "c_coll_per_s_per_bar", "g_gamma_per_density_m4_per_j",
                            "length_mm", "gamma_override_per_s"},
                           w);
    read_key(m, "pressure_bar", c.medium.pressure_bar, w);
    read_key(m, "temperature_k", c.medium.temperature_k, w);
    read_key(m, "j_max", c.medium.j_max, w);
    read_key(m, "single_j", c.medium.single_j, w);
    read_key(m, "line_mode", c.medium.line_mode, w);
    read_key(m, "constants_file", c.medium.constants_file, w);
    read_key(m, "lines_file", c.medium.lines_file, w);
    read_key(m, "c_diff_bar_per_s", c.medium.c_diff_bar_per_s, w);
    read_key(m, "c_coll_per_s_per_bar", c.medium.c_coll_per_s_per_bar, w);
    read_key(m, "g_gamma_per_density_m4_per_j", c.medium.g_gamma_per_density_m4_per_j, w);
    read_key(m, "length_mm", c.medium.length_mm, w);
    read_key(m, "gamma_override_per_s", c.medium.gamma_override_per_s, w);
  }
  if (j.contains("pulses")) {
    const auto& p = j.at("pulses");
    detail::reject_unknown(p, {"signal", "write", "read"}, "pulses");
    if (p.contains("signal")) pulse_from_json(p.at("signal"), c.signal, "pulses.signal");
    if (p.contains("write")) pulse_from_json(p.at("write"), c.write, "pulses.write");
    if (p.contains("read")) pulse_from_json(p.at("read"), c.read, "pulses.read");
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::reject_unknown(g, {"nz", "nt", "window_fs"}, "grid");
    read_key(g, "nz", c.grid.nz, "grid");
    read_key(g, "nt", c.grid.nt, "grid");
    read_key(g, "window_fs", c.grid.window_fs, "grid");
  }
  if (j.contains("protocol")) {
    const auto& p = j.at("protocol");
    detail::reject_unknown(p, {"mode_match_alpha", "control_delay_ps", "snap_to_rephasing"}, "protocol");
    read_key(p, "mode_match_alpha", c.protocol.mode_match_alpha, "protocol");
    read_key(p, "control_delay_ps", c.protocol.control_delay_ps, "protocol");
    read_key(p, "snap_to_rephasing", c.protocol.snap_to_rephasing, "protocol");
  }
  if (j.contains("scan")) {
    const auto& s = j.at("scan");
    detail::reject_unknown(s, {"delay_ps", "pressure_bar", "signal_energy_nj"}, "scan");
    if (s.contains("delay_ps")) axis_from_json(s.at("delay_ps"), c.scan.delay_ps, "scan.delay_ps");
    if (s.contains("pressure_bar")) axis_from_json(s.at("pressure_bar"), c.scan.pressure_bar, "scan.pressure_bar");
    read_key(s, "signal_energy_nj", c.scan.signal_energy_nj, "scan");
  }
  if (j.contains("spectrum")) {
    const auto& s = j.at("spectrum");
    detail::reject_unknown(s, {"window", "zero_pad_factor", "prominence_fraction", "min_wavenumber_cm1"}, "spectrum");
    read_key(s, "window", c.spectrum.window, "spectrum");
    read_key(s, "zero_pad_factor", c.spectrum.zero_pad_factor, "spectrum");
    read_key(s, "prominence_fraction", c.spectrum.prominence_fraction, "spectrum");
    read_key(s, "min_wavenumber_cm1", c.spectrum.min_wavenumber_cm1, "spectrum");
  }
  if (c.jobs < 1) throw InputError("config.jobs must be >= 1");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  // data files named in a config are relative to that config
  const auto base = std::filesystem::path(path).parent_path();
  for (std::string* f : {&c.medium.constants_file, &c.medium.lines_file}) {
    if (!f->empty() && std::filesystem::path(*f).is_relative()) *f = (base / *f).lexically_normal().string();
  }
  return c;
}

inline void save_config(const ExperimentConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write config " + path);
  out << to_json(c).dump(2) << '\n';
}

}  // namespace h2mem
