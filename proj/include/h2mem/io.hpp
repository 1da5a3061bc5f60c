#pragma once

// Plain CSV + JSON sidecar persistence. Numbers are written with
// max_digits10 so a CSV re-read reproduces the doubles exactly.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "h2mem/coherence.hpp"
#include "h2mem/config.hpp"
#include "h2mem/error.hpp"
#include "h2mem/protocol.hpp"

namespace h2mem::io {

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

/// Hash of the canonical (key-sorted, compact) JSON form of the config.
inline std::string config_hash(const ExperimentConfig& c) { return sha256_hex(to_json(c).dump()); }

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw InputError("cannot write " + path.string());
    row_strings(header);
  }
  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(fmt(v));
    row_strings(cells);
  }
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw InputError("CSV has no column '" + name + "'");
  }
  std::vector<double> values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(detail::trim(cell));
  }
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> r;
    const std::string where = path.string() + ":" + std::to_string(row);
    while (std::getline(ss, cell, ',')) {
      const std::string c = detail::trim(cell);
      r.push_back(c == "nan" ? std::nan("") : detail::parse_double(c, where));
    }
    if (r.size() != t.header.size()) throw InputError(where + ": expected " + std::to_string(t.header.size()) + " columns");
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// Appends one JSON object per line to run_log.jsonl in `dir`.
inline void append_run_log(const std::filesystem::path& dir, const json& entry) {
  std::ofstream out(dir / "run_log.jsonl", std::ios::app);
  if (!out) throw InputError("cannot append to run log in " + dir.string());
  out << entry.dump() << '\n';
}

/// Metadata shared by every sidecar.
inline json run_metadata(const ExperimentConfig& c, const std::string& command) {
  return json{{"command", command},
              {"config_hash", config_hash(c)},
              {"calibration_id", c.calibration_id},
              {"seed", c.seed},
              {"pressure_bar", c.medium.pressure_bar},
              {"temperature_k", c.medium.temperature_k},
              {"line_mode", c.medium.line_mode},
              {"grid", {{"nz", c.grid.nz}, {"nt", c.grid.nt}, {"window_fs", c.grid.window_fs}}},
              {"config", to_json(c)}};
}

inline void write_delay_scan_csv(const std::filesystem::path& path, const DelayScan& scan) {
  CsvWriter w(path, {"delay_ps", "efficiency"});
  for (std::size_t i = 0; i < scan.delays.size(); ++i) w.row({scan.delays[i] / units::ps, scan.values[i]});
}

inline DelayScan read_delay_scan_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  DelayScan s;
  for (double d : t.values("delay_ps")) s.delays.push_back(d * units::ps);
  s.values = t.values("efficiency");
  s.validate();
  return s;
}

inline void write_spectrum_csv(const std::filesystem::path& path, const PowerSpectrum& spec) {
  CsvWriter w(path, {"wavenumber_cm1", "power"});
  for (std::size_t i = 0; i < spec.frequencies.size(); ++i) w.row({spec.frequencies[i], spec.power[i]});
}

inline json peaks_json(const PowerSpectrum& spec) {
  json peaks = json::array();
  for (const auto& p : spec.peaks) {
    peaks.push_back({{"wavenumber_cm1", p.wavenumber}, {"thz", wavenumber_to_thz(p.wavenumber)}, {"height", p.height},
                     {"prominence", p.prominence}});
  }
  return peaks;
}

/// Stage envelope as tau_fs,re,im on the cell centres of `grid`.
inline void write_envelope_csv(const std::filesystem::path& path, const std::vector<cplx>& a, const GridSpec& grid) {
  CsvWriter w(path, {"tau_fs", "re", "im"});
  for (int i = 0; i < grid.nt && i < static_cast<int>(a.size()); ++i) w.row({grid.tau(i) / units::fs, a[i].real(), a[i].imag()});
}

inline void write_pressure_scan_csv(const std::filesystem::path& path, const PressureScanResult& r) {
  CsvWriter w(path, {"pressure_bar", "G", "eta_w", "eta_w_matched", "eta_r", "eta_tot", "eta_tot_matched", "storage_ps", "ok"});
  for (const auto& p : r.points) {
    w.row({p.pressure_bar, p.G, p.eta_w, p.eta_w_matched, p.eta_r, p.eta_tot, p.eta_tot_matched, p.storage_time_s / units::ps,
           p.ok ? 1.0 : 0.0});
  }
}

}  // namespace h2mem::io
