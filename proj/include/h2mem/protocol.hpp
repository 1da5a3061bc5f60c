#pragma once

// Write -> store -> read protocol on top of the stage solver, and the
// pressure scan used for the efficiency-versus-density study.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "h2mem/coherence.hpp"
#include "h2mem/mbsolver.hpp"
#include "h2mem/medium.hpp"
#include "h2mem/parallel.hpp"
#include "h2mem/pulse.hpp"
#include "h2mem/spectroscopy.hpp"

namespace h2mem {

/// Everything needed to simulate one memory run, in SI units.
struct MemoryProtocol {
  SpectroscopicConstants constants = default_h2_constants();
  double temperature_k = 295.0;
  int j_max = 7;
  std::optional<int> single_j;  ///< put all population in this J
  MediumModel medium;
  PulseSpec signal;
  PulseSpec write;
  PulseSpec read;
  GridSpec grid;
  double alpha = 0.35;  ///< mode-matched fraction; applied to the write efficiency only
  double control_delay_s = 16.0 * units::ps;
  bool snap_to_rephasing = true;
};

inline PopulationTable protocol_populations(const MemoryProtocol& p) {
  if (p.single_j) {
    if (*p.single_j < 0 || *p.single_j > 5) throw DomainError("single_j must be in [0,5]");
    PopulationTable t;
    t.temperature = p.temperature_k;
    t.fractions[*p.single_j] = 1.0;
    return t;
  }
  return boltzmann_populations(p.constants, p.temperature_k, p.j_max);
}

/// Twice the Rayleigh range of the write beam.
inline double default_interaction_length(const MemoryProtocol& p) { return 2.0 * p.write.rayleigh_range(); }

inline MediumState medium_at(const MemoryProtocol& p, double pressure_bar) {
  return make_medium(pressure_bar, p.temperature_k, p.medium, protocol_populations(p), default_interaction_length(p));
}

inline CoherenceEnsemble ensemble_for(const MemoryProtocol& p, const MediumState& medium) {
  return init_ensemble(medium.populations, p.constants, medium.gamma);
}

/// Storage time actually used for the fixed-delay studies.
inline double control_delay(const MemoryProtocol& p, const CoherenceEnsemble& ensemble) {
  return p.snap_to_rephasing ? snap_to_rephasing(ensemble, p.control_delay_s) : p.control_delay_s;
}

struct MemoryPoint {
  double pressure_bar = 0.0;
  double G = 0.0;
  double eta_w_matched = 0.0;  ///< write efficiency of the mode-matched part
  double eta_w = 0.0;          ///< alpha * eta_w_matched
  double eta_r = 0.0;
  double eta_tot = 0.0;          ///< eta_w * eta_r
  double eta_tot_matched = 0.0;  ///< eta_w_matched * eta_r = eta_tot / alpha
  double storage_time_s = 0.0;
  bool ok = true;
  std::string error;
};

/// Full write + read at one pressure. `storage_time` defaults to the
/// (possibly snapped) control delay.
inline MemoryPoint run_memory_point(const MemoryProtocol& p, double pressure_bar,
                                    std::optional<double> storage_time = std::nullopt) {
  MemoryPoint pt;
  pt.pressure_bar = pressure_bar;
  const MediumState medium = medium_at(p, pressure_bar);
  const CoherenceEnsemble ensemble = ensemble_for(p, medium);
  pt.storage_time_s = storage_time.value_or(control_delay(p, ensemble));
  pt.G = coupling_parameter(medium, p.write).G;
  const auto signal = make_signal_envelope(p.signal, p.grid);
  const StageResult w = write_stage(signal, p.write, medium, p.grid);
  const StageResult r = read_stage(w.coherence, p.read, medium, pt.storage_time_s, p.grid, ensemble);
  pt.eta_w_matched = w.efficiency;
  pt.eta_w = p.alpha * w.efficiency;
  pt.eta_r = r.efficiency;
  pt.eta_tot = pt.eta_w * pt.eta_r;
  pt.eta_tot_matched = pt.eta_w_matched * pt.eta_r;
  return pt;
}

struct PressureScanResult {
  std::vector<MemoryPoint> points;  ///< in input order

  std::vector<double> pressures() const { return column(&MemoryPoint::pressure_bar); }
  std::vector<double> eta_w() const { return column(&MemoryPoint::eta_w); }
  std::vector<double> eta_r() const { return column(&MemoryPoint::eta_r); }
  std::vector<double> eta_tot() const { return column(&MemoryPoint::eta_tot); }
  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& x) { return !x.ok; }));
  }

 private:
  std::vector<double> column(double MemoryPoint::*field) const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& x : points) v.push_back(x.*field);
    return v;
  }
};

/// eta_w(p) and eta_r(p) at the control delay. A failing point is
/// recorded with ok = false and NaN efficiencies; the scan continues.
inline PressureScanResult pressure_scan(const std::vector<double>& pressures, const MemoryProtocol& p, int jobs = 1) {
  for (double x : pressures) {
    if (x < 0.5 || x > 20.0) throw DomainError("pressure_scan: pressures must lie in [0.5, 20] bar");
  }
  PressureScanResult out;
  out.points.resize(pressures.size());
  parallel_for(pressures.size(), jobs, [&](std::size_t i) {
    try {
      out.points[i] = run_memory_point(p, pressures[i]);
    } catch (const std::exception& e) {
      MemoryPoint bad;
      bad.pressure_bar = pressures[i];
      bad.ok = false;
      bad.error = e.what();
      bad.eta_w = bad.eta_r = bad.eta_tot = bad.eta_w_matched = bad.eta_tot_matched = std::nan("");
      out.points[i] = bad;
    }
  });
  return out;
}

}  // namespace h2mem
