// Acceptance gate: one PASS/FAIL line per primary criterion, nonzero exit
// if any fails. Thresholds are fixed targets; nothing here is tuned.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "h2mem/h2mem.hpp"

using namespace h2mem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome beat_spectrum() {
  const double table[] = {5.9, 11.8, 17.6, 29.4, 35.3};
  std::ostringstream os;
  bool ok = true;
  for (const auto& [mode, tol] : {std::pair<std::string, double>{"dunham", 0.3}, {"empirical", 0.15}}) {
    ExperimentConfig c;
    c.medium.line_mode = mode;
    const auto t0 = Clock::now();
    const auto run = run_delay_scan(c);
    const double dt = seconds_since(t0);
    double worst = run.spectrum.peaks.size() == 5 ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < run.spectrum.peaks.size() && i < 5; ++i) {
      worst = std::max(worst, std::abs(run.spectrum.peaks[i].wavenumber - table[i]));
    }
    ok = ok && worst <= tol && dt < 10.0;
    os << mode << ": " << run.spectrum.peaks.size() << " peaks, max dev " << worst << " cm^-1 (tol " << tol << "), "
       << dt << " s; ";
  }
  return {ok, os.str()};
}

Outcome populations() {
  const auto c = default_h2_constants();
  const auto pops = boltzmann_populations(c, 295.0);
  const auto flat = boltzmann_populations(c, 295.0, 7, SpinWeights{1.0, 1.0});
  const double factor = (pops.odd_sum() / pops.even_sum()) / (flat.odd_sum() / flat.even_sum());
  std::ostringstream os;
  os << "f(J=1) = " << pops.fraction(1) << ", odd:even weight factor = " << factor;
  return {std::abs(pops.fraction(1) - 0.66) <= 0.02 && std::abs(factor - 3.0) < 1e-12, os.str()};
}

Outcome thermal() {
  const double r = thermal_vibrational_ratio(default_h2_constants(), 295.0);
  std::ostringstream os;
  os << "ratio = " << r;
  return {r >= 1e-9 && r <= 4e-9, os.str()};
}

Outcome coupling_anchor() {
  auto p = default_protocol();
  p.write.energy_j = 40.0 * units::uj;
  p.write.duration_s = 100.0 * units::fs;
  const double G = coupling_parameter(medium_at(p, 13.0), p.write).G;
  std::ostringstream os;
  os << "G(13 bar, 40 uJ, 100 fs) = " << G;
  return {std::abs(G - 6.5) <= 0.5, os.str()};
}

Outcome pressure_optimum(const PressureScanResult& r) {
  const auto p = r.pressures();
  const auto eta_r = r.eta_r();
  const auto eta_w = r.eta_w();
  const auto best = static_cast<std::size_t>(std::max_element(eta_r.begin(), eta_r.end()) - eta_r.begin());
  bool rising = true;
  for (std::size_t i = 1; i < p.size() && p[i] <= 10.0; ++i) rising = rising && eta_w[i] >= eta_w[i - 1] - 1e-9;
  std::ostringstream os;
  os << "eta_r max at " << p[best] << " bar; eta_w non-decreasing 1-10 bar: " << (rising ? "yes" : "no");
  return {r.failures() == 0 && p[best] >= 4.0 && p[best] <= 8.0 && rising, os.str()};
}

Outcome efficiency_anchors(const PressureScanResult& r) {
  const MemoryPoint* best = nullptr;
  for (const auto& pt : r.points) {
    if (pt.ok && (!best || pt.eta_tot > best->eta_tot)) best = &pt;
  }
  if (!best) return {false, "no successful scan point"};
  std::ostringstream os;
  os << "best at " << best->pressure_bar << " bar: eta_tot = " << best->eta_tot
     << ", eta_tot/alpha = " << best->eta_tot_matched;
  return {best->eta_tot >= 0.14 && best->eta_tot <= 0.22 && best->eta_tot_matched >= 0.45 &&
              best->eta_tot_matched <= 0.57,
          os.str()};
}

Outcome conservation_suite() {
  const auto t0 = Clock::now();
  auto p = default_protocol();
  const MediumState base = medium_at(p, 3.0);

  // energy balance with Gamma = 0
  MediumState m0 = base;
  m0.gamma = 0.0;
  const auto sig = make_signal_envelope(p.signal, p.grid);
  const auto w0 = write_stage(sig, p.write, m0, p.grid);
  const double balance = std::abs((w0.output_energy + w0.stored_energy) / w0.input_energy - 1.0);

  // linearity in input amplitude
  const auto w1 = write_stage(sig, p.write, base, p.grid);
  auto sig2 = sig;
  for (auto& v : sig2) v *= 7.0;
  const auto w2 = write_stage(sig2, p.write, base, p.grid);
  double lin = std::abs(w2.efficiency / w1.efficiency - 1.0);
  for (std::size_t i = 0; i < w1.signal_out.size(); ++i) {
    const double ref = std::abs(7.0 * w1.signal_out[i]);
    if (ref > 0.0) lin = std::max(lin, std::abs(w2.signal_out[i] - 7.0 * w1.signal_out[i]) / ref);
  }

  // group action of free evolution
  const auto e = ensemble_for(p, base);
  double group = 0.0;
  for (double t1 : {1.0, 16.0, 300.0}) {
    for (double t2 : {0.5, 40.0}) {
      const auto a = evolve(evolve(e, t1 * units::ps), (t1 + t2) * units::ps);
      const auto b = evolve(e, (t1 + t2) * units::ps);
      for (std::size_t i = 0; i < a.channels.size(); ++i) {
        group = std::max(group, std::abs(a.channels[i].amplitude - b.channels[i].amplitude) /
                                    std::abs(b.channels[i].amplitude));
      }
    }
  }

  // second-order convergence on dz, dtau halving
  double eta[3];
  for (int k = 0; k < 3; ++k) {
    GridSpec g = p.grid;
    g.nz <<= k;
    g.nt <<= k;
    eta[k] = write_stage(make_signal_envelope(p.signal, g), p.write, base, g).efficiency;
  }
  const double ratio = (eta[0] - eta[1]) / (eta[1] - eta[2]);
  const double dt = seconds_since(t0);

  std::ostringstream os;
  os << "balance " << balance << ", linearity " << lin << ", group " << group << ", convergence ratio " << ratio
     << ", " << dt << " s";
  return {balance <= 1e-6 && lin <= 1e-10 && group <= 1e-12 && ratio >= 3.5 && ratio <= 4.5 && dt < 60.0, os.str()};
}

Outcome rephasing_timing() {
  const auto run = run_delay_scan(ExperimentConfig{});
  const auto& v = run.scan.values;
  double nearest = INFINITY;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) {
      const double t = run.scan.delays[i] / units::ps;
      if (std::abs(t - 16.0) < std::abs(nearest - 16.0)) nearest = t;
    }
  }
  std::ostringstream os;
  os << "nearest local maximum at " << nearest << " ps";
  return {std::abs(nearest - 16.0) <= 1.0, os.str()};
}

Outcome time_bins() {
  const auto r = time_bin_report(ExperimentConfig{});
  std::ostringstream os;
  os << "storage " << r.storage_1e_ns << " ns, bins " << r.bins;
  return {r.bins >= 5e3 && r.bins <= 2e4, os.str()};
}

Outcome fit_round_trip() {
  const auto pressures = uniform_grid(1.0, 13.0, 13);
  const auto truth = pressure_scan(pressures, default_protocol());
  const ObservedCurves data{pressures, truth.eta_w(), truth.eta_r()};
  ExperimentConfig start;
  start.protocol.mode_match_alpha = 0.5;
  const auto res = fit_parameters(data, {FitParameter::alpha}, start);
  std::ostringstream os;
  os << "alpha = " << res.values.at(0) << " from 0.5 (" << res.status << ")";
  return {std::abs(res.values.at(0) - 0.35) <= 0.01, os.str()};
}

}  // namespace

int main() {
  const ExperimentConfig defaults;
  const auto scan = run_pressure_scan(defaults);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"beat spectrum", beat_spectrum},
      {"populations", populations},
      {"thermal occupation", thermal},
      {"coupling anchor", coupling_anchor},
      {"pressure optimum", [&] { return pressure_optimum(scan); }},
      {"efficiency anchors", [&] { return efficiency_anchors(scan); }},
      {"conservation properties", conservation_suite},
      {"rephasing timing", rephasing_timing},
      {"time bins", time_bins},
      {"fit round-trip", fit_round_trip},
  };

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %-24s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
