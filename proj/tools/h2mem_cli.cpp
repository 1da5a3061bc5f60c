// h2mem: command-line front end for the H2 Raman memory simulator.
//
//   h2mem delay-scan     --config cfg.json --out dir
//   h2mem pressure-scan  --config cfg.json --out dir
//   h2mem linearity-scan --config cfg.json [--energies 5,10,150]
//   h2mem fit            --config cfg.json --data observed.csv --free alpha[,g,...]
//   h2mem spectrum       --in delay_scan.csv --out dir
//   h2mem calibrate      --config cfg.json --out dir
//   h2mem report         --config cfg.json
//
// Exit status is 0 on success. On failure a single JSON object
// {"error": {"type": ..., "message": ...}} is printed to stderr.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "h2mem/h2mem.hpp"

namespace fs = std::filesystem;
using namespace h2mem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Experiment config (JSON)");
  cmd->add_option("--out", o.out_dir, "Output directory (overrides config output_dir)");
  cmd->add_option("--jobs", o.jobs, "Worker threads (overrides config jobs)")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Seed recorded in metadata (reserved)");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  if (o.jobs > 0) cfg.jobs = o.jobs;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  fs::create_directories(cfg.output_dir);
  return cfg;
}

void log_run(const ExperimentConfig& cfg, const std::string& command, const json& results) {
  json entry = io::run_metadata(cfg, command);
  entry.erase("config");
  entry["results"] = results;
  io::append_run_log(cfg.output_dir, entry);
}

int error_exit(const std::string& type, const std::string& message, int code) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << std::endl;
  return code;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(h2mem::detail::parse_double(h2mem::detail::trim(cell), "--energies"));
  return v;
}

int cmd_delay_scan(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const DelayScanRun run = run_delay_scan(cfg);
  const fs::path dir = cfg.output_dir;
  io::write_delay_scan_csv(dir / "delay_scan.csv", run.scan);
  io::write_envelope_csv(dir / "write_transmitted.csv", run.write.signal_out, to_protocol(cfg).grid);
  json meta = io::run_metadata(cfg, "delay-scan");
  meta["gamma_per_s"] = run.gamma;
  meta["eta_w_matched"] = run.write.efficiency;
  meta["eta_r0"] = run.eta_r0;
  meta["delay_grid_ps"] = axis_to_json(cfg.scan.delay_ps);
  meta["gaps"] = run.gaps;
  meta["gap_errors"] = run.gap_errors;
  io::write_json(dir / "delay_scan.json", meta);
  if (!run.spectrum.frequencies.empty()) {
    io::write_spectrum_csv(dir / "spectrum.csv", run.spectrum);
    json smeta = io::run_metadata(cfg, "delay-scan");
    smeta["gamma_per_s"] = run.gamma;
    smeta["peaks"] = io::peaks_json(run.spectrum);
    io::write_json(dir / "spectrum.json", smeta);
  }
  log_run(cfg, "delay-scan", {{"eta_w_matched", run.write.efficiency}, {"eta_r0", run.eta_r0}, {"gaps", run.gaps.size()}});
  std::cout << "delay scan: " << run.scan.values.size() << " points, eta_r(0) = " << run.eta_r0 << ", "
            << run.spectrum.peaks.size() << " spectral peaks -> " << dir.string() << '\n';
  for (const auto& p : run.spectrum.peaks) std::cout << "  peak " << p.wavenumber << " cm^-1\n";
  return run.gaps.empty() ? 0 : 3;
}

int cmd_pressure_scan(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const PressureScanResult r = run_pressure_scan(cfg);
  const fs::path dir = cfg.output_dir;
  io::write_pressure_scan_csv(dir / "pressure_scan.csv", r);
  json meta = io::run_metadata(cfg, "pressure-scan");
  meta["pressure_grid_bar"] = axis_to_json(cfg.scan.pressure_bar);
  json failures = json::array();
  for (const auto& p : r.points) {
    if (!p.ok) failures.push_back({{"pressure_bar", p.pressure_bar}, {"error", p.error}});
  }
  meta["failures"] = failures;
  io::write_json(dir / "pressure_scan.json", meta);
  double best = -1, best_p = 0;
  for (const auto& p : r.points) {
    if (p.ok && p.eta_r > best) {
      best = p.eta_r;
      best_p = p.pressure_bar;
    }
  }
  log_run(cfg, "pressure-scan", {{"eta_r_optimum_bar", best_p}, {"failures", r.failures()}});
  std::cout << "pressure scan: " << r.points.size() << " points, eta_r maximum " << best << " at " << best_p << " bar\n";
  return r.failures() == 0 ? 0 : 3;
}

int cmd_linearity(const CommonOptions& o, const std::string& energies) {
  const ExperimentConfig cfg = resolve(o);
  const auto list = energies.empty() ? cfg.scan.signal_energy_nj : parse_list(energies);
  const auto rows = run_linearity_scan(cfg, list);
  io::CsvWriter w(fs::path(cfg.output_dir) / "linearity.csv", {"signal_energy_nj", "eta_w", "eta_r", "eta_tot"});
  json table = json::array();
  for (const auto& r : rows) {
    w.row({r.signal_energy_nj, r.eta_w, r.eta_r, r.eta_tot});
    table.push_back({{"signal_energy_nj", r.signal_energy_nj}, {"eta_w", r.eta_w}, {"eta_r", r.eta_r}});
  }
  json meta = io::run_metadata(cfg, "linearity-scan");
  meta["rows"] = table;
  io::write_json(fs::path(cfg.output_dir) / "linearity.json", meta);
  log_run(cfg, "linearity-scan", {{"points", rows.size()}});
  std::cout << "linearity scan: " << rows.size() << " energies\n";
  return 0;
}

int cmd_fit(const CommonOptions& o, const std::string& data_path, const std::string& free_list) {
  const ExperimentConfig cfg = resolve(o);
  const io::CsvTable t = io::read_csv(data_path);
  ObservedCurves data;
  data.pressures_bar = t.values("pressure_bar");
  data.eta_w = t.values("eta_w");
  bool has_r = false;
  for (const auto& h : t.header) has_r = has_r || h == "eta_r";
  if (has_r) data.eta_r = t.values("eta_r");
  std::vector<FitParameter> free;
  std::stringstream ss(free_list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (!h2mem::detail::trim(name).empty()) free.push_back(parse_fit_parameter(h2mem::detail::trim(name)));
  }
  const FitResult r = fit_parameters(data, free, cfg);
  json values;
  for (std::size_t i = 0; i < r.names.size(); ++i) values[r.names[i]] = r.values[i];
  json out = io::run_metadata(cfg, "fit");
  out["data"] = data_path;
  out["fit"] = {{"values", values},
                {"residual_norm", r.residual_norm},
                {"covariance", r.covariance},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"gradient_norm", r.gradient_norm},
                {"status", r.status}};
  io::write_json(fs::path(cfg.output_dir) / "fit.json", out);
  log_run(cfg, "fit", out["fit"]);
  std::cout << out["fit"].dump(2) << '\n';
  return r.converged ? 0 : 4;
}

int cmd_spectrum(const CommonOptions& o, const std::string& in_path) {
  const ExperimentConfig cfg = resolve(o);
  const DelayScan scan = io::read_delay_scan_csv(in_path);
  const PowerSpectrum spec = power_spectrum(scan, cfg.spectrum.options());
  io::write_spectrum_csv(fs::path(cfg.output_dir) / "spectrum.csv", spec);
  json meta = io::run_metadata(cfg, "spectrum");
  meta["input"] = in_path;
  meta["peaks"] = io::peaks_json(spec);
  io::write_json(fs::path(cfg.output_dir) / "spectrum.json", meta);
  log_run(cfg, "spectrum", {{"peaks", meta["peaks"]}});
  for (const auto& p : spec.peaks) std::cout << p.wavenumber << " cm^-1  (" << wavenumber_to_thz(p.wavenumber) << " THz)\n";
  return 0;
}

int cmd_calibrate(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const CalibrationResult r = calibrate(cfg);
  const fs::path dir = cfg.output_dir;
  save_config(r.config, (dir / "calibrated_config.json").string());
  io::write_pressure_scan_csv(dir / "calibration_pressure_scan.csv", r.scan);
  json out = io::run_metadata(r.config, "calibrate");
  out["calibration"] = {{"g_gamma_per_density_m4_per_j", r.g_gamma_per_density},
                        {"write_center_fs", r.write_center_fs},
                        {"G_at_anchor", r.G_anchor},
                        {"eta_r_optimum_bar", r.eta_r_optimum_bar},
                        {"best_pressure_bar", r.best_pressure_bar},
                        {"best_eta_tot", r.best_eta_tot},
                        {"best_eta_tot_matched", r.best_eta_tot_matched}};
  io::write_json(dir / "calibration.json", out);
  log_run(r.config, "calibrate", out["calibration"]);
  std::cout << std::setprecision(10) << out["calibration"].dump(2) << '\n';
  return 0;
}

int cmd_report(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const TimeBinReport r = time_bin_report(cfg);
  json out = io::run_metadata(cfg, "report");
  out["time_bins"] = {{"bandwidth_thz", r.bandwidth_thz},
                      {"fwhm_bandwidth_thz", r.fwhm_bandwidth_thz},
                      {"storage_1e_ns", r.storage_1e_ns},
                      {"bins", r.bins}};
  io::write_json(fs::path(cfg.output_dir) / "report.json", out);
  log_run(cfg, "report", out["time_bins"]);
  std::cout << out["time_bins"].dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raman quantum-memory simulator for molecular hydrogen"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string energies, data_path, free_list = "alpha", in_path;

  auto* delay = app.add_subcommand("delay-scan", "Read efficiency versus read delay, plus its beat spectrum");
  add_common(delay, common);
  auto* pressure = app.add_subcommand("pressure-scan", "Write/read efficiencies versus gas pressure");
  add_common(pressure, common);
  auto* linearity = app.add_subcommand("linearity-scan", "Efficiencies versus signal pulse energy");
  add_common(linearity, common);
  linearity->add_option("--energies", energies, "Comma-separated signal energies in nJ");
  auto* fit = app.add_subcommand("fit", "Least-squares fit of model parameters to a pressure scan");
  add_common(fit, common);
  fit->add_option("--data", data_path, "CSV with pressure_bar,eta_w[,eta_r]")->required();
  fit->add_option("--free", free_list, "Comma-separated subset of alpha,g,c_diff,c_coll,waist");
  auto* spectrum = app.add_subcommand("spectrum", "Power spectrum of an existing delay-scan CSV");
  add_common(spectrum, common);
  spectrum->add_option("--in", in_path, "delay_scan.csv (delay_ps,efficiency)")->required();
  auto* calib = app.add_subcommand("calibrate", "Re-derive the calibrated coupling and write timing");
  add_common(calib, common);
  auto* report = app.add_subcommand("report", "Bandwidth, storage time and time-bin count");
  add_common(report, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return error_exit("usage", e.what(), 2);
  }

  try {
    if (*delay) return cmd_delay_scan(common);
    if (*pressure) return cmd_pressure_scan(common);
    if (*linearity) return cmd_linearity(common, energies);
    if (*fit) return cmd_fit(common, data_path, free_list);
    if (*spectrum) return cmd_spectrum(common, in_path);
    if (*calib) return cmd_calibrate(common);
    if (*report) return cmd_report(common);
  } catch (const DomainError& e) {
    return error_exit("domain", e.what(), 1);
  } catch (const SolverError& e) {
    return error_exit("solver", e.what(), 1);
  } catch (const InputError& e) {
    return error_exit("input", e.what(), 1);
  } catch (const std::exception& e) {
    return error_exit("internal", e.what(), 1);
  }
  return 0;
}
