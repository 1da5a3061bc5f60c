#pragma once

// Scan orchestration, calibration and least-squares fitting on top of the
// protocol layer. Everything here takes an ExperimentConfig so that a run
// is reproducible from its persisted config alone.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "h2mem/coherence.hpp"
#include "h2mem/config.hpp"
#include "h2mem/mbsolver.hpp"
#include "h2mem/parallel.hpp"
#include "h2mem/protocol.hpp"

namespace h2mem {

// ---- delay scan ------------------------------------------------------------

struct DelayScanRun {
  DelayScan scan;  ///< read efficiency versus read delay; NaN marks a failed point
  PowerSpectrum spectrum;
  StageResult write;
  double eta_r0 = 0.0;  ///< read efficiency at zero storage time
  double gamma = 0.0;
  std::vector<std::size_t> gaps;
  std::vector<std::string> gap_errors;
};

/// write_stage -> free evolution -> read_stage at every configured delay.
inline DelayScanRun run_delay_scan(const ExperimentConfig& cfg) {
  const MemoryProtocol p = to_protocol(cfg);
  const MediumState medium = medium_at(p, cfg.medium.pressure_bar);
  const CoherenceEnsemble ensemble = ensemble_for(p, medium);

  DelayScanRun run;
  run.gamma = medium.gamma;
  run.write = write_stage(make_signal_envelope(p.signal, p.grid), p.write, medium, p.grid);
  try {
    run.eta_r0 = read_stage(run.write.coherence, p.read, medium, 0.0, p.grid, ensemble).efficiency;
  } catch (const SolverError&) {
    run.eta_r0 = std::nan("");  // the per-delay loop records the same failure as gaps
  }

  run.scan.kind = ScanKind::read_efficiency;
  for (double d : cfg.scan.delay_ps.values()) run.scan.delays.push_back(d * units::ps);
  run.scan.values.assign(run.scan.delays.size(), 0.0);
  std::vector<std::string> errors(run.scan.delays.size());
  parallel_for(run.scan.delays.size(), cfg.jobs, [&](std::size_t i) {
    try {
      run.scan.values[i] = read_stage(run.write.coherence, p.read, medium, run.scan.delays[i], p.grid, ensemble).efficiency;
    } catch (const std::exception& e) {
      run.scan.values[i] = std::nan("");
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      run.gaps.push_back(i);
      run.gap_errors.push_back(errors[i]);
    }
  }
  const bool resolvable = run.scan.values.size() >= 256 && run.scan.delays.back() - run.scan.delays.front() >= 20.0 * units::ps;
  if (run.gaps.empty() && resolvable) run.spectrum = power_spectrum(run.scan, cfg.spectrum.options());
  return run;
}

// ---- pressure and linearity scans -----------------------------------------

inline PressureScanResult run_pressure_scan(const ExperimentConfig& cfg) {
  return pressure_scan(cfg.scan.pressure_bar.values(), to_protocol(cfg), cfg.jobs);
}

struct LinearityRow {
  double signal_energy_nj = 0.0;
  double eta_w = 0.0;  ///< alpha applied
  double eta_r = 0.0;
  double eta_tot = 0.0;
};

/// Write + read at the configured pressure and control delay for each signal energy.
inline std::vector<LinearityRow> run_linearity_scan(const ExperimentConfig& cfg, const std::vector<double>& energies_nj) {
  for (double e : energies_nj) {
    if (!(e > 0.0)) throw DomainError("run_linearity_scan: energies must be positive");
  }
  std::vector<LinearityRow> rows(energies_nj.size());
  const MemoryProtocol base = to_protocol(cfg);
  parallel_for(energies_nj.size(), cfg.jobs, [&](std::size_t i) {
    MemoryProtocol p = base;
    p.signal.energy_j = energies_nj[i] * units::nj;
    const MemoryPoint pt = run_memory_point(p, cfg.medium.pressure_bar);
    rows[i] = LinearityRow{energies_nj[i], pt.eta_w, pt.eta_r, pt.eta_tot};
  });
  return rows;
}

// ---- time-bandwidth report ---------------------------------------------------

struct TimeBinReport {
  double bandwidth_thz = 0.0;       ///< time-bin rate 1/tau
  double fwhm_bandwidth_thz = 0.0;  ///< transform-limited FWHM bandwidth
  double storage_1e_ns = 0.0;       ///< amplitude 1/e time of the retrieval envelope
  double bins = 0.0;                ///< storage_1e * bandwidth
};

/// Fits the decay of the per-recurrence maxima of the simulated envelope
/// over 0-2 ns. Efficiency decays at twice the amplitude rate.
inline TimeBinReport time_bin_report(const ExperimentConfig& cfg) {
  const MemoryProtocol p = to_protocol(cfg);
  const MediumState medium = medium_at(p, cfg.medium.pressure_bar);
  const CoherenceEnsemble ensemble = ensemble_for(p, medium);
  const DelayScan env = retrieval_envelope(ensemble, uniform_grid(0.0, 2.0 * units::ns, 100001));

  double block = principal_recurrence_period(ensemble);
  if (!(block > 0.0)) block = 5.0 * units::ps;
  const double h = env.spacing();
  const auto per_block = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(block / h)));
  std::vector<double> t, logv;
  for (std::size_t start = 0; start + per_block <= env.values.size(); start += per_block) {
    const auto first = env.values.begin() + static_cast<std::ptrdiff_t>(start);
    const auto it = std::max_element(first, first + static_cast<std::ptrdiff_t>(per_block));
    if (*it <= 0.0) continue;
    t.push_back(env.delays[static_cast<std::size_t>(it - env.values.begin())]);
    logv.push_back(std::log(*it));
  }
  TimeBinReport r;
  if (t.size() >= 2) {
    const double n = static_cast<double>(t.size());
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      st += t[i];
      sl += logv[i];
      stt += t[i] * t[i];
      stl += t[i] * logv[i];
    }
    const double slope = (n * stl - st * sl) / (n * stt - st * st);
    r.storage_1e_ns = slope < 0.0 ? (2.0 / -slope) / units::ns : std::numeric_limits<double>::infinity();
  }
  const double tau = p.signal.duration_s;
  const double tbp = p.signal.shape == EnvelopeShape::gaussian ? 2.0 * std::numbers::ln2 / std::numbers::pi : 0.315;
  r.bandwidth_thz = 1.0 / tau * 1e-12;
  r.fwhm_bandwidth_thz = tbp / tau * 1e-12;
  r.bins = r.storage_1e_ns * units::ns / tau;
  return r;
}

// ---- least-squares fitting ---------------------------------------------------

enum class FitParameter { alpha, g, c_diff, c_coll, waist };

inline std::string to_string(FitParameter p) {
  switch (p) {
    case FitParameter::alpha: return "alpha";
    case FitParameter::g: return "g";
    case FitParameter::c_diff: return "c_diff";
    case FitParameter::c_coll: return "c_coll";
    case FitParameter::waist: return "waist";
  }
  return "?";
}

inline FitParameter parse_fit_parameter(const std::string& s) {
  for (auto p : {FitParameter::alpha, FitParameter::g, FitParameter::c_diff, FitParameter::c_coll, FitParameter::waist}) {
    if (to_string(p) == s) return p;
  }
  throw InputError("unknown fit parameter '" + s + "' (expected alpha, g, c_diff, c_coll, waist)");
}

/// Read or write one fit parameter in config units. `g` is the g*Gamma
/// per density coefficient; `waist` moves the write and read waists together.
inline double get_parameter(const ExperimentConfig& c, FitParameter p) {
  switch (p) {
    case FitParameter::alpha: return c.protocol.mode_match_alpha;
    case FitParameter::g: return c.medium.g_gamma_per_density_m4_per_j;
    case FitParameter::c_diff: return c.medium.c_diff_bar_per_s;
    case FitParameter::c_coll: return c.medium.c_coll_per_s_per_bar;
    case FitParameter::waist: return c.write.waist_um;
  }
  return 0.0;
}

inline void set_parameter(ExperimentConfig& c, FitParameter p, double v) {
  switch (p) {
    case FitParameter::alpha: c.protocol.mode_match_alpha = v; break;
    case FitParameter::g: c.medium.g_gamma_per_density_m4_per_j = v; break;
    case FitParameter::c_diff: c.medium.c_diff_bar_per_s = v; break;
    case FitParameter::c_coll: c.medium.c_coll_per_s_per_bar = v; break;
    case FitParameter::waist:
      c.write.waist_um = v;
      c.read.waist_um = v;
      break;
  }
}

/// Observed pressure-scan curves; eta_r may be empty to fit eta_w alone.
struct ObservedCurves {
  std::vector<double> pressures_bar;
  std::vector<double> eta_w;
  std::vector<double> eta_r;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  double residual_norm = 0.0;
  std::vector<std::vector<double>> covariance;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::string status;
};

struct FitOptions {
  int max_evaluations = 2000;
  double tolerance = 1e-12;
  double gradient_tolerance = 1e-6;
};

namespace detail {

/// Residual functor in relative coordinates x_k = theta_k / theta_k(initial).
struct PressureResidual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const ObservedCurves* data;
  const std::vector<FitParameter>* free;
  ExperimentConfig base;
  std::vector<double> scale;

  int inputs() const { return static_cast<int>(free->size()); }
  int values() const { return static_cast<int>(data->eta_w.size() + data->eta_r.size()); }

  ExperimentConfig apply(const Eigen::VectorXd& x) const {
    ExperimentConfig c = base;
    for (std::size_t k = 0; k < free->size(); ++k) set_parameter(c, (*free)[k], x[static_cast<Eigen::Index>(k)] * scale[k]);
    return c;
  }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    ExperimentConfig c = apply(x);
    c.protocol.mode_match_alpha = std::clamp(c.protocol.mode_match_alpha, 0.0, 1.0);
    const PressureScanResult sim = pressure_scan(data->pressures_bar, to_protocol(c), c.jobs);
    f.resize(values());
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < data->eta_w.size(); ++i) f[row++] = sim.points[i].eta_w - data->eta_w[i];
    for (std::size_t i = 0; i < data->eta_r.size(); ++i) f[row++] = sim.points[i].eta_r - data->eta_r[i];
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (!std::isfinite(f[i])) f[i] = 1.0;  // failed point: large but finite penalty
    }
    return 0;
  }
};

inline std::string lm_status(Eigen::LevenbergMarquardtSpace::Status s) {
  using namespace Eigen::LevenbergMarquardtSpace;
  switch (s) {
    case RelativeReductionTooSmall: return "relative_reduction_too_small";
    case RelativeErrorTooSmall: return "relative_error_too_small";
    case RelativeErrorAndReductionTooSmall: return "relative_error_and_reduction_too_small";
    case CosinusTooSmall: return "gradient_orthogonal";
    case TooManyFunctionEvaluation: return "too_many_evaluations";
    case FtolTooSmall: return "ftol_too_small";
    case XtolTooSmall: return "xtol_too_small";
    case GtolTooSmall: return "gtol_too_small";
    case ImproperInputParameters: return "improper_input";
    default: return "not_started";
  }
}

}  // namespace detail

/// Unweighted least squares of simulated minus observed efficiencies over
/// the pressure scan (Levenberg-Marquardt, central-difference Jacobian).
inline FitResult fit_parameters(const ObservedCurves& data, const std::vector<FitParameter>& free,
                                const ExperimentConfig& cfg, const FitOptions& opt = {}) {
  if (data.pressures_bar.size() != data.eta_w.size() ||
      (!data.eta_r.empty() && data.eta_r.size() != data.pressures_bar.size())) {
    throw InputError("fit_parameters: observed curves are not aligned with the pressure grid");
  }
  detail::PressureResidual fn{&data, &free, cfg, {}};
  for (auto p : free) {
    const double v = get_parameter(cfg, p);
    fn.scale.push_back(v != 0.0 ? v : 1.0);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(free.size());
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  for (std::size_t k = 0; k < free.size(); ++k) {
    if (get_parameter(cfg, free[k]) == 0.0) x[static_cast<Eigen::Index>(k)] = 0.0;
  }

  FitResult res;
  for (auto p : free) res.names.push_back(to_string(p));
  Eigen::VectorXd f;
  if (n == 0) {
    fn(x, f);
    res.residual_norm = f.norm();
    res.converged = true;
    res.status = "no_free_parameters";
    return res;
  }
  if (fn.values() < n) throw InputError("fit_parameters: fewer observations than free parameters");

  Eigen::NumericalDiff<detail::PressureResidual, Eigen::Central> numdiff(fn);
  Eigen::LevenbergMarquardt<decltype(numdiff)> lm(numdiff);
  lm.parameters.maxfev = opt.max_evaluations;
  lm.parameters.ftol = opt.tolerance;
  lm.parameters.xtol = opt.tolerance;
  lm.parameters.gtol = 0.0;
  const auto status = lm.minimize(x);

  fn(x, f);
  Eigen::MatrixXd jac(f.size(), n);
  numdiff.df(x, jac);
  const Eigen::VectorXd grad = jac.transpose() * f;
  res.status = detail::lm_status(status);
  res.iterations = static_cast<int>(lm.iter);
  res.residual_norm = f.norm();
  res.gradient_norm = grad.norm();
  const bool lm_ok = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::FtolTooSmall;
  res.converged = lm_ok && res.gradient_norm < opt.gradient_tolerance;

  for (Eigen::Index k = 0; k < n; ++k) res.values.push_back(x[k] * fn.scale[static_cast<std::size_t>(k)]);
  const Eigen::Index dof = f.size() - n;
  const double s2 = dof > 0 ? f.squaredNorm() / static_cast<double>(dof) : 0.0;
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse() * s2;
  res.covariance.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      res.covariance[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          cov(a, b) * fn.scale[static_cast<std::size_t>(a)] * fn.scale[static_cast<std::size_t>(b)];
    }
  }
  return res;
}

// ---- calibration -------------------------------------------------------------

struct CalibrationAnchors {
  double target_G = 6.5;
  double anchor_pressure_bar = 13.0;
  double anchor_write_energy_uj = 40.0;
  double timing_pressure_bar = 3.0;  ///< write timing is optimized here
  double scan_start_bar = 1.0;
  double scan_stop_bar = 13.0;
  int scan_points = 49;
};

struct CalibrationResult {
  ExperimentConfig config;  ///< input config with the calibrated values filled in
  double g_gamma_per_density = 0.0;
  double write_center_fs = 0.0;
  double G_anchor = 0.0;
  double eta_r_optimum_bar = 0.0;
  double best_pressure_bar = 0.0;
  double best_eta_tot = 0.0;
  double best_eta_tot_matched = 0.0;
  PressureScanResult scan;
};

/// 1) g*Gamma per density from G at the anchor (G is linear in it);
/// 2) write-pulse timing that maximizes write absorption;
/// 3) pressure scan reporting where the read optimum and best total land.
inline CalibrationResult calibrate(const ExperimentConfig& input, const CalibrationAnchors& anchors = {}) {
  CalibrationResult out;
  ExperimentConfig cfg = input;

  {
    ExperimentConfig probe = cfg;
    probe.write.energy_uj = anchors.anchor_write_energy_uj;
    const MemoryProtocol p = to_protocol(probe);
    const double G = coupling_parameter(medium_at(p, anchors.anchor_pressure_bar), p.write).G;
    if (!(G > 0.0)) throw DomainError("calibrate: zero coupling at the anchor");
    cfg.medium.g_gamma_per_density_m4_per_j *= anchors.target_G / G;
  }

  {
    const double tau = cfg.write.duration_fs;
    auto absorption = [&](double center_fs) {
      ExperimentConfig c = cfg;
      c.write.center_fs = center_fs;
      const MemoryProtocol p = to_protocol(c);
      const MediumState m = medium_at(p, anchors.timing_pressure_bar);
      return write_stage(make_signal_envelope(p.signal, p.grid), p.write, m, p.grid).efficiency;
    };
    double best = 0.0, best_v = -1.0;
    for (int i = 0; i <= 40; ++i) {
      const double c = -tau + 2.0 * tau * i / 40.0;
      const double v = absorption(c);
      if (v > best_v) {
        best_v = v;
        best = c;
      }
    }
    double a = best - 0.05 * tau, b = best + 0.05 * tau;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = absorption(c), fd = absorption(d);
    while (b - a > 1e-4) {
      if (fc > fd) {
        b = d; d = c; fd = fc; c = b - g * (b - a); fc = absorption(c);
      } else {
        a = c; c = d; fc = fd; d = a + g * (b - a); fd = absorption(d);
      }
    }
    cfg.write.center_fs = 0.5 * (a + b);
  }

  out.g_gamma_per_density = cfg.medium.g_gamma_per_density_m4_per_j;
  out.write_center_fs = cfg.write.center_fs;
  {
    ExperimentConfig probe = cfg;
    probe.write.energy_uj = anchors.anchor_write_energy_uj;
    const MemoryProtocol p = to_protocol(probe);
    out.G_anchor = coupling_parameter(medium_at(p, anchors.anchor_pressure_bar), p.write).G;
  }
  out.scan = pressure_scan(uniform_grid(anchors.scan_start_bar, anchors.scan_stop_bar,
                                        static_cast<std::size_t>(anchors.scan_points)),
                           to_protocol(cfg), cfg.jobs);
  double best_r = -1.0, best_t = -1.0;
  for (const auto& pt : out.scan.points) {
    if (!pt.ok) continue;
    if (pt.eta_r > best_r) {
      best_r = pt.eta_r;
      out.eta_r_optimum_bar = pt.pressure_bar;
    }
    if (pt.eta_tot > best_t) {
      best_t = pt.eta_tot;
      out.best_pressure_bar = pt.pressure_bar;
      out.best_eta_tot = pt.eta_tot;
      out.best_eta_tot_matched = pt.eta_tot_matched;
    }
  }
  out.config = cfg;
  return out;
}

}  // namespace h2mem
