#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "h2mem/mbsolver.hpp"

using namespace h2mem;

namespace {

PulseSpec write_pulse() {
  PulseSpec w;
  w.energy_j = 40.0 * units::uj;
  return w;
}

PulseSpec signal_pulse() {
  PulseSpec s;
  s.center_wavelength_nm = 600.0;
  s.energy_j = 50.0 * units::nj;
  return s;
}

// Medium whose coupling parameter for `w` is exactly G.
MediumState medium_for(double G, double gamma, const PulseSpec& w, double length = 1e-3) {
  MediumState m;
  m.pressure_bar = 1.0;
  m.temperature_k = 295.0;
  m.length_m = length;
  m.gamma = gamma;
  m.g_gamma = G / (w.peak_intensity() * length * w.duration_s);
  return m;
}

GridSpec grid(int f) { return GridSpec{64 * f, 256 * f, 1.2 * units::ps}; }

double write_eff(double G, double gamma, const GridSpec& g) {
  const auto w = write_pulse();
  return write_stage(make_signal_envelope(signal_pulse(), g), w, medium_for(G, gamma, w), g).efficiency;
}

// Retrieval from a spatially uniform coherence with no dephasing.
double bessel_retrieval(double C) {
  const double x = 2.0 * std::sqrt(C);
  const double j0 = std::cyl_bessel_j(0.0, x), j1 = std::cyl_bessel_j(1.0, x);
  return 1.0 - j0 * j0 - j1 * j1;
}

}  // namespace

TEST(WriteStage, ZeroCouplingIsTransparent) {
  const auto g = grid(1);
  const auto a = make_signal_envelope(signal_pulse(), g);
  const auto r = write_stage(a, write_pulse(), medium_for(0.0, 1e9, write_pulse()), g);
  EXPECT_EQ(r.efficiency, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(r.signal_out[i], a[i]);
}

TEST(WriteStage, SignalEnvelopeCarriesItsEnergy) {
  const auto g = grid(1);
  EXPECT_NEAR(envelope_energy(make_signal_envelope(signal_pulse(), g), g.dt()), 50.0 * units::nj, 1e-20);
}

TEST(WriteStage, ExcitationConservedWithoutDephasing) {
  for (int f : {1, 2}) {
    for (double G : {0.1, 1.0, 6.5, 20.0}) {
      const auto g = grid(f);
      const auto r =
          write_stage(make_signal_envelope(signal_pulse(), g), write_pulse(), medium_for(G, 0.0, write_pulse()), g);
      EXPECT_NEAR((r.output_energy + r.stored_energy) / r.input_energy, 1.0, 1e-6) << "G=" << G;
    }
  }
}

TEST(WriteStage, DephasingLosesExcitation) {
  const auto g = grid(1);
  const auto r = write_stage(make_signal_envelope(signal_pulse(), g), write_pulse(),
                             medium_for(6.5, 2e12, write_pulse()), g);
  EXPECT_LT(r.output_energy + r.stored_energy, r.input_energy);
}

TEST(WriteStage, LinearInSignalAmplitude) {
  const auto g = grid(1);
  const auto m = medium_for(6.5, 1e9, write_pulse());
  auto a = make_signal_envelope(signal_pulse(), g);
  const auto r1 = write_stage(a, write_pulse(), m, g);
  const double s = 3.7;
  for (auto& v : a) v *= s;
  const auto r2 = write_stage(a, write_pulse(), m, g);
  EXPECT_NEAR(r2.efficiency, r1.efficiency, 1e-10 * r1.efficiency);
  for (std::size_t i = 0; i < r1.signal_out.size(); ++i) {
    EXPECT_NEAR(std::abs(r2.signal_out[i] - s * r1.signal_out[i]), 0.0, 1e-10 * std::abs(s * r1.signal_out[i]) + 1e-300);
  }
  for (std::size_t i = 0; i < r1.coherence.size(); ++i) {
    EXPECT_NEAR(std::abs(r2.coherence[i] - s * r1.coherence[i]), 0.0, 1e-10 * std::abs(s * r1.coherence[i]));
  }
}

TEST(WriteStage, PerturbativeSlopeMatchesQuadrature) {
  // weak coupling: eta_w -> L (int k a dtau)^2 / int |a|^2 dtau
  const auto g = grid(4);
  const auto w = write_pulse();
  const auto s = signal_pulse();
  double eta[3];
  const double Gs[3] = {0.01, 0.02, 0.04};
  for (int i = 0; i < 3; ++i) eta[i] = write_eff(Gs[i], 0.0, g);

  const auto m = medium_for(1.0, 0.0, w);  // oracle slope per unit G
  const int n = 200001;
  const double h = 1.2 * units::ps / n;
  double ka = 0.0, e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = -0.6 * units::ps + (i + 0.5) * h;
    const double amp = std::sqrt(s.profile(t));
    ka += std::sqrt(0.5 * m.g_gamma * w.peak_intensity() * w.profile(t)) * amp * h;
    e += amp * amp * h;
  }
  const double slope = m.length_m * ka * ka / e;

  for (int i = 0; i < 3; ++i) EXPECT_NEAR(eta[i] / (Gs[i] * slope), 1.0, 0.3 * Gs[i]);
  // Richardson extrapolation of eta/G to G -> 0
  const double extrapolated = 2.0 * eta[0] / Gs[0] - eta[1] / Gs[1];
  EXPECT_NEAR(extrapolated / slope, 1.0, 1e-4);
  EXPECT_NEAR(eta[1] / eta[0], 2.0, 0.02);
  EXPECT_NEAR(eta[2] / eta[1], 2.0, 0.02);
}

TEST(WriteStage, EquivalentCouplingGivesSameEfficiency) {
  // halve the cell, double the write energy: G unchanged
  const auto g = grid(1);
  auto w = write_pulse();
  auto m = medium_for(4.0, 1e9, w, 2e-3);
  const double a = write_stage(make_signal_envelope(signal_pulse(), g), w, m, g).efficiency;
  w.energy_j *= 2.0;
  m.length_m *= 0.5;
  EXPECT_NEAR(coupling_parameter(m, w).G, 4.0, 1e-12);
  const double b = write_stage(make_signal_envelope(signal_pulse(), g), w, m, g).efficiency;
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(WriteStage, RefusesUnresolvedGrids) {
  const auto s = make_signal_envelope(signal_pulse(), grid(1));
  const auto m = medium_for(1.0, 1e9, write_pulse());
  EXPECT_THROW(write_stage(std::vector<cplx>(256), write_pulse(), m, GridSpec{32, 256, 1.2 * units::ps}), SolverError);
  EXPECT_THROW(write_stage(std::vector<cplx>(64), write_pulse(), m, GridSpec{64, 64, 1.2 * units::ps}), SolverError);
  auto late = write_pulse();
  late.center_s = 400.0 * units::fs;
  EXPECT_THROW(write_stage(s, late, m, grid(1)), SolverError);
  EXPECT_THROW(write_stage(std::vector<cplx>(100), write_pulse(), m, grid(1)), DomainError);
}

TEST(WriteStage, NonFiniteCouplingIsReported) {
  auto m = medium_for(1.0, 1e9, write_pulse());
  m.g_gamma = std::nan("");
  EXPECT_THROW(write_stage(make_signal_envelope(signal_pulse(), grid(1)), write_pulse(), m, grid(1)), SolverError);
}

TEST(ReadStage, ZeroCoherenceGivesNoOutput) {
  const auto g = grid(1);
  const auto r = read_stage(std::vector<cplx>(g.nz), write_pulse(), medium_for(6.5, 1e9, write_pulse()), 0.0, g);
  EXPECT_EQ(r.efficiency, 0.0);
  for (const auto& v : r.signal_out) EXPECT_EQ(v, cplx{});
}

TEST(ReadStage, UniformCoherenceMatchesBesselSolution) {
  for (double G : {0.5, 2.0, 6.5}) {
    const auto g = grid(2);
    const auto m = medium_for(G, 0.0, write_pulse());
    const auto r = read_stage(std::vector<cplx>(g.nz, cplx(1.0, 0.0)), write_pulse(), m, 0.0, g);
    EXPECT_NEAR(r.efficiency, bessel_retrieval(integrated_coupling(m, write_pulse())), 1e-5) << "G=" << G;
  }
}

TEST(ReadStage, WeakUniformRetrievalIsLinearInG) {
  const auto g = grid(2);
  const std::vector<cplx> b(g.nz, cplx(1.0, 0.0));
  const double e1 = read_stage(b, write_pulse(), medium_for(0.01, 0.0, write_pulse()), 0.0, g).efficiency;
  const double e2 = read_stage(b, write_pulse(), medium_for(0.02, 0.0, write_pulse()), 0.0, g).efficiency;
  EXPECT_NEAR(e2 / e1, 2.0, 0.01);
  EXPECT_NEAR(e1, integrated_coupling(medium_for(0.01, 0.0, write_pulse()), write_pulse()), 1e-4);
}

TEST(ReadStage, FixedCoherenceRetrievalIsMonotoneInG) {
  const auto g = grid(1);
  const auto stored = write_stage(make_signal_envelope(signal_pulse(), g), write_pulse(),
                                  medium_for(6.5, 0.0, write_pulse()), g)
                          .coherence;
  double prev = 0.0;
  for (double G = 0.25; G <= 32.0; G *= 1.5) {
    const double e = read_stage(stored, write_pulse(), medium_for(G, 0.0, write_pulse()), 0.0, g).efficiency;
    EXPECT_GE(e, prev - 1e-12) << "G=" << G;
    prev = e;
  }
}

TEST(ReadStage, ReabsorptionWhenWrittenAtSameDensity) {
  // coherence written and read at the same G: retrieval rises then falls
  const auto g = grid(1);
  std::vector<double> eta;
  for (double G : {0.5, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    const auto m = medium_for(G, 0.0, write_pulse());
    const auto w = write_stage(make_signal_envelope(signal_pulse(), g), write_pulse(), m, g);
    eta.push_back(read_stage(w.coherence, write_pulse(), m, 0.0, g).efficiency);
  }
  const auto peak = std::max_element(eta.begin(), eta.end()) - eta.begin();
  EXPECT_GT(peak, 0);
  EXPECT_LT(peak, static_cast<long>(eta.size()) - 1);
  EXPECT_LT(eta.back(), 0.5 * eta[static_cast<std::size_t>(peak)]);
}

TEST(ReadStage, ReciprocityAtWeakCoupling) {
  const auto g = grid(2);
  auto w = write_pulse();
  const auto sig = signal_pulse();
  w.center_s = sig.center_s;
  for (double G : {0.01, 0.05}) {
    const auto m = medium_for(G, 0.0, w);
    const auto ws = write_stage(make_signal_envelope(sig, g), w, m, g);
    const auto rs = read_stage(ws.coherence, w, m, 0.0, g);
    EXPECT_NEAR(rs.efficiency / ws.efficiency, 1.0, 0.01) << "G=" << G;
  }
}

TEST(ReadStage, StorageDecayWithoutEnsemble) {
  const auto g = grid(1);
  const auto m = medium_for(2.0, 1e9, write_pulse());
  const std::vector<cplx> b(g.nz, cplx(1.0, 0.0));
  const double e0 = read_stage(b, write_pulse(), m, 0.0, g).efficiency;
  const double e1 = read_stage(b, write_pulse(), m, 100.0 * units::ps, g).efficiency;
  EXPECT_NEAR(e1 / e0, std::exp(-2.0 * 1e9 * 100.0 * units::ps), 1e-12);
  EXPECT_THROW(read_stage(b, write_pulse(), m, -1.0, g), DomainError);
}

TEST(Solver, SecondOrderGridConvergence) {
  // error ratio on successive halvings of dz and dtau
  for (double G : {2.0, 6.5}) {
    const double e1 = write_eff(G, 1e9, grid(1));
    const double e2 = write_eff(G, 1e9, grid(2));
    const double e4 = write_eff(G, 1e9, grid(4));
    const double ratio = (e1 - e2) / (e2 - e4);
    EXPECT_GE(ratio, 3.5) << "G=" << G;
    EXPECT_LE(ratio, 4.5) << "G=" << G;
  }
}

TEST(Solver, EfficienciesStayInUnitInterval) {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> G(0.0, 40.0), gam(0.0, 5e12), centre(-100.0, 100.0);
  for (int trial = 0; trial < 40; ++trial) {
    auto w = write_pulse();
    w.center_s = centre(rng) * units::fs;
    const auto m = medium_for(G(rng), gam(rng), w);
    const auto g = grid(1);
    const auto ws = write_stage(make_signal_envelope(signal_pulse(), g), w, m, g);
    const auto rs = read_stage(ws.coherence, w, m, 0.0, g);
    EXPECT_GE(ws.efficiency, 0.0);
    EXPECT_LE(ws.efficiency, 1.0);
    EXPECT_GE(rs.efficiency, 0.0);
    EXPECT_LE(rs.efficiency, 1.0);
    EXPECT_LE(total_efficiency(ws, rs), 1.0);
  }
}

TEST(Solver, TotalEfficiencyFactorizes) {
  StageResult w, r;
  w.efficiency = 0.0;
  r.efficiency = 0.8;
  EXPECT_EQ(total_efficiency(w, r), 0.0);
  w.efficiency = 0.3;
  r.efficiency = 1.0;
  EXPECT_EQ(total_efficiency(w, r), 0.3);
}
