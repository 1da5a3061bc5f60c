#pragma once

// Rovibrational structure of ground-state H2: Dunham-type term values,
// Q-branch (v=0 -> 1, dJ=0) Raman shifts, thermal populations with
// nuclear-spin statistics, and pairwise beat frequencies.
//
// All energies are wavenumbers in cm^-1.

#include <algorithm>
#include <cmath>
#include <compare>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "h2mem/error.hpp"
#include "h2mem/units.hpp"

namespace h2mem {

struct LineKey {
  int v = 0;
  int vp = 1;
  int j = 0;
  auto operator<=>(const LineKey&) const = default;
};

using LineTable = std::map<LineKey, double>;

struct SpectroscopicConstants {
  double we = 0.0;       ///< harmonic constant omega_e
  double wexe = 0.0;     ///< anharmonicity omega_e x_e
  double Be = 0.0;       ///< rotational constant B_e
  double alpha_e = 0.0;  ///< vibration-rotation coupling
  double De = 0.0;       ///< centrifugal distortion D_e
  double beta_e = 0.0;   ///< vibrational correction to D
  /// When present, Q-branch lines listed here override the Dunham values.
  std::optional<LineTable> empirical_lines;

  void validate() const {
    if (!(we > 0.0) || !(Be > 0.0) || wexe < 0.0 || De < 0.0) {
      throw DomainError("spectroscopic constants violate we > 0, Be > 0, wexe >= 0, De >= 0");
    }
    if (empirical_lines) {
      for (const auto& [key, value] : *empirical_lines) {
        if (!(value > 0.0)) {
          throw DomainError("empirical line (" + std::to_string(key.v) + "," + std::to_string(key.vp) + "," +
                            std::to_string(key.j) + ") has non-positive wavenumber");
        }
      }
    }
  }
};

/// Effective ground-state H2 constants for the v = 0, 1 manifold.
///
/// we, Be and De are the Huber & Herzberg (1979) values. wexe, alpha_e and
/// beta_e are effective values that reproduce the measured Q1(J), J <= 3,
/// Raman lines to < 0.1 cm^-1 within the two-term Dunham form used here
/// (they absorb the omega_e y_e and gamma_e contributions). External data.
inline SpectroscopicConstants default_h2_constants() {
  return SpectroscopicConstants{
      .we = 4401.21,
      .wexe = 120.02,
      .Be = 60.853,
      .alpha_e = 2.965,
      .De = 0.0471,
      .beta_e = -0.0025,
      .empirical_lines = std::nullopt,
  };
}

/// Measured H2 Q1(J) Raman shifts (gas phase, low-density limit), cm^-1.
inline LineTable default_h2_q_lines() {
  return LineTable{
      {{0, 1, 0}, 4161.17}, {{0, 1, 1}, 4155.25}, {{0, 1, 2}, 4143.47},
      {{0, 1, 3}, 4125.87}, {{0, 1, 4}, 4102.57}, {{0, 1, 5}, 4074.58},
  };
}

inline SpectroscopicConstants with_empirical_lines(SpectroscopicConstants c, LineTable lines) {
  c.empirical_lines = std::move(lines);
  c.validate();
  return c;
}

struct RovibState {
  int v = 0;
  int j = 0;
  double energy = 0.0;  ///< term value, cm^-1
};

struct SpinWeights {
  double even = 1.0;  ///< para-H2
  double odd = 3.0;   ///< ortho-H2
  double operator()(int j) const { return (j % 2 == 0) ? even : odd; }
};

struct PopulationTable {
  double temperature = 0.0;        ///< K
  std::map<int, double> fractions;  ///< J -> fraction of (v=0, J)
  SpinWeights spin_weights;

  double fraction(int j) const {
    auto it = fractions.find(j);
    return it == fractions.end() ? 0.0 : it->second;
  }
  double odd_sum() const {
    double s = 0.0;
    for (const auto& [j, f] : fractions) {
      if (j % 2 != 0) s += f;
    }
    return s;
  }
  double even_sum() const {
    double s = 0.0;
    for (const auto& [j, f] : fractions) {
      if (j % 2 == 0) s += f;
    }
    return s;
  }
};

/// G(v) + F_v(J) with B_v = Be - alpha_e (v+1/2), D_v = De + beta_e (v+1/2).
inline double term_value(const SpectroscopicConstants& c, int v, int j) {
  if (v < 0 || v > 2) throw DomainError("term_value: v must be in {0,1,2}, got " + std::to_string(v));
  if (j < 0 || j > 10) throw DomainError("term_value: J must be in [0,10], got " + std::to_string(j));
  const double h = v + 0.5;
  const double x = static_cast<double>(j) * (j + 1);
  const double bv = c.Be - c.alpha_e * h;
  const double dv = c.De + c.beta_e * h;
  return c.we * h - c.wexe * h * h + bv * x - dv * x * x;
}

inline RovibState rovib_state(const SpectroscopicConstants& c, int v, int j) {
  return RovibState{v, j, term_value(c, v, j)};
}

/// Q01(J) Raman shift; the empirical line wins when the table lists it.
inline double q_branch_frequency(const SpectroscopicConstants& c, int j) {
  if (j < 0 || j > 5) throw DomainError("q_branch_frequency: J must be in [0,5], got " + std::to_string(j));
  if (c.empirical_lines) {
    if (auto it = c.empirical_lines->find(LineKey{0, 1, j}); it != c.empirical_lines->end()) {
      return it->second;
    }
  }
  return term_value(c, 1, j) - term_value(c, 0, j);
}

/// Rotational populations of v = 0, normalized over J <= j_max.
inline PopulationTable boltzmann_populations(const SpectroscopicConstants& c, double temperature, int j_max = 7,
                                             SpinWeights weights = {}) {
  if (!(temperature > 0.0)) throw DomainError("boltzmann_populations: temperature must be > 0");
  if (j_max < 3 || j_max > 10) throw DomainError("boltzmann_populations: j_max must be in [3,10]");
  PopulationTable table;
  table.temperature = temperature;
  table.spin_weights = weights;
  const double e0 = term_value(c, 0, 0);
  double total = 0.0;
  for (int j = 0; j <= j_max; ++j) {
    const double rot = term_value(c, 0, j) - e0;
    const double w = weights(j) * (2 * j + 1) * std::exp(-constants::hc_over_k_cm_k * rot / temperature);
    table.fractions[j] = w;
    total += w;
  }
  for (auto& [j, f] : table.fractions) f /= total;
  return table;
}

/// Boltzmann factor between v=1 and v=0 at J=0.
inline double thermal_vibrational_ratio(const SpectroscopicConstants& c, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("thermal_vibrational_ratio: temperature must be > 0");
  const double split = term_value(c, 1, 0) - term_value(c, 0, 0);
  return std::exp(-constants::hc_over_k_cm_k * split / temperature);
}

struct Beat {
  int ja = 0;
  int jb = 0;
  double wavenumber = 0.0;  ///< |Q01(ja) - Q01(jb)|, cm^-1
};

/// All unordered pairs of Q01 lines, ascending by beat. Near-degenerate
/// pairs such as (0,2) and (2,3) at ~17.6-17.7 cm^-1 are both reported.
inline std::vector<Beat> beat_table(const SpectroscopicConstants& c, const std::set<int>& j_set) {
  std::vector<Beat> beats;
  for (auto a = j_set.begin(); a != j_set.end(); ++a) {
    for (auto b = std::next(a); b != j_set.end(); ++b) {
      beats.push_back(Beat{*a, *b, std::abs(q_branch_frequency(c, *a) - q_branch_frequency(c, *b))});
    }
  }
  std::stable_sort(beats.begin(), beats.end(),
                   [](const Beat& x, const Beat& y) { return x.wavenumber < y.wavenumber; });
  return beats;
}

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw InputError(where + ": cannot parse number '" + text + "'");
}
}  // namespace detail

/// Reads `key = value` lines (keys we, wexe, Be, alpha_e, De, beta_e); '#' starts a comment.
inline SpectroscopicConstants load_constants(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open constants file " + path);
  std::map<std::string, double*> slots;
  SpectroscopicConstants c;
  slots["we"] = &c.we;
  slots["wexe"] = &c.wexe;
  slots["Be"] = &c.Be;
  slots["alpha_e"] = &c.alpha_e;
  slots["De"] = &c.De;
  slots["beta_e"] = &c.beta_e;
  std::set<std::string> seen;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(row);
    if (eq == std::string::npos) throw InputError(where + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    auto slot = slots.find(key);
    if (slot == slots.end()) throw InputError(where + ": unknown key '" + key + "'");
    *slot->second = detail::parse_double(detail::trim(line.substr(eq + 1)), where);
    seen.insert(key);
  }
  for (const auto& [key, _] : slots) {
    if (!seen.contains(key)) throw InputError(path + ": missing key '" + key + "'");
  }
  c.validate();
  return c;
}

/// CSV with header v,vp,J,wavenumber.
inline LineTable load_empirical_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open line table " + path);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "v,vp,J,wavenumber") {
    throw InputError(path + ": expected header 'v,vp,J,wavenumber'");
  }
  LineTable table;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = detail::trim(line);
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(detail::trim(cell));
    const std::string where = path + ":" + std::to_string(row);
    if (cells.size() != 4) throw InputError(where + ": expected 4 columns");
    const LineKey key{static_cast<int>(detail::parse_double(cells[0], where)),
                      static_cast<int>(detail::parse_double(cells[1], where)),
                      static_cast<int>(detail::parse_double(cells[2], where))};
    const double wn = detail::parse_double(cells[3], where);
    if (!(wn > 0.0)) throw InputError(where + ": wavenumber must be positive");
    table[key] = wn;
  }
  return table;
}

}  // namespace h2mem
