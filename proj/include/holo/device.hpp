// Copyright 2026 The holo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Charge-basis model of the two-island tunable coupling transmon:
//
//   H = sum_{a=+,-} [ 4 E_Ca (n_a - n_ga)^2 - E_Ja^0 cos(pi f_a) cos(g_a - 2 pi f_a) ]
//       + 4 E_I (n_+ - n_g+)(n_- - n_g-)
//
// on n_a in [-N, N] per island. e^{i g} raises the island charge by one, so
// cos(g - 2 pi f) = (e^{-2 pi i f} S + e^{2 pi i f} S^dag) / 2. Reported
// energies are in units of E_C- (equal to E_C for symmetric islands).

#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "holo/core.hpp"

namespace holo::device {

struct parameter_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct tracking_error : numerical_error {
  std::size_t sweep_index;
  tracking_error(const std::string& what, std::size_t index) : numerical_error(what), sweep_index(index) {}
};

struct forbidden_transition_error : numerical_error {
  using numerical_error::numerical_error;
};

struct DeviceParams {
  double E_C_plus = 1.0;
  double E_C_minus = 1.0;
  double E_J0_plus = 50.0;   // E_J^1 + E_J^2 of the upper SQUID
  double E_J0_minus = 50.0;  // same for the lower SQUID
  double E_I = 0.0;
  double n_g_plus = 0.0;
  double n_g_minus = 0.0;
  double f_plus = 0.0;  // Phi_+ / Phi_0
  double f_minus = 0.0;

  void validate() const {
    if (!(E_C_plus > 0.0) || !(E_C_minus > 0.0)) throw parameter_error("DeviceParams: charging energies must be positive");
    for (double v : {E_J0_plus, E_J0_minus, E_I, n_g_plus, n_g_minus, f_plus, f_minus}) {
      if (!std::isfinite(v)) throw parameter_error("DeviceParams: non-finite parameter");
    }
  }

  /// Flux-tuned Josephson energies E_J = E_J^0 cos(pi f).
  double E_J_plus() const { return E_J0_plus * std::cos(kPi * f_plus); }
  double E_J_minus() const { return E_J0_minus * std::cos(kPi * f_minus); }
  double energy_unit() const { return E_C_minus; }

  static double reported_frustration(double f) { return f - std::floor(f); }
};

struct ChargeBasisConfig {
  int N = 12;

  void validate() const {
    if (N < 4) throw parameter_error("ChargeBasisConfig: truncation N must be >= 4");
  }
  Index island_dim() const { return 2 * N + 1; }
  Index dim() const { return island_dim() * island_dim(); }
};

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix island_number(int n_max) {
  const Index d = 2 * n_max + 1;
  Matrix n = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k - n_max);
  return n;
}

// |n> -> |n+1>, truncated at the top.
inline Matrix island_shift(int n_max) {
  const Index d = 2 * n_max + 1;
  Matrix s = Matrix::Zero(d, d);
  for (Index k = 0; k + 1 < d; ++k) s(k + 1, k) = 1.0;
  return s;
}

}  // namespace detail

/// Charge and charge-raising operators of both islands on the product space
/// (upper island is the outer tensor factor).
struct ChargeOperators {
  Matrix n_plus, n_minus, shift_plus, shift_minus;
};

inline ChargeOperators charge_ops(const ChargeBasisConfig& cfg) {
  cfg.validate();
  const Matrix n = detail::island_number(cfg.N);
  const Matrix s = detail::island_shift(cfg.N);
  const Matrix one = Matrix::Identity(cfg.island_dim(), cfg.island_dim());
  return {kron(n, one), kron(one, n), kron(s, one), kron(one, s)};
}

namespace detail {

// 4 E_C (n - n_g)^2 - E_J^0 cos(pi f) cos(g - 2 pi f) on one island.
inline Matrix island_hamiltonian(int n_max, double e_c, double e_j0, double n_g, double f, bool phase_offset) {
  const Matrix n = island_number(n_max);
  const Matrix s = island_shift(n_max);
  const Index d = n.rows();
  const Matrix q = n - n_g * Matrix::Identity(d, d);
  const cplx offset = phase_offset ? std::exp(-2.0 * kPi * I * f) : cplx{1.0, 0.0};
  const Matrix cosine = 0.5 * (offset * s + std::conj(offset) * s.adjoint());
  return 4.0 * e_c * q * q - e_j0 * std::cos(kPi * f) * cosine;
}

}  // namespace detail

/// Full device Hamiltonian in absolute energy units. `phase_offset = false`
/// drops the 2 pi f shift inside the cosine (a gauge change; same spectrum).
inline HermitianOperator tct_hamiltonian(const DeviceParams& p, const ChargeBasisConfig& cfg,
                                         bool phase_offset = true) {
  p.validate();
  cfg.validate();
  const Index d = cfg.island_dim();
  const Matrix one = Matrix::Identity(d, d);
  const Matrix hp = detail::island_hamiltonian(cfg.N, p.E_C_plus, p.E_J0_plus, p.n_g_plus, p.f_plus, phase_offset);
  const Matrix hm = detail::island_hamiltonian(cfg.N, p.E_C_minus, p.E_J0_minus, p.n_g_minus, p.f_minus, phase_offset);
  const Matrix qp = detail::island_number(cfg.N) - p.n_g_plus * one;
  const Matrix qm = detail::island_number(cfg.N) - p.n_g_minus * one;
  return HermitianOperator(kron(hp, one) + kron(one, hm) + 4.0 * p.E_I * kron(qp, qm), 1e-12);
}

/// Gamma = E_J-^0 cos(pi f-) sin(g- - 2 pi f-) with Phi_0 = 1, in absolute
/// energy units.
inline HermitianOperator drive_operator(const DeviceParams& p, const ChargeBasisConfig& cfg) {
  p.validate();
  cfg.validate();
  const Matrix s = detail::island_shift(cfg.N);
  const cplx offset = std::exp(-2.0 * kPi * I * p.f_minus);
  const Matrix sine = (offset * s - std::conj(offset) * s.adjoint()) / (2.0 * I);
  const Matrix one = Matrix::Identity(cfg.island_dim(), cfg.island_dim());
  return HermitianOperator(kron(one, p.E_J0_minus * std::cos(kPi * p.f_minus) * sine), 1e-12);
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

/// Ascending eigenpairs. Energies are in units of E_C-.
struct Spectrum {
  RealVector energies;
  Matrix vectors;
};

/// Uses the real symmetric solver when the Hamiltonian has no imaginary part.
inline Spectrum solve_spectrum(const HermitianOperator& h, double energy_unit, bool with_vectors = true) {
  const Matrix& m = h.matrix();
  const auto options = with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  Spectrum out;
  if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.real(), options);
    if (solver.info() != Eigen::Success) throw numerical_error("solve_spectrum: eigensolver failed");
    out.energies = solver.eigenvalues() / energy_unit;
    if (with_vectors) out.vectors = solver.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, options);
    if (solver.info() != Eigen::Success) throw numerical_error("solve_spectrum: eigensolver failed");
    out.energies = solver.eigenvalues() / energy_unit;
    if (with_vectors) out.vectors = solver.eigenvectors();
  }
  return out;
}

inline Spectrum solve_spectrum(const DeviceParams& p, const ChargeBasisConfig& cfg, bool with_vectors = true) {
  return solve_spectrum(tct_hamiltonian(p, cfg), p.energy_unit(), with_vectors);
}

/// Smallest N >= n_start whose lowest `levels` eigenvalues move by less than
/// rel_tol * max(1, |E|) when N grows by two.
inline int converged_truncation(const DeviceParams& p, int levels = 6, double rel_tol = 1e-8, int n_start = 4,
                                int n_max = 40) {
  auto lowest = [&](int n) {
    return RealVector(solve_spectrum(p, ChargeBasisConfig{n}, false).energies.head(levels));
  };
  RealVector prev = lowest(n_start);
  for (int n = n_start; n + 2 <= n_max; n += 2) {
    const RealVector next = lowest(n + 2);
    bool ok = true;
    for (Index k = 0; k < levels; ++k) ok = ok && std::abs(next(k) - prev(k)) < rel_tol * std::max(1.0, std::abs(prev(k)));
    if (ok) return n;
    prev = next;
  }
  throw numerical_error(holo::detail::concat("converged_truncation: not converged by N = ", n_max));
}

// ---------------------------------------------------------------------------
// Level labels
// ---------------------------------------------------------------------------

/// Eigenvectors kept per sweep point; the candidate pool of track_levels.
inline constexpr Index kTrackedStates = 12;

enum class Level { zero = 0, one = 1, aux = 2, excited = 3 };

inline constexpr std::array<Level, 4> kLevels{Level::zero, Level::one, Level::aux, Level::excited};

inline const char* level_name(Level l) {
  static constexpr const char* names[] = {"0", "1", "a", "e"};
  return names[static_cast<int>(l)];
}

/// rank[label] = ascending energy rank assigned to that label at the start of
/// a sweep. The default puts |0>, |1>, |a>, |e> in ascending order.
struct LevelPermutation {
  std::array<int, 4> rank{0, 1, 2, 3};

  void validate() const {
    std::array<bool, 4> seen{};
    for (int r : rank) {
      if (r < 0 || r > 3 || seen[static_cast<std::size_t>(r)]) throw parameter_error("LevelPermutation: not a permutation of 0..3");
      seen[static_cast<std::size_t>(r)] = true;
    }
  }
  LevelPermutation inverse() const {
    LevelPermutation inv;
    for (int k = 0; k < 4; ++k) inv.rank[static_cast<std::size_t>(rank[static_cast<std::size_t>(k)])] = k;
    return inv;
  }
  LevelPermutation then(const LevelPermutation& next) const {
    LevelPermutation out;
    for (std::size_t k = 0; k < 4; ++k) out.rank[k] = next.rank[static_cast<std::size_t>(rank[k])];
    return out;
  }
  bool operator==(const LevelPermutation&) const = default;
};

/// column[label] = eigenvector column holding that label.
struct LevelLabeling {
  std::array<Index, 4> column{0, 1, 2, 3};
  Index operator[](Level l) const { return column[static_cast<std::size_t>(l)]; }
};

/// Labels at a single point: ascending order through the permutation.
inline LevelLabeling identify_levels(const Spectrum& s, const LevelPermutation& perm = {}) {
  perm.validate();
  if (s.energies.size() < 4) throw parameter_error("identify_levels: need at least 4 levels");
  LevelLabeling out;
  for (std::size_t k = 0; k < 4; ++k) out.column[k] = perm.rank[k];
  return out;
}

/// Labels along a sweep by eigenvector-overlap continuation. Labels that were
/// degenerate at the previous point are matched as a group (by subspace
/// overlap) and re-ordered by energy; a match with overlap below 0.5 is a
/// tracking error.
inline std::vector<LevelLabeling> track_levels(const std::vector<Spectrum>& sweep, const LevelPermutation& perm = {},
                                               Index candidates = kTrackedStates) {
  if (sweep.empty()) return {};
  std::vector<LevelLabeling> out{identify_levels(sweep.front(), perm)};
  for (std::size_t j = 1; j < sweep.size(); ++j) {
    const Spectrum& prev = sweep[j - 1];
    const Spectrum& next = sweep[j];
    const LevelLabeling& lp = out.back();
    const Index pool = std::min<Index>(candidates, next.vectors.cols());

    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return prev.energies(lp.column[a]) < prev.energies(lp.column[b]) ||
             (prev.energies(lp.column[a]) == prev.energies(lp.column[b]) && a < b);
    });
    LevelLabeling ln;
    std::set<Index> used;
    for (std::size_t g = 0; g < 4;) {
      const double e0 = prev.energies(lp.column[order[g]]);
      std::size_t h = g + 1;
      while (h < 4 && std::abs(prev.energies(lp.column[order[h]]) - e0) <= 1e-8 * std::max(1.0, std::abs(e0))) ++h;
      const std::size_t m = h - g;

      std::vector<std::pair<double, Index>> weights;
      for (Index c = 0; c < pool; ++c) {
        if (used.count(c)) continue;
        double w = 0.0;
        for (std::size_t q = g; q < h; ++q) w += std::norm(next.vectors.col(c).dot(prev.vectors.col(lp.column[order[q]])));
        weights.push_back({w, c});
      }
      std::sort(weights.begin(), weights.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      if (weights.size() < m) throw tracking_error("track_levels: candidate pool exhausted", j);
      std::vector<Index> picked;
      for (std::size_t q = 0; q < m; ++q) {
        if (weights[q].first < 0.5) {
          throw tracking_error(holo::detail::concat("track_levels: ambiguous continuation at sweep index ", j,
                                                    " (overlap ", weights[q].first, ")"),
                               j);
        }
        picked.push_back(weights[q].second);
        used.insert(weights[q].second);
      }
      std::sort(picked.begin(), picked.end(), [&](Index a, Index b) { return next.energies(a) < next.energies(b); });
      for (std::size_t q = 0; q < m; ++q) ln.column[order[g + q]] = picked[q];
      g = h;
    }
    out.push_back(ln);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepVariable { E_I, E_J_plus, E_J_minus, n_g_plus, n_g_minus };

inline const char* variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::E_I: return "E_I";
    case SweepVariable::E_J_plus: return "E_J_plus";
    case SweepVariable::E_J_minus: return "E_J_minus";
    case SweepVariable::n_g_plus: return "n_g_plus";
    case SweepVariable::n_g_minus: return "n_g_minus";
  }
  return "?";
}

inline SweepVariable parse_variable(const std::string& s) {
  for (auto v : {SweepVariable::E_I, SweepVariable::E_J_plus, SweepVariable::E_J_minus, SweepVariable::n_g_plus,
                 SweepVariable::n_g_minus}) {
    if (s == variable_name(v)) return v;
  }
  throw parameter_error("unknown sweep variable '" + s + "'");
}

/// Sets the swept quantity. Energies are given in units of E_C-; Josephson
/// sweeps set the flux-tuned value E_J = E_J^0 cos(pi f).
inline DeviceParams with_variable(DeviceParams p, SweepVariable v, double value) {
  const double unit = p.energy_unit();
  auto set_ej = [&](double& e_j0, double f) {
    const double c = std::cos(kPi * f);
    if (std::abs(c) < 1e-12) throw parameter_error("with_variable: cannot set E_J at half-integer frustration");
    e_j0 = value * unit / c;
  };
  switch (v) {
    case SweepVariable::E_I: p.E_I = value * unit; break;
    case SweepVariable::E_J_plus: set_ej(p.E_J0_plus, p.f_plus); break;
    case SweepVariable::E_J_minus: set_ej(p.E_J0_minus, p.f_minus); break;
    case SweepVariable::n_g_plus: p.n_g_plus = value; break;
    case SweepVariable::n_g_minus: p.n_g_minus = value; break;
  }
  return p;
}

struct SpectrumTable {
  std::string variable;
  std::vector<double> values;
  std::vector<RealVector> levels;              // lowest K, ascending, units of E_C-
  std::vector<std::array<double, 4>> labeled;  // energies of |0>, |1>, |a>, |e>
};

/// All energies but only the lowest kTrackedStates eigenvectors.
inline Spectrum tracked_spectrum(const DeviceParams& p, const ChargeBasisConfig& cfg) {
  Spectrum s = solve_spectrum(p, cfg);
  s.vectors = Matrix(s.vectors.leftCols(std::min(kTrackedStates, s.vectors.cols())));
  return s;
}

inline std::vector<Spectrum> sweep_spectra(const DeviceParams& base, SweepVariable v,
                                           const std::vector<double>& values, const ChargeBasisConfig& cfg) {
  std::vector<Spectrum> out;
  out.reserve(values.size());
  for (double x : values) out.push_back(tracked_spectrum(with_variable(base, v, x), cfg));
  return out;
}

inline SpectrumTable spectrum_sweep(const DeviceParams& base, SweepVariable v, const std::vector<double>& values,
                                    const ChargeBasisConfig& cfg, Index levels = 8,
                                    const LevelPermutation& perm = {}) {
  if (levels < 4) throw parameter_error("spectrum_sweep: need at least 4 levels");
  const auto spectra = sweep_spectra(base, v, values, cfg);
  const auto labels = track_levels(spectra, perm);
  SpectrumTable table{variable_name(v), values, {}, {}};
  for (std::size_t j = 0; j < spectra.size(); ++j) {
    table.levels.push_back(spectra[j].energies.head(levels));
    std::array<double, 4> e{};
    for (std::size_t k = 0; k < 4; ++k) e[k] = spectra[j].energies(labels[j].column[k]);
    table.labeled.push_back(e);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Transitions and Rabi couplings
// ---------------------------------------------------------------------------

using TransitionPair = std::pair<Level, Level>;

/// Pairs reported by default: t_e0, t_e1, t_ea, t_01, t_0a, t_1a.
inline std::vector<TransitionPair> default_pairs() {
  return {{Level::excited, Level::zero}, {Level::excited, Level::one}, {Level::excited, Level::aux},
          {Level::zero, Level::one},     {Level::zero, Level::aux},    {Level::one, Level::aux}};
}

inline std::string pair_name(const TransitionPair& p) {
  return std::string("t_") + level_name(p.first) + level_name(p.second);
}

struct TransitionTable {
  std::string variable;
  std::vector<double> values;
  std::vector<TransitionPair> pairs;
  std::vector<std::vector<double>> moduli;  // [point][pair], units of E_C- per flux quantum
};

/// <k|Gamma|l> between labeled eigenstates, Gamma in units of E_C-.
inline cplx drive_element(const Spectrum& s, const LevelLabeling& labels, const Matrix& gamma, const TransitionPair& p) {
  return s.vectors.col(labels[p.first]).dot(gamma * s.vectors.col(labels[p.second]));
}

inline TransitionTable transition_elements(const DeviceParams& base, SweepVariable v,
                                           const std::vector<double>& values, const ChargeBasisConfig& cfg,
                                           const std::vector<TransitionPair>& pairs = default_pairs(),
                                           const LevelPermutation& perm = {}) {
  const auto spectra = sweep_spectra(base, v, values, cfg);
  const auto labels = track_levels(spectra, perm);
  TransitionTable table{variable_name(v), values, pairs, {}};
  for (std::size_t j = 0; j < spectra.size(); ++j) {
    const DeviceParams p = with_variable(base, v, values[j]);
    const Matrix gamma = drive_operator(p, cfg).matrix() / p.energy_unit();
    std::vector<double> row;
    for (const auto& pr : pairs) row.push_back(std::abs(drive_element(spectra[j], labels[j], gamma, pr)));
    table.moduli.push_back(std::move(row));
  }
  return table;
}

/// Omega_kl = Phi0 <k|Gamma|l> / 2 (hbar = 1) at a single working point, with
/// ascending labels.
inline cplx effective_rabi(const DeviceParams& p, const ChargeBasisConfig& cfg, double amplitude,
                           const TransitionPair& pair) {
  const Spectrum s = solve_spectrum(p, cfg);
  const Matrix gamma = drive_operator(p, cfg).matrix() / p.energy_unit();
  const cplx element = drive_element(s, identify_levels(s), gamma, pair);
  if (std::abs(element) < 1e-12) {
    throw forbidden_transition_error("effective_rabi: " + pair_name(pair) + " is forbidden (|<k|Gamma|l>| < 1e-12)");
  }
  return 0.5 * amplitude * element;
}

/// Drive amplitude that produces a coupling of magnitude |f| on `pair`:
/// 2 |f| / |<k|Gamma|l>|. The phase of f is carried by the drive.
inline double drive_amplitude(const DeviceParams& p, const ChargeBasisConfig& cfg, cplx coupling,
                              const TransitionPair& pair) {
  const double per_unit = std::abs(effective_rabi(p, cfg, 1.0, pair));
  return std::abs(coupling) / per_unit;
}

// ---------------------------------------------------------------------------
// Capacitances
// ---------------------------------------------------------------------------

struct Capacitances {
  double C_I = 0.0;
  double C_plus = 1.0;
  double C_minus = 1.0;
  double C_g_plus = 0.0;
  double C_g_minus = 0.0;
  // Normalizer of the coupling capacitance C' = (C_S+ C_S- - C_I^2) / C_P.
  // Defaults to C_I, which reproduces the two-island capacitance-matrix
  // inverse.
  std::optional<double> C_P;
};

struct ChargingEnergies {
  double E_C_plus = 0.0;
  double E_C_minus = 0.0;
  double E_I = 0.0;
};

/// E_C+- = e^2 / 2C'_+-, E_I = -e^2 / C' with e = 1, where
/// C_S+- = C_I + C_+- + C_g+- and C'_+- = (C_S+ C_S- - C_I^2) / C_S-+.
inline ChargingEnergies derived_capacitances(const Capacitances& c) {
  for (double v : {c.C_plus, c.C_minus}) {
    if (!(v > 0.0)) throw parameter_error("derived_capacitances: island capacitances must be positive");
  }
  for (double v : {c.C_I, c.C_g_plus, c.C_g_minus}) {
    if (v < 0.0) throw parameter_error("derived_capacitances: capacitances must be non-negative");
  }
  const double s_plus = c.C_I + c.C_plus + c.C_g_plus;
  const double s_minus = c.C_I + c.C_minus + c.C_g_minus;
  const double det = s_plus * s_minus - c.C_I * c.C_I;
  if (!(det > 0.0)) throw parameter_error("derived_capacitances: non-positive effective capacitance");
  const double c_eff_plus = det / s_minus;
  const double c_eff_minus = det / s_plus;
  const double c_p = c.C_P.value_or(c.C_I);
  const double e_i = c_p == 0.0 ? 0.0 : -1.0 / (det / c_p);
  return {0.5 / c_eff_plus, 0.5 / c_eff_minus, e_i};
}

}  // namespace holo::device
