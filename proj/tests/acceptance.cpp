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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "holo/device.hpp"
#include "holo/gates.hpp"
#include "holo/harness.hpp"
#include "holo/tqda.hpp"
#include "support.hpp"

namespace {

using namespace holo;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = true;
  std::ostringstream notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes << " [" << what << "]";
    }
  }
};

Matrix qubit_block(const Matrix& m) { return m.topLeftCorner(2, 2); }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

Verdict tqda_exactness() {
  Verdict v;
  double worst_f = 1.0, worst_leak = 0.0;
  for (double phi : {kPi / 6, kPi / 2, kPi}) {
    for (double t : {1.0, 5.0, 25.0}) {
      const auto r = gates::gate_UP(phi, t, gates::default_grid(t));
      worst_f = std::min(worst_f, r.fidelity);
      worst_leak = std::max(worst_leak, r.leakage);
    }
  }
  v.check(worst_f >= 1.0 - 1e-6, "fidelity");
  v.check(worst_leak <= 1e-6, "leakage");
  v.notes << " min fidelity 1-" << sci(1.0 - worst_f) << ", max leakage " << sci(worst_leak);
  return v;
}

Verdict phase_values() {
  Verdict v;
  double worst_gamma = 0.0;
  for (double phi : {kPi / 6, kPi / 2, kPi}) {
    worst_gamma = std::max(worst_gamma, angular_distance(gates::gate_UP(phi, 5.0, 4000).gamma, -phi));
  }
  v.check(worst_gamma <= 1e-6, "gamma1");

  double worst_ub = 1.0, worst_ref = 0.0;
  const auto tripod = gates::tripod_family(1.0);
  for (double phi : {kPi / 6, kPi / 4, kPi / 2}) {
    const auto r = gates::gate_UB(phi, 5.0, gates::default_grid(5.0));
    worst_ub = std::min(worst_ub, r.fidelity);
    v.check(std::abs(r.gamma - phi) <= 1e-6, "gamma2");
    v.check(std::abs(gates::solid_angle(gates::geodesic_triangle_schedule(phi, 1.0)) - phi) <= 1e-12, "excess");
    const auto loop = gates::geodesic_triangle_schedule(phi, 1.0).schedule();
    const auto f0 = tqda::spectral_frame(tripod(loop.at(0.0)));
    const Index n = f0.block_near(0.0);
    const Matrix ref = qubit_block(tqda::embed_block(f0, n, tqda::adiabatic_reference(tripod, loop, 4000, n).c.matrix()));
    worst_ref = std::max(worst_ref, (ref - gates::rotation_gate_target(phi)).norm());
  }
  v.check(worst_ub >= 1.0 - 1e-6, "UB fidelity");
  v.check(worst_ref <= 1e-5, "reference");

  const auto u2 = gates::gate_U2(kPi / 2, 5.0, gates::default_grid(5.0));
  v.check(u2.fidelity >= 1.0 - 1e-6, "U2 fidelity");
  v.check(u2.spectator_deviation <= 1e-10, "spectators");
  v.notes << " |gamma1 err| " << sci(worst_gamma) << ", UB 1-F " << sci(1.0 - worst_ub) << ", reference err "
          << sci(worst_ref) << ", U2 1-F " << sci(1.0 - u2.fidelity) << ", spectator " << sci(u2.spectator_deviation);
  return v;
}

double holonomy_gap(const tqda::HamiltonianFamily& family, const tqda::ParameterSchedule& loop, double near) {
  const auto f0 = tqda::spectral_frame(family(loop.at(0.0)));
  const Index n = f0.block_near(near);
  const Matrix h = tqda::embed_block(f0, n, tqda::holonomy(family, loop, 4000, n).c.matrix());
  const Matrix r = tqda::embed_block(f0, n, tqda::adiabatic_reference(family, loop, 4000, n).c.matrix());
  return (h - r).norm();
}

Verdict oracle_equivalence() {
  Verdict v;
  double worst = 0.0;
  worst = std::max(worst, holonomy_gap(gates::lambda_family(1.0), gates::orange_slice_schedule(kPi / 2, 1.0).schedule(), 0.0));
  worst = std::max(worst, holonomy_gap(gates::tripod_family(1.0), gates::geodesic_triangle_schedule(kPi / 4, 1.0).schedule(), 0.0));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = testing::random_family(1000 + s);
    worst = std::max(worst, holonomy_gap(r.family(), testing::fourier_loop(2000 + s, 1.0), 0.3));
  }
  v.check(worst <= 1e-5, "holonomy vs reference");
  v.notes << " max ||C - C_ref|| " << sci(worst) << " over 22 loops";
  return v;
}

Verdict adiabatic_limit() {
  Verdict v;
  std::vector<double> inf;
  for (double t : {10.0, 100.0, 1000.0}) {
    inf.push_back(1.0 - gates::gate_UP(kPi / 2, t, gates::default_grid(t), gates::DriveMode::bare).fidelity);
  }
  v.check(inf[1] <= inf[0] && inf[2] <= inf[1], "monotone");
  v.check(inf[2] < 1e-2, "T=1000");
  v.notes << " infidelity " << sci(inf[0]) << " / " << sci(inf[1]) << " / " << sci(inf[2]);
  return v;
}

Verdict structure() {
  Verdict v;
  int steps = 0;
  for (double phi : {kPi / 4, kPi / 2}) {
    const auto os = gates::orange_slice_schedule(phi, 3.0);
    for (std::size_t k = 0; k < os.segments().size(); ++k, ++steps) {
      const auto r = gates::structure_check(os, gates::lambda_family(1.0), k,
                                            gates::allowed_transitions(gates::Scheme::orange_slice, k));
      v.check(r.pass, "orange step " + std::to_string(k + 1) + ": " + gates::describe(r.found));
    }
    const auto gt = gates::geodesic_triangle_schedule(phi, 4.0);
    for (std::size_t k = 0; k < gt.segments().size(); ++k, ++steps) {
      const auto r = gates::structure_check(gt, gates::tripod_family(1.0), k,
                                            gates::allowed_transitions(gates::Scheme::geodesic_triangle, k));
      v.check(r.pass, "triangle step " + std::to_string(k + 1) + ": " + gates::describe(r.found));
    }
  }
  v.notes << " " << steps << " steps checked";
  return v;
}

Verdict driven_equation() {
  Verdict v;
  const double r = testing::schrodinger_residual(gates::tripod_family(1.0),
                                         gates::geodesic_triangle_schedule(kPi / 4, 5.0).schedule(), 4000);
  v.check(r <= 1e-5, "residual");
  v.notes << " max residual " << sci(r);
  return v;
}

Verdict device_model() {
  using namespace holo::device;
  Verdict v;
  auto sym = [](double e_j, double e_i) {
    DeviceParams p;
    p.E_J0_plus = p.E_J0_minus = e_j;
    p.E_I = e_i;
    return p;
  };

  double conv = 0.0;
  for (const auto& p : {sym(50.0, 0.0), sym(50.0, 1.0), sym(100.0, 0.5)}) {
    const int n = converged_truncation(p);
    const RealVector a = solve_spectrum(p, {n}, false).energies.head(6);
    const RealVector b = solve_spectrum(p, {n + 2}, false).energies.head(6);
    for (Index k = 0; k < 6; ++k) conv = std::max(conv, std::abs(a(k) - b(k)) / std::max(1.0, std::abs(a(k))));
  }
  v.check(conv < 1e-8, "truncation");

  DeviceParams u;
  u.E_C_plus = 1.4;
  u.E_J0_plus = 40.0;
  u.E_J0_minus = 65.0;
  u.n_g_plus = 0.17;
  u.n_g_minus = 0.41;
  const auto ia = testing::island_levels(u.E_C_plus, u.E_J0_plus, u.n_g_plus, 12);
  const auto ib = testing::island_levels(u.E_C_minus, u.E_J0_minus, u.n_g_minus, 12);
  std::vector<double> sums;
  for (double x : ia)
    for (double y : ib) sums.push_back(x + y);
  std::sort(sums.begin(), sums.end());
  const RealVector e = solve_spectrum(u, {12}, false).energies;
  double tensor = 0.0;
  for (Index k = 0; k < 10; ++k) tensor = std::max(tensor, std::abs(e(k) - sums[static_cast<std::size_t>(k)]));
  v.check(tensor <= 1e-9, "tensor sum");

  DeviceParams g = sym(50.0, 0.6);
  g.n_g_plus = 0.3;
  g.n_g_minus = -0.2;
  DeviceParams g1 = g;
  g1.n_g_plus += 1.0;
  g1.n_g_minus += 1.0;
  const double period = (solve_spectrum(g, {12}, false).energies.head(6) - solve_spectrum(g1, {12}, false).energies.head(6))
                            .cwiseAbs()
                            .maxCoeff();
  v.check(period <= 1e-9, "periodicity");

  std::vector<double> e_i;
  for (int k = 0; k <= 20; ++k) e_i.push_back(0.05 * k);
  bool monotone = true;
  double gap0 = 0.0, gap1 = 0.0;
  try {
    const auto t = spectrum_sweep(sym(50.0, 0.0), SweepVariable::E_I, e_i, {converged_truncation(sym(50.0, 1.0))});
    for (std::size_t j = 1; j < e_i.size(); ++j) {
      monotone = monotone && (t.labeled[j][2] - t.labeled[j][1]) >= (t.labeled[j - 1][2] - t.labeled[j - 1][1]);
    }
    gap0 = t.labeled.front()[2] - t.labeled.front()[1];
    gap1 = t.labeled.back()[2] - t.labeled.back()[1];
  } catch (const std::exception& ex) {
    monotone = false;
    v.notes << " sweep error: " << ex.what();
  }
  v.check(monotone && gap1 > gap0, "splitting");

  DeviceParams w = sym(100.0, 0.5);
  const auto pairs = default_pairs();
  double trans = 0.0;
  for (double ejp : {60.0, 100.0, 140.0}) {
    DeviceParams p = w;
    p.E_J0_plus = ejp;
    const auto lib = transition_elements(w, SweepVariable::E_J_plus, {ejp}, {12}, pairs).moduli.front();
    const auto ref = testing::dense_transition_moduli(p, 12, pairs);
    const double scale = *std::max_element(ref.begin(), ref.end());
    for (std::size_t k = 0; k < pairs.size(); ++k) trans = std::max(trans, std::abs(lib[k] - ref[k]) / scale);
  }
  v.check(trans <= 1e-8, "transitions");

  v.notes << " truncation " << sci(conv) << ", tensor " << sci(tensor) << ", periodicity " << sci(period)
          << ", 1-a gap " << sci(gap0) << " -> " << sci(gap1) << ", transitions " << sci(trans);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  namespace h = holo::harness;
  Verdict v;
  const std::vector<std::string> configs{
      R"({"schema": "holo.experiment/1", "name": "det-gate", "kind": "gate-ub",
          "gate": {"phi": 0.7853981633974483, "T": [1, 2, 4, 8]}})",
      R"({"schema": "holo.experiment/1", "name": "det-spectrum", "kind": "tct-spectrum",
          "device": {"E_J0_plus": 50, "E_J0_minus": 50, "N": 8,
                     "sweep": {"variable": "E_I", "values": {"start": 0.1, "stop": 1, "points": 8}}}})",
      R"({"schema": "holo.experiment/1", "name": "det-transitions", "kind": "tct-transitions",
          "device": {"E_J0_minus": 100, "E_I": 0.5, "N": 8, "sweep": {"values": [40, 80, 120]}}})"};
  const fs::path root = fs::temp_directory_path() / ("holo_acceptance_" + std::to_string(::getpid()));
  for (const auto& text : configs) {
    const auto c = h::parse_config(h::json::parse(text));
    std::vector<std::string> csvs;
    for (auto [tag, par] : {std::pair{"a", 1}, std::pair{"b", 1}, std::pair{"c", 8}}) {
      const auto r = h::run(c, {(root / tag).string(), par, std::nullopt});
      csvs.push_back(slurp(r.csv));
    }
    v.check(!csvs[0].empty() && csvs[0] == csvs[1] && csvs[0] == csvs[2], c.name);
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  v.notes << " " << configs.size() << " sweeps, runs at parallelism 1, 1, 8";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    Verdict (*fn)();
  };
  const Criterion criteria[] = {{1, "transitionless transport is exact at any speed", tqda_exactness},
                                {2, "geometric phase values", phase_values},
                                {3, "holonomy matches the adiabatic reference", oracle_equivalence},
                                {4, "bare drive approaches the adiabatic limit", adiabatic_limit},
                                {5, "coupling structure per step", structure},
                                {6, "transported propagator solves the driven equation", driven_equation},
                                {7, "device model", device_model},
                                {8, "deterministic CSV output", determinism}};
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.notes << " exception: " << e.what();
    }
    failed += !v.pass;
    std::cout << "criterion " << c.id << ": " << (v.pass ? "PASS" : "FAIL") << " - " << c.title << ";"
              << v.notes.str() << std::endl;
  }
  std::cout << (failed ? "acceptance: FAIL" : "acceptance: PASS") << " (" << 8 - failed << "/8)" << std::endl;
  return failed ? 1 : 0;
}
