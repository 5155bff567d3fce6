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

// Tripod and Lambda families, the orange-slice and geodesic-triangle loops, and
// the three holonomic gates built on them:
//
//   U_P = exp(i g1 |1><1|)        orange slice on the Lambda family, g1 = -phi1
//   U_B = exp(i g2 sigma_y)       geodesic triangle on the tripod, g2 = phi2
//   U_2 = exp(i g3 |10><10|)      orange slice on the two-tripod family
//
// with sigma_y = i(|0><1| - |1><0|). Single-tripod basis order is
// |0>, |1>, |a>, |e>.

#pragma once

#include <set>
#include <string>
#include <utility>

#include "holo/core.hpp"
#include "holo/tqda.hpp"

namespace holo::gates {

using tqda::HamiltonianFamily;
using tqda::ParameterPoint;
using tqda::ParameterSchedule;

namespace level {
inline constexpr Index zero = 0;
inline constexpr Index one = 1;
inline constexpr Index aux = 2;
inline constexpr Index excited = 3;
inline constexpr Index count = 4;

inline const char* name(Index k) {
  static constexpr const char* names[] = {"0", "1", "a", "e"};
  return (k >= 0 && k < count) ? names[k] : "?";
}
}  // namespace level

// ---------------------------------------------------------------------------
// Hamiltonians
// ---------------------------------------------------------------------------

struct TripodParams {
  double omega = 1.0;
  double theta = 0.0;
  double phi = 0.0;

  void validate() const {
    if (!(omega > 0.0)) throw argument_error("TripodParams: omega must be positive");
    if (theta < -1e-12 || theta > kPi + 1e-12) throw argument_error("TripodParams: theta outside [0, pi]");
  }
};

/// Lambda-type H0^P: Omega1 [-sin(theta/2) e^{i phi} |e><1| + cos(theta/2) |e><a|] + h.c.
/// Level |0> is decoupled.
inline HermitianOperator lambda_hamiltonian(const TripodParams& p) {
  p.validate();
  Matrix h = Matrix::Zero(4, 4);
  h(level::excited, level::one) = -p.omega * std::sin(p.theta / 2) * std::exp(I * p.phi);
  h(level::excited, level::aux) = p.omega * std::cos(p.theta / 2);
  h(level::one, level::excited) = std::conj(h(level::excited, level::one));
  h(level::aux, level::excited) = std::conj(h(level::excited, level::aux));
  return HermitianOperator(std::move(h));
}

/// Dark state cos(theta/2)|1> + sin(theta/2) e^{i phi}|a> of lambda_hamiltonian.
inline Vector lambda_dark_state(const TripodParams& p) {
  Vector d = Vector::Zero(4);
  d(level::one) = std::cos(p.theta / 2);
  d(level::aux) = std::sin(p.theta / 2) * std::exp(I * p.phi);
  return d;
}

/// Resonant tripod f_e0|e><0| + f_e1|e><1| + f_ea|e><a| + h.c. with
/// f_e0 = Omega sin(theta) cos(phi), f_e1 = Omega sin(theta) sin(phi),
/// f_ea = Omega cos(theta).
inline HermitianOperator tripod_hamiltonian(const TripodParams& p) {
  p.validate();
  Matrix h = Matrix::Zero(4, 4);
  h(level::excited, level::zero) = p.omega * std::sin(p.theta) * std::cos(p.phi);
  h(level::excited, level::one) = p.omega * std::sin(p.theta) * std::sin(p.phi);
  h(level::excited, level::aux) = p.omega * std::cos(p.theta);
  for (Index k : {level::zero, level::one, level::aux}) h(k, level::excited) = h(level::excited, k);
  return HermitianOperator(std::move(h));
}

/// Columns (|D1>, |D2>) with
/// D1 = cos(theta)(cos(phi)|0> + sin(phi)|1>) - sin(theta)|a>,
/// D2 = cos(phi)|1> - sin(phi)|0>.
inline Matrix dark_frame(const TripodParams& p) {
  Matrix d = Matrix::Zero(4, 2);
  d(level::zero, 0) = std::cos(p.theta) * std::cos(p.phi);
  d(level::one, 0) = std::cos(p.theta) * std::sin(p.phi);
  d(level::aux, 0) = -std::sin(p.theta);
  d(level::zero, 1) = -std::sin(p.phi);
  d(level::one, 1) = std::cos(p.phi);
  return d;
}

inline TripodParams sphere_params(double omega, const ParameterPoint& p) { return {omega, p[0], p[1]}; }

inline HamiltonianFamily lambda_family(double omega) {
  HamiltonianFamily f;
  f.dim = 4;
  f.build = [omega](const ParameterPoint& p) { return lambda_hamiltonian(sphere_params(omega, p)); };
  f.gradient = [omega](const ParameterPoint& p) {
    const double th = p[0], ph = p[1];
    Matrix dth = Matrix::Zero(4, 4), dph = Matrix::Zero(4, 4);
    dth(level::excited, level::one) = -0.5 * omega * std::cos(th / 2) * std::exp(I * ph);
    dth(level::excited, level::aux) = -0.5 * omega * std::sin(th / 2);
    dph(level::excited, level::one) = -I * omega * std::sin(th / 2) * std::exp(I * ph);
    for (Matrix* m : {&dth, &dph}) {
      (*m)(level::one, level::excited) = std::conj((*m)(level::excited, level::one));
      (*m)(level::aux, level::excited) = std::conj((*m)(level::excited, level::aux));
    }
    return std::vector<HermitianOperator>{HermitianOperator(dth), HermitianOperator(dph)};
  };
  return f;
}

inline HamiltonianFamily tripod_family(double omega) {
  HamiltonianFamily f;
  f.dim = 4;
  f.build = [omega](const ParameterPoint& p) { return tripod_hamiltonian(sphere_params(omega, p)); };
  f.gradient = [omega](const ParameterPoint& p) {
    const double th = p[0], ph = p[1];
    Matrix dth = Matrix::Zero(4, 4), dph = Matrix::Zero(4, 4);
    dth(level::excited, level::zero) = omega * std::cos(th) * std::cos(ph);
    dth(level::excited, level::one) = omega * std::cos(th) * std::sin(ph);
    dth(level::excited, level::aux) = -omega * std::sin(th);
    dph(level::excited, level::zero) = -omega * std::sin(th) * std::sin(ph);
    dph(level::excited, level::one) = omega * std::sin(th) * std::cos(ph);
    for (Matrix* m : {&dth, &dph}) {
      for (Index k : {level::zero, level::one, level::aux}) (*m)(k, level::excited) = (*m)(level::excited, k);
    }
    return std::vector<HermitianOperator>{HermitianOperator(dth), HermitianOperator(dph)};
  };
  return f;
}

// Two-tripod product basis: index = 4 * left + right.
namespace two_qubit {
inline constexpr Index index(Index left, Index right) { return 4 * left + right; }
inline constexpr Index s00 = index(level::zero, level::zero);
inline constexpr Index s01 = index(level::zero, level::one);
inline constexpr Index s10 = index(level::one, level::zero);
inline constexpr Index s11 = index(level::one, level::one);
inline constexpr Index s_ae = index(level::aux, level::excited);
inline constexpr Index s_ea = index(level::excited, level::aux);
inline const std::vector<Index> computational{s00, s01, s10, s11};
}  // namespace two_qubit

/// H0^2 = J1 |ea><10| + J2 |ea><ae| + h.c. with J1 = -Omega sin(theta/2) e^{i phi},
/// J2 = Omega cos(theta/2): the Lambda structure with |10> as "1", |ae> as "a"
/// and |ea> as "e". The other 13 product states are decoupled.
inline HamiltonianFamily two_qubit_family(double omega) {
  if (!(omega > 0.0)) throw argument_error("two_qubit_family: omega must be positive");
  auto embed = [](const Matrix& lambda4) {
    using namespace two_qubit;
    const std::array<Index, 3> map_from{level::one, level::aux, level::excited};
    const std::array<Index, 3> map_to{s10, s_ae, s_ea};
    Matrix h = Matrix::Zero(16, 16);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) h(map_to[i], map_to[j]) = lambda4(map_from[i], map_from[j]);
    return h;
  };
  const HamiltonianFamily lambda = lambda_family(omega);
  HamiltonianFamily f;
  f.dim = 16;
  f.build = [lambda, embed](const ParameterPoint& p) { return HermitianOperator(embed(lambda(p).matrix())); };
  f.gradient = [lambda, embed](const ParameterPoint& p) {
    std::vector<HermitianOperator> out;
    for (const auto& g : lambda.gradient(p)) out.emplace_back(embed(g.matrix()));
    return out;
  };
  return f;
}

inline Vector two_qubit_dark_state(const TripodParams& p) {
  Vector d = Vector::Zero(16);
  d(two_qubit::s10) = std::cos(p.theta / 2);
  d(two_qubit::s_ae) = std::sin(p.theta / 2) * std::exp(I * p.phi);
  return d;
}

// ---------------------------------------------------------------------------
// Loop schedules on the (theta, phi) sphere
// ---------------------------------------------------------------------------

enum class SegmentKind { theta_sweep, phi_sweep };

/// One coordinate-aligned leg: the swept angle moves start -> end while the
/// other angle stays at `fixed`; `fraction` is its share of the total time.
struct PathSegment {
  SegmentKind kind = SegmentKind::theta_sweep;
  double start = 0.0;
  double end = 0.0;
  double fixed = 0.0;
  double fraction = 1.0;

  double theta_at(double progress) const {
    return kind == SegmentKind::theta_sweep ? start + (end - start) * progress : fixed;
  }
  double phi_at(double progress) const {
    return kind == SegmentKind::phi_sweep ? start + (end - start) * progress : fixed;
  }
};

/// Progress profile inside a segment. `smooth` is sin^2(pi s / 2), whose rate
/// vanishes at both ends so consecutive legs join with zero angular velocity.
enum class Ramp { smooth, linear };

inline const char* ramp_name(Ramp r) { return r == Ramp::smooth ? "sin2" : "linear"; }

/// Unit vector of a (theta, phi) point; the poles collapse all phi values.
inline Eigen::Vector3d sphere_point(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

class LoopSchedule {
 public:
  LoopSchedule(std::vector<PathSegment> segments, double total_time, Ramp ramp = Ramp::smooth)
      : segments_(std::move(segments)), total_time_(total_time), ramp_(ramp) {
    if (!(total_time_ > 0.0)) throw argument_error("LoopSchedule: total time must be positive");
    if (segments_.empty()) throw argument_error("LoopSchedule: no segments");
    double sum = 0.0;
    for (const auto& s : segments_) {
      if (!(s.fraction > 0.0)) throw argument_error("LoopSchedule: segment duration fraction must be positive");
      sum += s.fraction;
    }
    for (std::size_t k = 0; k + 1 < segments_.size(); ++k) {
      const auto& a = segments_[k];
      const auto& b = segments_[k + 1];
      if (std::abs(a.theta_at(1) - b.theta_at(0)) > 1e-12 || std::abs(a.phi_at(1) - b.phi_at(0)) > 1e-12) {
        throw argument_error(holo::detail::concat("LoopSchedule: segments ", k, " and ", k + 1, " do not join"));
      }
    }
    boundaries_.push_back(0.0);
    double acc = 0.0;
    for (auto& s : segments_) {
      s.fraction /= sum;
      acc += s.fraction;
      boundaries_.push_back(acc * total_time_);
    }
    boundaries_.back() = total_time_;
    if ((sphere_point(segments_.front().theta_at(0), segments_.front().phi_at(0)) -
         sphere_point(segments_.back().theta_at(1), segments_.back().phi_at(1)))
            .norm() > 1e-12) {
      throw argument_error("LoopSchedule: path does not close on the sphere");
    }
  }

  const std::vector<PathSegment>& segments() const { return segments_; }
  double total_time() const { return total_time_; }
  Ramp ramp() const { return ramp_; }
  double segment_begin(std::size_t k) const { return boundaries_.at(k); }
  double segment_end(std::size_t k) const { return boundaries_.at(k + 1); }

  struct Location {
    std::size_t segment = 0;
    double s = 0.0;  // local time fraction in [0, 1]
  };

  Location locate(double t) const {
    t = std::clamp(t, 0.0, total_time_);
    std::size_t k = 0;
    while (k + 1 < segments_.size() && t > boundaries_[k + 1]) ++k;
    const double len = boundaries_[k + 1] - boundaries_[k];
    return {k, std::clamp((t - boundaries_[k]) / len, 0.0, 1.0)};
  }

  double progress(double s) const {
    if (ramp_ == Ramp::linear) return s;
    const double x = std::sin(kPi * s / 2);
    return x * x;
  }
  double progress_rate(double s) const { return ramp_ == Ramp::linear ? 1.0 : 0.5 * kPi * std::sin(kPi * s); }

  ParameterPoint point(double t) const {
    const auto loc = locate(t);
    const auto& seg = segments_[loc.segment];
    const double p = progress(loc.s);
    return {seg.theta_at(p), seg.phi_at(p)};
  }

  RealVector velocity(double t) const {
    const auto loc = locate(t);
    const auto& seg = segments_[loc.segment];
    const double len = boundaries_[loc.segment + 1] - boundaries_[loc.segment];
    const double rate = (seg.end - seg.start) * progress_rate(loc.s) / len;
    RealVector v = RealVector::Zero(2);
    v(seg.kind == SegmentKind::theta_sweep ? 0 : 1) = rate;
    return v;
  }

  /// Engine-facing schedule: flagged closed, joints exposed as breakpoints.
  ParameterSchedule schedule() const {
    ParameterSchedule s;
    s.path = [self = *this](double t) { return self.point(t); };
    s.velocity = [self = *this](double t) { return self.velocity(t); };
    s.horizon = total_time_;
    s.closed = true;
    s.breakpoints.assign(boundaries_.begin() + 1, boundaries_.end() - 1);
    return s;
  }

 private:
  std::vector<PathSegment> segments_;
  double total_time_;
  Ramp ramp_;
  std::vector<double> boundaries_;
};

namespace detail {
inline std::vector<double> shares(const std::vector<double>& fractions, std::size_t n) {
  if (fractions.empty()) return std::vector<double>(n, 1.0);
  if (fractions.size() != n) throw argument_error(holo::detail::concat("expected ", n, " duration fractions"));
  return fractions;
}
inline void check_opening(double angle, const char* who) {
  if (!(angle > -2 * kPi && angle < 2 * kPi)) throw argument_error(std::string(who) + ": opening angle outside (-2pi, 2pi)");
}
}  // namespace detail

/// Orange slice: theta 0 -> pi at phi = 0, phi 0 -> phi1 at theta = pi, theta
/// pi -> 0 at phi = phi1. Closes at the north pole, where H is phi-independent.
inline LoopSchedule orange_slice_schedule(double phi1, double total_time, const std::vector<double>& fractions = {},
                                          Ramp ramp = Ramp::smooth) {
  detail::check_opening(phi1, "orange_slice_schedule");
  if (!(total_time > 0.0)) throw argument_error("orange_slice_schedule: T must be positive");
  const auto f = detail::shares(fractions, 3);
  return LoopSchedule({{SegmentKind::theta_sweep, 0.0, kPi, 0.0, f[0]},
                       {SegmentKind::phi_sweep, 0.0, phi1, kPi, f[1]},
                       {SegmentKind::theta_sweep, kPi, 0.0, phi1, f[2]}},
                      total_time, ramp);
}

/// Geodesic triangle: theta 0 -> pi/2 at phi = 0, phi 0 -> phi2 on the equator,
/// theta pi/2 -> 0 at phi = phi2, then phi phi2 -> 0 at the pole.
inline LoopSchedule geodesic_triangle_schedule(double phi2, double total_time,
                                               const std::vector<double>& fractions = {},
                                               Ramp ramp = Ramp::smooth) {
  detail::check_opening(phi2, "geodesic_triangle_schedule");
  if (!(total_time > 0.0)) throw argument_error("geodesic_triangle_schedule: T must be positive");
  const auto f = detail::shares(fractions, 4);
  return LoopSchedule({{SegmentKind::theta_sweep, 0.0, kPi / 2, 0.0, f[0]},
                       {SegmentKind::phi_sweep, 0.0, phi2, kPi / 2, f[1]},
                       {SegmentKind::theta_sweep, kPi / 2, 0.0, phi2, f[2]},
                       {SegmentKind::phi_sweep, phi2, 0.0, 0.0, f[3]}},
                      total_time, ramp);
}

/// Signed enclosed area, the line integral of (1 - cos theta) dphi. Legs are
/// coordinate-aligned, so each phi leg contributes exactly
/// (1 - cos theta_fixed) * (phi_end - phi_start).
inline double solid_angle(const LoopSchedule& loop) {
  double area = 0.0;
  for (const auto& s : loop.segments()) {
    if (s.kind == SegmentKind::phi_sweep) area += (1.0 - std::cos(s.fixed)) * (s.end - s.start);
  }
  return area;
}

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

enum class DriveMode { tqda, bare };

inline const char* mode_name(DriveMode m) { return m == DriveMode::tqda ? "tqda" : "bare"; }

struct GateReport {
  Matrix qubit_unitary;  // block of the full propagator on the computational states
  Matrix target;
  double gamma = 0.0;     // radians
  double fidelity = 0.0;  // |tr(target^dag U)| / d
  // Max population outside the instantaneous computational (dark) subspace,
  // over all computational inputs and all integrator steps. At loop completion
  // that subspace is the computational basis itself.
  double leakage = 0.0;
  double final_leakage = 0.0;
  double spectator_deviation = 0.0;  // max ||U(t)|s> - |s>|| over spectator states
  int steps = 0;
};

/// Integrator steps used when the caller does not choose: enough that the
/// midpoint rule stays well below the 1e-6 gate tolerances at any T.
inline int default_grid(double total_time) {
  return std::max(4000, static_cast<int>(std::ceil(200.0 * total_time)));
}

struct GateSetup {
  HamiltonianFamily family;
  LoopSchedule loop;
  std::vector<Index> computational;
  std::vector<Index> spectators;
  Matrix target;
  // Orthonormal columns spanning the instantaneous computational subspace,
  // in the order of `computational`.
  std::function<Matrix(const ParameterPoint&)> computational_frame;
  std::function<double(const Matrix&)> phase;
};

inline GateReport run_gate(const GateSetup& setup, int grid, DriveMode mode) {
  if (grid < 2) throw argument_error("run_gate: grid must be >= 2");
  const ParameterSchedule sched = setup.loop.schedule();
  const TimeDependentGenerator gen =
      mode == DriveMode::tqda ? tqda::transitionless_generator(setup.family, sched, grid)
                              : tqda::bare_generator(setup.family, sched);
  GateReport report;
  report.steps = grid;
  const Index d = static_cast<Index>(setup.computational.size());
  auto leakage_at = [&](double t, const Matrix& u) {
    const Matrix frame = setup.computational_frame(sched.at(t));
    double worst = 0.0;
    for (Index k : setup.computational) {
      const Vector psi = u.col(k);
      worst = std::max(worst, std::max(0.0, 1.0 - (frame.adjoint() * psi).squaredNorm()));
    }
    return worst;
  };
  const UnitaryMatrix u = propagator(gen, grid, [&](double t, const Matrix& ut) {
    report.leakage = std::max(report.leakage, leakage_at(t, ut));
    for (Index s : setup.spectators) {
      Vector e = Vector::Zero(ut.rows());
      e(s) = 1.0;
      report.spectator_deviation = std::max(report.spectator_deviation, (ut.col(s) - e).norm());
    }
  });
  report.final_leakage = leakage_at(sched.horizon, u.matrix());
  report.qubit_unitary.resize(d, d);
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < d; ++c)
      report.qubit_unitary(r, c) = u.matrix()(setup.computational[static_cast<std::size_t>(r)],
                                              setup.computational[static_cast<std::size_t>(c)]);
  report.target = setup.target;
  report.fidelity =
      std::clamp(std::abs((setup.target.adjoint() * report.qubit_unitary).trace()) / static_cast<double>(d), 0.0, 1.0);
  report.gamma = setup.phase(report.qubit_unitary);
  return report;
}

inline Matrix phase_gate_target(double phi1) {
  Matrix t = Matrix::Identity(2, 2);
  t(1, 1) = std::exp(-I * phi1);
  return t;
}

/// exp(i angle sigma_y) with sigma_y = i(|0><1| - |1><0|): |0> -> cos|0> + sin|1>.
inline Matrix rotation_gate_target(double angle) {
  Matrix t(2, 2);
  t << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return t;
}

inline GateSetup up_setup(double phi1, double total_time) {
  GateSetup s{lambda_family(1.0), orange_slice_schedule(phi1, total_time), {level::zero, level::one}, {},
              phase_gate_target(phi1), {}, {}};
  s.computational_frame = [](const ParameterPoint& p) {
    Matrix f = Matrix::Zero(4, 2);
    f(level::zero, 0) = 1.0;
    f.col(1) = lambda_dark_state({1.0, p[0], p[1]});
    return f;
  };
  s.phase = [](const Matrix& u) { return wrap_angle(std::arg(u(1, 1)) - std::arg(u(0, 0))); };
  return s;
}

inline GateSetup ub_setup(double phi2, double total_time) {
  GateSetup s{tripod_family(1.0), geodesic_triangle_schedule(phi2, total_time), {level::zero, level::one}, {},
              rotation_gate_target(phi2), {}, {}};
  s.computational_frame = [](const ParameterPoint& p) { return dark_frame({1.0, p[0], p[1]}); };
  // Rotation angle after removing the global phase sqrt(det U).
  s.phase = [](const Matrix& u) {
    const cplx g = std::exp(-0.5 * I * std::arg(u.determinant()));
    const Matrix r = g * u;
    return std::atan2(0.5 * (r(1, 0) - r(0, 1)).real(), 0.5 * (r(0, 0) + r(1, 1)).real());
  };
  return s;
}

inline GateSetup u2_setup(double phi1, double total_time) {
  using namespace two_qubit;
  Matrix target = Matrix::Identity(4, 4);
  target(2, 2) = std::exp(-I * phi1);
  GateSetup s{two_qubit_family(1.0), orange_slice_schedule(phi1, total_time), computational, {s00, s01, s11},
              target, {}, {}};
  s.computational_frame = [](const ParameterPoint& p) {
    Matrix f = Matrix::Zero(16, 4);
    f(s00, 0) = 1.0;
    f(s01, 1) = 1.0;
    f.col(2) = two_qubit_dark_state({1.0, p[0], p[1]});
    f(s11, 3) = 1.0;
    return f;
  };
  s.phase = [](const Matrix& u) { return wrap_angle(std::arg(u(2, 2)) - std::arg(u(0, 0))); };
  return s;
}

/// Phase gate diag(1, e^{-i phi1}) on span{|0>, |1>} via the orange slice.
inline GateReport gate_UP(double phi1, double total_time, int grid, DriveMode mode = DriveMode::tqda) {
  return run_gate(up_setup(phi1, total_time), grid, mode);
}

/// Rotation exp(i phi2 sigma_y) on span{|0>, |1>} via the geodesic triangle.
inline GateReport gate_UB(double phi2, double total_time, int grid, DriveMode mode = DriveMode::tqda) {
  return run_gate(ub_setup(phi2, total_time), grid, mode);
}

/// Controlled phase diag(1, 1, e^{-i phi1}, 1) on {|00>, |01>, |10>, |11>}.
inline GateReport gate_U2(double phi1, double total_time, int grid, DriveMode mode = DriveMode::tqda) {
  return run_gate(u2_setup(phi1, total_time), grid, mode);
}

// ---------------------------------------------------------------------------
// Coupling structure per step
// ---------------------------------------------------------------------------

using LevelPair = std::pair<Index, Index>;  // (low, high) basis indices

inline LevelPair make_pair(Index a, Index b) { return {std::min(a, b), std::max(a, b)}; }

enum class Scheme { orange_slice, geodesic_triangle };

/// Transitions each step of a scheme is allowed to use. The geodesic
/// triangle's final phi return at the pole belongs to its third step.
inline std::set<LevelPair> allowed_transitions(Scheme scheme, std::size_t step) {
  using namespace level;
  if (scheme == Scheme::orange_slice) {
    if (step == 1) return {make_pair(excited, one)};
    if (step == 0 || step == 2) return {make_pair(excited, one), make_pair(excited, aux), make_pair(one, aux)};
  } else {
    if (step == 0) return {make_pair(excited, zero), make_pair(excited, aux), make_pair(zero, aux)};
    if (step == 1) return {make_pair(excited, zero), make_pair(excited, one), make_pair(zero, one)};
    if (step == 2 || step == 3) {
      return {make_pair(excited, zero), make_pair(excited, one), make_pair(excited, aux), make_pair(zero, aux),
              make_pair(one, aux)};
    }
  }
  throw argument_error(holo::detail::concat("allowed_transitions: no step ", step, " in this scheme"));
}

struct StructureReport {
  std::size_t step = 0;
  std::set<LevelPair> found;
  std::set<LevelPair> allowed;
  bool pass = false;
};

inline std::string describe(const std::set<LevelPair>& pairs) {
  std::string out;
  for (const auto& [a, b] : pairs) {
    if (!out.empty()) out += ' ';
    out += std::string(level::name(b)) + "-" + level::name(a);
  }
  return out;
}

/// Off-diagonal couplings of H0 + H1 over 32 interior times of one leg: the
/// pairs whose magnitude ever exceeds 1e-8 ||H||_F.
inline StructureReport structure_check(const LoopSchedule& loop, const HamiltonianFamily& family, std::size_t step,
                                       const std::set<LevelPair>& allowed) {
  if (step >= loop.segments().size()) throw argument_error("structure_check: step index out of range");
  const ParameterSchedule sched = loop.schedule();
  const double t0 = loop.segment_begin(step), t1 = loop.segment_end(step);
  StructureReport report{step, {}, allowed, false};
  constexpr int samples = 32;
  for (int k = 0; k < samples; ++k) {
    const double t = t0 + (t1 - t0) * (k + 0.5) / samples;
    const Matrix h = (family(sched.at(t)) + tqda::counterdiabatic_from_gradient(family, sched, t)).matrix();
    const double threshold = 1e-8 * h.norm();
    for (Index i = 0; i < h.rows(); ++i)
      for (Index j = i + 1; j < h.cols(); ++j)
        if (std::abs(h(i, j)) > threshold) report.found.insert({i, j});
  }
  report.pass = std::includes(allowed.begin(), allowed.end(), report.found.begin(), report.found.end());
  return report;
}

}  // namespace holo::gates
