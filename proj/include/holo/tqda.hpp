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

// Transitionless driving for degenerate eigenspaces.
//
// Given a parametrized family H0(lambda) and a schedule lambda(t), this header
// tracks the degenerate eigenspaces along the path, computes the matrix-valued
// connection A_kl = <phi_k|d/dt phi_l> inside each block, builds the
// counterdiabatic term
//
//   H1 = i sum_{n,k} ( |d phi_k^n><phi_k^n| - sum_l A^n_kl |phi_k^n><phi_l^n| )
//
// and extracts the holonomy C^n = T exp(-int A^n dt) of a closed loop. The
// dynamical phase exp(-i int E_n dt) is never removed here; callers either use
// zero-energy blocks or strip it themselves.

#pragma once

#include <array>
#include <initializer_list>
#include <memory>
#include <optional>

#include "holo/core.hpp"

namespace holo::tqda {

// ---------------------------------------------------------------------------
// Parameters and schedules
// ---------------------------------------------------------------------------

/// Point in control-parameter space. Sphere families use (theta, phi, ...).
struct ParameterPoint {
  RealVector coords;

  ParameterPoint() = default;
  explicit ParameterPoint(RealVector c) : coords(std::move(c)) {}
  ParameterPoint(std::initializer_list<double> values) : coords(static_cast<Index>(values.size())) {
    Index k = 0;
    for (double v : values) coords(k++) = v;
  }

  double operator[](Index i) const { return coords(i); }
  Index size() const { return coords.size(); }
};

/// Path lambda(t) on [0, horizon] together with its exact time derivative.
struct ParameterSchedule {
  std::function<ParameterPoint(double)> path;
  std::function<RealVector(double)> velocity;
  double horizon = 0.0;
  bool closed = false;
  // Interior times where the path is C1 but its acceleration may jump.
  // Finite differences never straddle these.
  std::vector<double> breakpoints;

  ParameterPoint at(double t) const { return path(t); }
  RealVector rate(double t) const { return velocity(t); }

  static ParameterSchedule constant(ParameterPoint p, double horizon) {
    const Index n = p.size();
    return {[p = std::move(p)](double) { return p; }, [n](double) { return RealVector::Zero(n); }, horizon, true,
            {}};
  }
};

/// Same image, new timing: the result at time s is sched(warp(s)), where warp
/// maps [0, new_horizon] monotonically onto [0, sched.horizon].
inline ParameterSchedule reparameterize(const ParameterSchedule& sched, std::function<double(double)> warp,
                                        std::function<double(double)> warp_rate, double new_horizon) {
  ParameterSchedule out;
  out.horizon = new_horizon;
  out.closed = sched.closed;
  out.path = [sched, warp](double s) { return sched.path(warp(s)); };
  out.velocity = [sched, warp, warp_rate](double s) { return RealVector(sched.velocity(warp(s)) * warp_rate(s)); };
  for (double b : sched.breakpoints) {
    double lo = 0.0, hi = new_horizon;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * new_horizon; ++it) {
      const double mid = 0.5 * (lo + hi);
      (warp(mid) < b ? lo : hi) = mid;
    }
    out.breakpoints.push_back(0.5 * (lo + hi));
  }
  return out;
}

/// Largest deviation between the declared velocity and a fourth-order central
/// difference of the path, over `samples` interior times away from breakpoints.
inline double velocity_defect(const ParameterSchedule& sched, int samples = 64) {
  const double h = 1e-4 * sched.horizon;
  double worst = 0.0;
  for (int k = 1; k <= samples; ++k) {
    const double t = sched.horizon * (k - 0.5) / samples;
    if (t - 2 * h < 0.0 || t + 2 * h > sched.horizon) continue;
    bool near_break = false;
    for (double b : sched.breakpoints) near_break = near_break || std::abs(b - t) <= 2 * h;
    if (near_break) continue;
    const RealVector fd = (sched.path(t - 2 * h).coords - 8.0 * sched.path(t - h).coords +
                           8.0 * sched.path(t + h).coords - sched.path(t + 2 * h).coords) /
                          (12.0 * h);
    worst = std::max(worst, (fd - sched.velocity(t)).norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Hamiltonian families
// ---------------------------------------------------------------------------

struct HamiltonianFamily {
  std::function<HermitianOperator(const ParameterPoint&)> build;
  Index dim = 0;
  // Optional: dH/dlambda_j for every coordinate j.
  std::function<std::vector<HermitianOperator>(const ParameterPoint&)> gradient;

  HermitianOperator operator()(const ParameterPoint& p) const { return build(p); }
  bool has_gradient() const { return static_cast<bool>(gradient); }

  /// dH/dt = sum_j dH/dlambda_j * dlambda_j/dt. Requires a gradient.
  Matrix rate_of_change(const ParameterPoint& p, const RealVector& velocity) const {
    const auto grads = gradient(p);
    if (static_cast<Index>(grads.size()) != velocity.size()) {
      throw dimension_error("HamiltonianFamily: gradient/velocity size mismatch");
    }
    Matrix out = Matrix::Zero(dim, dim);
    for (std::size_t j = 0; j < grads.size(); ++j) out += velocity(static_cast<Index>(j)) * grads[j].matrix();
    return out;
  }
};

/// Max Frobenius deviation of the analytic gradient from central differences.
inline double gradient_defect(const HamiltonianFamily& family, const ParameterPoint& p, double h = 1e-5) {
  if (!family.has_gradient()) throw argument_error("gradient_defect: family has no analytic gradient");
  const auto grads = family.gradient(p);
  double worst = 0.0;
  for (Index j = 0; j < p.size(); ++j) {
    ParameterPoint plus = p, minus = p;
    plus.coords(j) += h;
    minus.coords(j) -= h;
    const Matrix fd = (family(plus).matrix() - family(minus).matrix()) / (2.0 * h);
    worst = std::max(worst, (fd - grads[static_cast<std::size_t>(j)].matrix()).norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Spectral frames
// ---------------------------------------------------------------------------

/// Contiguous run of eigenvalue indices sharing one (degenerate) energy.
struct Block {
  Index start = 0;
  Index size = 0;
  double energy = 0.0;
};

/// Two eigenvalues share a block iff they differ by at most this much.
inline double degeneracy_tolerance(const HermitianOperator& h) { return 1e-8 * std::max(1.0, h.matrix().norm()); }

inline std::vector<Block> partition_blocks(const RealVector& energies, double tol) {
  std::vector<Block> blocks;
  Index start = 0;
  for (Index k = 1; k <= energies.size(); ++k) {
    if (k == energies.size() || energies(k) - energies(k - 1) > tol) {
      blocks.push_back({start, k - start, energies.segment(start, k - start).mean()});
      start = k;
    }
  }
  return blocks;
}

struct SpectralFrame {
  RealVector energies;
  UnitaryMatrix vectors;
  std::vector<Block> blocks;

  Index block_count() const { return static_cast<Index>(blocks.size()); }
  const Block& block(Index n) const {
    if (n < 0 || n >= block_count()) throw argument_error("SpectralFrame: block index out of range");
    return blocks[static_cast<std::size_t>(n)];
  }
  Matrix block_vectors(Index n) const { return vectors.matrix().middleCols(block(n).start, block(n).size); }
  Matrix projector(Index n) const {
    const Matrix v = block_vectors(n);
    return v * v.adjoint();
  }
  std::vector<Index> block_sizes() const {
    std::vector<Index> s;
    for (const auto& b : blocks) s.push_back(b.size);
    return s;
  }
  /// Index of the block whose energy is closest to `energy`.
  Index block_near(double energy) const {
    Index best = 0;
    for (Index n = 1; n < block_count(); ++n) {
      if (std::abs(block(n).energy - energy) < std::abs(block(best).energy - energy)) best = n;
    }
    return best;
  }
};

/// Eigenframe straight from the solver (no gauge fixing).
inline SpectralFrame spectral_frame(const HermitianOperator& h) {
  auto eig = eig_hermitian(h);
  auto blocks = partition_blocks(eig.energies, degeneracy_tolerance(h));
  return {std::move(eig.energies), std::move(eig.vectors), std::move(blocks)};
}

namespace detail {

// Rotates each block of `raw` by the unitary closest to making its overlap
// with the same block of `reference` Hermitian positive.
inline SpectralFrame align_to(SpectralFrame raw, const Matrix& reference) {
  Matrix v = raw.vectors.matrix();
  for (const auto& b : raw.blocks) {
    const Matrix cols = v.middleCols(b.start, b.size);
    const Matrix overlap = cols.adjoint() * reference.middleCols(b.start, b.size);
    v.middleCols(b.start, b.size) = cols * polar_unitary(overlap);
  }
  raw.vectors = UnitaryMatrix(std::move(v), 1e-9);
  return raw;
}

inline void check_same_structure(const SpectralFrame& prev, const SpectralFrame& next, double t) {
  if (prev.block_sizes() != next.block_sizes()) {
    std::string sizes_prev, sizes_next;
    for (auto s : prev.block_sizes()) sizes_prev += std::to_string(s) + " ";
    for (auto s : next.block_sizes()) sizes_next += std::to_string(s) + " ";
    throw numerical_error(holo::detail::concat("spectral_path: degeneracy structure changed at t = ", t,
                                               " (block sizes [", sizes_prev, "] -> [", sizes_next, "])"));
  }
}

}  // namespace detail

/// Thrown when the block partition changes along a path.
struct path_error : numerical_error {
  double time;
  path_error(const std::string& what, double t) : numerical_error(what), time(t) {}
};

/// Frames on the uniform grid t_j = j T / grid, j = 0..grid.
struct SpectralPath {
  std::vector<double> times;
  std::vector<SpectralFrame> frames;
  double dt = 0.0;

  std::size_t size() const { return frames.size(); }
  const SpectralFrame& operator[](std::size_t j) const { return frames[j]; }
};

/// Gauge-smoothed eigenframes along a schedule. Each frame's blocks are
/// rotated so that their overlap with the previous frame is Hermitian positive
/// (closest block-unitary). Frame 0 keeps the solver's gauge unless
/// `initial_gauge` is supplied, in which case frame 0 is aligned to it.
inline SpectralPath spectral_path(const HamiltonianFamily& family, const ParameterSchedule& sched, int grid,
                                  const std::optional<Matrix>& initial_gauge = std::nullopt) {
  if (grid < 2) throw argument_error("spectral_path: grid must be >= 2");
  if (!(sched.horizon > 0.0)) throw argument_error("spectral_path: schedule horizon must be positive");
  SpectralPath out;
  out.dt = sched.horizon / grid;
  out.times.reserve(static_cast<std::size_t>(grid) + 1);
  out.frames.reserve(static_cast<std::size_t>(grid) + 1);
  for (int j = 0; j <= grid; ++j) {
    const double t = j == grid ? sched.horizon : j * out.dt;
    SpectralFrame raw = spectral_frame(family(sched.at(t)));
    if (j == 0) {
      out.frames.push_back(initial_gauge ? detail::align_to(std::move(raw), *initial_gauge) : std::move(raw));
    } else {
      try {
        detail::check_same_structure(out.frames.back(), raw, t);
      } catch (const numerical_error& e) {
        throw path_error(e.what(), t);
      }
      out.frames.push_back(detail::align_to(std::move(raw), out.frames.back().vectors.matrix()));
    }
    out.times.push_back(t);
  }
  return out;
}

/// Frames on the same grid, with every block aligned to a caller-provided
/// reference basis at that point (for example analytic dark states). When the
/// reference columns span the block exactly, the frame reproduces them.
inline SpectralPath gauge_fixed_path(const HamiltonianFamily& family, const ParameterSchedule& sched, int grid,
                                     const std::function<Matrix(const ParameterPoint&)>& reference) {
  if (grid < 2) throw argument_error("gauge_fixed_path: grid must be >= 2");
  SpectralPath out;
  out.dt = sched.horizon / grid;
  for (int j = 0; j <= grid; ++j) {
    const double t = j == grid ? sched.horizon : j * out.dt;
    const ParameterPoint p = sched.at(t);
    SpectralFrame raw = spectral_frame(family(p));
    if (!out.frames.empty()) {
      try {
        detail::check_same_structure(out.frames.back(), raw, t);
      } catch (const numerical_error& e) {
        throw path_error(e.what(), t);
      }
    }
    out.frames.push_back(detail::align_to(std::move(raw), reference(p)));
    out.times.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite differences on the frame grid
// ---------------------------------------------------------------------------

struct Stencil {
  std::array<std::size_t, 5> index{};
  std::array<double, 5> weight{};  // already divided by dt
  int terms = 0;
};

/// Fourth-order derivative stencil at grid point j: five consecutive points,
/// as centered as the smooth piece around t_j allows. Stencils never reach
/// across a breakpoint; a grid point sitting on one belongs to the piece that
/// follows it. Pieces shorter than five points get the highest order they
/// can hold.
inline Stencil derivative_stencil(std::size_t j, const std::vector<double>& times,
                                  const std::vector<double>& breakpoints, double dt) {
  const std::size_t last = times.size() - 1;
  if (last < 1) throw argument_error("derivative_stencil: need at least two grid points");
  const double eps = 1e-9 * dt;
  double left = times.front(), right = times.back();
  for (double b : breakpoints) {
    if (b <= times[j] + eps) left = std::max(left, b);
    else right = std::min(right, b);
  }
  std::size_t lo = j, hi = j;
  while (lo > 0 && times[lo - 1] >= left - eps) --lo;
  while (hi < last && times[hi + 1] <= right + eps) ++hi;
  if (hi == lo) {
    hi = j < last ? j + 1 : j;
    lo = hi - 1;
  }
  const std::size_t m = std::min<std::size_t>(5, hi - lo + 1);
  std::size_t first = j >= lo + m / 2 ? j - m / 2 : lo;
  first = std::min(first, hi + 1 - m);

  // Weights of the Lagrange interpolant's derivative at t_j.
  Stencil s;
  s.terms = static_cast<int>(m);
  const double x0 = static_cast<double>(j) - static_cast<double>(first);
  for (std::size_t k = 0; k < m; ++k) {
    double w = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (l == k) continue;
      double term = 1.0 / (static_cast<double>(k) - static_cast<double>(l));
      for (std::size_t q = 0; q < m; ++q) {
        if (q != k && q != l) term *= (x0 - static_cast<double>(q)) / (static_cast<double>(k) - static_cast<double>(q));
      }
      w += term;
    }
    s.index[k] = first + k;
    s.weight[k] = w / dt;
  }
  return s;
}

/// d/dt of the columns of block n at grid point j.
inline Matrix block_derivative(const SpectralPath& path, const ParameterSchedule& sched, Index n, std::size_t j) {
  const Stencil s = derivative_stencil(j, path.times, sched.breakpoints, path.dt);
  Matrix d = s.weight[0] * path[s.index[0]].block_vectors(n);
  for (int k = 1; k < s.terms; ++k) d += s.weight[static_cast<std::size_t>(k)] * path[s.index[static_cast<std::size_t>(k)]].block_vectors(n);
  return d;
}

// ---------------------------------------------------------------------------
// Connection and counterdiabatic term
// ---------------------------------------------------------------------------

/// A^n(t_j) on the frame grid; anti-Hermitian by construction.
struct ConnectionBlock {
  Index block = 0;
  std::vector<double> times;
  std::vector<Matrix> values;
};

inline ConnectionBlock connection(const SpectralPath& path, const ParameterSchedule& sched, Index n) {
  ConnectionBlock out{n, path.times, {}};
  out.values.reserve(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) {
    const Matrix a = path[j].block_vectors(n).adjoint() * block_derivative(path, sched, n, j);
    out.values.push_back(0.5 * (a - a.adjoint()));
  }
  return out;
}

/// H1 at grid point j from finite differences of the smoothed frames:
/// i sum_n (1 - P_n) dV_n V_n^dag, which is the block-sum form of the
/// counterdiabatic term and independent of the gauge inside each block.
inline HermitianOperator counterdiabatic_from_frames(const SpectralPath& path, const ParameterSchedule& sched,
                                                     std::size_t j) {
  const SpectralFrame& f = path[j];
  const Index d = f.vectors.dim();
  Matrix h1 = Matrix::Zero(d, d);
  for (Index n = 0; n < f.block_count(); ++n) {
    const Matrix v = f.block_vectors(n);
    const Matrix dv = block_derivative(path, sched, n, j);
    const Matrix a = v.adjoint() * dv;
    h1 += I * (dv * v.adjoint() - v * a * v.adjoint());
  }
  return HermitianOperator(Matrix(0.5 * (h1 + h1.adjoint())));
}

/// H1 at time t from first-order perturbation theory,
/// i sum_{m != n} P_m dH/dt P_n / (E_n - E_m). Exact for any t; needs the
/// family's analytic gradient.
inline HermitianOperator counterdiabatic_from_gradient(const HamiltonianFamily& family,
                                                       const ParameterSchedule& sched, double t) {
  if (!family.has_gradient()) throw argument_error("counterdiabatic_from_gradient: family has no gradient");
  const ParameterPoint p = sched.at(t);
  const RealVector v = sched.rate(t);
  const Index d = family.dim;
  if (v.norm() == 0.0) return HermitianOperator::zero(d);
  const SpectralFrame f = spectral_frame(family(p));
  const Matrix& vecs = f.vectors.matrix();
  const Matrix dh = vecs.adjoint() * family.rate_of_change(p, v) * vecs;
  Matrix h1 = Matrix::Zero(d, d);
  for (const auto& bm : f.blocks) {
    for (const auto& bn : f.blocks) {
      if (bm.start == bn.start) continue;
      const double gap = bn.energy - bm.energy;
      h1.block(bm.start, bn.start, bm.size, bn.size) = (I / gap) * dh.block(bm.start, bn.start, bm.size, bn.size);
    }
  }
  return HermitianOperator(vecs * h1 * vecs.adjoint(), 1e-8);
}

/// H1 at grid point j: perturbative route when the family has a gradient,
/// frame differences otherwise.
inline HermitianOperator counterdiabatic(const HamiltonianFamily& family, const ParameterSchedule& sched,
                                         const SpectralPath& path, std::size_t j) {
  if (family.has_gradient()) return counterdiabatic_from_gradient(family, sched, path.times[j]);
  return counterdiabatic_from_frames(path, sched, j);
}

enum class CounterdiabaticRoute { automatic, frames, gradient };

/// H0 alone along the schedule.
inline TimeDependentGenerator bare_generator(const HamiltonianFamily& family, const ParameterSchedule& sched) {
  return {[family, sched](double t) { return family(sched.at(t)); }, sched.horizon, family.dim};
}

/// t -> H0(lambda(t)) + H1(t). On the gradient route H1 is evaluated exactly
/// at every t; on the frame route it is tabulated on the grid and linearly
/// interpolated.
inline TimeDependentGenerator transitionless_generator(const HamiltonianFamily& family,
                                                       const ParameterSchedule& sched, int grid,
                                                       CounterdiabaticRoute route = CounterdiabaticRoute::automatic) {
  const bool use_gradient = route == CounterdiabaticRoute::gradient ||
                            (route == CounterdiabaticRoute::automatic && family.has_gradient());
  if (use_gradient) {
    if (!family.has_gradient()) throw argument_error("transitionless_generator: gradient route needs a gradient");
    // Validate the degeneracy structure once on the grid.
    (void)spectral_path(family, sched, grid);
    return {[family, sched](double t) {
              return family(sched.at(t)) + counterdiabatic_from_gradient(family, sched, t);
            },
            sched.horizon, family.dim};
  }
  const SpectralPath path = spectral_path(family, sched, grid);
  auto table = std::make_shared<std::vector<Matrix>>();
  table->reserve(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) table->push_back(counterdiabatic_from_frames(path, sched, j).matrix());
  const double dt = path.dt;
  return {[family, sched, table, dt](double t) {
            const double x = std::clamp(t / dt, 0.0, static_cast<double>(table->size() - 1));
            const std::size_t j = std::min(static_cast<std::size_t>(x), table->size() - 2);
            const double w = x - static_cast<double>(j);
            return family(sched.at(t)) + HermitianOperator((1.0 - w) * (*table)[j] + w * (*table)[j + 1]);
          },
          sched.horizon, family.dim};
}

// ---------------------------------------------------------------------------
// Holonomy
// ---------------------------------------------------------------------------

struct HolonomyBlock {
  Index block = 0;
  UnitaryMatrix c;
};

namespace detail {

inline void require_loop(const HamiltonianFamily& family, const ParameterSchedule& loop, const char* who) {
  if (!loop.closed) throw argument_error(std::string(who) + ": schedule is not flagged as a closed loop");
  const Matrix h0 = family(loop.at(0.0)).matrix();
  const Matrix h1 = family(loop.at(loop.horizon)).matrix();
  if ((h1 - h0).norm() > 1e-9 * std::max(1.0, h0.norm())) {
    throw argument_error(std::string(who) + ": H(lambda(T)) differs from H(lambda(0))");
  }
}

// exp(-A dt) for anti-Hermitian A.
inline Matrix transport_step(const Matrix& a, double dt) {
  return step_propagator(HermitianOperator(Matrix(-I * a), 1e-6), dt).matrix();
}

}  // namespace detail

/// C^n(t_j) = T exp(-int_0^{t_j} A^n dt) on the grid, trapezoidal in A.
inline std::vector<Matrix> transport(const ConnectionBlock& conn, double dt) {
  const Index m = conn.values.front().rows();
  std::vector<Matrix> c{Matrix::Identity(m, m)};
  c.reserve(conn.values.size());
  for (std::size_t j = 0; j + 1 < conn.values.size(); ++j) {
    c.push_back(detail::transport_step(0.5 * (conn.values[j] + conn.values[j + 1]), dt) * c.back());
  }
  return c;
}

/// Holonomy of block n around a closed loop, expressed in the basis of the
/// t = 0 frame: C = (V_n(0)^dag V_n(T)) * T exp(-int A^n dt).
inline HolonomyBlock holonomy(const HamiltonianFamily& family, const ParameterSchedule& loop, int grid, Index n,
                              const std::optional<Matrix>& initial_gauge = std::nullopt) {
  detail::require_loop(family, loop, "holonomy");
  const SpectralPath path = spectral_path(family, loop, grid, initial_gauge);
  const auto c = transport(connection(path, loop, n), path.dt);
  const Matrix closing = path.frames.front().block_vectors(n).adjoint() * path.frames.back().block_vectors(n);
  return {n, UnitaryMatrix(closing * c.back(), 1e-9)};
}

/// Independent holonomy from raw solver frames: discrete parallel transport by
/// repeated polar projection, W_{j+1} = V_{j+1} polar(V_{j+1}^dag W_j), then
/// C = V_n(0)^dag W_N. Depends only on the block subspaces, not on any gauge.
inline HolonomyBlock adiabatic_reference(const HamiltonianFamily& family, const ParameterSchedule& loop, int grid,
                                         Index n) {
  detail::require_loop(family, loop, "adiabatic_reference");
  if (grid < 2) throw argument_error("adiabatic_reference: grid must be >= 2");
  const double dt = loop.horizon / grid;
  const SpectralFrame first = spectral_frame(family(loop.at(0.0)));
  const Matrix v0 = first.block_vectors(n);
  Matrix w = v0;
  for (int j = 1; j <= grid; ++j) {
    const double t = j == grid ? loop.horizon : j * dt;
    const SpectralFrame f = spectral_frame(family(loop.at(t)));
    if (f.block_sizes() != first.block_sizes()) {
      throw path_error(holo::detail::concat("adiabatic_reference: degeneracy structure changed at t = ", t), t);
    }
    const Matrix v = f.block_vectors(n);
    w = v * polar_unitary(v.adjoint() * w);
  }
  return {n, UnitaryMatrix(v0.adjoint() * w, 1e-9)};
}

/// Block holonomy as an operator on the full space: V_n(0) C V_n(0)^dag.
inline Matrix embed_block(const SpectralFrame& frame0, Index n, const Matrix& c) {
  const Matrix v = frame0.block_vectors(n);
  return v * c * v.adjoint();
}

/// Frame transport on the grid: U(t_j) = sum_n V_n(t_j) C^n(t_j)
/// e^{-i int E_n dt} V_n(0)^dag with C^n the partial transports of each block.
/// This is the evolution the transitionless Hamiltonian generates exactly.
inline std::vector<Matrix> transported_propagator(const HamiltonianFamily& family, const ParameterSchedule& sched,
                                                  int grid) {
  const SpectralPath path = spectral_path(family, sched, grid);
  const Index d = family.dim;
  std::vector<Matrix> u(path.size(), Matrix::Zero(d, d));
  for (Index n = 0; n < path[0].block_count(); ++n) {
    const auto c = transport(connection(path, sched, n), path.dt);
    const Matrix v0_adj = path[0].block_vectors(n).adjoint();
    double phase = 0.0;
    for (std::size_t j = 0; j < path.size(); ++j) {
      if (j > 0) phase += 0.5 * (path[j - 1].block(n).energy + path[j].block(n).energy) * path.dt;
      u[j] += std::exp(-I * phase) * path[j].block_vectors(n) * c[j] * v0_adj;
    }
  }
  return u;
}

}  // namespace holo::tqda
