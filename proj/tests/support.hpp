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

// Independent reference computations shared by the unit tests and the
// acceptance gate. Nothing here calls the library routine it checks.

#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <random>

#include "holo/device.hpp"
#include "holo/gates.hpp"
#include "holo/tqda.hpp"

namespace holo::testing {

inline Matrix random_hermitian(Index dim, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
  return scale * 0.5 * (a + a.adjoint());
}

/// exp(iK) for Hermitian K, via its eigenbasis.
inline Matrix expi(const Matrix& k) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(k);
  const Vector phases = (I * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// H(l) = W(l) diag(E) W(l)^dag with W(l) = exp(i (l0 G0 + l1 G1)) on six
/// levels; E has an exactly two-fold degenerate level at index 1..2, so the
/// block is protected along any path.
struct RandomFamily {
  Matrix g0, g1;
  RealVector energies;

  Matrix w(const tqda::ParameterPoint& p) const { return expi(p[0] * g0 + p[1] * g1); }

  tqda::HamiltonianFamily family() const {
    tqda::HamiltonianFamily f;
    f.dim = 6;
    f.build = [self = *this](const tqda::ParameterPoint& p) {
      const Matrix w = self.w(p);
      return HermitianOperator(w * self.energies.cast<cplx>().asDiagonal() * w.adjoint(), 1e-9);
    };
    return f;
  }
};

inline RandomFamily random_family(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RandomFamily r{random_hermitian(6, rng, 0.5), random_hermitian(6, rng, 0.5), RealVector(6)};
  r.energies << -2.0, 0.3, 0.3, 1.4, 2.7, 4.1;
  return r;
}

/// Closed two-parameter loop l(t) = c + sum_k a_k cos(2 pi k t / T) + b_k sin(...)
/// with its exact velocity.
inline tqda::ParameterSchedule fourier_loop(std::uint64_t seed, double horizon, int harmonics = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  Eigen::MatrixXd a(2, harmonics), b(2, harmonics);
  Eigen::Vector2d c(u(rng), u(rng));
  for (int k = 0; k < harmonics; ++k) {
    for (int d = 0; d < 2; ++d) {
      a(d, k) = u(rng) / (k + 1);
      b(d, k) = u(rng) / (k + 1);
    }
  }
  tqda::ParameterSchedule s;
  s.horizon = horizon;
  s.closed = true;
  s.path = [=](double t) {
    RealVector x = c;
    for (int k = 0; k < harmonics; ++k) {
      const double w = 2.0 * kPi * (k + 1) / horizon;
      x += a.col(k) * std::cos(w * t) + b.col(k) * std::sin(w * t);
    }
    return tqda::ParameterPoint(x);
  };
  s.velocity = [=](double t) {
    RealVector v = RealVector::Zero(2);
    for (int k = 0; k < harmonics; ++k) {
      const double w = 2.0 * kPi * (k + 1) / horizon;
      v += w * (-a.col(k) * std::sin(w * t) + b.col(k) * std::cos(w * t));
    }
    return v;
  };
  return s;
}

/// Holonomy of the random family's degenerate block around `loop` as an
/// operator on the full space, from the analytic gauge V(t) = W(l(t)) e_B:
/// RK4 on dc/dt = -A c with A = V^dag dV/dt, returning V(0) c(T) V(0)^dag.
inline Matrix random_family_holonomy(const RandomFamily& r, const tqda::ParameterSchedule& loop, int steps) {
  auto frame = [&](double t) { return Matrix(r.w(loop.at(t)).middleCols(1, 2)); };
  auto conn = [&](double t) {
    const double h = 1e-5 * loop.horizon;
    const Matrix dv = (frame(t + h) - frame(t - h)) / (2.0 * h);
    return Matrix(frame(t).adjoint() * dv);
  };
  const double dt = loop.horizon / steps;
  Matrix c = Matrix::Identity(2, 2);
  for (int j = 0; j < steps; ++j) {
    const double t = j * dt;
    const Matrix a0 = conn(t), am = conn(t + 0.5 * dt), a1 = conn(t + dt);
    const Matrix k1 = -a0 * c;
    const Matrix k2 = -am * (c + 0.5 * dt * k1);
    const Matrix k3 = -am * (c + 0.5 * dt * k2);
    const Matrix k4 = -a1 * (c + dt * k3);
    c += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const Matrix v0 = frame(0.0);
  return v0 * c * v0.adjoint();
}

/// Fourth-order derivative of a grid-sampled matrix function. Stencils never
/// straddle `breaks`: central where five points fit in one smooth piece,
/// one-sided five-point otherwise.
inline Matrix grid_derivative(const std::vector<Matrix>& f, const std::vector<double>& breaks, double dt,
                              std::size_t j) {
  const long last = static_cast<long>(f.size()) - 1;
  const long jj = static_cast<long>(j);
  auto smooth = [&](long a, long b) {
    if (a < 0 || b > last) return false;
    for (double br : breaks)
      if (br > a * dt + 1e-9 * dt && br < b * dt - 1e-9 * dt) return false;
    return true;
  };
  auto at = [&](long k) -> const Matrix& { return f[static_cast<std::size_t>(k)]; };
  if (smooth(jj - 2, jj + 2)) return (at(jj - 2) - 8.0 * at(jj - 1) + 8.0 * at(jj + 1) - at(jj + 2)) / (12.0 * dt);
  if (smooth(jj, jj + 4)) {
    return (-25.0 * at(jj) + 48.0 * at(jj + 1) - 36.0 * at(jj + 2) + 16.0 * at(jj + 3) - 3.0 * at(jj + 4)) / (12.0 * dt);
  }
  if (smooth(jj - 4, jj)) {
    return (25.0 * at(jj) - 48.0 * at(jj - 1) + 36.0 * at(jj - 2) - 16.0 * at(jj - 3) + 3.0 * at(jj - 4)) / (12.0 * dt);
  }
  throw argument_error("grid_derivative: grid too coarse around a breakpoint");
}

/// max_j || i dU/dt - H(t_j) U(t_j) ||_F for the frame-transport propagator
/// and the transitionless Hamiltonian.
inline double schrodinger_residual(const tqda::HamiltonianFamily& family, const tqda::ParameterSchedule& sched, int grid) {
  const auto u = tqda::transported_propagator(family, sched, grid);
  const auto gen = tqda::transitionless_generator(family, sched, grid);
  const double dt = sched.horizon / grid;
  double worst = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double t = j == u.size() - 1 ? sched.horizon : j * dt;
    const Matrix r = I * grid_derivative(u, sched.breakpoints, dt, j) - gen.evaluate(t).matrix() * u[j];
    worst = std::max(worst, r.norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Device oracles
// ---------------------------------------------------------------------------

/// Dense charge-basis Hamiltonian written element by element, with the index
/// map (n+ + N)(2N+1) + (n- + N).
inline Matrix tct_dense(const device::DeviceParams& p, int n_max) {
  const int d1 = 2 * n_max + 1;
  const Index d = static_cast<Index>(d1) * d1;
  auto idx = [&](int np, int nm) { return static_cast<Index>(np + n_max) * d1 + (nm + n_max); };
  Matrix h = Matrix::Zero(d, d);
  const double ejp = p.E_J0_plus * std::cos(kPi * p.f_plus);
  const double ejm = p.E_J0_minus * std::cos(kPi * p.f_minus);
  const cplx wp = std::exp(-2.0 * kPi * I * p.f_plus);
  const cplx wm = std::exp(-2.0 * kPi * I * p.f_minus);
  for (int np = -n_max; np <= n_max; ++np) {
    for (int nm = -n_max; nm <= n_max; ++nm) {
      const Index k = idx(np, nm);
      h(k, k) = 4.0 * p.E_C_plus * (np - p.n_g_plus) * (np - p.n_g_plus) +
                4.0 * p.E_C_minus * (nm - p.n_g_minus) * (nm - p.n_g_minus) +
                4.0 * p.E_I * (np - p.n_g_plus) * (nm - p.n_g_minus);
      // <n+1| cos(g - 2 pi f) |n> = e^{-2 pi i f} / 2
      if (np + 1 <= n_max) {
        h(idx(np + 1, nm), k) += -0.5 * ejp * wp;
        h(k, idx(np + 1, nm)) += -0.5 * ejp * std::conj(wp);
      }
      if (nm + 1 <= n_max) {
        h(idx(np, nm + 1), k) += -0.5 * ejm * wm;
        h(k, idx(np, nm + 1)) += -0.5 * ejm * std::conj(wm);
      }
    }
  }
  return h;
}

/// Gamma = E_J-^0 cos(pi f-) sin(g- - 2 pi f-), element by element.
inline Matrix gamma_dense(const device::DeviceParams& p, int n_max) {
  const int d1 = 2 * n_max + 1;
  const Index d = static_cast<Index>(d1) * d1;
  auto idx = [&](int np, int nm) { return static_cast<Index>(np + n_max) * d1 + (nm + n_max); };
  Matrix g = Matrix::Zero(d, d);
  const double ejm = p.E_J0_minus * std::cos(kPi * p.f_minus);
  const cplx wm = std::exp(-2.0 * kPi * I * p.f_minus);
  for (int np = -n_max; np <= n_max; ++np) {
    for (int nm = -n_max; nm + 1 <= n_max; ++nm) {
      // sin x = (e^{ix} - e^{-ix}) / 2i
      g(idx(np, nm + 1), idx(np, nm)) += ejm * wm / (2.0 * I);
      g(idx(np, nm), idx(np, nm + 1)) += -ejm * std::conj(wm) / (2.0 * I);
    }
  }
  return g;
}

/// Lowest eigenpairs from a general complex eigensolver, sorted ascending.
struct DenseSpectrum {
  std::vector<double> energies;
  Matrix vectors;
};

inline DenseSpectrum dense_spectrum(const Matrix& h, Index keep) {
  Eigen::ComplexEigenSolver<Matrix> es(h);
  std::vector<Index> order(static_cast<std::size_t>(h.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return es.eigenvalues()(a).real() < es.eigenvalues()(b).real(); });
  DenseSpectrum out{{}, Matrix(h.rows(), keep)};
  for (Index k = 0; k < keep; ++k) {
    out.energies.push_back(es.eigenvalues()(order[static_cast<std::size_t>(k)]).real());
    out.vectors.col(k) = es.eigenvectors().col(order[static_cast<std::size_t>(k)]).normalized();
  }
  return out;
}

/// |<k|Gamma|l>| / E_C- for ascending labels 0, 1, a, e -> ranks 0..3.
inline std::vector<double> dense_transition_moduli(const device::DeviceParams& p, int n_max,
                                                   const std::vector<device::TransitionPair>& pairs) {
  const DenseSpectrum s = dense_spectrum(tct_dense(p, n_max), 4);
  const Matrix g = gamma_dense(p, n_max) / p.E_C_minus;
  std::vector<double> out;
  for (const auto& [k, l] : pairs) {
    out.push_back(std::abs(s.vectors.col(static_cast<Index>(k)).dot(g * s.vectors.col(static_cast<Index>(l)))));
  }
  return out;
}

/// Charging energies from the inverse of the 2x2 capacitance matrix
/// [[C_S+, -C_I], [-C_I, C_S-]] with e = 1. The coupling carries the sign
/// convention E_I = -(C^-1)_{+-}.
inline device::ChargingEnergies capacitance_oracle(const device::Capacitances& c) {
  Eigen::Matrix2d m;
  m << c.C_I + c.C_plus + c.C_g_plus, -c.C_I, -c.C_I, c.C_I + c.C_minus + c.C_g_minus;
  const Eigen::Matrix2d inv = m.inverse();
  return {0.5 * inv(0, 0), 0.5 * inv(1, 1), -inv(0, 1)};
}

/// Eigenvalues of one island, 4 E_C (n - n_g)^2 - E_J cos(g), written out.
inline std::vector<double> island_levels(double e_c, double e_j, double n_g, int n_max) {
  const int d = 2 * n_max + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double n = k - n_max - n_g;
    h(k, k) = 4.0 * e_c * n * n;
    if (k + 1 < d) h(k, k + 1) = h(k + 1, k) = -0.5 * e_j;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + d};
}

}  // namespace holo::testing
