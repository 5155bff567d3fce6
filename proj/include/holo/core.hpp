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

// Complex state/operator algebra and unitary time stepping.
// Units: hbar = 1, energies in the caller's Rabi scale, time in inverse energy.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace holo {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct argument_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
// Numerical failures that depend on the data rather than on the call shape.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename... Parts>
std::string concat(Parts&&... parts) {
  std::ostringstream os;
  os.precision(17);
  (os << ... << parts);
  return os.str();
}

inline double hermitian_defect(const Matrix& m) {
  return (m - m.adjoint()).norm();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Value types
// ---------------------------------------------------------------------------

/// Square complex matrix equal to its adjoint. Entries are symmetrized on
/// construction, so the stored matrix is Hermitian to the last bit.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  /// Throws precondition_error when ||M - M^dag||_F exceeds
  /// tol * max(1, ||M||_F).
  explicit HermitianOperator(Matrix m, double tol = 1e-10) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw dimension_error(detail::concat("HermitianOperator: non-square ", m_.rows(), "x", m_.cols()));
    }
    const double scale = std::max(1.0, m_.norm());
    const double defect = detail::hermitian_defect(m_);
    if (defect > tol * scale) {
      throw precondition_error(detail::concat("HermitianOperator: ||M - M^dag|| = ", defect));
    }
    m_ = 0.5 * (m_ + m_.adjoint()).eval();
  }

  static HermitianOperator zero(Index dim) { return HermitianOperator(Matrix::Zero(dim, dim)); }

  const Matrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw dimension_error("HermitianOperator: dimension mismatch in sum");
    return HermitianOperator(a.m_ + b.m_);
  }
  friend HermitianOperator operator*(double s, const HermitianOperator& a) {
    return HermitianOperator(s * a.m_);
  }

 private:
  Matrix m_;
};

/// Square complex matrix with U^dag U = 1 to 1e-10 in Frobenius norm.
class UnitaryMatrix {
 public:
  UnitaryMatrix() = default;

  explicit UnitaryMatrix(Matrix u, double tol = 1e-10) : u_(std::move(u)) {
    if (u_.rows() != u_.cols()) throw dimension_error("UnitaryMatrix: non-square input");
    const double defect = (u_.adjoint() * u_ - Matrix::Identity(u_.rows(), u_.cols())).norm();
    if (defect > tol) {
      throw precondition_error(detail::concat("UnitaryMatrix: ||U^dag U - 1|| = ", defect));
    }
  }

  static UnitaryMatrix identity(Index dim) { return UnitaryMatrix(Matrix::Identity(dim, dim)); }

  const Matrix& matrix() const { return u_; }
  Index dim() const { return u_.rows(); }

  friend UnitaryMatrix operator*(const UnitaryMatrix& a, const UnitaryMatrix& b) {
    if (a.dim() != b.dim()) throw dimension_error("UnitaryMatrix: dimension mismatch in product");
    return UnitaryMatrix(a.u_ * b.u_, 1e-8);
  }

 private:
  Matrix u_;
};

/// Normalized state vector.
class StateVector {
 public:
  StateVector() = default;

  explicit StateVector(Vector amplitudes) : psi_(std::move(amplitudes)) {
    if (psi_.size() == 0) throw dimension_error("StateVector: empty amplitude vector");
    const double n = psi_.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw argument_error("StateVector: zero or non-finite norm");
    psi_ /= n;
  }

  static StateVector basis(Index dim, Index k) {
    if (k < 0 || k >= dim) throw dimension_error("StateVector::basis: index out of range");
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    return StateVector(std::move(v));
  }

  const Vector& amplitudes() const { return psi_; }
  Index dim() const { return psi_.size(); }
  cplx operator[](Index k) const { return psi_(k); }

 private:
  friend StateVector apply(const UnitaryMatrix& u, const StateVector& psi);
  struct raw_tag {};
  StateVector(Vector v, raw_tag) : psi_(std::move(v)) {}

  Vector psi_;
};

/// Applies a unitary without renormalizing; unitarity carries the norm.
inline StateVector apply(const UnitaryMatrix& u, const StateVector& psi) {
  if (u.dim() != psi.dim()) throw dimension_error("apply: dimension mismatch");
  return StateVector(u.matrix() * psi.amplitudes(), StateVector::raw_tag{});
}

/// H(t) on [0, horizon]; every evaluation must return the same dimension.
struct TimeDependentGenerator {
  std::function<HermitianOperator(double)> evaluate;
  double horizon = 0.0;
  Index dim = 0;

  HermitianOperator operator()(double t) const { return evaluate(t); }

  static TimeDependentGenerator constant(HermitianOperator h, double horizon) {
    const Index d = h.dim();
    return {[h = std::move(h)](double) { return h; }, horizon, d};
  }
  static TimeDependentGenerator zero(Index dim, double horizon) {
    return constant(HermitianOperator::zero(dim), horizon);
  }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// True iff ||M - M^dag||_F <= tol.
inline bool check_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw dimension_error("check_hermitian: non-square input");
  return detail::hermitian_defect(m) <= tol;
}

struct EigenDecomposition {
  RealVector energies;   // ascending
  UnitaryMatrix vectors;  // column k pairs with energies(k)
};

/// Ascending eigenpairs of a Hermitian operator.
inline EigenDecomposition eig_hermitian(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) throw numerical_error("eig_hermitian: eigensolver did not converge");
  return {solver.eigenvalues(), UnitaryMatrix(solver.eigenvectors(), 1e-9)};
}

/// Matrix overload; validates Hermiticity to 1e-10 * max(1, ||H||_F).
inline EigenDecomposition eig_hermitian(const Matrix& h) {
  return eig_hermitian(HermitianOperator(h, 1e-10));
}

/// exp(-i H dt), assembled from the spectral decomposition so the result is
/// unitary up to rounding.
inline UnitaryMatrix step_propagator(const HermitianOperator& h_mid, double dt) {
  if (!(dt > 0.0)) throw argument_error(detail::concat("step_propagator: dt must be positive, got ", dt));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h_mid.matrix());
  const Matrix& v = solver.eigenvectors();
  const Vector phases = (-I * dt * solver.eigenvalues().cast<cplx>()).array().exp();
  return UnitaryMatrix(v * phases.asDiagonal() * v.adjoint(), 1e-9);
}

/// Called after each completed step with the end time of that step and the
/// accumulated propagator.
using StepObserver = std::function<void(double t, const Matrix& u)>;

/// Time-ordered propagator over [t_begin, t_end] by the midpoint-sampled
/// exponential rule on a uniform grid of `steps` intervals.
inline UnitaryMatrix propagator(const TimeDependentGenerator& gen, int steps, double t_begin, double t_end,
                                const StepObserver& observer = {}) {
  if (steps < 1) throw argument_error("propagator: steps must be >= 1");
  if (!(t_end > t_begin)) throw argument_error("propagator: empty time interval");
  const double dt = (t_end - t_begin) / steps;
  Matrix u = Matrix::Identity(gen.dim, gen.dim);
  for (int j = 0; j < steps; ++j) {
    const double t_mid = t_begin + (j + 0.5) * dt;
    const HermitianOperator h = gen(t_mid);
    if (h.dim() != gen.dim) throw dimension_error("propagator: generator changed dimension");
    u = step_propagator(h, dt).matrix() * u;
    if (observer) observer(t_begin + (j + 1) * dt, u);
  }
  return UnitaryMatrix(std::move(u), 1e-9);
}

inline UnitaryMatrix propagator(const TimeDependentGenerator& gen, int steps, const StepObserver& observer = {}) {
  return propagator(gen, steps, 0.0, gen.horizon, observer);
}

/// psi(T) under the midpoint exponential rule.
inline StateVector evolve(const TimeDependentGenerator& gen, const StateVector& psi0, int steps) {
  if (psi0.dim() != gen.dim) {
    throw dimension_error(detail::concat("evolve: state dim ", psi0.dim(), " vs generator dim ", gen.dim));
  }
  if (steps < 1) throw argument_error("evolve: steps must be >= 1");
  const double dt = gen.horizon / steps;
  StateVector psi = psi0;
  for (int j = 0; j < steps; ++j) {
    psi = apply(step_propagator(gen((j + 0.5) * dt), dt), psi);
  }
  return psi;
}

struct ConvergedPropagator {
  UnitaryMatrix u;
  int steps = 0;
  double last_change = 0.0;
};

/// Doubles the step count until successive propagators differ by less than
/// `tol` in Frobenius norm.
inline ConvergedPropagator converge_propagator(const TimeDependentGenerator& gen, int initial_steps = 64,
                                               double tol = 1e-8, int max_steps = 1 << 22) {
  if (initial_steps < 1) throw argument_error("converge_propagator: initial_steps must be >= 1");
  int steps = initial_steps;
  UnitaryMatrix prev = propagator(gen, steps);
  while (steps * 2 <= max_steps) {
    steps *= 2;
    UnitaryMatrix next = propagator(gen, steps);
    const double change = (next.matrix() - prev.matrix()).norm();
    if (change < tol) return {std::move(next), steps, change};
    prev = std::move(next);
  }
  throw numerical_error(detail::concat("converge_propagator: no convergence below ", tol, " within ", max_steps,
                                       " steps"));
}

/// Orthogonal projector onto the span of the listed basis vectors.
inline Matrix basis_projector(Index dim, const std::vector<Index>& indices) {
  Matrix p = Matrix::Zero(dim, dim);
  for (Index k : indices) {
    if (k < 0 || k >= dim) throw dimension_error("basis_projector: index out of range");
    p(k, k) = 1.0;
  }
  return p;
}

/// F = |tr(P U^dag V P)| / rank(P); invariant under a global phase on either
/// argument.
inline double gate_fidelity(const Matrix& u, const Matrix& v, const Matrix& projector) {
  if (u.rows() != v.rows() || u.cols() != v.cols() || projector.rows() != u.rows() ||
      projector.cols() != u.cols()) {
    throw dimension_error("gate_fidelity: incompatible dimensions");
  }
  const double rank = std::round(projector.trace().real());
  if (rank < 0.5) throw argument_error("gate_fidelity: rank-0 projector");
  const double f = std::abs((projector * u.adjoint() * v * projector).trace()) / rank;
  return std::clamp(f, 0.0, 1.0);
}

inline double gate_fidelity(const UnitaryMatrix& u, const UnitaryMatrix& v, const Matrix& projector) {
  return gate_fidelity(u.matrix(), v.matrix(), projector);
}

// ---------------------------------------------------------------------------
// Small linear-algebra helpers shared by the higher layers
// ---------------------------------------------------------------------------

/// Unitary factor W of the polar decomposition X = W P (P >= 0).
/// Jacobi SVD drifts off the unitary group when the singular values cluster,
/// so the result is polished by Newton-Schulz steps W <- W (3 - W^dag W) / 2.
inline Matrix polar_unitary(const Matrix& x) {
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix w = svd.matrixU() * svd.matrixV().adjoint();
  const Matrix one = Matrix::Identity(w.cols(), w.cols());
  for (int k = 0; k < 4; ++k) {
    const Matrix g = w.adjoint() * w;
    if ((g - one).norm() < 1e-15 * static_cast<double>(w.cols())) break;
    w = 0.5 * w * (3.0 * one - g);
  }
  return w;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

/// Distance between two angles on the circle.
inline double angular_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace holo
