// Multimode Gaussian states over quadrature means and covariances.
//
// Conventions (fixed here, used everywhere else):
//   * quadrature ordering is mode-interleaved: (x1, p1, x2, p2, ...)
//   * a coherent state |alpha> has mean (Re alpha, Im alpha), i.e. a = x + i p
//   * vacuum variance is 1/4 per quadrature
//   * squeezing level S in dB maps to the squeeze parameter via
//     e^{-2r} = 10^{-S/10}, i.e. r = (S/20) ln 10

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace cvqss {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

template <typename Scalar>
inline constexpr Scalar vacuum_variance = Scalar(0.25);

/// dB squeezing level -> squeeze parameter r, e^{-2r} = 10^{-S/10}.
template <typename Scalar = double>
Scalar db_to_squeeze_r(Scalar s_db) {
  return s_db / Scalar(20) * std::log(Scalar(10));
}

template <typename Scalar = double>
Scalar squeeze_r_to_db(Scalar r) {
  return Scalar(20) * r / std::log(Scalar(10));
}

/// n-mode bosonic Gaussian state: quadrature mean vector and covariance.
/// Plain aggregate; factories validate, operations preserve validity.
template <typename Scalar = double>
struct GaussianState {
  Index n_modes = 0;
  VectorX<Scalar> mean;  // length 2 n_modes
  MatrixX<Scalar> cov;   // 2n x 2n, symmetric

  Index dim() const { return 2 * n_modes; }

  Scalar mean_x(Index mode) const { return mean(2 * mode); }
  Scalar mean_p(Index mode) const { return mean(2 * mode + 1); }

  /// Mean of one mode as a complex amplitude (x + i p).
  std::complex<Scalar> amplitude(Index mode) const {
    return {mean(2 * mode), mean(2 * mode + 1)};
  }

  /// Symmetrized per-quadrature variance of one mode, (V_xx + V_pp)/2.
  Scalar symmetrized_variance(Index mode) const {
    return (cov(2 * mode, 2 * mode) + cov(2 * mode + 1, 2 * mode + 1)) / Scalar(2);
  }
};

namespace detail {

template <typename Scalar>
void require_mode(const GaussianState<Scalar>& state, Index mode, const char* who) {
  if (mode < 0 || mode >= state.n_modes) {
    throw std::invalid_argument(std::string(who) + ": mode index " + std::to_string(mode) +
                                " out of range for " + std::to_string(state.n_modes) + " modes");
  }
}

}  // namespace detail

/// Standard symplectic form: block-diagonal [[0,1],[-1,0]] per mode.
template <typename Scalar = double>
MatrixX<Scalar> symplectic_form(Index n_modes) {
  MatrixX<Scalar> omega = MatrixX<Scalar>::Zero(2 * n_modes, 2 * n_modes);
  for (Index m = 0; m < n_modes; ++m) {
    omega(2 * m, 2 * m + 1) = Scalar(1);
    omega(2 * m + 1, 2 * m) = Scalar(-1);
  }
  return omega;
}

/// Symplectic eigenvalues of a covariance matrix (each returned once,
/// ascending). Vacuum-normalized: an admissible state has all values >= 1/4.
template <typename Scalar>
VectorX<Scalar> symplectic_eigenvalues(const MatrixX<Scalar>& cov) {
  const Index n = cov.rows() / 2;
  MatrixX<Scalar> m = symplectic_form<Scalar>(n) * cov;
  Eigen::EigenSolver<MatrixX<Scalar>> solver(m, /*computeEigenvectors=*/false);
  // Eigenvalues come in +-i nu pairs; moduli give each nu twice.
  VectorX<Scalar> moduli = solver.eigenvalues().cwiseAbs();
  std::sort(moduli.data(), moduli.data() + moduli.size());
  VectorX<Scalar> nus(n);
  for (Index k = 0; k < n; ++k) {
    nus(k) = (moduli(2 * k) + moduli(2 * k + 1)) / Scalar(2);
  }
  return nus;
}

template <typename Scalar>
bool is_admissible(const GaussianState<Scalar>& state, Scalar slack = Scalar(1e-9)) {
  if (state.n_modes < 1 || state.mean.size() != state.dim() ||
      state.cov.rows() != state.dim() || state.cov.cols() != state.dim()) {
    return false;
  }
  if (!state.cov.isApprox(state.cov.transpose(), Scalar(1e-10))) {
    // isApprox is relative; also accept small absolute asymmetry
    if ((state.cov - state.cov.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10)) {
      return false;
    }
  }
  VectorX<Scalar> nus = symplectic_eigenvalues(state.cov);
  return nus.minCoeff() >= vacuum_variance<Scalar> - slack;
}

/// Throws unless the state satisfies the representation invariants
/// (shape, symmetry to 1e-10, symplectic eigenvalues >= 1/4 - slack).
template <typename Scalar>
void validate_state(const GaussianState<Scalar>& state, Scalar slack = Scalar(1e-9)) {
  if (state.n_modes < 1) {
    throw std::invalid_argument("GaussianState: need at least one mode");
  }
  if (state.mean.size() != state.dim() || state.cov.rows() != state.dim() ||
      state.cov.cols() != state.dim()) {
    throw std::invalid_argument("GaussianState: mean/cov shape mismatch");
  }
  if ((state.cov - state.cov.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10)) {
    throw std::invalid_argument("GaussianState: covariance not symmetric");
  }
  VectorX<Scalar> nus = symplectic_eigenvalues(state.cov);
  if (nus.minCoeff() < vacuum_variance<Scalar> - slack) {
    throw std::invalid_argument("GaussianState: covariance violates the Heisenberg bound");
  }
}

template <typename Scalar = double>
GaussianState<Scalar> make_vacuum(Index n_modes) {
  if (n_modes < 1) {
    throw std::invalid_argument("make_vacuum: n_modes must be >= 1");
  }
  GaussianState<Scalar> state;
  state.n_modes = n_modes;
  state.mean = VectorX<Scalar>::Zero(2 * n_modes);
  state.cov = vacuum_variance<Scalar> * MatrixX<Scalar>::Identity(2 * n_modes, 2 * n_modes);
  return state;
}

template <typename Scalar = double>
GaussianState<Scalar> make_coherent(std::complex<Scalar> alpha) {
  GaussianState<Scalar> state = make_vacuum<Scalar>(1);
  state.mean(0) = alpha.real();
  state.mean(1) = alpha.imag();
  return state;
}

template <typename Scalar = double>
GaussianState<Scalar> make_thermal(Scalar nbar) {
  if (nbar < Scalar(0)) {
    throw std::invalid_argument("make_thermal: mean photon number must be >= 0");
  }
  GaussianState<Scalar> state = make_vacuum<Scalar>(1);
  state.cov *= (Scalar(2) * nbar + Scalar(1));
  return state;
}

/// Mean thermal occupation of a mode at frequency f_hz and temperature t_k.
template <typename Scalar = double>
Scalar bose_einstein_nbar(Scalar f_hz, Scalar t_k) {
  constexpr double planck = 6.62607015e-34;
  constexpr double boltzmann = 1.380649e-23;
  if (t_k <= Scalar(0)) return Scalar(0);
  return Scalar(1) / std::expm1(Scalar(planck) * f_hz / (Scalar(boltzmann) * t_k));
}

template <typename Scalar>
GaussianState<Scalar> tensor_product(const GaussianState<Scalar>& a,
                                     const GaussianState<Scalar>& b) {
  GaussianState<Scalar> out;
  out.n_modes = a.n_modes + b.n_modes;
  out.mean = VectorX<Scalar>::Zero(out.dim());
  out.mean.head(a.dim()) = a.mean;
  out.mean.tail(b.dim()) = b.mean;
  out.cov = MatrixX<Scalar>::Zero(out.dim(), out.dim());
  out.cov.topLeftCorner(a.dim(), a.dim()) = a.cov;
  out.cov.bottomRightCorner(b.dim(), b.dim()) = b.cov;
  return out;
}

/// Affine symplectic transformation: mean -> S mean + d, cov -> S cov S^T.
template <typename Scalar = double>
struct SymplecticOp {
  MatrixX<Scalar> matrix;
  VectorX<Scalar> displacement;

  Index n_modes() const { return matrix.rows() / 2; }
};

template <typename Scalar>
bool is_symplectic(const MatrixX<Scalar>& m, Scalar tol = Scalar(1e-10)) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0) return false;
  MatrixX<Scalar> omega = symplectic_form<Scalar>(m.rows() / 2);
  return ((m * omega * m.transpose()) - omega).cwiseAbs().maxCoeff() <= tol;
}

template <typename Scalar>
void validate_op(const SymplecticOp<Scalar>& op, Scalar tol = Scalar(1e-10)) {
  if (op.displacement.size() != op.matrix.rows()) {
    throw std::invalid_argument("SymplecticOp: displacement/matrix shape mismatch");
  }
  if (!is_symplectic(op.matrix, tol)) {
    throw std::invalid_argument("SymplecticOp: matrix does not preserve the symplectic form");
  }
}

template <typename Scalar>
SymplecticOp<Scalar> identity_op(Index n_modes) {
  return {MatrixX<Scalar>::Identity(2 * n_modes, 2 * n_modes), VectorX<Scalar>::Zero(2 * n_modes)};
}

/// Composition: apply a first, then b.
template <typename Scalar>
SymplecticOp<Scalar> compose(const SymplecticOp<Scalar>& b, const SymplecticOp<Scalar>& a) {
  return {b.matrix * a.matrix, b.matrix * a.displacement + b.displacement};
}

template <typename Scalar>
GaussianState<Scalar> apply(const SymplecticOp<Scalar>& op, const GaussianState<Scalar>& state) {
  if (op.matrix.rows() != state.dim()) {
    throw std::invalid_argument("apply: operator/state mode count mismatch");
  }
  GaussianState<Scalar> out;
  out.n_modes = state.n_modes;
  out.mean = op.matrix * state.mean + op.displacement;
  out.cov = op.matrix * state.cov * op.matrix.transpose();
  // keep exact symmetry under roundoff
  out.cov = ((out.cov + out.cov.transpose()) / Scalar(2)).eval();
  return out;
}

template <typename Scalar>
Scalar determinant(const GaussianState<Scalar>& state) {
  return state.cov.determinant();
}

}  // namespace cvqss
