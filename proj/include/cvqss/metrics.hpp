// Figures of merit: Gaussian fidelity, purity, negativity, mutual
// information and effective added noise.

#pragma once

#include "cvqss/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace cvqss {

template <typename Scalar = double>
struct MetricReport {
  Scalar fidelity = Scalar(0);
  Scalar purity = Scalar(0);
  Scalar negativity = Scalar(0);
  Scalar mi_nats = Scalar(0);
  Scalar n_eff = Scalar(0);
};

/// Fidelity of two single-mode Gaussian states,
///   F = (1/2) exp(-d^T (V1+V2)^{-1} d / 2) / (sqrt(Lambda + Delta) - sqrt(Delta))
/// with Lambda = det(V1+V2), Delta = 16 (det V1 - 1/16)(det V2 - 1/16) and
/// d the mean difference. Squared (probability) convention: identical
/// states give 1, coherent states give exp(-|d alpha|^2).
template <typename Scalar>
Scalar fidelity(const GaussianState<Scalar>& state1, const GaussianState<Scalar>& state2) {
  if (state1.n_modes != 1 || state2.n_modes != 1) {
    throw std::invalid_argument("fidelity: defined for single-mode states");
  }
  if (!is_admissible(state1) || !is_admissible(state2)) {
    throw std::invalid_argument("fidelity: inadmissible covariance");
  }
  const Eigen::Matrix<Scalar, 2, 2> v1 = state1.cov;
  const Eigen::Matrix<Scalar, 2, 2> v2 = state2.cov;
  const Eigen::Matrix<Scalar, 2, 2> vsum = v1 + v2;
  const Eigen::Matrix<Scalar, 2, 1> d = state1.mean - state2.mean;

  const Scalar lambda = vsum.determinant();
  const Scalar delta = Scalar(16) * (v1.determinant() - Scalar(1) / Scalar(16)) *
                       (v2.determinant() - Scalar(1) / Scalar(16));
  const Scalar quad = d.dot(vsum.inverse() * d);
  const Scalar denom = std::sqrt(lambda + std::max(delta, Scalar(0))) -
                       std::sqrt(std::max(delta, Scalar(0)));
  Scalar f = Scalar(0.5) * std::exp(-quad / Scalar(2)) / denom;

  constexpr Scalar slack = Scalar(1e-9);
  if (f < -slack || f > Scalar(1) + slack) {
    throw std::domain_error("fidelity: value outside [0, 1] beyond rounding slack");
  }
  return std::clamp(f, Scalar(0), Scalar(1));
}

/// Closed form of the fidelity between |alpha> and the Gaussian state with
/// mean sqrt(k) alpha and isotropic covariance v_out I.
template <typename Scalar>
Scalar fidelity_gain_noise(Scalar alpha_sq, Scalar k, Scalar v_out) {
  const Scalar one_plus = Scalar(1) + Scalar(4) * v_out;
  const Scalar mismatch = std::sqrt(k) - Scalar(1);
  return Scalar(2) / one_plus * std::exp(-Scalar(2) * mismatch * mismatch * alpha_sq / one_plus);
}

/// mu = 1 / (4^n sqrt(det V)); 1 for pure states.
template <typename Scalar>
Scalar purity(const GaussianState<Scalar>& state) {
  const Scalar det = state.cov.determinant();
  if (det <= Scalar(0)) {
    throw std::invalid_argument("purity: covariance determinant must be positive");
  }
  return Scalar(1) / (std::pow(Scalar(4), Scalar(state.n_modes)) * std::sqrt(det));
}

/// Smallest symplectic eigenvalue of the partial transpose of a two-mode
/// state (p-sign flip on mode 2).
template <typename Scalar>
Scalar ppt_minimum_eigenvalue(const GaussianState<Scalar>& state) {
  if (state.n_modes != 2) {
    throw std::invalid_argument("negativity: defined for two-mode states");
  }
  MatrixX<Scalar> flip = MatrixX<Scalar>::Identity(4, 4);
  flip(3, 3) = Scalar(-1);
  MatrixX<Scalar> pt = flip * state.cov * flip;
  return symplectic_eigenvalues(pt).minCoeff();
}

/// Trace-norm negativity with the separability boundary at nu = 1/4:
/// N = max(0, (1 - 4 nu) / (8 nu)); N > 0 certifies entanglement.
template <typename Scalar>
Scalar negativity(const GaussianState<Scalar>& state) {
  const Scalar nu = ppt_minimum_eigenvalue(state);
  return std::max(Scalar(0), (Scalar(1) - Scalar(4) * nu) / (Scalar(8) * nu));
}

/// MI = ln(1 + 4 sigma^2 / (1 + n_eff)) for a Gaussian codebook of
/// variance sigma^2 read through a channel with effective added noise n_eff.
template <typename Scalar>
Scalar mutual_information(Scalar sigma_sq, Scalar n_eff) {
  if (sigma_sq < Scalar(0)) {
    throw std::invalid_argument("mutual_information: sigma^2 must be >= 0");
  }
  return std::log1p(Scalar(4) * sigma_sq / (Scalar(1) + n_eff));
}

/// Effective added noise referred to the input,
/// n_eff = 4 (v_out - v_in) |alpha_in / alpha_out|^2.
template <typename Scalar>
Scalar effective_noise(std::complex<Scalar> alpha_in, Scalar v_in, std::complex<Scalar> alpha_out,
                       Scalar v_out) {
  const Scalar out_sq = std::norm(alpha_out);
  if (out_sq <= Scalar(0)) {
    throw std::domain_error("effective_noise: undefined for zero output displacement");
  }
  return Scalar(4) * (v_out - v_in) * std::norm(alpha_in) / out_sq;
}

}  // namespace cvqss
