// Symplectic operations, noise channels, partial trace and quadrature
// sampling for GaussianState. All functions are pure: they take a state by
// const reference and return a new value.

#pragma once

#include "cvqss/gaussian_state.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

namespace cvqss {

namespace detail {

/// Embed a 2x2 quadrature block acting on `mode` into a 2n x 2n identity.
template <typename Scalar>
MatrixX<Scalar> embed_single(Index n_modes, Index mode, const Eigen::Matrix<Scalar, 2, 2>& block) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Identity(2 * n_modes, 2 * n_modes);
  m.template block<2, 2>(2 * mode, 2 * mode) = block;
  return m;
}

/// Embed a 4x4 block acting on modes (i, j), given in (x_i,p_i,x_j,p_j) order.
template <typename Scalar>
MatrixX<Scalar> embed_pair(Index n_modes, Index i, Index j, const Eigen::Matrix<Scalar, 4, 4>& block) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Identity(2 * n_modes, 2 * n_modes);
  const Index idx[4] = {2 * i, 2 * i + 1, 2 * j, 2 * j + 1};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      m(idx[r], idx[c]) = block(r, c);
    }
  }
  return m;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> rotation2(Scalar angle) {
  Eigen::Matrix<Scalar, 2, 2> r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

}  // namespace detail

/// Phase-space rotation of one mode by `angle`.
template <typename Scalar>
SymplecticOp<Scalar> phase_shift_op(Index n_modes, Index mode, Scalar angle) {
  return {detail::embed_single<Scalar>(n_modes, mode, detail::rotation2(angle)),
          VectorX<Scalar>::Zero(2 * n_modes)};
}

/// Single-mode squeezer: variance e^{-2r} along the axis at `theta`,
/// e^{+2r} along the orthogonal axis (theta = 0 squeezes x).
template <typename Scalar>
SymplecticOp<Scalar> squeeze_op(Index n_modes, Index mode, Scalar r, Scalar theta = Scalar(0)) {
  Eigen::Matrix<Scalar, 2, 2> d;
  d << std::exp(-r), Scalar(0), Scalar(0), std::exp(r);
  Eigen::Matrix<Scalar, 2, 2> rot = detail::rotation2(theta);
  return {detail::embed_single<Scalar>(n_modes, mode, rot * d * rot.transpose()),
          VectorX<Scalar>::Zero(2 * n_modes)};
}

/// Two-mode squeezer, annihilation-operator action
/// a_i -> cosh(r) a_i + sinh(r) a_j^dag (and i <-> j).
template <typename Scalar>
SymplecticOp<Scalar> two_mode_squeeze_op(Index n_modes, Index i, Index j, Scalar r) {
  const Scalar c = std::cosh(r);
  const Scalar s = std::sinh(r);
  Eigen::Matrix<Scalar, 4, 4> block;
  // rows: x_i', p_i', x_j', p_j'; cols: x_i, p_i, x_j, p_j
  block << c, 0, s, 0,
           0, c, 0, -s,
           s, 0, c, 0,
           0, -s, 0, c;
  return {detail::embed_pair<Scalar>(n_modes, i, j, block), VectorX<Scalar>::Zero(2 * n_modes)};
}

/// Balanced-splitter family (hybrid ring). Annihilation-operator action
///   a_i' =          sqrt(tau) a_i + e^{+i phi} sqrt(1-tau) a_j
///   a_j' = e^{-i phi} sqrt(1-tau) a_i -        sqrt(tau) a_j
/// so tau = 1/2, phi = 0 gives (a_i + a_j)/sqrt2 and (a_i - a_j)/sqrt2, and
/// the operation is an involution for every (tau, phi). Note tau = 1 leaves
/// mode i untouched but rotates mode j by pi.
template <typename Scalar>
SymplecticOp<Scalar> beam_splitter_op(Index n_modes, Index i, Index j, Scalar tau,
                                      Scalar phi = Scalar(0)) {
  const Scalar t = std::sqrt(tau);
  const Scalar k = std::sqrt(Scalar(1) - tau);
  const Scalar cp = std::cos(phi);
  const Scalar sp = std::sin(phi);
  Eigen::Matrix<Scalar, 4, 4> block;
  // x + i p transforms with the complex coefficients above; a complex
  // coefficient u acts on a quadrature pair as [[Re u, -Im u], [Im u, Re u]].
  block << t, 0, k * cp, -k * sp,
           0, t, k * sp, k * cp,
           k * cp, k * sp, -t, 0,
           -k * sp, k * cp, 0, -t;
  return {detail::embed_pair<Scalar>(n_modes, i, j, block), VectorX<Scalar>::Zero(2 * n_modes)};
}

template <typename Scalar>
SymplecticOp<Scalar> displace_op(Index n_modes, Index mode, std::complex<Scalar> beta) {
  SymplecticOp<Scalar> op = identity_op<Scalar>(n_modes);
  op.displacement(2 * mode) = beta.real();
  op.displacement(2 * mode + 1) = beta.imag();
  return op;
}

template <typename Scalar>
GaussianState<Scalar> phase_shift(const GaussianState<Scalar>& state, Index mode, Scalar angle) {
  detail::require_mode(state, mode, "phase_shift");
  return apply(phase_shift_op<Scalar>(state.n_modes, mode, angle), state);
}

template <typename Scalar>
GaussianState<Scalar> squeeze(const GaussianState<Scalar>& state, Index mode, Scalar r,
                              Scalar theta = Scalar(0)) {
  detail::require_mode(state, mode, "squeeze");
  return apply(squeeze_op<Scalar>(state.n_modes, mode, r, theta), state);
}

template <typename Scalar>
GaussianState<Scalar> two_mode_squeeze(const GaussianState<Scalar>& state, Index i, Index j,
                                       Scalar r) {
  detail::require_mode(state, i, "two_mode_squeeze");
  detail::require_mode(state, j, "two_mode_squeeze");
  if (i == j) {
    throw std::invalid_argument("two_mode_squeeze: modes must be distinct");
  }
  return apply(two_mode_squeeze_op<Scalar>(state.n_modes, i, j, r), state);
}

template <typename Scalar>
GaussianState<Scalar> beam_splitter(const GaussianState<Scalar>& state, Index i, Index j,
                                    Scalar tau, Scalar phi = Scalar(0)) {
  detail::require_mode(state, i, "beam_splitter");
  detail::require_mode(state, j, "beam_splitter");
  if (i == j) {
    throw std::invalid_argument("beam_splitter: modes must be distinct");
  }
  if (tau < Scalar(0) || tau > Scalar(1)) {
    throw std::invalid_argument("beam_splitter: transmissivity must be in [0, 1]");
  }
  return apply(beam_splitter_op<Scalar>(state.n_modes, i, j, tau, phi), state);
}

template <typename Scalar>
GaussianState<Scalar> displace(const GaussianState<Scalar>& state, Index mode,
                               std::complex<Scalar> beta) {
  detail::require_mode(state, mode, "displace");
  GaussianState<Scalar> out = state;
  out.mean(2 * mode) += beta.real();
  out.mean(2 * mode + 1) += beta.imag();
  return out;
}

/// Keep the listed modes (in the given order), tracing out the rest.
template <typename Scalar>
GaussianState<Scalar> partial_trace(const GaussianState<Scalar>& state,
                                    const std::vector<Index>& keep_modes) {
  if (keep_modes.empty()) {
    throw std::invalid_argument("partial_trace: keep set must be nonempty");
  }
  std::set<Index> seen;
  for (Index m : keep_modes) {
    detail::require_mode(state, m, "partial_trace");
    if (!seen.insert(m).second) {
      throw std::invalid_argument("partial_trace: duplicate mode in keep set");
    }
  }
  GaussianState<Scalar> out;
  out.n_modes = static_cast<Index>(keep_modes.size());
  out.mean = VectorX<Scalar>::Zero(out.dim());
  out.cov = MatrixX<Scalar>::Zero(out.dim(), out.dim());
  for (Index a = 0; a < out.n_modes; ++a) {
    out.mean.template segment<2>(2 * a) = state.mean.template segment<2>(2 * keep_modes[a]);
    for (Index b = 0; b < out.n_modes; ++b) {
      out.cov.template block<2, 2>(2 * a, 2 * b) =
          state.cov.template block<2, 2>(2 * keep_modes[a], 2 * keep_modes[b]);
    }
  }
  return out;
}

/// Pure-loss / thermal-loss channel on one mode: beam-splitter coupling of
/// transmissivity `efficiency` to an environment mode with occupation
/// nbar_env, environment traced out.
template <typename Scalar>
GaussianState<Scalar> loss_channel(const GaussianState<Scalar>& state, Index mode,
                                   Scalar efficiency, Scalar nbar_env = Scalar(0)) {
  detail::require_mode(state, mode, "loss_channel");
  if (efficiency < Scalar(0) || efficiency > Scalar(1)) {
    throw std::invalid_argument("loss_channel: efficiency must be in [0, 1]");
  }
  const Scalar v_env = (Scalar(2) * nbar_env + Scalar(1)) * vacuum_variance<Scalar>;
  const Scalar root = std::sqrt(efficiency);
  GaussianState<Scalar> out = state;
  out.mean.template segment<2>(2 * mode) *= root;
  // cross blocks scale by sqrt(eta), the mode block interpolates to v_env I
  out.cov.row(2 * mode) *= root;
  out.cov.row(2 * mode + 1) *= root;
  out.cov.col(2 * mode) *= root;
  out.cov.col(2 * mode + 1) *= root;
  out.cov(2 * mode, 2 * mode) += (Scalar(1) - efficiency) * v_env;
  out.cov(2 * mode + 1, 2 * mode + 1) += (Scalar(1) - efficiency) * v_env;
  return out;
}

/// Adds classical (isotropic) noise of the given variance per quadrature.
template <typename Scalar>
GaussianState<Scalar> add_classical_noise(const GaussianState<Scalar>& state, Index mode,
                                          Scalar variance_per_quadrature) {
  detail::require_mode(state, mode, "add_classical_noise");
  if (variance_per_quadrature < Scalar(0)) {
    throw std::invalid_argument("add_classical_noise: variance must be >= 0");
  }
  GaussianState<Scalar> out = state;
  out.cov(2 * mode, 2 * mode) += variance_per_quadrature;
  out.cov(2 * mode + 1, 2 * mode + 1) += variance_per_quadrature;
  return out;
}

namespace detail {

/// Deterministic standard-normal stream from an explicitly seeded engine.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller on uniforms in (0, 1]
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform01() {
    // 53-bit mantissa, shifted into (0, 1]
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace detail

/// i.i.d. quadrature samples (rows) from the state's normal distribution.
/// Deterministic for a fixed seed.
template <typename Scalar>
MatrixX<Scalar> sample_quadratures(const GaussianState<Scalar>& state, Index n_samples,
                                   std::uint64_t seed) {
  if (n_samples < 1) {
    throw std::invalid_argument("sample_quadratures: need at least one sample");
  }
  Eigen::LLT<MatrixX<Scalar>> llt(state.cov);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("sample_quadratures: covariance is not positive definite");
  }
  const MatrixX<Scalar> chol = llt.matrixL();
  detail::NormalStream stream(seed);
  MatrixX<Scalar> samples(n_samples, state.dim());
  VectorX<Scalar> z(state.dim());
  for (Index s = 0; s < n_samples; ++s) {
    for (Index k = 0; k < state.dim(); ++k) {
      z(k) = static_cast<Scalar>(stream.next());
    }
    samples.row(s) = (state.mean + chol * z).transpose();
  }
  return samples;
}

}  // namespace cvqss
