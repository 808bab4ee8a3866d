// The ((2,3)) threshold secret-sharing pipeline over Gaussian states:
// two-mode squeezed resource, Dealer split, pairwise reconstruction via a
// balanced interferometer of degenerate parametric amplifiers, adversary
// views, and a configurable device-imperfection model.
//
// Gain convention: a reconstruction amplifier at degenerate gain G (dB)
// realizes the two-mode squeeze parameter r_G = (G/20) ln 10, i.e.
// G_lin = e^{2 r_G}. The output of the {2,3} scheme is then
//   a_out = cosh(r_G) a_2 + sinh(r_G) a_3^dag
//         = eta (sqrt2 a_2 + gamma a_3^dag),
// gamma = sqrt2 tanh(r_G), eta = 1/sqrt(2 - gamma^2); unit amplitude gain
// (eta = 1) occurs at G_lin = (sqrt2+1)/(sqrt2-1) ~ 7.66 dB.

#pragma once

#include "cvqss/gaussian_state.hpp"
#include "cvqss/metrics.hpp"
#include "cvqss/ops.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>

namespace cvqss {

using Complex = std::complex<double>;

enum class Scheme { P12, P13, P23 };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::P12: return "12";
    case Scheme::P13: return "13";
    case Scheme::P23: return "23";
  }
  return "?";
}

/// Device imperfections. All defaults are ideal (zero / lossless).
struct DeviceModel {
  /// Thermal occupation of the secret input mode.
  double input_nbar = 0.0;
  /// Excess-noise coefficient c: each parametric amplifier driven at linear
  /// gain g adds classical variance c (g - 1) / 4 per quadrature.
  double jpa_noise_coeff = 0.0;
  /// Phase error between the Dealer and the {1,2} reconstruction hybrids.
  double hybrid_phase_mismatch = 0.0;
  /// Per-player transmission efficiency.
  double path_efficiency = 1.0;
  /// Relative amplitude imbalance between the two reconstruction amplifiers.
  double interferometer_imbalance = 0.0;
  /// Occupation of the loss-channel environment (0 approximates the
  /// 50 mK background as vacuum).
  double environment_nbar = 0.0;

  static DeviceModel ideal() { return {}; }

  /// Ideal optics with the physical 50 mK / 5.4 GHz input occupation.
  static DeviceModel thermal_input() {
    DeviceModel d;
    d.input_nbar = bose_einstein_nbar(5.4e9, 0.050);
    return d;
  }

  /// Fitted preset reproducing the behavior of a realistic microwave
  /// implementation: a narrow unconditional-security window and a small
  /// erasure-correction advantage. The numbers are calibration artifacts,
  /// not measured hardware parameters; see calibrated_squeezing_db() /
  /// calibrated_gain_db() for the operating point they were fitted at.
  static DeviceModel calibrated();
};

// Fitted values; see the preset docs above.
inline DeviceModel DeviceModel::calibrated() {
  DeviceModel d;
  d.input_nbar = bose_einstein_nbar(5.4e9, 0.050);
  d.jpa_noise_coeff = 0.0698;
  d.hybrid_phase_mismatch = 0.3908;
  d.path_efficiency = 0.9149;
  d.interferometer_imbalance = 0.0;
  return d;
}

/// Operating point the calibrated preset was fitted at.
inline double calibrated_squeezing_db() { return 6.0; }
inline double calibrated_gain_db() { return 4.52; }

inline void validate_device(const DeviceModel& d) {
  if (d.input_nbar < 0 || d.environment_nbar < 0) {
    throw std::invalid_argument("DeviceModel: occupations must be >= 0");
  }
  if (d.jpa_noise_coeff < 0) {
    throw std::invalid_argument("DeviceModel: noise coefficient must be >= 0");
  }
  if (d.path_efficiency < 0 || d.path_efficiency > 1) {
    throw std::invalid_argument("DeviceModel: path efficiency must be in [0, 1]");
  }
}

struct ProtocolParams {
  double squeezing_db = 6.0;
  double gain_db = 7.0;
  Complex secret_alpha = {1.0, 0.0};
  Scheme scheme = Scheme::P23;
};

/// The three distributed player modes (wire m = player P_{m+1}).
struct Shares {
  GaussianState<double> state;  // three modes, order P1, P2, P3
  double resource_r = 0.0;
  Complex secret_alpha = {0.0, 0.0};
  double input_variance = 0.25;  // per-quadrature variance of the input mode
};

struct ReconstructionResult {
  GaussianState<double> output;  // single mode
  double sqrt_gain = 0.0;        // output mean amplitude relative to alpha
  double v_out = 0.0;            // symmetrized output variance per quadrature
};

inline double gain_db_to_tms_r(double gain_db) { return db_to_squeeze_r(gain_db); }

/// gamma such that a_out = eta (sqrt2 a_2 + gamma a_3^dag) at this gain.
inline double gain_db_to_gamma(double gain_db) {
  return std::sqrt(2.0) * std::tanh(gain_db_to_tms_r(gain_db));
}

inline double eta_of_gamma(double gamma) { return 1.0 / std::sqrt(2.0 - gamma * gamma); }

namespace detail {

inline double jpa_excess_variance(const DeviceModel& device, double r_arm) {
  return device.jpa_noise_coeff * (std::exp(2.0 * std::abs(r_arm)) - 1.0) / 4.0;
}

}  // namespace detail

/// Two-mode squeezed resource: two orthogonally squeezed vacua (plus any
/// amplifier excess noise) combined on a balanced hybrid. Mode 0 feeds the
/// Dealer, mode 1 becomes player P3. Correlations are (x: +, p: -) sinh(2r)/4.
inline GaussianState<double> make_tms_resource(double squeezing_db, const DeviceModel& device) {
  if (squeezing_db < 0) {
    throw std::invalid_argument("make_tms_resource: squeezing level must be >= 0 dB");
  }
  validate_device(device);
  const double r = db_to_squeeze_r(squeezing_db);
  GaussianState<double> state = make_vacuum<double>(2);
  state = squeeze(state, 0, r, 3.14159265358979323846 / 2.0);
  state = squeeze(state, 1, r, 0.0);
  const double noise = detail::jpa_excess_variance(device, r);
  if (noise > 0) {
    state = add_classical_noise(state, 0, noise);
    state = add_classical_noise(state, 1, noise);
  }
  return beam_splitter(state, 0, 1, 0.5, 0.0);
}

/// Dealer step: secret (with any thermal admixture) meets resource mode 0 on
/// a balanced hybrid; outputs are a_1 = (a_in + a_r1)/sqrt2,
/// a_2 = (a_in - a_r1)/sqrt2, a_3 = a_r2, then per-player path loss.
inline Shares dealer(Complex secret_alpha, const GaussianState<double>& resource,
                     const DeviceModel& device) {
  if (resource.n_modes != 2) {
    throw std::invalid_argument("dealer: resource must be a two-mode state");
  }
  validate_device(device);
  GaussianState<double> input = make_coherent(secret_alpha);
  if (device.input_nbar > 0) {
    input = add_classical_noise(input, 0, device.input_nbar / 2.0);
  }
  const double v_in = input.cov(0, 0);
  GaussianState<double> state = tensor_product(input, resource);
  state = beam_splitter(state, 0, 1, 0.5, 0.0);
  if (device.path_efficiency < 1.0) {
    for (Index m = 0; m < 3; ++m) {
      state = loss_channel(state, m, device.path_efficiency, device.environment_nbar);
    }
  }
  Shares shares;
  shares.state = std::move(state);
  shares.resource_r = 0.0;  // filled by make_shares when the caller knows S
  shares.secret_alpha = secret_alpha;
  shares.input_variance = v_in;
  return shares;
}

/// Resource generation plus Dealer in one step.
inline Shares make_shares(Complex secret_alpha, double squeezing_db, const DeviceModel& device) {
  Shares shares = dealer(secret_alpha, make_tms_resource(squeezing_db, device), device);
  shares.resource_r = db_to_squeeze_r(squeezing_db);
  return shares;
}

namespace detail {

inline ReconstructionResult finish_reconstruction(const GaussianState<double>& full, Index out_wire,
                                                  Complex secret_alpha, double fallback_gain) {
  ReconstructionResult result;
  result.output = partial_trace(full, {out_wire});
  result.v_out = result.output.symmetrized_variance(0);
  const double alpha_abs = std::abs(secret_alpha);
  if (alpha_abs > 1e-12) {
    result.sqrt_gain = std::abs(result.output.amplitude(0)) / alpha_abs;
  } else {
    result.sqrt_gain = fallback_gain;
  }
  return result;
}

}  // namespace detail

/// {1,2} reconstruction: run the Dealer hybrid in reverse (with any phase
/// mismatch between the two hybrids); the secret reappears on wire 0.
inline ReconstructionResult reconstruct_12(const Shares& shares, const DeviceModel& device) {
  validate_device(device);
  GaussianState<double> full =
      beam_splitter(shares.state, 0, 1, 0.5, device.hybrid_phase_mismatch);
  // ideal mean map is the identity on the input quadratures; with mismatch
  // phi the amplitude gain is |1 + e^{i phi}| / 2 = cos(phi / 2)
  const double fallback =
      std::sqrt(device.path_efficiency) * std::abs(std::cos(device.hybrid_phase_mismatch / 2.0));
  return detail::finish_reconstruction(full, 0, shares.secret_alpha, fallback);
}

/// Pairwise reconstruction with the entangled third mode: a balanced hybrid,
/// two orthogonal degenerate amplifiers at gain G (with imbalance and excess
/// noise), and a recombining hybrid. Realizes
///   {2,3}: a_out = cosh(r_G) a_2 + sinh(r_G) a_3^dag   (output wire 1)
///   {1,3}: a_out = cosh(r_G) a_1 - sinh(r_G) a_3^dag   (output wire 0)
inline ReconstructionResult reconstruct_pair(const Shares& shares, Scheme scheme, double gain_db,
                                             const DeviceModel& device) {
  if (scheme == Scheme::P12) {
    return reconstruct_12(shares, device);
  }
  if (gain_db < 0) {
    throw std::invalid_argument("reconstruct_pair: gain must be >= 0 dB");
  }
  validate_device(device);
  const double r = gain_db_to_tms_r(gain_db);
  const double eps = device.interferometer_imbalance;
  const double r_amp = r * (1.0 + eps);   // arm squeezed along p (x amplified)
  const double r_sq = r * (1.0 - eps);    // arm squeezed along x
  const double half_pi = 3.14159265358979323846 / 2.0;

  const Index share_wire = (scheme == Scheme::P23) ? 1 : 0;
  const Index resource_wire = 2;
  // {2,3} amplifies the (a_2 + a_3) arm; the symmetric {1,3} scheme
  // amplifies the (a_1 - a_3) arm, flipping the sinh sign.
  const Index amp_wire = (scheme == Scheme::P23) ? share_wire : resource_wire;
  const Index sq_wire = (scheme == Scheme::P23) ? resource_wire : share_wire;

  GaussianState<double> full = beam_splitter(shares.state, share_wire, resource_wire, 0.5, 0.0);
  full = squeeze(full, amp_wire, r_amp, half_pi);
  full = squeeze(full, sq_wire, r_sq, 0.0);
  const double noise_amp = detail::jpa_excess_variance(device, r_amp);
  const double noise_sq = detail::jpa_excess_variance(device, r_sq);
  if (noise_amp > 0) full = add_classical_noise(full, amp_wire, noise_amp);
  if (noise_sq > 0) full = add_classical_noise(full, sq_wire, noise_sq);
  full = beam_splitter(full, share_wire, resource_wire, 0.5, 0.0);

  const double fallback =
      std::sqrt(device.path_efficiency) * std::cosh(r) / std::sqrt(2.0);
  return detail::finish_reconstruction(full, share_wire, shares.secret_alpha, fallback);
}

inline ReconstructionResult reconstruct_23(const Shares& shares, double gain_db,
                                           const DeviceModel& device) {
  return reconstruct_pair(shares, Scheme::P23, gain_db, device);
}

inline ReconstructionResult reconstruct_13(const Shares& shares, double gain_db,
                                           const DeviceModel& device) {
  return reconstruct_pair(shares, Scheme::P13, gain_db, device);
}

/// Reduced state of the player left out of the chosen scheme.
inline GaussianState<double> adversary_view(const Shares& shares, Scheme scheme) {
  switch (scheme) {
    case Scheme::P12: return partial_trace(shares.state, {2});
    case Scheme::P13: return partial_trace(shares.state, {1});
    case Scheme::P23: return partial_trace(shares.state, {0});
  }
  throw std::invalid_argument("adversary_view: invalid scheme");
}

/// Fidelity the excluded player reaches against the secret using only their
/// share; optionally allowing the best deterministic rescale of their mean.
inline double adversary_best_fidelity(const GaussianState<double>& adversary_state,
                                      Complex secret_alpha, bool optimize_rescale = false) {
  if (adversary_state.n_modes != 1) {
    throw std::invalid_argument("adversary_best_fidelity: expected a single-mode state");
  }
  const GaussianState<double> target = make_coherent(secret_alpha);
  if (!optimize_rescale || adversary_state.mean.norm() < 1e-14) {
    return fidelity(adversary_state, target);
  }
  const auto rescaled_fidelity = [&](double g) {
    GaussianState<double> s = adversary_state;
    s.mean *= g;
    return fidelity(s, target);
  };
  // coarse scan, then golden-section refinement around the best bracket
  double best_g = 0.0;
  double best_f = rescaled_fidelity(0.0);
  constexpr int kScan = 120;
  constexpr double kMax = 6.0;
  for (int i = 1; i <= kScan; ++i) {
    const double g = kMax * i / kScan;
    const double f = rescaled_fidelity(g);
    if (f > best_f) {
      best_f = f;
      best_g = g;
    }
  }
  double lo = std::max(0.0, best_g - kMax / kScan);
  double hi = std::min(kMax, best_g + kMax / kScan);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = rescaled_fidelity(a);
  double fb = rescaled_fidelity(b);
  while (hi - lo > 1e-9) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = rescaled_fidelity(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = rescaled_fidelity(a);
    }
  }
  return std::max(best_f, std::max(fa, fb));
}

/// Everything one run of the protocol produces. `metrics` reports the
/// collaborators' side (fidelity / MI / n_eff of the reconstruction) along
/// with the resource's purity and negativity.
struct ProtocolTranscript {
  GaussianState<double> resource;
  Shares shares;
  ReconstructionResult reconstruction;
  GaussianState<double> adversary_state;
  MetricReport<double> metrics;
  double f_collab = 0.0;
  double f_adv = 0.0;
  double n_eff_collab = 0.0;
  double n_eff_adv = 0.0;  // +inf when the adversary mean carries no signal
  double mi_collab = 0.0;
  double mi_adv = 0.0;
  double resource_negativity = 0.0;
  double resource_purity = 0.0;
};

inline ProtocolTranscript run_protocol(const ProtocolParams& params, const DeviceModel& device,
                                       double codebook_sigma_sq = 3.0,
                                       bool adversary_rescale = false) {
  ProtocolTranscript t;
  t.resource = make_tms_resource(params.squeezing_db, device);
  t.shares = dealer(params.secret_alpha, t.resource, device);
  t.shares.resource_r = db_to_squeeze_r(params.squeezing_db);
  t.reconstruction = reconstruct_pair(t.shares, params.scheme, params.gain_db, device);
  t.adversary_state = adversary_view(t.shares, params.scheme);

  const GaussianState<double> secret = make_coherent(params.secret_alpha);
  t.f_collab = fidelity(t.reconstruction.output, secret);
  t.f_adv = adversary_best_fidelity(t.adversary_state, params.secret_alpha, adversary_rescale);
  t.resource_negativity = negativity(t.resource);
  t.resource_purity = purity(t.resource);

  const double v_in = t.shares.input_variance;
  const Complex out_amp = t.reconstruction.output.amplitude(0);
  if (std::abs(out_amp) > 1e-12) {
    t.n_eff_collab =
        effective_noise(params.secret_alpha, v_in, out_amp, t.reconstruction.v_out);
    t.mi_collab = mutual_information(codebook_sigma_sq, t.n_eff_collab);
  } else {
    t.n_eff_collab = std::numeric_limits<double>::infinity();
    t.mi_collab = 0.0;
  }
  const Complex adv_amp = t.adversary_state.amplitude(0);
  if (std::abs(adv_amp) > 1e-12) {
    t.n_eff_adv = effective_noise(params.secret_alpha, v_in, adv_amp,
                                  t.adversary_state.symmetrized_variance(0));
    t.mi_adv = mutual_information(codebook_sigma_sq, t.n_eff_adv);
  } else {
    t.n_eff_adv = std::numeric_limits<double>::infinity();
    t.mi_adv = 0.0;
  }
  t.metrics = {t.f_collab, t.resource_purity, t.resource_negativity, t.mi_collab,
               t.n_eff_collab};
  return t;
}

/// Gain maximizing the {2,3} fidelity at fixed squeezing and secret
/// amplitude (coarse scan plus golden-section polish).
inline double optimal_gain_db(double squeezing_db, double alpha_sq, const DeviceModel& device,
                              double gain_lo_db = 0.0, double gain_hi_db = 14.0) {
  const Complex alpha(std::sqrt(alpha_sq), 0.0);
  const GaussianState<double> resource = make_tms_resource(squeezing_db, device);
  Shares shares = dealer(alpha, resource, device);
  shares.resource_r = db_to_squeeze_r(squeezing_db);
  const GaussianState<double> secret = make_coherent(alpha);
  const auto f_of = [&](double g_db) {
    return fidelity(reconstruct_23(shares, g_db, device).output, secret);
  };
  constexpr int kScan = 80;
  double best_g = gain_lo_db;
  double best_f = f_of(gain_lo_db);
  for (int i = 1; i <= kScan; ++i) {
    const double g = gain_lo_db + (gain_hi_db - gain_lo_db) * i / kScan;
    const double f = f_of(g);
    if (f > best_f) {
      best_f = f;
      best_g = g;
    }
  }
  const double step = (gain_hi_db - gain_lo_db) / kScan;
  double lo = std::max(gain_lo_db, best_g - step);
  double hi = std::min(gain_hi_db, best_g + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = f_of(a);
  double fb = f_of(b);
  while (hi - lo > 1e-7) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = f_of(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = f_of(a);
    }
  }
  return (lo + hi) / 2.0;
}

}  // namespace cvqss
