// The {2,3} pipeline reinterpreted as CV dense coding: displacement encoding
// on one arm of the entangled resource, interferometric decoding with
// dual-quadrature readout, and MI comparisons under a fixed ensemble
// variance budget.

#pragma once

#include "cvqss/metrics.hpp"
#include "cvqss/ops.hpp"
#include "cvqss/protocol.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cvqss {

/// How the transmitted-state share of the ensemble variance is counted.
///   Ideal:  sigma_st^2 = sinh(2r), the lossless convention.
///   Device: sigma_st^2 = simulated transmitted-mode variance (0.25 for a
///           coherent state, matching the baseline bookkeeping).
enum class BudgetMode { Ideal, Device };

struct DenseCodingBudget {
  double sigma_ens_sq = 0.0;
  double sigma_cb_sq = 0.0;
  double sigma_st_sq = 0.0;
  double r = 0.0;
};

/// Transmitted-mode variance of the resource under the device model.
inline double transmitted_state_variance(double squeezing_db, const DeviceModel& device) {
  const GaussianState<double> resource = make_tms_resource(squeezing_db, device);
  return partial_trace(resource, {0}).symmetrized_variance(0);
}

/// Splits the ensemble variance between codebook and transmitted state.
/// Returns nullopt when the state share already exhausts the budget.
inline std::optional<DenseCodingBudget> budget_from_squeezing(double sigma_ens_sq,
                                                              double squeezing_db,
                                                              BudgetMode mode,
                                                              const DeviceModel& device) {
  if (sigma_ens_sq < 0 || squeezing_db < 0) {
    throw std::invalid_argument("budget_from_squeezing: negative budget or squeezing");
  }
  DenseCodingBudget budget;
  budget.sigma_ens_sq = sigma_ens_sq;
  budget.r = db_to_squeeze_r(squeezing_db);
  budget.sigma_st_sq = (mode == BudgetMode::Ideal)
                           ? std::sinh(2.0 * budget.r)
                           : transmitted_state_variance(squeezing_db, device);
  if (budget.sigma_st_sq > sigma_ens_sq) {
    return std::nullopt;
  }
  budget.sigma_cb_sq = sigma_ens_sq - budget.sigma_st_sq;
  return budget;
}

/// Ideal CV dense-coding limit, MI = ln(1 + sigma_cb^2 e^{2r}).
inline double mi_dense_ideal(const DenseCodingBudget& budget) {
  return std::log1p(budget.sigma_cb_sq * std::exp(2.0 * budget.r));
}

/// Direct coherent-state communication at the same ensemble variance,
/// reserving sigma_st^2 = 0.25 for the transmitted state:
/// MI = ln(1 + (sigma_ens^2 - 0.25) s_conv).
inline double mi_coherent_baseline(double sigma_ens_sq, double s_conv = 1.0) {
  if (sigma_ens_sq < 0.25) {
    throw std::invalid_argument("mi_coherent_baseline: ensemble variance below 0.25");
  }
  return std::log1p((sigma_ens_sq - 0.25) * s_conv);
}

/// Per-unit-codebook SNR gains of the simulated decoder for the two
/// quadrature channels; the ideal device gives (e^{2r}, e^{2r}).
struct DenseChannelGains {
  double g_x = 0.0;
  double g_p = 0.0;
};

/// Simulated encode/decode: displacement on the transmitted resource arm,
/// channel loss, a balanced hybrid, one amplifier per arm (gain G with
/// imbalance and excess noise) and quadrature readout of each arm.
inline DenseChannelGains dense_channel_gains(double squeezing_db, double gain_db,
                                             const DeviceModel& device) {
  if (gain_db < 0) {
    throw std::invalid_argument("dense_channel_gains: gain must be >= 0 dB");
  }
  validate_device(device);
  GaussianState<double> state = make_tms_resource(squeezing_db, device);
  // unit probe displacement in both quadratures fixes the signal coefficients
  state = displace(state, 0, Complex(1.0, 1.0));
  if (device.path_efficiency < 1.0) {
    state = loss_channel(state, 0, device.path_efficiency, device.environment_nbar);
    state = loss_channel(state, 1, device.path_efficiency, device.environment_nbar);
  }
  state = beam_splitter(state, 0, 1, 0.5, 0.0);
  // wire 0 carries the p channel (p amplified), wire 1 the x channel
  const double r = gain_db_to_tms_r(gain_db);
  const double eps = device.interferometer_imbalance;
  const double r0 = r * (1.0 + eps);
  const double r1 = r * (1.0 - eps);
  state = squeeze(state, 0, r0, 0.0);
  state = squeeze(state, 1, r1, 3.14159265358979323846 / 2.0);
  const double n0 = detail::jpa_excess_variance(device, r0);
  const double n1 = detail::jpa_excess_variance(device, r1);
  if (n0 > 0) state = add_classical_noise(state, 0, n0);
  if (n1 > 0) state = add_classical_noise(state, 1, n1);

  const double coef_p = state.mean(1);  // p of wire 0
  const double coef_x = state.mean(2);  // x of wire 1
  const double var_p = state.cov(1, 1);
  const double var_x = state.cov(2, 2);
  return {coef_x * coef_x / (2.0 * var_x), coef_p * coef_p / (2.0 * var_p)};
}

/// MI of the simulated dense-coding link under the budgeted codebook,
/// MI = 1/2 ln(1 + sigma_cb^2 g_x) + 1/2 ln(1 + sigma_cb^2 g_p).
/// Returns nullopt when the budget is exhausted.
inline std::optional<double> mi_dense_simulated(double sigma_ens_sq, double squeezing_db,
                                                double gain_db, const DeviceModel& device,
                                                BudgetMode mode = BudgetMode::Device) {
  const auto budget = budget_from_squeezing(sigma_ens_sq, squeezing_db, mode, device);
  if (!budget) {
    return std::nullopt;
  }
  const DenseChannelGains gains = dense_channel_gains(squeezing_db, gain_db, device);
  return 0.5 * std::log1p(budget->sigma_cb_sq * gains.g_x) +
         0.5 * std::log1p(budget->sigma_cb_sq * gains.g_p);
}

/// Squeezing levels (dB) where the ideal dense-coding MI crosses the
/// coherent baseline at fixed ensemble variance, located by bisection.
inline std::vector<double> dense_ideal_advantage_crossings(double sigma_ens_sq,
                                                           double s_lo_db = 0.0,
                                                           double s_hi_db = 12.0,
                                                           double tol = 1e-8) {
  const double baseline = mi_coherent_baseline(sigma_ens_sq);
  const DeviceModel ideal = DeviceModel::ideal();
  const auto gap = [&](double s_db) {
    const auto budget = budget_from_squeezing(sigma_ens_sq, s_db, BudgetMode::Ideal, ideal);
    if (!budget) return -baseline;  // exhausted budget counts as no advantage
    return mi_dense_ideal(*budget) - baseline;
  };
  std::vector<double> crossings;
  constexpr int kScan = 600;
  double prev_s = s_lo_db;
  double prev_g = gap(prev_s);
  for (int i = 1; i <= kScan; ++i) {
    const double s = s_lo_db + (s_hi_db - s_lo_db) * i / kScan;
    const double g = gap(s);
    if ((prev_g > 0) != (g > 0)) {
      double lo = prev_s, hi = s, g_lo = prev_g;
      while (hi - lo > tol) {
        const double mid = (lo + hi) / 2.0;
        const double gm = gap(mid);
        if ((gm > 0) == (g_lo > 0)) {
          lo = mid;
          g_lo = gm;
        } else {
          hi = mid;
        }
      }
      crossings.push_back((lo + hi) / 2.0);
    }
    prev_s = s;
    prev_g = g;
  }
  return crossings;
}

}  // namespace cvqss
