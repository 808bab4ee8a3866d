// The sharing pipeline as an erasure code over three independent channels:
// the eight erasure combinations, their exact average fidelity, the
// single-channel coherent baseline, and the fidelity-advantage map.

#pragma once

#include "cvqss/metrics.hpp"
#include "cvqss/protocol.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cvqss {

enum class RecoveryKind { Pair, Survivor, Vacuum };

struct ErasureScenario {
  std::array<bool, 3> erased = {false, false, false};
  double probability = 0.0;
  RecoveryKind kind = RecoveryKind::Pair;
  /// For Pair recoveries, the reconstruction scheme; for Survivor
  /// recoveries, the scheme whose excluded player is the survivor.
  Scheme scheme = Scheme::P12;
  /// Surviving wire for Survivor recoveries (0-based player index).
  Index survivor = 0;
};

/// The eight channel-erasure combinations and their best recoveries.
inline std::array<ErasureScenario, 8> scenario_table(double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("scenario_table: erasure probability must be in [0, 1]");
  }
  const double keep = 1.0 - lambda;
  const double p0 = keep * keep * keep;
  const double p1 = lambda * keep * keep;
  const double p2 = lambda * lambda * keep;
  const double p3 = lambda * lambda * lambda;
  return {{
      {{false, false, false}, p0, RecoveryKind::Pair, Scheme::P12, 0},
      {{true, false, false}, p1, RecoveryKind::Pair, Scheme::P23, 0},
      {{false, true, false}, p1, RecoveryKind::Pair, Scheme::P13, 0},
      {{false, false, true}, p1, RecoveryKind::Pair, Scheme::P12, 0},
      {{true, true, false}, p2, RecoveryKind::Survivor, Scheme::P12, 2},
      {{true, false, true}, p2, RecoveryKind::Survivor, Scheme::P13, 1},
      {{false, true, true}, p2, RecoveryKind::Survivor, Scheme::P23, 0},
      {{true, true, true}, p3, RecoveryKind::Vacuum, Scheme::P12, 0},
  }};
}

/// Fidelity of the scenario's best recovery against the secret. Erased
/// wires are replaced by vacuum (or the thermal background when
/// thermal_environment is set). A surviving P1 or P2 runs the pairwise
/// amplifier with the erased partner wire as a vacuum idler (the state the
/// excluded player of the named scheme can produce with the reconstruction
/// hardware); a surviving P3 holds a mean-zero share that no deterministic
/// processing improves, so it enters as-is.
inline double scenario_fidelity(const ErasureScenario& scenario, Complex alpha,
                                double squeezing_db, double gain_db, const DeviceModel& device,
                                bool optimize_rescale = false,
                                bool thermal_environment = false) {
  const GaussianState<double> secret = make_coherent(alpha);
  if (scenario.kind == RecoveryKind::Vacuum) {
    return fidelity(make_vacuum<double>(1), secret);
  }
  Shares shares = make_shares(alpha, squeezing_db, device);
  const double env = thermal_environment ? device.environment_nbar : 0.0;
  for (Index m = 0; m < 3; ++m) {
    if (scenario.erased[static_cast<std::size_t>(m)]) {
      shares.state = loss_channel(shares.state, m, 0.0, env);
    }
  }
  if (scenario.kind == RecoveryKind::Pair) {
    return fidelity(reconstruct_pair(shares, scenario.scheme, gain_db, device).output, secret);
  }
  if (scenario.survivor == 2) {
    const GaussianState<double> survivor = partial_trace(shares.state, {scenario.survivor});
    return adversary_best_fidelity(survivor, alpha, optimize_rescale);
  }
  const Scheme run = scenario.survivor == 0 ? Scheme::P13 : Scheme::P23;
  return fidelity(reconstruct_pair(shares, run, gain_db, device).output, secret);
}

/// The eight scenario fidelities at one secret amplitude (lambda-independent).
inline std::array<double, 8> scenario_fidelities(Complex alpha, double squeezing_db,
                                                 double gain_db, const DeviceModel& device,
                                                 bool optimize_rescale = false) {
  const auto table = scenario_table(0.5);  // probabilities unused here
  std::array<double, 8> f{};
  for (std::size_t i = 0; i < table.size(); ++i) {
    f[i] = scenario_fidelity(table[i], alpha, squeezing_db, gain_db, device, optimize_rescale);
  }
  return f;
}

/// Probability-weighted average fidelity over the eight scenarios.
inline double average_fidelity(Complex alpha, double lambda, double squeezing_db, double gain_db,
                               const DeviceModel& device, bool optimize_rescale = false) {
  const auto table = scenario_table(lambda);
  const auto fids = scenario_fidelities(alpha, squeezing_db, gain_db, device, optimize_rescale);
  double sum = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    sum += table[i].probability * fids[i];
  }
  return sum;
}

/// Perfect coherent states through a single erasure channel:
/// F_coh = 1 - lambda (1 - e^{-|alpha|^2}).
inline double coherent_baseline(Complex alpha, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("coherent_baseline: erasure probability must be in [0, 1]");
  }
  return 1.0 - lambda * (1.0 - std::exp(-std::norm(alpha)));
}

struct AdvantageGrid {
  double alpha_sq_lo = 0.0;
  double alpha_sq_hi = 10.0;
  int n_alpha = 101;
  double lambda_lo = 0.0;
  double lambda_hi = 1.0;
  int n_lambda = 101;
};

struct AdvantageMap {
  std::vector<double> alpha_sq;
  std::vector<double> lambda;
  MatrixX<double> delta;  // rows follow alpha_sq, columns follow lambda
  std::vector<std::pair<double, double>> zero_contour;  // (alpha_sq, lambda)
  double max_alpha_sq = 0.0;
  double max_lambda = 0.0;
  double max_delta = 0.0;
};

/// Fidelity advantage Delta F = F_bar - F_coh over an (|alpha|^2, lambda)
/// grid; the grid maximum is polished by alternating golden-section line
/// searches to 1e-4 in both coordinates.
inline AdvantageMap advantage_map(const AdvantageGrid& grid, double squeezing_db, double gain_db,
                                  const DeviceModel& device, bool optimize_rescale = false) {
  if (grid.n_alpha < 2 || grid.n_lambda < 2) {
    throw std::invalid_argument("advantage_map: need at least a 2x2 grid");
  }
  AdvantageMap map;
  map.alpha_sq.resize(grid.n_alpha);
  map.lambda.resize(grid.n_lambda);
  for (int i = 0; i < grid.n_alpha; ++i) {
    map.alpha_sq[i] =
        grid.alpha_sq_lo + (grid.alpha_sq_hi - grid.alpha_sq_lo) * i / (grid.n_alpha - 1);
  }
  for (int j = 0; j < grid.n_lambda; ++j) {
    map.lambda[j] =
        grid.lambda_lo + (grid.lambda_hi - grid.lambda_lo) * j / (grid.n_lambda - 1);
  }
  map.delta.resize(grid.n_alpha, grid.n_lambda);

  const auto delta_of = [&](double alpha_sq, double lambda) {
    const Complex alpha(std::sqrt(alpha_sq), 0.0);
    return average_fidelity(alpha, lambda, squeezing_db, gain_db, device, optimize_rescale) -
           coherent_baseline(alpha, lambda);
  };

  int best_i = 0;
  int best_j = 0;
  for (int i = 0; i < grid.n_alpha; ++i) {
    const Complex alpha(std::sqrt(map.alpha_sq[i]), 0.0);
    const auto fids =
        scenario_fidelities(alpha, squeezing_db, gain_db, device, optimize_rescale);
    for (int j = 0; j < grid.n_lambda; ++j) {
      const auto table = scenario_table(map.lambda[j]);
      double fbar = 0.0;
      for (std::size_t s = 0; s < table.size(); ++s) {
        fbar += table[s].probability * fids[s];
      }
      map.delta(i, j) = fbar - coherent_baseline(alpha, map.lambda[j]);
      if (map.delta(i, j) > map.delta(best_i, best_j)) {
        best_i = i;
        best_j = j;
      }
    }
  }

  // zero contour by linear interpolation along lambda at each alpha row
  for (int i = 0; i < grid.n_alpha; ++i) {
    for (int j = 0; j + 1 < grid.n_lambda; ++j) {
      const double a = map.delta(i, j);
      const double b = map.delta(i, j + 1);
      if ((a > 0) != (b > 0)) {
        const double t = a / (a - b);
        map.zero_contour.emplace_back(map.alpha_sq[i],
                                      map.lambda[j] + t * (map.lambda[j + 1] - map.lambda[j]));
      }
    }
  }

  // polish the maximum with alternating 1-D golden sections
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto golden_1d = [&](auto f, double lo, double hi) {
    double a = hi - inv_phi * (hi - lo);
    double b = lo + inv_phi * (hi - lo);
    double fa = f(a);
    double fb = f(b);
    while (hi - lo > 1e-5) {
      if (fa < fb) {
        lo = a;
        a = b;
        fa = fb;
        b = lo + inv_phi * (hi - lo);
        fb = f(b);
      } else {
        hi = b;
        b = a;
        fb = fa;
        a = hi - inv_phi * (hi - lo);
        fa = f(a);
      }
    }
    return (lo + hi) / 2.0;
  };

  double a_star = map.alpha_sq[best_i];
  double l_star = map.lambda[best_j];
  const double da = (grid.alpha_sq_hi - grid.alpha_sq_lo) / (grid.n_alpha - 1);
  const double dl = (grid.lambda_hi - grid.lambda_lo) / (grid.n_lambda - 1);
  for (int round = 0; round < 4; ++round) {
    const double a_lo = std::max(grid.alpha_sq_lo, a_star - 2 * da);
    const double a_hi = std::min(grid.alpha_sq_hi, a_star + 2 * da);
    a_star = golden_1d([&](double a) { return delta_of(a, l_star); }, a_lo, a_hi);
    const double l_lo = std::max(grid.lambda_lo, l_star - 2 * dl);
    const double l_hi = std::min(grid.lambda_hi, l_star + 2 * dl);
    l_star = golden_1d([&](double l) { return delta_of(a_star, l); }, l_lo, l_hi);
  }
  map.max_alpha_sq = a_star;
  map.max_lambda = l_star;
  map.max_delta = delta_of(a_star, l_star);
  return map;
}

}  // namespace cvqss
