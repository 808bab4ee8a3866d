#include "cvqss/protocol.hpp"
#include "cvqss/security.hpp"

#include <doctest.h>

#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace cvqss;

namespace {

/// Covariance oracle for the ideal {2,3} output: v = eta^2 (v_in + V_N) with
/// V_N = [(1+gamma^2) cosh 2r - 2 gamma sinh 2r] / 4.
double ideal_23_vout(double s_db, double g_db, double v_in = 0.25) {
  const double r = db_to_squeeze_r(s_db);
  const double gamma = gain_db_to_gamma(g_db);
  const double eta = eta_of_gamma(gamma);
  const double vn =
      ((1 + gamma * gamma) * std::cosh(2 * r) - 2 * gamma * std::sinh(2 * r)) / 4.0;
  return eta * eta * (v_in + vn);
}

}  // namespace

TEST_SUITE_BEGIN("protocol");

TEST_CASE("tms resource: vacuum at S=0, ideal negativity at 6 dB") {
  const auto dev = DeviceModel::ideal();
  const auto flat = make_tms_resource(0.0, dev);
  CHECK((flat.cov - make_vacuum<double>(2).cov).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(flat.mean.isZero(0.0));

  const auto tms = make_tms_resource(6.0, dev);
  const double r = db_to_squeeze_r(6.0);
  CHECK(negativity(tms) == doctest::Approx((std::exp(2 * r) - 1) / 2.0).epsilon(1e-10));
  CHECK(negativity(tms) == doctest::Approx(1.49054).epsilon(1e-4));
  CHECK(purity(tms) == doctest::Approx(1.0).epsilon(1e-10));

  DeviceModel noisy = dev;
  noisy.jpa_noise_coeff = 0.05;
  double prev_purity = 1.1;
  for (double s : {2.0, 4.0, 6.0, 8.0}) {
    const double mu = purity(make_tms_resource(s, noisy));
    CHECK(mu < 1.0);
    CHECK(mu < prev_purity);
    prev_purity = mu;
  }
  CHECK_THROWS_AS(make_tms_resource(-1.0, dev), std::invalid_argument);
}

TEST_CASE("dealer splits the secret as Eqs-(1)-(3)") {
  const auto dev = DeviceModel::ideal();
  const Complex alpha{1.1, -0.4};

  // S = 0: player means are alpha/sqrt2, alpha/sqrt2, 0
  const auto shares = make_shares(alpha, 0.0, dev);
  const Complex half = alpha / std::sqrt(2.0);
  CHECK(shares.state.amplitude(0).real() == doctest::Approx(half.real()).epsilon(1e-12));
  CHECK(shares.state.amplitude(1).real() == doctest::Approx(half.real()).epsilon(1e-12));
  CHECK(std::abs(shares.state.amplitude(2)) < 1e-14);

  // P3 never interacts with the secret
  const auto shares_b = make_shares({2.0, 1.0}, 5.0, dev);
  CHECK(std::abs(shares_b.state.amplitude(2)) < 1e-14);

  // local variance of P1 grows with S (the resource obscures the secret)
  double prev = 0.0;
  for (double s : {0.0, 2.0, 4.0, 6.0, 8.0}) {
    const auto sh = make_shares(alpha, s, dev);
    const double v = sh.state.symmetrized_variance(0);
    const double expect = (0.25 + std::cosh(2 * db_to_squeeze_r(s)) / 4.0) / 2.0;
    CHECK(v == doctest::Approx(expect).epsilon(1e-12));
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("{1,2} reconstruction is exact for an ideal device") {
  const auto dev = DeviceModel::ideal();
  const Complex alpha{0.9, 0.7};
  const auto secret = make_coherent(alpha);
  for (double s = 0.0; s <= 10.0; s += 1.0) {
    const auto rec = reconstruct_12(make_shares(alpha, s, dev), dev);
    CHECK(fidelity(rec.output, secret) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rec.sqrt_gain == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rec.v_out == doctest::Approx(0.25).epsilon(1e-9));
  }
}

TEST_CASE("{1,2} fidelity degrades with squeezing under phase mismatch") {
  DeviceModel dev = DeviceModel::ideal();
  dev.hybrid_phase_mismatch = 0.12;
  const Complex alpha{1.140175, 0.0};  // |alpha|^2 = 1.3
  const auto secret = make_coherent(alpha);
  double prev = 1.1;
  for (double s : {0.0, 2.0, 4.0, 6.0, 8.0, 10.0}) {
    const double f = fidelity(reconstruct_12(make_shares(alpha, s, dev), dev).output, secret);
    CHECK(f < prev);
    prev = f;
  }
  // oracle: v_out = cos^2(phi/2) v_in + sin^2(phi/2) cosh(2r)/4
  const double phi = dev.hybrid_phase_mismatch;
  const auto rec = reconstruct_12(make_shares(alpha, 6.0, dev), dev);
  const double c2 = std::cos(phi / 2) * std::cos(phi / 2);
  const double expect = c2 * 0.25 + (1 - c2) * std::cosh(2 * db_to_squeeze_r(6.0)) / 4.0;
  CHECK(rec.v_out == doctest::Approx(expect).epsilon(1e-10));
  CHECK(rec.sqrt_gain == doctest::Approx(std::cos(phi / 2)).epsilon(1e-10));
}

TEST_CASE("thermal input keeps {1,2} reconstruction below unit fidelity") {
  DeviceModel dev = DeviceModel::thermal_input();
  const Complex alpha{1.0, 0.0};
  const auto rec = reconstruct_12(make_shares(alpha, 4.0, dev), dev);
  const double f = fidelity(rec.output, make_coherent(alpha));
  CHECK(f < 1.0);
  CHECK(f > 0.98);  // the 50 mK admixture is weak
}

TEST_CASE("gain mapping: gamma-eta identity and unit-gain point") {
  for (double g_db : {0.0, 2.0, 4.0, 7.0, 7.6551, 10.0, 13.0}) {
    const double gamma = gain_db_to_gamma(g_db);
    const double eta = eta_of_gamma(gamma);
    // eta = 1/sqrt(2 - gamma^2) equals cosh(r_G)/sqrt2 for every gain
    CHECK(eta == doctest::Approx(std::cosh(gain_db_to_tms_r(g_db)) / std::sqrt(2.0))
                     .epsilon(1e-12));
  }
  // unit amplitude gain at G_lin = (sqrt2+1)/(sqrt2-1)
  const double g_opt_lin = (std::sqrt(2.0) + 1.0) / (std::sqrt(2.0) - 1.0);
  const double g_opt_db = 10.0 * std::log10(g_opt_lin);
  CHECK(gain_db_to_gamma(g_opt_db) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eta_of_gamma(gain_db_to_gamma(g_opt_db)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("{2,3} reconstruction matches the covariance oracle") {
  const auto dev = DeviceModel::ideal();
  const Complex alpha{0.8, 0.35};

  // no entanglement, pass-through gain: output is the bare share
  const auto rec0 = reconstruct_23(make_shares(alpha, 0.0, dev), 0.0, dev);
  CHECK(rec0.sqrt_gain == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(rec0.v_out == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(fidelity(rec0.output, make_coherent(alpha)) ==
        doctest::Approx(fidelity_gain_noise(std::norm(alpha), 0.5, 0.25)).epsilon(1e-10));

  for (double s : {2.0, 6.0, 9.0}) {
    for (double g : {1.0, 4.0, 7.0, 10.0}) {
      const auto rec = reconstruct_23(make_shares(alpha, s, dev), g, dev);
      const double eta = eta_of_gamma(gain_db_to_gamma(g));
      CHECK(rec.sqrt_gain == doctest::Approx(eta).epsilon(1e-10));
      CHECK(rec.v_out == doctest::Approx(ideal_23_vout(s, g)).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(reconstruct_23(make_shares(alpha, 6.0, dev), -1.0, dev),
                  std::invalid_argument);
}

TEST_CASE("{2,3} output is exactly pure at gamma = tanh(r)") {
  const auto dev = DeviceModel::ideal();
  const Complex alpha{0.5, 0.0};
  for (double s : {3.0, 6.0, 9.0, 12.0}) {
    const double r = db_to_squeeze_r(s);
    // invert gamma = sqrt2 tanh(r_G) at gamma = tanh(r)
    const double r_g = std::atanh(std::tanh(r) / std::sqrt(2.0));
    const double g_db = squeeze_r_to_db(r_g);
    const auto rec = reconstruct_23(make_shares(alpha, s, dev), g_db, dev);
    CHECK(rec.v_out == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(purity(rec.output) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("fidelity rises toward one with squeezing at the unit-gain point") {
  const auto dev = DeviceModel::ideal();
  const Complex alpha{1.140175, 0.0};
  const auto secret = make_coherent(alpha);
  const double g_opt_db = 10.0 * std::log10((std::sqrt(2.0) + 1.0) / (std::sqrt(2.0) - 1.0));
  double prev = 0.0;
  for (double s : {2.0, 4.0, 6.0, 8.0, 10.0, 12.0}) {
    const double f =
        fidelity(reconstruct_23(make_shares(alpha, s, dev), g_opt_db, dev).output, secret);
    CHECK(f > prev);
    prev = f;
  }
  CHECK(prev > 0.93);
}

TEST_CASE("{1,3} and {2,3} agree under player relabeling") {
  const auto dev = DeviceModel::ideal();
  const Complex alpha{0.7, -1.1};
  for (double s : {0.0, 4.0, 8.0}) {
    for (double g : {0.0, 5.0, 9.0}) {
      const auto shares = make_shares(alpha, s, dev);
      const auto r23 = reconstruct_23(shares, g, dev);
      const auto r13 = reconstruct_13(shares, g, dev);
      CHECK(r13.sqrt_gain == doctest::Approx(r23.sqrt_gain).epsilon(1e-10));
      CHECK(r13.v_out == doctest::Approx(r23.v_out).epsilon(1e-10));
      CHECK((r13.output.mean - r23.output.mean).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((r13.output.cov - r23.output.cov).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("reported (k, v_out) reproduce the direct fidelity through the closed form") {
  const auto dev = DeviceModel::ideal();
  std::mt19937_64 rng(71);
  for (int i = 0; i < 30; ++i) {
    const Complex alpha{testing::uniform(rng, 0.1, 1.8), testing::uniform(rng, -1.0, 1.0)};
    const double s = testing::uniform(rng, 0.0, 10.0);
    const double g = testing::uniform(rng, 0.0, 10.0);
    const auto rec = reconstruct_23(make_shares(alpha, s, dev), g, dev);
    const double direct = fidelity(rec.output, make_coherent(alpha));
    const double closed =
        fidelity_gain_noise(std::norm(alpha), rec.sqrt_gain * rec.sqrt_gain, rec.v_out);
    CHECK(direct == doctest::Approx(closed).epsilon(1e-10));
  }
}

TEST_CASE("adversary views per scheme") {
  const auto dev = DeviceModel::ideal();
  const Complex alpha{1.2, 0.5};
  const auto shares = make_shares(alpha, 6.0, dev);

  // {1,2}: the excluded player holds the untouched resource arm
  const auto p3 = adversary_view(shares, Scheme::P12);
  CHECK(std::abs(p3.amplitude(0)) < 1e-14);

  // {2,3}: the excluded player keeps half the displacement
  const auto p1 = adversary_view(shares, Scheme::P23);
  CHECK(std::abs(p1.amplitude(0) - alpha / std::sqrt(2.0)) < 1e-12);

  const auto p2 = adversary_view(shares, Scheme::P13);
  CHECK(std::abs(p2.amplitude(0) - alpha / std::sqrt(2.0)) < 1e-12);

  // adversary variance grows with S in {2,3}
  double prev = 0.0;
  for (double s : {0.0, 3.0, 6.0, 9.0}) {
    const double v =
        adversary_view(make_shares(alpha, s, dev), Scheme::P23).symmetrized_variance(0);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("adversary fidelity: degenerate secret, k=0 reduction, rescaling") {
  const auto dev = DeviceModel::ideal();

  // alpha = 0 at low squeezing: adversary state is near vacuum
  const auto weak = make_shares({0.0, 0.0}, 1.0, dev);
  const double f0 = adversary_best_fidelity(adversary_view(weak, Scheme::P12), {0.0, 0.0});
  CHECK(f0 > 0.98);

  // {1,2} adversary at |alpha|^2 = 1.3 equals the k=0 closed form at the
  // resource's local variance
  const Complex alpha{std::sqrt(1.3), 0.0};
  for (double s : {2.0, 6.0, 10.0}) {
    const auto adv = adversary_view(make_shares(alpha, s, dev), Scheme::P12);
    const double v = std::cosh(2 * db_to_squeeze_r(s)) / 4.0;
    CHECK(adversary_best_fidelity(adv, alpha) ==
          doctest::Approx(fidelity_gain_noise(1.3, 0.0, v)).epsilon(1e-10));
  }

  // rescaling can only help, and for a mean-zero share it changes nothing
  const auto adv23 = adversary_view(make_shares(alpha, 6.0, dev), Scheme::P23);
  CHECK(adversary_best_fidelity(adv23, alpha, true) >=
        adversary_best_fidelity(adv23, alpha, false));
  const auto adv12 = adversary_view(make_shares(alpha, 6.0, dev), Scheme::P12);
  CHECK(adversary_best_fidelity(adv12, alpha, true) ==
        doctest::Approx(adversary_best_fidelity(adv12, alpha, false)).epsilon(1e-12));
}

TEST_CASE("collaborators at their best gain never lose to the adversary") {
  const auto dev = DeviceModel::ideal();
  const Complex alpha{1.140175, 0.0};
  const auto secret = make_coherent(alpha);
  for (double s : {0.0, 1.0, 3.0, 6.0, 9.0}) {
    const auto shares = make_shares(alpha, s, dev);
    const double g_best = optimal_gain_db(s, std::norm(alpha), dev);
    const double f_collab = fidelity(reconstruct_23(shares, g_best, dev).output, secret);
    const double f_adv = adversary_best_fidelity(adversary_view(shares, Scheme::P23), alpha);
    CHECK(f_collab >= f_adv - 1e-9);  // equality at S = 0
    if (s > 0.5) CHECK(f_collab > f_adv);
  }
}

TEST_CASE("{2,3} fidelity at the optimal gain increases strictly with squeezing") {
  const auto dev = DeviceModel::ideal();
  const double alpha_sq = 1.3;
  const Complex alpha{std::sqrt(alpha_sq), 0.0};
  const auto secret = make_coherent(alpha);
  double prev = 0.0;
  for (double s = 0.0; s <= 10.0; s += 1.0) {
    const double g = optimal_gain_db(s, alpha_sq, dev);
    const double f = fidelity(reconstruct_23(make_shares(alpha, s, dev), g, dev).output, secret);
    CHECK(f > prev);
    prev = f;
  }
}

TEST_CASE("small-amplitude optimum sits near the pure point, not unit gain") {
  // The fidelity-optimal gain at small |alpha|^2 tracks gamma = tanh(r_S);
  // the unit-gain point (sqrt2+1)/(sqrt2-1) is only reached as S -> inf.
  const auto dev = DeviceModel::ideal();
  const double s_db = 12.0;
  const double g_best = optimal_gain_db(s_db, 0.1, dev);
  const double gamma_best = gain_db_to_gamma(g_best);
  const double tanh_r = std::tanh(db_to_squeeze_r(s_db));
  CHECK(gamma_best == doctest::Approx(tanh_r).epsilon(0.01));
  CHECK(gamma_best < 0.95);
}

TEST_CASE("interferometer imbalance breaks the output isotropy") {
  DeviceModel dev = DeviceModel::ideal();
  const Complex alpha{1.0, 0.0};
  const auto even = reconstruct_23(make_shares(alpha, 6.0, dev), 7.0, dev);
  CHECK(even.output.cov(0, 0) == doctest::Approx(even.output.cov(1, 1)).epsilon(1e-12));

  dev.interferometer_imbalance = 0.05;
  const auto skew = reconstruct_23(make_shares(alpha, 6.0, dev), 7.0, dev);
  CHECK(std::abs(skew.output.cov(0, 0) - skew.output.cov(1, 1)) > 1e-4);
  CHECK(is_admissible(skew.output));
  // the symmetrized variance reported still averages the two quadratures
  CHECK(skew.v_out ==
        doctest::Approx((skew.output.cov(0, 0) + skew.output.cov(1, 1)) / 2.0).epsilon(1e-12));
}

TEST_CASE("mi ordering in {2,3} holds iff gamma <= 2 tanh(r)") {
  const auto dev = DeviceModel::ideal();
  const Complex alpha{1.0, 0.0};
  for (double s : {2.0, 4.0, 6.0, 8.0}) {
    for (double g : {2.0, 5.0, 8.0, 10.0}) {
      ProtocolParams params{s, g, alpha, Scheme::P23};
      const auto t = run_protocol(params, dev, 3.0);
      const bool predicted = gain_db_to_gamma(g) <= 2.0 * std::tanh(db_to_squeeze_r(s)) + 1e-12;
      CHECK(mi_security_check(t.mi_collab, t.mi_adv).secure == predicted);
    }
  }
}

TEST_CASE("run_protocol composes the tested parts") {
  const auto dev = DeviceModel::ideal();
  const Complex alpha{1.0, 0.3};

  ProtocolParams p12{6.0, 8.0, alpha, Scheme::P12};
  const auto t12 = run_protocol(p12, dev, 3.0);
  CHECK(t12.f_collab == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(t12.mi_adv == 0.0);  // mean-zero adversary share carries no signal
  CHECK(t12.mi_collab == doctest::Approx(std::log(13.0)).epsilon(1e-9));

  ProtocolParams p23{6.0, 7.0, alpha, Scheme::P23};
  const auto t23 = run_protocol(p23, dev, 3.0);
  CHECK(t23.f_collab ==
        doctest::Approx(fidelity_gain_noise(std::norm(alpha),
                                            t23.reconstruction.sqrt_gain *
                                                t23.reconstruction.sqrt_gain,
                                            t23.reconstruction.v_out))
            .epsilon(1e-9));
  CHECK(t23.resource_negativity > 0.0);
  CHECK(t23.f_collab > t23.f_adv);

  ProtocolParams p13{6.0, 7.0, alpha, Scheme::P13};
  const auto t13 = run_protocol(p13, dev, 3.0);
  CHECK(t13.f_collab == doctest::Approx(t23.f_collab).epsilon(1e-10));
  CHECK(t13.f_adv == doctest::Approx(t23.f_adv).epsilon(1e-10));

  // the metric report mirrors the transcript fields
  CHECK(t23.metrics.fidelity == t23.f_collab);
  CHECK(t23.metrics.mi_nats == t23.mi_collab);
  CHECK(t23.metrics.purity == t23.resource_purity);
  CHECK(t23.metrics.negativity == t23.resource_negativity);
  CHECK(t23.metrics.n_eff == t23.n_eff_collab);
}

TEST_SUITE_END();
