// No-cloning thresholds, Gaussian-codebook fidelity averaging and the
// unconditional-security window search.

#pragma once

#include "cvqss/metrics.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

namespace cvqss {

/// Gaussian codebook: complex secrets drawn isotropically with
/// E[|alpha|^2] = sigma_sq (each quadrature component has variance
/// sigma_sq / 2).
struct CodebookSpec {
  double sigma_sq = 3.0;
  int quadrature_panels = 512;
};

/// Cloning bound for a codebook of every amplitude: F_nc = 2/3.
inline double nc_threshold_asymptotic() { return 2.0 / 3.0; }

/// Branch point of the Gaussian-codebook no-cloning threshold.
inline double nc_threshold_branch_point() { return 0.5 + 1.0 / std::sqrt(2.0); }

/// Codebook-dependent no-cloning fidelity threshold:
///   (4 s + 2) / (6 s + 1)          for s >= 1/2 + 1/sqrt2
///   1 / ((3 - 2 sqrt2) s + 1)      for s <= 1/2 + 1/sqrt2
inline double nc_threshold_gaussian(double sigma_sq) {
  if (sigma_sq < 0) {
    throw std::invalid_argument("nc_threshold_gaussian: sigma^2 must be >= 0");
  }
  if (sigma_sq >= nc_threshold_branch_point()) {
    return (4.0 * sigma_sq + 2.0) / (6.0 * sigma_sq + 1.0);
  }
  return 1.0 / ((3.0 - 2.0 * std::sqrt(2.0)) * sigma_sq + 1.0);
}

/// Codebook average of the gain/noise fidelity surface, closed form:
/// with A = 2/(1+4v) and B = 2 (sqrt k - 1)^2 / (1+4v),
///   Fbar(sigma^2) = A / (1 + B sigma^2),
/// the Laplace transform of F(|alpha|^2) over |alpha|^2 ~ Exp(sigma^2).
inline double codebook_average_fidelity(double k, double v_out, double sigma_sq) {
  if (k < 0 || v_out < 0.25 - 1e-12 || sigma_sq < 0) {
    throw std::invalid_argument("codebook_average_fidelity: invalid domain");
  }
  const double one_plus = 1.0 + 4.0 * v_out;
  const double mismatch = std::sqrt(k) - 1.0;
  const double a = 2.0 / one_plus;
  const double b = 2.0 * mismatch * mismatch / one_plus;
  return a / (1.0 + b * sigma_sq);
}

/// Closed-form average under a CodebookSpec.
inline double codebook_average_fidelity(double k, double v_out, const CodebookSpec& codebook) {
  return codebook_average_fidelity(k, v_out, codebook.sigma_sq);
}

/// Same average by direct numerical quadrature of
/// E[F(|alpha|^2)] with |alpha|^2 exponentially distributed (mean sigma^2).
/// Composite Gauss-Legendre; independent of the closed form above.
inline double codebook_average_fidelity_quad(double k, double v_out, double sigma_sq,
                                             int panels = 512) {
  if (k < 0 || v_out < 0.25 - 1e-12 || sigma_sq < 0) {
    throw std::invalid_argument("codebook_average_fidelity_quad: invalid domain");
  }
  if (sigma_sq == 0.0) {
    return fidelity_gain_noise(0.0, k, v_out);
  }
  // 5-point Gauss-Legendre nodes/weights on [-1, 1]
  static const double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                  0.5384693101056831, 0.9061798459386640};
  static const double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                    0.4786286704993665, 0.2369268850561891};
  const double upper = 60.0 * sigma_sq;  // exp(-60) tail is < 1e-26 of the mass
  const double h = upper / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = p * h;
    for (int q = 0; q < 5; ++q) {
      const double u = lo + h * (nodes[q] + 1.0) / 2.0;
      const double density = std::exp(-u / sigma_sq) / sigma_sq;
      sum += weights[q] * (h / 2.0) * density * fidelity_gain_noise(u, k, v_out);
    }
  }
  return sum;
}

inline double codebook_average_fidelity_quad(double k, double v_out,
                                             const CodebookSpec& codebook) {
  return codebook_average_fidelity_quad(k, v_out, codebook.sigma_sq,
                                        codebook.quadrature_panels);
}

/// Where the averaged fidelity exceeds the codebook no-cloning threshold.
struct SecurityWindow {
  bool secure = false;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double sigma_star = 0.0;   // argmax of the excess
  double delta_star = 0.0;   // max excess fidelity
};

namespace detail {

inline double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                          double f_lo, double tol) {
  // sign change guaranteed by the caller
  for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
    const double mid = (lo + hi) / 2.0;
    const double fm = f(mid);
    if ((fm > 0) == (f_lo > 0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2.0;
}

inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = f(a);
  double fb = f(b);
  while (hi - lo > tol) {
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
}

}  // namespace detail

/// Root-bracket Fbar(s) - F_nc(s) on [sigma_lo, sigma_hi], bisect the
/// endpoints to `tol`, and locate the excess maximum by golden section.
/// An empty window is a regular outcome (secure = false), not an error.
inline SecurityWindow security_window(const std::function<double(double)>& fbar_of_sigma_sq,
                                      double sigma_lo = 0.1, double sigma_hi = 20.0,
                                      double tol = 1e-6, int scan_points = 400) {
  const auto excess = [&](double s) { return fbar_of_sigma_sq(s) - nc_threshold_gaussian(s); };
  SecurityWindow window;

  double prev_s = sigma_lo;
  double prev_e = excess(prev_s);
  bool inside = prev_e > 0;
  double lo_edge = inside ? sigma_lo : 0.0;
  for (int i = 1; i <= scan_points; ++i) {
    const double s = sigma_lo + (sigma_hi - sigma_lo) * i / scan_points;
    const double e = excess(s);
    if (!inside && prev_e <= 0 && e > 0) {
      lo_edge = detail::bisect_root(excess, prev_s, s, prev_e, tol);
      inside = true;
    } else if (inside && e <= 0) {
      // first positive stretch defines the reported window
      window.secure = true;
      window.sigma_min = lo_edge;
      window.sigma_max = detail::bisect_root(excess, prev_s, s, prev_e, tol);
      break;
    }
    prev_s = s;
    prev_e = e;
  }
  if (!window.secure && inside) {
    // still above threshold at the end of the search range
    window.secure = true;
    window.sigma_min = lo_edge;
    window.sigma_max = sigma_hi;
  }
  if (!window.secure) {
    return window;
  }
  window.sigma_star = detail::golden_max(excess, window.sigma_min, window.sigma_max, tol);
  window.delta_star = excess(window.sigma_star);
  return window;
}

struct MiCheck {
  bool secure = false;
  double margin = 0.0;
};

/// Ordering check: the collaborators must learn strictly more.
inline MiCheck mi_security_check(double mi_collab, double mi_adv) {
  return {mi_collab > mi_adv, mi_collab - mi_adv};
}

}  // namespace cvqss
