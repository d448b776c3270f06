#pragma once

// Closed-form kernels on the strip R x (0, pi) for Brownian motion with
// generator (1/2) Laplacian: boundary Poisson kernel, interval heat kernel
// killed at {0, pi} (spectral and reflected-image representations), boundary
// hitting-time densities, their Laplace-transform kernel, the boundary jump
// intensity, and the scaled jump kernels with their closed tail integrals.

#include <algorithm>
#include <cmath>
#include <vector>

#include "striplab/common.hpp"
#include "striplab/quadrature.hpp"

namespace striplab {

// cosh(u) - 1 without cancellation near u = 0.
inline double cosh_m1(double u) {
  const double s = std::sinh(0.5 * u);
  return 2.0 * s * s;
}

// ---------------------------------------------------------------------------
// Poisson kernel of the strip; sign convention: minus for the lower line,
// plus for the upper line.  Raw form takes v = x1 - xi1 and does not validate.
// ---------------------------------------------------------------------------

inline double poisson_kernel_raw(double v, double x2, Side side) {
  const double denom = side == Side::lower ? std::cosh(v) - std::cos(x2)
                                           : std::cosh(v) + std::cos(x2);
  return std::sin(x2) / (kTwoPi * denom);
}

inline double poisson_kernel(const InteriorPoint& x, const BoundaryPoint& xi) {
  return poisson_kernel_raw(x.x1 - xi.xi1, x.x2, xi.side);
}

// d/dx1 and d/dx2 of the Poisson kernel at fixed boundary point (v = x1-xi1).
inline double poisson_kernel_dx1(double v, double x2, Side side) {
  const double c = side == Side::lower ? -std::cos(x2) : std::cos(x2);
  const double denom = std::cosh(v) + c;
  return -std::sin(x2) * std::sinh(v) / (kTwoPi * denom * denom);
}

inline double poisson_kernel_dx2(double v, double x2, Side side) {
  // lower: (cos x2 cosh v - 1)/(cosh v - cos x2)^2; upper flips both signs in
  // the numerator pairing: (cos x2 cosh v + 1)/(cosh v + cos x2)^2.
  if (side == Side::lower) {
    const double denom = std::cosh(v) - std::cos(x2);
    return (std::cos(x2) * std::cosh(v) - 1.0) / (kTwoPi * denom * denom);
  }
  const double denom = std::cosh(v) + std::cos(x2);
  return (std::cos(x2) * std::cosh(v) + 1.0) / (kTwoPi * denom * denom);
}

// Exact sideways mass of the Poisson kernel: lower 1 - x2/pi, upper x2/pi.
inline double poisson_side_mass(double x2, Side side) {
  return side == Side::lower ? 1.0 - x2 / kPi : x2 / kPi;
}

// ---------------------------------------------------------------------------
// Free one-dimensional Gaussian transition density.
// ---------------------------------------------------------------------------

inline double gaussian_transition(double t, double x1, double xi1) {
  if (!(t > 0.0)) throw std::invalid_argument("gaussian_transition: t must be positive");
  const double d = x1 - xi1;
  return std::exp(-d * d / (2.0 * t)) / std::sqrt(kTwoPi * t);
}

namespace detail {

inline void check_time(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("kernel time must be positive");
}

inline void check_x2(double x2) {
  if (!(x2 > 0.0 && x2 < kPi)) throw std::invalid_argument("x2 must lie in (0, pi)");
}

// Smallest N with sum_{n>N} n^p e^{-n^2 t/2} <= tol (p = 0 or 1), via the
// dominating geometric series e^{-n^2 t/2} <= e^{-N^2 t/2} e^{-(n-N) N t}.
inline int spectral_terms(double t, double tol, int p, int cap) {
  for (int N = 1; N <= cap; ++N) {
    const double r = std::exp(-N * t);
    if (r >= 1.0) continue;
    const double lead = (p == 0 ? 1.0 : N + 1.0) * std::exp(-0.5 * (N + 1.0) * (N + 1.0) * t);
    double bound = lead / (1.0 - r);
    if (p == 1) bound *= 1.0 + r / ((N + 1.0) * (1.0 - r));  // crude n-growth slack
    if (bound <= tol) return N;
  }
  throw std::invalid_argument("series truncation cap too small for requested tail tolerance");
}

// Smallest K with the |k| > K image terms of the t-Gaussian below tol.  The
// nearest excluded image can sit 2*pi*K away (the x2 + y2 family as x2 + y2
// approaches 2*pi), and the exit-density images carry a z/t prefactor, so the
// bound covers both.
inline int image_terms(double t, double tol, int cap) {
  const double norm = 1.0 / std::sqrt(kTwoPi * t);
  for (int K = 1; K <= cap; ++K) {
    const double z = kTwoPi * K;
    const double lead = norm * (1.0 + z / t) * std::exp(-z * z / (2.0 * t));
    const double ratio = std::exp(-kTwoPi * z / t);
    const double bound = 4.0 * lead / (1.0 - std::min(ratio, 0.5));
    if (bound <= tol) return K;
  }
  throw std::invalid_argument("image truncation cap too small for requested tail tolerance");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Heat kernel on (0, pi) killed at both ends, sine series form.
// ---------------------------------------------------------------------------

inline double killed_heat_kernel_spectral(double t, double x2, double y2,
                                          const SeriesTruncation& tr = {}) {
  detail::check_time(t);
  detail::check_x2(x2);
  detail::check_x2(y2);
  const int N = detail::spectral_terms(t, tr.tail_tol, 0, tr.n_max);
  double s = 0.0;
  for (int n = N; n >= 1; --n)
    s += std::exp(-0.5 * n * n * t) * std::sin(n * x2) * std::sin(n * y2);
  return 2.0 / kPi * s;
}

// Same kernel via reflected Gaussian images on the period-2pi lattice.
inline double killed_heat_kernel_image(double t, double x2, double y2,
                                       const SeriesTruncation& tr = {}) {
  detail::check_time(t);
  detail::check_x2(x2);
  detail::check_x2(y2);
  const int K = detail::image_terms(t, tr.tail_tol, tr.k_max);
  const double norm = 1.0 / std::sqrt(kTwoPi * t);
  double s = 0.0;
  for (int k = -K; k <= K; ++k) {
    const double a = x2 - y2 + kTwoPi * k;
    const double b = x2 + y2 + kTwoPi * k;
    s += std::exp(-a * a / (2.0 * t)) - std::exp(-b * b / (2.0 * t));
  }
  return norm * s;
}

inline double killed_heat_kernel(double t, double x2, double y2, const SeriesTruncation& tr = {}) {
  return t < tr.t_switch ? killed_heat_kernel_image(t, x2, y2, tr)
                         : killed_heat_kernel_spectral(t, x2, y2, tr);
}

// ---------------------------------------------------------------------------
// Density of (exit time, exit side) for the vertical coordinate started at x2.
// Upper-side density is the lower-side one reflected: h(t, x2, upper) =
// h(t, pi - x2, lower).
// ---------------------------------------------------------------------------

inline double hitting_density_spectral(double t, double x2, Side side,
                                       const SeriesTruncation& tr = {}) {
  detail::check_time(t);
  detail::check_x2(x2);
  const double y = side == Side::lower ? x2 : kPi - x2;
  const int N = detail::spectral_terms(t, tr.tail_tol, 1, tr.n_max);
  double s = 0.0;
  for (int n = N; n >= 1; --n) s += n * std::exp(-0.5 * n * n * t) * std::sin(n * y);
  return s / kPi;
}

inline double hitting_density_image(double t, double x2, Side side,
                                    const SeriesTruncation& tr = {}) {
  detail::check_time(t);
  detail::check_x2(x2);
  const double y = side == Side::lower ? x2 : kPi - x2;
  const int K = detail::image_terms(t, tr.tail_tol, tr.k_max);
  const double norm = 1.0 / std::sqrt(kTwoPi * t);
  double s = 0.0;
  for (int k = -K; k <= K; ++k) {
    const double z = y + kTwoPi * k;
    s += z / t * std::exp(-z * z / (2.0 * t));
  }
  return norm * s;
}

inline double hitting_density(double t, double x2, Side side, const SeriesTruncation& tr = {}) {
  return t < tr.t_switch ? hitting_density_image(t, x2, side, tr)
                         : hitting_density_spectral(t, x2, side, tr);
}

// P(exit time <= t, exit side = side); integrates the density in closed form
// per term.  Total mass over t is poisson_side_mass(x2, side).
inline double hitting_cdf(double t, double x2, Side side, const SeriesTruncation& tr = {}) {
  detail::check_time(t);
  detail::check_x2(x2);
  const double y = side == Side::lower ? x2 : kPi - x2;
  if (t < tr.t_switch) {
    // per-image first-passage law: sign(z) erfc(|z|/sqrt(2t))
    const int K = detail::image_terms(t, tr.tail_tol, tr.k_max);
    double s = 0.0;
    for (int k = -K; k <= K; ++k) {
      const double z = y + kTwoPi * k;
      s += (z >= 0.0 ? 1.0 : -1.0) * std::erfc(std::abs(z) / std::sqrt(2.0 * t));
    }
    return s;
  }
  const int N = detail::spectral_terms(t, tr.tail_tol, 1, tr.n_max);
  double s = 0.0;
  for (int n = N; n >= 1; --n) s += std::exp(-0.5 * n * n * t) * std::sin(n * y) * 2.0 / n;
  return (1.0 - y / kPi) - s / kPi;
}

// ---------------------------------------------------------------------------
// Laplace-transform kernel: time-integrated Gaussian x hitting density.
// Reduces to the Poisson kernel at alpha = 0.
// ---------------------------------------------------------------------------

inline Integral alpha_poisson_kernel(double alpha, const InteriorPoint& x,
                                     const BoundaryPoint& xi, double tol = 1e-10,
                                     const SeriesTruncation& tr = {}) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");
  const double y = boundary_distance(x.x2, xi.side);
  const double d = x.x1 - xi.xi1;
  // integrand dies like e^{-y^2/2t} at small t and e^{-(alpha+1/2) t} at large t
  const double t_lo = y * y / 60.0;
  const double t_hi = 42.0 / (alpha + 0.5);
  if (t_hi <= t_lo) return {0.0, 0.0};
  std::vector<double> pts{t_lo};
  for (double s : {y * y / 8.0, y * y, 4.0 * y * y, 0.25 / (alpha + 0.5), 1.0 / (alpha + 0.5),
                   4.0 / (alpha + 0.5), 1.0, 4.0})
    if (s > t_lo && s < t_hi) pts.push_back(s);
  pts.push_back(t_hi);
  std::sort(pts.begin(), pts.end());
  auto f = [&](double t) {
    return std::exp(-alpha * t) * gaussian_transition(t, d, 0.0) *
           hitting_density(t, x.x2, xi.side, tr);
  };
  Integral res = integrate_path(f, pts, tol);
  res.error += 1e-13;  // allowance for the truncated head/tail of the t-range
  return res;
}

// ---------------------------------------------------------------------------
// Boundary jump intensity: same side 1/(4pi(cosh D - 1)), opposite sides
// 1/(4pi(cosh D + 1)).  The same-side diagonal is a deliberate +infinity.
// ---------------------------------------------------------------------------

inline double feller_density(const BoundaryPoint& a, const BoundaryPoint& b) {
  const double d = a.xi1 - b.xi1;
  if (a.side == b.side) {
    if (d == 0.0) return kInf;  // tagged diagonal value
    return 1.0 / (4.0 * kPi * cosh_m1(d));
  }
  return 1.0 / (4.0 * kPi * (std::cosh(d) + 1.0));
}

// ---------------------------------------------------------------------------
// Scaled jump kernels of the squeezed/stretched boundary forms and their
// closed tail integrals.  k2 increases to kinf(u) = 2/u^2 as ell grows.
// ---------------------------------------------------------------------------

inline void check_ell(double ell) {
  if (!(ell > 0.0)) throw std::invalid_argument("ell must be positive");
}

inline double jump_kernel_k1(double ell, double u) {
  check_ell(ell);
  return 1.0 / (2.0 * ell * ell * (std::cosh(u / ell) + 1.0));
}

inline double jump_kernel_k2(double ell, double u) {
  check_ell(ell);
  if (u == 0.0) return kInf;  // tagged diagonal value
  return 1.0 / (ell * ell * cosh_m1(u / ell));
}

inline double jump_kernel_kinf(double u) {
  if (u == 0.0) return kInf;
  return 2.0 / (u * u);
}

// int_R k1 = 1/ell; the tails below are int_{|u| > U} of each kernel.
inline double jump_kernel_k1_total(double ell) {
  check_ell(ell);
  return 1.0 / ell;
}

inline double jump_kernel_k1_tail(double ell, double U) {
  check_ell(ell);
  return (1.0 - std::tanh(U / (2.0 * ell))) / ell;
}

inline double jump_kernel_k2_tail(double ell, double U) {
  check_ell(ell);
  return 2.0 * (1.0 / std::tanh(U / (2.0 * ell)) - 1.0) / ell;
}

inline double jump_kernel_kinf_tail(double U) { return 4.0 / U; }

}  // namespace striplab
