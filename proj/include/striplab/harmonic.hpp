#pragma once

// Harmonic and damped (alpha-order) extension of boundary data into the
// strip: boundary-kernel quadrature, gradients, and the squared L2 norm of
// the extension over the strip.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "striplab/boundary_data.hpp"
#include "striplab/common.hpp"
#include "striplab/kernels.hpp"
#include "striplab/quadrature.hpp"

namespace striplab {

struct ExtensionValue {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// quadrature breakpoints for a boundary integral against a kernel peaked at
// x1 with exponential decay; near the boundary the peak narrows to the
// height scale, so a geometric ladder of splits brackets it
inline std::vector<double> boundary_splits(double x1, const SupportRange& r, double peak) {
  std::vector<double> pts{r.lo, r.hi};
  auto push = [&](double s) {
    if (s > r.lo && s < r.hi) pts.push_back(s);
  };
  push(x1);
  for (double s = std::max(peak, 1e-7); s < 2.0; s *= 4.0) {
    push(x1 - s);
    push(x1 + s);
  }
  push(x1 - 5.0);
  push(x1 + 5.0);
  std::sort(pts.begin(), pts.end());
  return pts;
}

// x2-direction breakpoints resolving both boundary layers of the strip
inline std::vector<double> strip_height_splits(double scale = 1e-4) {
  std::vector<double> pts{0.0};
  for (double s = scale; s < 0.7; s *= 4.0) pts.push_back(s);
  pts.push_back(kPi / 2.0);
  for (double s = 0.7; s > scale / 4.0; s /= 4.0) pts.push_back(kPi - s);
  pts.push_back(kPi);
  std::sort(pts.begin(), pts.end());
  return pts;
}

// sinh(sqrt(2a) * y) / sinh(sqrt(2a) * pi) without overflow
inline double damped_side_mass(double alpha, double y) {
  const double s = std::sqrt(2.0 * alpha);
  const double num = -std::expm1(-2.0 * s * y);
  const double den = -std::expm1(-2.0 * s * kPi);
  return std::exp(s * (y - kPi)) * num / den;
}

}  // namespace detail

inline ExtensionValue harmonic_extension(const BoundaryPair& phi, const InteriorPoint& x,
                                         double tol = 1e-9) {
  ExtensionValue out;
  for (Side side : {Side::lower, Side::upper}) {
    const BoundaryFunction& f = phi.on(side);
    if (f.is_zero()) continue;
    if (f.kind() == DataKind::constant) {
      out.value += f(0.0) * poisson_side_mass(x.x2, side);
      continue;
    }
    const SupportRange r = f.range(1e-16);
    const double peak = boundary_distance(x.x2, side);
    auto g = [&](double xi) { return f(xi) * poisson_kernel_raw(x.x1 - xi, x.x2, side); };
    const Integral part = integrate_path(g, detail::boundary_splits(x.x1, r, peak), tol);
    out.value += part.value;
    out.error += part.error + 1e-15;  // support-truncation allowance
  }
  return out;
}

// (d/dx1, d/dx2) of the harmonic extension
inline std::array<ExtensionValue, 2> grad_harmonic_extension(const BoundaryPair& phi,
                                                             const InteriorPoint& x,
                                                             double tol = 1e-9) {
  std::array<ExtensionValue, 2> out{};
  for (Side side : {Side::lower, Side::upper}) {
    const BoundaryFunction& f = phi.on(side);
    if (f.is_zero()) continue;
    if (f.kind() == DataKind::constant) {
      // extension of a constant on one line is c * (linear-in-height mass)
      out[1].value += f(0.0) * (side == Side::lower ? -1.0 / kPi : 1.0 / kPi);
      continue;
    }
    const SupportRange r = f.range(1e-16);
    const auto pts = detail::boundary_splits(x.x1, r, boundary_distance(x.x2, side));
    auto g1 = [&](double xi) { return f(xi) * poisson_kernel_dx1(x.x1 - xi, x.x2, side); };
    auto g2 = [&](double xi) { return f(xi) * poisson_kernel_dx2(x.x1 - xi, x.x2, side); };
    const Integral p1 = integrate_path(g1, pts, tol);
    const Integral p2 = integrate_path(g2, pts, tol);
    out[0].value += p1.value;
    out[0].error += p1.error + 1e-15;
    out[1].value += p2.value;
    out[1].error += p2.error + 1e-15;
  }
  return out;
}

// Damped extension: expected boundary value at the exit point discounted by
// e^{-alpha * exit time}.  Computed as a single time integral of (exit-time
// density) x (free heat convolution of the data), which avoids nesting.
inline ExtensionValue alpha_harmonic_extension(double alpha, const BoundaryPair& phi,
                                               const InteriorPoint& x, double tol = 1e-9,
                                               const SeriesTruncation& tr = {}) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");
  if (alpha == 0.0) return harmonic_extension(phi, x, tol);
  ExtensionValue out;
  for (Side side : {Side::lower, Side::upper}) {
    const BoundaryFunction& f = phi.on(side);
    if (f.is_zero()) continue;
    const double y = boundary_distance(x.x2, side);
    if (f.kind() == DataKind::constant) {
      out.value += f(0.0) * detail::damped_side_mass(alpha, kPi - y);
      continue;
    }
    // reaching this side's support costs at least e^{-sqrt(2 alpha) d}
    // (hitting a line at distance d); below e^{-43} the contribution is
    // under the noise floor of everything downstream
    const SupportRange r = f.range(1e-16);
    const double dx = std::max({0.0, r.lo - x.x1, x.x1 - r.hi});
    if (std::sqrt(2.0 * alpha) * std::hypot(dx, y) > 43.0) continue;
    const double t_lo = y * y / 60.0;
    const double t_hi = 42.0 / (alpha + 0.5);
    if (t_hi <= t_lo) continue;
    // geometric knots through the arrival-time peak (scale y^2) and its
    // power-law shoulder, then uniform steps of 2.5/alpha so no panel spans
    // more than ~2.5 e-folds of the damping factor
    std::vector<double> pts{t_lo, t_hi};
    for (double s = y * y / 8.0; s < t_hi; s *= 4.0)
      if (s > t_lo) pts.push_back(s);
    const double dt = 2.5 / (alpha + 0.5);
    for (double s = dt; s < t_hi; s += dt)
      if (s > t_lo) pts.push_back(s);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto g = [&](double t) {
      return std::exp(-alpha * t) * hitting_density(t, x.x2, side, tr) *
             f.heat_convolution(t, x.x1);
    };
    const Integral part = integrate_path_budget(g, pts, tol, 10);
    out.value += part.value;
    out.error += part.error + 1e-13;
  }
  return out;
}

struct StripNormReport {
  double value = 0.0;
  double quad_error = 0.0;
  double tail_bound = 0.0;
};

namespace detail {

// cross-frequency moments of the two interpolation profiles
//   s(y) = sinh((pi - y) a) / sinh(pi a)   (weight of the lower line)
//   u(y) = sinh(y a) / sinh(pi a)          (weight of the upper line)
// profile_self_moment(a)  = int_0^pi s^2 dy = int_0^pi u^2 dy
// profile_cross_moment(a) = int_0^pi s u dy
// both with cancellation-safe small-frequency branches
inline double profile_self_moment(double a) {
  if (a < 0.05) {
    const double z = 4.0 * kPi * kPi * a * a;
    const double num =
        1.0 / 6.0 + z * (1.0 / 120.0 + z * (1.0 / 5040.0 + z * (1.0 / 362880.0 + z / 39916800.0)));
    const double den =
        1.0 + z * (1.0 / 12.0 + z * (1.0 / 360.0 + z * (1.0 / 20160.0 + z / 1814400.0)));
    return 2.0 * kPi * num / den;
  }
  const double q = std::exp(-2.0 * kPi * a);
  const double om = -std::expm1(-2.0 * kPi * a);
  return ((1.0 - q * q) / (4.0 * a) - kPi * q) * 2.0 / (om * om);
}

inline double profile_cross_moment(double a) {
  if (a < 0.05) {
    const double w = kPi * kPi * a * a;
    const double num = 1.0 / 3.0 + w * (1.0 / 30.0 + w * (1.0 / 840.0 + w / 45360.0));
    const double den = 1.0 + w * (1.0 / 3.0 + w * (2.0 / 45.0 + w / 315.0));
    return 0.5 * kPi * num / den;
  }
  const double q = std::exp(-2.0 * kPi * a);
  const double om = -std::expm1(-2.0 * kPi * a);
  return (kPi * (1.0 + q) - om / a) * std::exp(-kPi * a) / (om * om);
}

// frequency beyond which this side contributes at most `budget` to the norm
// integral, together with that remainder bound
inline std::pair<double, double> norm_tail_cut(const FourierDecay& d, double budget) {
  if (d.amp == 0.0) return {8.0, 0.0};
  if (d.super) {
    const double cut = d.floor;  // floor already puts the envelope below e^-36
    const double e = d.amp * std::exp(-0.25 * d.width * d.width * cut * cut);
    return {cut, e * e};
  }
  // remainder of (1/pi) int_X^inf (amp/xi^p)^2 / (2 xi) dxi = amp^2/(2 pi p X^{2p})
  const double x = std::pow(d.amp * d.amp / (2.0 * kPi * d.power * budget), 0.5 / d.power);
  const double cut = std::min(std::max(d.floor, x), 1e6);
  return {cut, d.amp * d.amp / (2.0 * kPi * d.power * std::pow(cut, 2.0 * d.power))};
}

}  // namespace detail

// || H(phi) ||^2 over the strip: by the longitudinal Plancherel identity this
// is (1/pi) int_0^inf of |transform|^2 against the closed-form height moments
// of the two interpolation profiles, plus an analytic remainder bound past the
// cut frequency.
inline StripNormReport extension_l2_norm_sq(const BoundaryPair& phi, double tol = 1e-8) {
  for (Side side : {Side::lower, Side::upper})
    if (!std::isfinite(phi.on(side).l2_norm_sq()))
      throw std::invalid_argument("extension_l2_norm_sq needs square-integrable data");
  if (phi.is_zero()) return {};

  StripNormReport out;
  double cut = 8.0;
  for (Side side : {Side::lower, Side::upper}) {
    if (phi.on(side).is_zero()) continue;
    const auto [c, rem] = detail::norm_tail_cut(phi.on(side).fourier_decay(), 0.25 * tol);
    cut = std::max(cut, c);
    out.tail_bound += rem;
  }
  // the cross term past the cut is killed by the exponentially small cross
  // moment; fold a crude bound into the remainder
  {
    const auto dl = phi.lower.fourier_decay();
    const auto du = phi.upper.fourier_decay();
    out.tail_bound += 2.0 * dl.amp * du.amp * std::exp(-kPi * cut);
  }

  auto integrand = [&](double xi) {
    const std::complex<double> fl = phi.lower.fourier(xi);
    const std::complex<double> fu = phi.upper.fourier(xi);
    return (std::norm(fl) + std::norm(fu)) * detail::profile_self_moment(xi) +
           2.0 * (fl * std::conj(fu)).real() * detail::profile_cross_moment(xi);
  };
  std::vector<double> pts{0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
  while (pts.back() < cut) pts.push_back(std::min(2.0 * pts.back(), cut));
  const Integral I = integrate_path(integrand, pts, tol * kPi / 2.0);
  out.value = I.value / kPi;
  out.quad_error = I.error / kPi;
  return out;
}

}  // namespace striplab
