#pragma once

// Thin adaptive-quadrature layer over boost Gauss-Kronrod panels.
// All integrals in the library go through these helpers so that panel
// subdivision (and therefore every floating-point sum) is deterministic.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <vector>

#include "striplab/common.hpp"

namespace striplab {

struct Integral {
  double value = 0.0;
  double error = 0.0;  // accumulated error estimate
};

namespace detail {
using gk15 = boost::math::quadrature::gauss_kronrod<double, 15>;
}

// Adaptive integral over [a, b]; `tol` is the target relative tolerance of the
// panel engine and `error` reports its estimate.
template <class F>
Integral integrate(F&& f, double a, double b, double tol = 1e-10, int max_depth = 15) {
  if (a == b) return {0.0, 0.0};
  // a panel at the rounding resolution of its own endpoints (two analytically
  // equal split points computed along different floating-point routes) holds
  // no mass, but its value is pure rounding noise, so the relative-error loop
  // would burn the full depth budget on it
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (std::abs(b - a) <= 8.0 * eps * std::max(std::abs(a), std::abs(b))) return {0.0, 0.0};
  double err = 0.0;
  double v = detail::gk15::integrate(f, a, b, max_depth, tol, &err);
  return {v, err};
}

// Integral over a split path a = p0 < p1 < ... < pn = b; splits let the
// adaptive engine see known structure (peaks, kinks, boundary layers).
template <class F>
Integral integrate_path(F&& f, const std::vector<double>& pts, double tol = 1e-10,
                        int max_depth = 15) {
  Integral acc;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const Integral p = integrate(f, pts[i], pts[i + 1], tol, max_depth);
    acc.value += p.value;
    acc.error += p.error;
  }
  return acc;
}

template <class F>
Integral integrate_path(F&& f, std::initializer_list<double> pts, double tol = 1e-10,
                        int max_depth = 15) {
  return integrate_path(std::forward<F>(f), std::vector<double>(pts), tol, max_depth);
}

// Split-path integral with one shared accuracy target for the whole path:
// a non-adaptive first pass sizes every panel, then each panel is refined
// against an absolute budget tol * (path scale) / n.  Panels that contribute
// nothing to the total cannot burn adaptive depth chasing relative accuracy
// of values at their own rounding-noise floor.
template <class F>
Integral integrate_path_budget(F&& f, const std::vector<double>& pts, double tol = 1e-10,
                               int max_depth = 15) {
  const size_t n = pts.size() > 1 ? pts.size() - 1 : 0;
  std::vector<Integral> est(n);
  double scale = 0.0;
  for (size_t i = 0; i < n; ++i) {
    est[i] = integrate(f, pts[i], pts[i + 1], tol, 0);
    scale += std::abs(est[i].value);
  }
  if (scale == 0.0) return {0.0, 0.0};
  const double budget = tol * scale / static_cast<double>(n);
  Integral acc;
  for (size_t i = 0; i < n; ++i) {
    Integral p = est[i];
    // refine only panels that matter: already-accurate panels and panels
    // whose entire value sits under the budget (noise floor) are kept as-is
    if (!(p.error <= budget || std::abs(p.value) + p.error <= budget)) {
      const double rel =
          std::min(0.25, std::max(tol, budget / std::max(std::abs(p.value), 1e-300)));
      p = integrate(f, pts[i], pts[i + 1], rel, max_depth);
    }
    acc.value += p.value;
    acc.error += p.error;
  }
  return acc;
}

// Geometric split points from `scale` down to the left endpoint `a`, used to
// resolve boundary layers of known width near a.
inline std::vector<double> layer_splits_left(double a, double b, double scale, int levels = 6) {
  std::vector<double> pts{a};
  double w = scale;
  std::vector<double> rising;
  for (int i = 0; i < levels && a + w < b; ++i, w *= 4.0) rising.push_back(a + w);
  pts.insert(pts.end(), rising.begin(), rising.end());
  pts.push_back(b);
  return pts;
}

}  // namespace striplab
