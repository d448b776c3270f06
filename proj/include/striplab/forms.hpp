#pragma once

// Quadratic boundary energies on the strip: the trace form, its scaled jump
// family with parameter ell, the two limit forms (difference form at ell -> 0,
// half-order seminorm form at ell -> infinity), the interior gradient energy,
// and the boundary-pair functionals built from the damped extension.
//
// Every same-side double integral is reduced to one dimension through
//   D_f(u) = int (f(x+u) - f(x))^2 dx,
// which is O(u^2) at the diagonal and exactly 2 ||f||^2 once |u| exceeds the
// support width, so the singular kernels integrate against it cleanly and the
// far field is a closed-form kernel tail.  Cross-side terms expand into exact
// L2 norms plus a correlation integral.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "striplab/boundary_data.hpp"
#include "striplab/common.hpp"
#include "striplab/harmonic.hpp"
#include "striplab/kernels.hpp"
#include "striplab/quadrature.hpp"

namespace striplab {

struct QuadratureSpec {
  double window = 30.0;      // |u| beyond which same-side integrals use closed tails
  int nodes_per_unit = 1;    // split density for the tensor (strip) quadratures
  double diag_split = 0.125; // first panel boundary away from the diagonal
  double tol = 1e-9;
  std::vector<double> alpha_schedule{1e2, 1e3, 1e4};  // damped-functional limit
  double pad = 12.0;         // longitudinal padding for strip quadratures

  void validate() const {
    if (!(window > 0.0) || !(diag_split > 0.0) || diag_split >= window)
      throw std::invalid_argument("quadrature spec needs 0 < diag_split < window");
    if (nodes_per_unit < 1) throw std::invalid_argument("nodes_per_unit must be >= 1");
  }
};

struct EnergyReport {
  double value = 0.0;
  double quad_error = 0.0;
  double tail_bound = 0.0;
  bool divergent = false;
  std::map<std::string, double> breakdown;  // cross-side / same-side-lower / same-side-upper
};

namespace detail {

// int f(x+u) g(x) dx over the overlap of the shifted supports; panel ends at
// every kink, since the symmetric rules misjudge kinks at panel midpoints
inline double support_correlation(const BoundaryFunction& f, const BoundaryFunction& g, double u,
                                  double tol) {
  const SupportRange rf = f.range(1e-16);
  const SupportRange rg = g.range(1e-16);
  const double lo = std::max(rf.lo - u, rg.lo);
  const double hi = std::min(rf.hi - u, rg.hi);
  if (!(lo < hi)) return 0.0;
  std::vector<double> pts{lo, 0.5 * (lo + hi), hi};
  for (double q : f.breakpoints())
    if (q - u > lo && q - u < hi) pts.push_back(q - u);
  for (double q : g.breakpoints())
    if (q > lo && q < hi) pts.push_back(q);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto prod = [&](double x) { return f(x + u) * g(x); };
  return integrate_path(prod, pts, tol).value;
}

// D_f(u) = int (f(x+u) - f(x))^2 dx by direct difference quadrature; the
// integrand's rounding noise is O(eps |f|) per point, harmless relative to
// the O(u |f'|) difference for the u at which this is actually called
inline double difference_moment(const BoundaryFunction& f, double u, double tol) {
  const SupportRange r = f.range(1e-16);
  const double lo = r.lo - std::max(u, 0.0);
  const double hi = r.hi - std::min(u, 0.0);
  std::vector<double> pts{lo, r.lo, r.hi - std::abs(u), hi};
  for (double q : f.breakpoints()) {
    if (q > lo && q < hi) pts.push_back(q);
    if (q - u > lo && q - u < hi) pts.push_back(q - u);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto sq = [&](double x) {
    const double d = f(x + u) - f(x);
    return d * d;
  };
  return integrate_path(sq, pts, tol).value;
}

// split path on [0, U] for kernel-against-D integrals: diagonal panel, then
// geometric growth, with a knot at the support width where D goes flat
inline std::vector<double> diagonal_path(double diag_split, double width, double U) {
  std::vector<double> pts{0.0, diag_split};
  for (double s = 4.0 * diag_split; s < U; s *= 2.0) pts.push_back(s);
  if (width > 0.0 && width < U) pts.push_back(width);
  pts.push_back(U);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double p) { return p > U; }), pts.end());
  if (pts.back() != U) pts.push_back(U);
  return pts;
}

// one same-side term: int_R k(u) D_f(u) du with closed tail past U.
// k is the kernel, k_small the exact limit coefficient of k(u) u^2 at u -> 0
// (so the u < 1e-6 branch is k_small * ||f'||^2), and tail(U) the two-sided
// closed kernel tail integral.
template <class K>
Integral same_side_term(const BoundaryFunction& f, K&& k, double k_small, double tail_of_U,
                        const QuadratureSpec& spec) {
  const SupportRange r = f.range(1e-16);
  const double width = r.width();
  const double l2 = f.l2_norm_sq();
  const double dl2 = f.deriv_l2_norm_sq();
  const double U = std::max(spec.window, width + 1.0);
  auto integrand = [&](double u) {
    if (u < 1e-6) return k_small * dl2;
    return k(u) * difference_moment(f, u, spec.tol * 1e-2);
  };
  // the difference moment kinks in u at breakpoint differences; put panel
  // ends there (for dense uniform lattices the one-sided differences cover
  // every multiple of the lattice step already)
  std::vector<double> pts = diagonal_path(spec.diag_split, width, U);
  const std::vector<double> bp = f.breakpoints();
  for (std::size_t a = 0; a < bp.size(); ++a) {
    if (bp.size() * bp.size() <= 4096) {
      for (std::size_t b = a + 1; b < bp.size(); ++b)
        if (bp[b] - bp[a] > 0.0 && bp[b] - bp[a] < U) pts.push_back(bp[b] - bp[a]);
    } else if (bp[a] - bp.front() > 0.0 && bp[a] - bp.front() < U) {
      pts.push_back(bp[a] - bp.front());
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const Integral body = integrate_path(integrand, pts, spec.tol);
  return {2.0 * body.value + 2.0 * l2 * tail_of_U, 2.0 * body.error};
}

// cross term  int int (f(x) - g(y))^2 k(x - y) dx dy
//   = k_total (||f||^2 + ||g||^2) - 2 int k(u) C_{fg}(u) du,
// with C supported on a finite shift interval (up to registry range slop)
template <class K>
Integral cross_side_term(const BoundaryFunction& f, const BoundaryFunction& g, K&& k,
                         double k_total, const QuadratureSpec& spec) {
  Integral out{k_total * (f.l2_norm_sq() + g.l2_norm_sq()), 0.0};
  if (f.is_zero() || g.is_zero()) return out;
  const SupportRange rf = f.range(1e-16);
  const SupportRange rg = g.range(1e-16);
  // C_{fg}(u) = int f(y+u) g(y) dy vanishes outside [rg.lo - rf.hi, rg.hi - rf.lo]
  const double lo = rg.lo - rf.hi;
  const double hi = rg.hi - rf.lo;
  std::vector<double> pts{lo, hi};
  for (double p : {rg.lo - rf.lo, rg.hi - rf.hi, 0.0})
    if (p > lo && p < hi) pts.push_back(p);
  // the correlation kinks in u at cross differences of the two kink sets
  const std::vector<double> bf = f.breakpoints(), bg = g.breakpoints();
  if (bf.size() * bg.size() <= 4096)
    for (double qf : bf)
      for (double qg : bg)
        if (qg - qf > lo && qg - qf < hi) pts.push_back(qg - qf);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto integrand = [&](double u) { return k(u) * support_correlation(f, g, -u, spec.tol * 1e-2); };
  const Integral c = integrate_path(integrand, pts, spec.tol);
  out.value -= 2.0 * c.value;
  out.error += 2.0 * c.error;
  return out;
}

// longitudinal panel knots for tensor quadratures: unit-spaced across the
// data support, fading into the padding where the integrand only decays; a
// positive fade step spaces the first few padding knots at that pitch (for
// steeply decaying integrands), otherwise they fall off geometrically
inline std::vector<double> tensor_columns(double lo, double hi, double pad, double step,
                                          double fade = 0.0) {
  std::vector<double> pts;
  for (double p = lo; p < hi; p += step) pts.push_back(p);
  pts.push_back(hi);
  auto add_fades = [&](double d) {
    if (d < pad) {
      pts.push_back(lo - d);
      pts.push_back(hi + d);
    }
  };
  if (fade > 0.0) {
    for (int k = 1; k <= 5; ++k) add_fades(k * fade);
  } else {
    for (double d : {1.0, 2.0, 4.0, 8.0}) add_fades(d);
  }
  pts.push_back(lo - pad);
  pts.push_back(hi + pad);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

inline void require_square_integrable(const BoundaryPair& f, const char* who) {
  for (Side s : {Side::lower, Side::upper})
    if (!std::isfinite(f.on(s).l2_norm_sq()))
      throw std::invalid_argument(std::string(who) + " needs square-integrable data");
}

inline bool is_constant_kind(const BoundaryFunction& f) {
  return f.kind() == DataKind::zero || f.kind() == DataKind::constant;
}

// constant pairs short-circuit every form: equal constants give zero energy
// exactly, unequal constants have non-integrable cross differences
inline bool constant_pair_report(const BoundaryPair& f, EnergyReport& rep) {
  if (!is_constant_kind(f.lower) || !is_constant_kind(f.upper)) return false;
  if (f.lower(0.0) == f.upper(0.0)) return true;  // zero-initialized report
  rep.divergent = true;
  rep.value = kInf;
  rep.breakdown["cross-side"] = kInf;
  return true;
}

// boundary-measure intensity as a function of the longitudinal gap
inline double boundary_intensity(double u, bool same_side) {
  return feller_density({0.0, Side::lower}, {u, same_side ? Side::lower : Side::upper});
}

inline const char* side_key(Side s) {
  return s == Side::lower ? "same-side-lower" : "same-side-upper";
}

}  // namespace detail

// difference form: (1/2pi) int (f+ - f-)^2
inline EnergyReport form_A0(const BoundaryPair& f, const QuadratureSpec& spec = {}) {
  spec.validate();
  EnergyReport rep;
  if (detail::constant_pair_report(f, rep)) return rep;
  detail::require_square_integrable(f, "form_A0");
  double cross = f.lower.l2_norm_sq() + f.upper.l2_norm_sq();
  double err = 0.0;
  if (!f.lower.is_zero() && !f.upper.is_zero()) {
    const SupportRange rl = f.lower.range(1e-16);
    const SupportRange ru = f.upper.range(1e-16);
    const double lo = std::max(rl.lo, ru.lo);
    const double hi = std::min(rl.hi, ru.hi);
    if (lo < hi) {
      auto prod = [&](double x) { return f.lower(x) * f.upper(x); };
      const Integral c = integrate_path(prod, {lo, 0.5 * (lo + hi), hi}, spec.tol);
      cross -= 2.0 * c.value;
      err += 2.0 * c.error;
    }
  }
  rep.value = cross / kTwoPi;
  rep.quad_error = err / kTwoPi;
  rep.breakdown["cross-side"] = rep.value;
  return rep;
}

// first scaled component: int int (f-(x) - f+(y))^2 k1_ell(x - y) dx dy
inline EnergyReport form_A1(double ell, const BoundaryPair& f, const QuadratureSpec& spec = {}) {
  spec.validate();
  check_ell(ell);
  EnergyReport rep;
  if (detail::constant_pair_report(f, rep)) return rep;
  detail::require_square_integrable(f, "form_A1");
  auto k = [&](double u) { return jump_kernel_k1(ell, u); };
  const Integral cross = detail::cross_side_term(f.lower, f.upper, k, jump_kernel_k1_total(ell), spec);
  rep.value = cross.value;
  rep.quad_error = cross.error;
  rep.tail_bound = 1e-15 * (f.lower.l2_norm_sq() + f.upper.l2_norm_sq());
  rep.breakdown["cross-side"] = rep.value;
  return rep;
}

// second scaled component: sum over sides of int int (f_s(x) - f_s(y))^2 k2_ell
inline EnergyReport form_A2(double ell, const BoundaryPair& f, const QuadratureSpec& spec = {}) {
  spec.validate();
  check_ell(ell);
  EnergyReport rep;
  for (Side s : {Side::lower, Side::upper}) {
    const BoundaryFunction& g = f.on(s);
    // constant data has identically vanishing same-side differences
    if (g.is_zero() || detail::is_constant_kind(g)) {
      rep.breakdown[detail::side_key(s)] = 0.0;
      continue;
    }
    if (!std::isfinite(g.l2_norm_sq()))
      throw std::invalid_argument("form_A2 needs square-integrable data");
    if (!g.half_order_regular()) {
      rep.divergent = true;
      rep.value = kInf;
      rep.breakdown[detail::side_key(s)] = kInf;
      continue;
    }
    const double U = std::max(spec.window, g.range(1e-16).width() + 1.0);
    auto k = [&](double u) { return jump_kernel_k2(ell, u); };
    const Integral term = detail::same_side_term(g, k, 2.0, jump_kernel_k2_tail(ell, U), spec);
    rep.breakdown[detail::side_key(s)] = term.value;
    if (!rep.divergent) rep.value += term.value;
    rep.quad_error += term.error;
    rep.tail_bound += 1e-15 * g.l2_norm_sq() * jump_kernel_k2_tail(ell, U);
  }
  return rep;
}

// assembled jump form: (1/2pi) A1 + (1/8pi) A2
inline EnergyReport form_A(double ell, const BoundaryPair& f, const QuadratureSpec& spec = {}) {
  const EnergyReport a1 = form_A1(ell, f, spec);
  const EnergyReport a2 = form_A2(ell, f, spec);
  EnergyReport rep;
  rep.divergent = a1.divergent || a2.divergent;
  rep.breakdown["cross-side"] = a1.value / kTwoPi;
  for (Side s : {Side::lower, Side::upper}) {
    const char* key = detail::side_key(s);
    rep.breakdown[key] = a2.breakdown.at(key) / (8.0 * kPi);
  }
  rep.value = rep.breakdown["cross-side"] + rep.breakdown["same-side-lower"] +
              rep.breakdown["same-side-upper"];
  rep.quad_error = a1.quad_error / kTwoPi + a2.quad_error / (8.0 * kPi);
  rep.tail_bound = a1.tail_bound / kTwoPi + a2.tail_bound / (8.0 * kPi);
  return rep;
}

// the boundary trace energy of the strip process; its kernel weights are the
// ell = 1 member of the scaled family, exactly
inline EnergyReport trace_energy(const BoundaryPair& f, const QuadratureSpec& spec = {}) {
  return form_A(1.0, f, spec);
}

// half-order (Gagliardo) seminorm  int int (g(x) - g(x'))^2 / (x - x')^2;
// +inf when the data has jumps
inline double gagliardo_seminorm(const BoundaryFunction& g, const QuadratureSpec& spec = {}) {
  spec.validate();
  if (g.is_zero() || detail::is_constant_kind(g)) return 0.0;
  if (!std::isfinite(g.l2_norm_sq()))
    throw std::invalid_argument("gagliardo_seminorm needs square-integrable data");
  if (!g.half_order_regular()) return kInf;
  const double U = std::max(spec.window, g.range(1e-16).width() + 1.0);
  auto k = [](double u) { return 1.0 / (u * u); };
  // kinf = 2/u^2 has two-sided tail 4/U, so 1/u^2 has 2/U
  const Integral term = detail::same_side_term(g, k, 1.0, 2.0 / U, spec);
  return term.value;
}

// limit jump form at ell -> infinity: (1/8pi) sum_s int int kinf-weighted
// squared differences = (1/4pi) sum_s gagliardo(f_s)
inline EnergyReport form_Ainf(const BoundaryPair& f, const QuadratureSpec& spec = {}) {
  spec.validate();
  EnergyReport rep;
  for (Side s : {Side::lower, Side::upper}) {
    const BoundaryFunction& g = f.on(s);
    const double gag = gagliardo_seminorm(g, spec);
    if (!std::isfinite(gag)) {
      rep.divergent = true;
      rep.value = kInf;
      rep.breakdown[detail::side_key(s)] = kInf;
      continue;
    }
    rep.breakdown[detail::side_key(s)] = gag / (4.0 * kPi);
    if (!rep.divergent) rep.value += gag / (4.0 * kPi);
  }
  return rep;
}

// interior gradient energy (1/2) int_T |grad H f|^2 by tensor quadrature over
// the strip; deliberately routed through the pointwise gradient so that it is
// an independent check of the boundary-integral route
inline EnergyReport interior_energy(const BoundaryPair& f, const QuadratureSpec& spec = {},
                                    double tensor_tol = 3e-5) {
  spec.validate();
  EnergyReport rep;
  if (detail::constant_pair_report(f, rep)) {
    rep.breakdown.clear();
    rep.breakdown["interior"] = rep.value;
    return rep;
  }
  detail::require_square_integrable(f, "interior_energy");
  if (f.is_zero()) return rep;
  double lo = kInf, hi = -kInf;
  for (Side s : {Side::lower, Side::upper}) {
    if (f.on(s).is_zero()) continue;
    const SupportRange r = f.on(s).range(1e-14);
    lo = std::min(lo, r.lo);
    hi = std::max(hi, r.hi);
  }
  // smooth data keeps |grad H|^2 smooth up to the boundary; a coarse ladder
  // with the adaptive engine underneath resolves it.  Tolerances widen by a
  // factor ~30 per tensor level so inner quadrature noise never drives the
  // outer subdivision.
  const auto heights = detail::strip_height_splits(0.04);
  auto column = [&](double x1) {
    auto g = [&](double x2) {
      const auto grad = grad_harmonic_extension(f, {x1, x2}, tensor_tol * 3e-3);
      return grad[0].value * grad[0].value + grad[1].value * grad[1].value;
    };
    return integrate_path_budget(g, heights, tensor_tol * 0.1, 10).value;
  };
  const auto pts = detail::tensor_columns(lo, hi, spec.pad, 1.0 / spec.nodes_per_unit);
  const Integral I = integrate_path_budget(column, pts, tensor_tol, 8);
  rep.value = 0.5 * I.value;
  rep.quad_error = 0.5 * I.error;
  // the gradient kernels decay like exp(-|x1 - support|) beyond the pad
  const double mass = std::sqrt(f.lower.l2_norm_sq()) + std::sqrt(f.upper.l2_norm_sq());
  rep.tail_bound = kPi * mass * mass * std::exp(-2.0 * spec.pad);
  rep.breakdown["interior"] = rep.value;
  return rep;
}

// alpha-damped boundary-pair functional  alpha int_T H^alpha(phi) H(psi)
inline double feller_functional(double alpha, const BoundaryPair& phi, const BoundaryPair& psi,
                                const QuadratureSpec& spec = {}, double tensor_tol = 3e-5) {
  spec.validate();
  if (!(alpha > 0.0)) throw std::invalid_argument("feller_functional needs alpha > 0");
  detail::require_square_integrable(phi, "feller_functional");
  detail::require_square_integrable(psi, "feller_functional");
  if (phi.is_zero() || psi.is_zero()) return 0.0;
  // the damped factor dies within ~1/sqrt(alpha) of phi's support
  double lo = kInf, hi = -kInf;
  for (Side s : {Side::lower, Side::upper}) {
    if (phi.on(s).is_zero()) continue;
    const SupportRange r = phi.on(s).range(1e-14);
    lo = std::min(lo, r.lo);
    hi = std::max(hi, r.hi);
  }
  // the damped factor dies like exp(-sqrt(2 alpha) d) at distance d from
  // phi's support, longitudinally and into the strip alike.  Integrating
  // past that window would pit relative tolerances against values below
  // rounding noise, so each active boundary gets a clipped ladder instead.
  const double decay = std::sqrt(2.0 * alpha);
  // the product decays at least like exp(-(decay - 1) d) longitudinally
  // (the plain extension can grow back toward psi's support at unit rate)
  const double pad = std::clamp(20.0 / std::max(decay - 1.0, 0.5), 0.05, spec.pad);
  const double cap = std::min(kPi, 26.0 / decay);
  const double ladder = std::clamp(0.3 / decay, 1e-4, 0.05);
  // transverse ladders step by 2.5/decay so each panel spans a bounded
  // number of e-folds of the damped factor, whatever alpha is
  auto side_ladder = [&](Side side) {
    std::vector<double> ys{0.0, ladder, cap};
    for (double s = 2.5 / decay; s < cap; s += 2.5 / decay) ys.push_back(s);
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    if (side == Side::upper) {
      for (double& v : ys) v = kPi - v;
      std::reverse(ys.begin(), ys.end());
    }
    return ys;
  };
  std::vector<std::vector<double>> windows;
  if (2.0 * cap >= kPi) {
    windows.push_back(detail::strip_height_splits(ladder));
  } else {
    if (!phi.lower.is_zero()) windows.push_back(side_ladder(Side::lower));
    if (!phi.upper.is_zero()) windows.push_back(side_ladder(Side::upper));
  }
  auto column = [&](double x1) {
    auto g = [&](double x2) {
      const InteriorPoint x{x1, x2};
      const double damped = alpha_harmonic_extension(alpha, phi, x, tensor_tol * 3e-3).value;
      if (damped == 0.0) return 0.0;
      return damped * harmonic_extension(psi, x, tensor_tol * 3e-3).value;
    };
    double acc = 0.0;
    for (const auto& w : windows) acc += integrate_path_budget(g, w, tensor_tol * 0.1, 10).value;
    return acc;
  };
  const auto pts = detail::tensor_columns(lo, hi, pad, 1.0 / spec.nodes_per_unit, 2.5 / decay);
  return alpha * integrate_path_budget(column, pts, tensor_tol, 8).value;
}

// boundary-measure bilinear value  int int phi(xi) U(xi, xi') psi(xi'); same
// side pairs with overlapping supports diverge unless the polarized
// (difference) representation is requested
inline EnergyReport closed_feller_functional(const BoundaryPair& phi, const BoundaryPair& psi,
                                             const QuadratureSpec& spec = {},
                                             bool polarized = false) {
  spec.validate();
  detail::require_square_integrable(phi, "closed_feller_functional");
  detail::require_square_integrable(psi, "closed_feller_functional");
  EnergyReport rep;

  auto direct_pair = [&](const BoundaryFunction& a, const BoundaryFunction& b, bool same) {
    // int int a(x) U(x - y) b(y) dx dy = int U(u) C_ab(u) du
    if (a.is_zero() || b.is_zero()) return Integral{0.0, 0.0};
    const SupportRange ra = a.range(1e-16);
    const SupportRange rb = b.range(1e-16);
    const double lo = rb.lo - ra.hi;
    const double hi = rb.hi - ra.lo;
    if (!(lo < hi)) return Integral{0.0, 0.0};
    // the correlation is only piecewise smooth: its own breakpoints sit at
    // differences of the two functions' breakpoints
    std::vector<double> pts{lo, hi};
    std::vector<double> ka = a.breakpoints(), kb = b.breakpoints();
    ka.push_back(ra.lo), ka.push_back(ra.hi);
    kb.push_back(rb.lo), kb.push_back(rb.hi);
    if (ka.size() * kb.size() <= 512)
      for (double qa : ka)
        for (double qb : kb)
          if (qb - qa > lo && qb - qa < hi) pts.push_back(qb - qa);
    if (0.0 > lo && 0.0 < hi) pts.push_back(0.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto integrand = [&](double u) {
      return detail::boundary_intensity(u, same) * detail::support_correlation(a, b, -u, spec.tol * 1e-2);
    };
    return integrate_path(integrand, pts, spec.tol);
  };

  // cross-side part: lower x of phi against upper y of psi and vice versa
  {
    const Integral c1 = direct_pair(phi.lower, psi.upper, false);
    const Integral c2 = direct_pair(phi.upper, psi.lower, false);
    rep.breakdown["cross-side"] = c1.value + c2.value;
    rep.value += c1.value + c2.value;
    rep.quad_error += c1.error + c2.error;
  }

  for (Side s : {Side::lower, Side::upper}) {
    const BoundaryFunction& a = phi.on(s);
    const BoundaryFunction& b = psi.on(s);
    const char* key = detail::side_key(s);
    rep.breakdown[key] = 0.0;
    if (a.is_zero() || b.is_zero()) continue;
    const SupportRange ra = a.range(1e-16);
    const SupportRange rb = b.range(1e-16);
    const bool overlap = std::max(ra.lo, rb.lo) < std::min(ra.hi, rb.hi);
    if (overlap && !polarized) {
      // the same-side kernel is not integrable across the overlapping diagonal
      rep.divergent = true;
      rep.breakdown[key] = kInf;
      rep.value = kInf;
      continue;
    }
    if (!overlap) {
      const Integral t = direct_pair(a, b, true);
      rep.breakdown[key] = t.value;
      if (!rep.divergent) rep.value += t.value;
      rep.quad_error += t.error;
      continue;
    }
    // polarized splitting: the finite same-side object is the jump energy
    // (1/2) int int (a(x) - a(y)) (b(x) - b(y)) U_same(x - y) dx dy, computed
    // as int U_same(u) G_ab(u) du with G_ab(u) = int (a(x+u)-a(x))(b(x+u)-b(x))
    if (!a.half_order_regular() || !b.half_order_regular()) {
      rep.divergent = true;
      rep.breakdown[key] = kInf;
      rep.value = kInf;
      continue;
    }
    // past the joint width the shifted copies decouple entirely
    const double width = std::max(ra.hi, rb.hi) - std::min(ra.lo, rb.lo);
    const double U = std::max(spec.window, width + 1.0);
    auto integrand = [&](double u) {
      if (u < 1e-6) {
        // u^2 U_same(u) -> 1/(2 pi) and G_ab(u) -> u^2 int a' b'
        auto dd = [&](double x) { return a.derivative(x) * b.derivative(x); };
        const double lo2 = std::min(ra.lo, rb.lo), hi2 = std::max(ra.hi, rb.hi);
        return (0.5 / kPi) * integrate_path(dd, {lo2, 0.5 * (lo2 + hi2), hi2}, 1e-10).value;
      }
      auto diff = [&](double x) { return (a(x + u) - a(x)) * (b(x + u) - b(x)); };
      const double lo2 = std::min(ra.lo, rb.lo) - u, hi2 = std::max(ra.hi, rb.hi);
      return detail::boundary_intensity(u, true) *
             integrate_path(diff, {lo2, 0.5 * (lo2 + hi2), hi2}, spec.tol * 1e-2).value;
    };
    const Integral body =
        integrate_path(integrand, detail::diagonal_path(spec.diag_split, width, U), spec.tol);
    // G settles to 2 int a b (the shifted copies decouple) past the width;
    // U_same integrates to (1/4pi) of the closed hyperbolic remainder there
    const double ab = detail::support_correlation(a, b, 0.0, spec.tol * 1e-2);
    const double tail = 2.0 * ab * jump_kernel_k2_tail(1.0, U) / (4.0 * kPi);
    const double part = 0.5 * (2.0 * body.value + tail);
    rep.breakdown[key] = part;
    if (!rep.divergent) rep.value += part;
    rep.quad_error += body.error;
  }
  return rep;
}

// the trace energy reassembled from the boundary measure itself:
// (1/2) int int (f(xi) - f(xi'))^2 U(d xi d xi') over both boundary lines
struct ConsistencyReport {
  double via_kernel_weights = 0.0;
  double via_boundary_measure = 0.0;
  double gap = 0.0;
  double quad_error = 0.0;
};

inline ConsistencyReport beurling_deny_consistency(const BoundaryPair& f,
                                                   const QuadratureSpec& spec = {}) {
  spec.validate();
  detail::require_square_integrable(f, "beurling_deny_consistency");
  ConsistencyReport rep;
  const EnergyReport direct = trace_energy(f, spec);
  rep.via_kernel_weights = direct.value;

  // (1/2) * [ 2 * cross part + sum_s same-side parts ] with the measure's own
  // kernels; algebra identical to the trace weights, evaluated independently
  auto cross_kernel = [](double u) { return detail::boundary_intensity(u, false); };
  const Integral cross =
      detail::cross_side_term(f.lower, f.upper, cross_kernel, 1.0 / kTwoPi, spec);
  double same_sum = 0.0, same_err = 0.0;
  for (Side s : {Side::lower, Side::upper}) {
    const BoundaryFunction& g = f.on(s);
    if (g.is_zero()) continue;
    if (!g.half_order_regular())
      throw std::invalid_argument("beurling_deny_consistency needs half-order-regular data");
    const double U = std::max(spec.window, g.range(1e-16).width() + 1.0);
    auto k = [](double u) { return detail::boundary_intensity(u, true); };
    // u^2 * U_same(u) -> 1/(2 pi) at u -> 0; two-sided tail of U_same is
    // (1/4pi) * 2 (coth(U/2) - 1)
    const Integral term =
        detail::same_side_term(g, k, 0.5 / kPi, jump_kernel_k2_tail(1.0, U) / (4.0 * kPi), spec);
    same_sum += term.value;
    same_err += term.error;
  }
  rep.via_boundary_measure = 0.5 * (2.0 * cross.value + same_sum);
  rep.quad_error = direct.quad_error + cross.error + 0.5 * same_err;
  rep.gap = std::abs(rep.via_kernel_weights - rep.via_boundary_measure);
  return rep;
}

// bounded-ratio diagnostic between the trace energy and the half-order
// seminorm route (plus L2 in both): reports the observed ratio interval
struct RatioInterval {
  double lo = kInf;
  double hi = -kInf;
  std::vector<double> ratios;
};

inline RatioInterval norm_equivalence_report(const std::vector<BoundaryPair>& family,
                                             const QuadratureSpec& spec = {}) {
  RatioInterval out;
  for (const BoundaryPair& f : family) {
    const double l2 = f.lower.l2_norm_sq() + f.upper.l2_norm_sq();
    const double num = trace_energy(f, spec).value + l2;
    double gag = 0.0;
    for (Side s : {Side::lower, Side::upper})
      if (!f.on(s).is_zero()) gag += gagliardo_seminorm(f.on(s), spec);
    const double ratio = num / (gag + l2);
    out.ratios.push_back(ratio);
    out.lo = std::min(out.lo, ratio);
    out.hi = std::max(out.hi, ratio);
  }
  return out;
}

}  // namespace striplab
