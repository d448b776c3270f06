#pragma once

// Hat-function Galerkin discretization of the boundary energy forms: Toeplitz
// form matrices assembled from 1-D kernel integrals against the piecewise
// cubic hat correlation, the tridiagonal mass matrix, damped inverses
// (resolvents) and backward-Euler semigroup steps via dense Cholesky, and
// scale-schedule scans measuring resolvent convergence toward the limiting
// forms at scale 0, a finite scale, and infinity.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "striplab/boundary_data.hpp"
#include "striplab/common.hpp"
#include "striplab/kernels.hpp"
#include "striplab/quadrature.hpp"

namespace striplab {

// hat basis at uniform nodes on each of the two boundary lines; the hats form
// a partition of unity away from the outermost node on each end
struct GalerkinBasis {
  double window = 8.0;  // nodes span [-window, window]
  int nodes = 129;      // per boundary line

  double spacing() const { return 2.0 * window / static_cast<double>(nodes - 1); }
  double node(int i) const { return -window + spacing() * static_cast<double>(i); }
  int dim() const { return 2 * nodes; }

  void validate() const {
    if (nodes < 3) throw std::invalid_argument("basis needs at least 3 nodes per line");
    if (!(window > 0.0)) throw std::invalid_argument("basis window must be positive");
  }
};

struct MassMatrix {
  Eigen::MatrixXd M;
  GalerkinBasis basis;
};

struct FormMatrix {
  Eigen::MatrixXd A;
  FormKind kind = FormKind::a_ell;
  double ell = 0.0;              // 0 for the difference form, +inf for the cap
  double assembly_error = 0.0;   // aggregated entry quadrature error
  double constant_defect = 0.0;  // window-truncation bound for the all-ones vector
  GalerkinBasis basis;
};

namespace detail {

// correlation of two unit hats with spacing delta at center offset v; the
// even piecewise-cubic bump supported on |v| <= 2 delta
inline double hat_correlation(double v, double delta) {
  const double s = std::abs(v) / delta;
  if (s >= 2.0) return 0.0;
  if (s >= 1.0) {
    const double w = 2.0 - s;
    return delta * w * w * w / 6.0;
  }
  return delta * (2.0 / 3.0 - s * s * (1.0 - 0.5 * s));
}

inline double hat_correlation_dd(double v, double delta) {
  const double s = std::abs(v) / delta;
  if (s >= 2.0) return 0.0;
  if (s >= 1.0) return (2.0 - s) / delta;
  return (3.0 * s - 2.0) / delta;
}

// 2 rho(D delta) - rho(D delta - u) - rho(D delta + u); O(u^2) at u -> 0.
// Near-lattice offsets |D| <= 1 cancel catastrophically at tiny u, so they
// switch to the curvature term; farther offsets evaluate exactly (no
// cancellation: the centered term is already zero)
inline double correlation_bracket(int D, double u, double delta) {
  const double v = std::abs(D) * delta;
  if (std::abs(D) <= 1 && u < 1e-5 * delta)
    return -u * u * hat_correlation_dd(v, delta);
  return 2.0 * hat_correlation(v, delta) - hat_correlation(v - u, delta) -
         hat_correlation(v + u, delta);
}

// E_D = int_R k(u) [2 rho - rho(.-u) - rho(.+u)] du for an even kernel k with
// one-sided tail integral tail1(U) = int_U^inf k; the bracket is constant
// (= 2 rho(D delta)) past (|D|+2) delta, where the shifted copies decouple
template <class K, class T>
Integral same_side_entry(K&& k, T&& tail1, int D, double delta, double tol) {
  const int aD = std::abs(D);
  const double U = (aD + 2) * delta;
  std::vector<double> pts;
  for (int j = std::max(0, aD - 2); j <= aD + 2; ++j) pts.push_back(j * delta);
  auto integrand = [&](double u) { return k(u) * correlation_bracket(D, u, delta); };
  const Integral body = integrate_path(integrand, pts, tol);
  const double settle = 2.0 * hat_correlation(aD * delta, delta);
  return {2.0 * (body.value + settle * tail1(U)), 2.0 * body.error};
}

// K_D = int k(u) rho(u - D delta) du, compactly supported in u
template <class K>
Integral cross_entry(K&& k, int D, double delta, double tol) {
  std::vector<double> pts;
  for (int j = -2; j <= 2; ++j) pts.push_back(D * delta + j * delta);
  if (0.0 > pts.front() && 0.0 < pts.back()) pts.push_back(0.0);  // kernel peak
  std::sort(pts.begin(), pts.end());
  auto integrand = [&](double u) { return k(u) * hat_correlation(u - D * delta, delta); };
  return integrate_path(integrand, pts, tol);
}

// bound on sum_{|D| >= t} |E_D| from the kernel envelope: each far entry is
// at most 2 * (2 int rho) * max k = 4 delta^2 k((|D|-2) delta)
template <class K, class T>
double entry_tail_bound(K&& k, T&& tail1, const std::vector<double>& entries, int t,
                        double delta) {
  double s = 0.0;
  int d = t;
  for (; d < static_cast<int>(entries.size()) && d < t + 3; ++d) s += std::abs(entries[d]);
  const double edge = (d - 2) * delta;
  return s + 4.0 * delta * delta * (k(edge) + tail1(edge) / delta);
}

// |ones^T A ones| <= sum over nodes of the entry mass lost past each window
// edge; entries holds E_D for 0 <= D < m
template <class K, class T>
double constant_defect_bound(K&& k, T&& tail1, const std::vector<double>& entries,
                             double delta) {
  const int m = static_cast<int>(entries.size());
  double defect = 0.0;
  for (int i = 0; i < m; ++i) {
    defect += entry_tail_bound(k, tail1, entries, i + 1, delta);
    defect += entry_tail_bound(k, tail1, entries, m - i, delta);
  }
  return defect;
}

inline void fill_toeplitz_block(Eigen::MatrixXd& A, int row0, int col0, int m,
                                const std::vector<double>& entries, double scale) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A(row0 + i, col0 + j) += scale * entries[std::abs(i - j)];
}

inline void check_scale(double ell, const char* who) {
  if (!(ell > 0.0) || !std::isfinite(ell))
    throw std::invalid_argument(std::string(who) + " needs a positive finite scale");
}

}  // namespace detail

inline MassMatrix assemble_mass(const GalerkinBasis& basis) {
  basis.validate();
  const int m = basis.nodes;
  const double d = basis.spacing();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (int block : {0, m})
    for (int i = 0; i < m; ++i) {
      M(block + i, block + i) = 2.0 * d / 3.0;
      if (i + 1 < m) {
        M(block + i, block + i + 1) = d / 6.0;
        M(block + i + 1, block + i) = d / 6.0;
      }
    }
  return {std::move(M), basis};
}

inline FormMatrix assemble_form(FormKind kind, double ell, const GalerkinBasis& basis,
                                double tol = 1e-12) {
  basis.validate();
  const int m = basis.nodes;
  const double d = basis.spacing();
  FormMatrix out;
  out.kind = kind;
  out.basis = basis;
  out.A = Eigen::MatrixXd::Zero(2 * m, 2 * m);

  // the two jump pieces share one assembly: same-side entries from a singular
  // even kernel, cross-side entries from the integrable one
  auto assemble_same = [&](auto&& k, auto&& tail1, double scale) {
    std::vector<double> entries(m);
    for (int D = 0; D < m; ++D) {
      const Integral e = detail::same_side_entry(k, tail1, D, d, tol);
      entries[D] = e.value;
      out.assembly_error += 2.0 * scale * e.error * static_cast<double>(2 * (m - D));
    }
    detail::fill_toeplitz_block(out.A, 0, 0, m, entries, scale);
    detail::fill_toeplitz_block(out.A, m, m, m, entries, scale);
    out.constant_defect += 2.0 * scale * detail::constant_defect_bound(k, tail1, entries, d);
  };
  auto assemble_cross = [&](auto&& k, auto&& tail1, double total, double scale) {
    std::vector<double> entries(m);
    for (int D = 0; D < m; ++D) {
      const Integral e = detail::cross_entry(k, D, d, tol);
      entries[D] = e.value;
      out.assembly_error += 2.0 * scale * e.error * static_cast<double>(2 * (m - D));
    }
    // diagonal blocks carry the kernel's full mass against the Gram matrix
    const MassMatrix G = assemble_mass(basis);
    out.A += scale * total * G.M;
    detail::fill_toeplitz_block(out.A, 0, m, m, entries, -scale);
    detail::fill_toeplitz_block(out.A, m, 0, m, entries, -scale);
    // truncated rows lose Gram mass at the two window ends plus far kernel mass
    out.constant_defect +=
        2.0 * scale *
        (total * d / 3.0 + detail::constant_defect_bound(k, tail1, entries, d));
  };

  switch (kind) {
    case FormKind::a0: {
      const MassMatrix G = assemble_mass(basis);
      const double s = 1.0 / kTwoPi;
      out.A.topLeftCorner(m, m) = s * G.M.topLeftCorner(m, m);
      out.A.bottomRightCorner(m, m) = s * G.M.bottomRightCorner(m, m);
      out.A.topRightCorner(m, m) = -s * G.M.topLeftCorner(m, m);
      out.A.bottomLeftCorner(m, m) = -s * G.M.topLeftCorner(m, m);
      out.ell = 0.0;
      return out;
    }
    case FormKind::a1: {
      detail::check_scale(ell, "A1 assembly");
      out.ell = ell;
      assemble_cross([&](double u) { return jump_kernel_k1(ell, u); },
                     [&](double U) { return 0.5 * jump_kernel_k1_tail(ell, U); },
                     jump_kernel_k1_total(ell), 1.0);
      return out;
    }
    case FormKind::a2: {
      detail::check_scale(ell, "A2 assembly");
      out.ell = ell;
      assemble_same([&](double u) { return jump_kernel_k2(ell, u); },
                    [&](double U) { return 0.5 * jump_kernel_k2_tail(ell, U); }, 1.0);
      return out;
    }
    case FormKind::a_ell: {
      detail::check_scale(ell, "form assembly");
      out.ell = ell;
      assemble_cross([&](double u) { return jump_kernel_k1(ell, u); },
                     [&](double U) { return 0.5 * jump_kernel_k1_tail(ell, U); },
                     jump_kernel_k1_total(ell), 1.0 / kTwoPi);
      assemble_same([&](double u) { return jump_kernel_k2(ell, u); },
                    [&](double U) { return 0.5 * jump_kernel_k2_tail(ell, U); },
                    1.0 / (8.0 * kPi));
      return out;
    }
    case FormKind::a_inf: {
      out.ell = kInf;
      assemble_same([](double u) { return jump_kernel_kinf(u); },
                    [](double U) { return 0.5 * jump_kernel_kinf_tail(U); },
                    1.0 / (8.0 * kPi));
      return out;
    }
    case FormKind::trace:
      break;
  }
  throw std::invalid_argument("only the boundary forms have Galerkin matrices");
}

inline Eigen::VectorXd nodal_coefficients(const BoundaryPair& f, const GalerkinBasis& basis) {
  basis.validate();
  const int m = basis.nodes;
  Eigen::VectorXd v(2 * m);
  for (int i = 0; i < m; ++i) {
    v[i] = f.lower(basis.node(i));
    v[m + i] = f.upper(basis.node(i));
  }
  return v;
}

inline double mass_norm(const MassMatrix& M, const Eigen::VectorXd& v) {
  return std::sqrt(v.dot(M.M * v));
}

struct ResolventResult {
  Eigen::VectorXd coeff;
  double residual = 0.0;
};

// solve (alpha M + A) c = M f; the damped inverse in the Galerkin subspace
inline ResolventResult resolvent_apply(const FormMatrix& A, const MassMatrix& M, double alpha,
                                       const Eigen::VectorXd& f) {
  if (!(alpha > 0.0)) throw std::invalid_argument("resolvent needs alpha > 0");
  if (A.A.rows() != M.M.rows() || f.size() != M.M.rows())
    throw std::invalid_argument("resolvent dimensions disagree");
  const Eigen::MatrixXd S = alpha * M.M + A.A;
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("resolvent matrix is not positive definite");
  const Eigen::VectorXd rhs = M.M * f;
  ResolventResult out;
  out.coeff = llt.solve(rhs);
  out.residual = (S * out.coeff - rhs).norm();
  return out;
}

// backward-Euler semigroup step composition (I + (t/k) M^{-1} A)^{-k} f
inline Eigen::VectorXd semigroup_apply(const FormMatrix& A, const MassMatrix& M, double t, int k,
                                       const Eigen::VectorXd& f) {
  if (!(t > 0.0) || k < 1) throw std::invalid_argument("semigroup needs t > 0 and k >= 1");
  if (A.A.rows() != M.M.rows() || f.size() != M.M.rows())
    throw std::invalid_argument("semigroup dimensions disagree");
  const Eigen::MatrixXd S = M.M + (t / static_cast<double>(k)) * A.A;
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("semigroup step matrix is not positive definite");
  Eigen::VectorXd c = f;
  for (int step = 0; step < k; ++step) c = llt.solve(M.M * c);
  return c;
}

struct MoscoScanReport {
  GalerkinBasis basis;
  double target_ell = 0.0;  // 0, a finite scale, or +infinity
  double alpha = 1.0;
  std::string data_label;
  std::vector<double> schedule;
  std::vector<double> gaps;           // mass-norm distance to the target resolvent
  std::vector<double> relative_gaps;  // gaps / target resolvent norm
  std::vector<double> form_values;    // quadratic form value at the fixed data vector
  double target_norm = 0.0;
  double target_form_value = 0.0;
};

// resolvent-convergence scan along a scale schedule: the vanishing-scale
// target compares against the difference form with the schedule forms scaled
// by their own ell; other targets compare unscaled assembled forms
inline MoscoScanReport mosco_scan(double target_ell, const std::vector<double>& schedule,
                                  double alpha, const BoundaryPair& f,
                                  const GalerkinBasis& basis) {
  basis.validate();
  if (schedule.empty()) throw std::invalid_argument("scan needs a nonempty schedule");
  if (!(alpha > 0.0)) throw std::invalid_argument("scan needs alpha > 0");
  if (std::isnan(target_ell) || target_ell < 0.0)
    throw std::invalid_argument("scan target must be 0, a positive scale, or infinity");

  MoscoScanReport rep;
  rep.basis = basis;
  rep.target_ell = target_ell;
  rep.alpha = alpha;
  rep.data_label = f.label();
  rep.schedule = schedule;

  const MassMatrix M = assemble_mass(basis);
  const Eigen::VectorXd fv = nodal_coefficients(f, basis);
  const bool scaled = target_ell == 0.0;
  const FormMatrix target = scaled              ? assemble_form(FormKind::a0, 0.0, basis)
                            : std::isinf(target_ell) ? assemble_form(FormKind::a_inf, 0.0, basis)
                                                      : assemble_form(FormKind::a_ell, target_ell, basis);
  const ResolventResult t = resolvent_apply(target, M, alpha, fv);
  rep.target_norm = mass_norm(M, t.coeff);
  rep.target_form_value = fv.dot(target.A * fv);

  for (double ell : schedule) {
    FormMatrix F = assemble_form(FormKind::a_ell, ell, basis);
    if (scaled) F.A *= ell;
    const ResolventResult r = resolvent_apply(F, M, alpha, fv);
    const double gap = mass_norm(M, r.coeff - t.coeff);
    rep.gaps.push_back(gap);
    rep.relative_gaps.push_back(rep.target_norm > 0.0 ? gap / rep.target_norm : gap);
    rep.form_values.push_back(fv.dot(F.A * fv));
  }
  return rep;
}

}  // namespace striplab
