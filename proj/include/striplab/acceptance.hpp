#pragma once

// End-to-end acceptance checks: ten numbered criteria covering the closed
// kernels, the boundary energy forms, the damped-functional limit, the
// Galerkin resolvent scans, and the Monte-Carlo exit/excursion laws.  Each
// criterion runs standalone, reports the worst measured quantity against its
// gate, and is deterministic for a fixed (seed, workers) pair.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "striplab/boundary_data.hpp"
#include "striplab/common.hpp"
#include "striplab/forms.hpp"
#include "striplab/galerkin.hpp"
#include "striplab/harmonic.hpp"
#include "striplab/kernels.hpp"
#include "striplab/montecarlo.hpp"
#include "striplab/quadrature.hpp"
#include "striplab/rng.hpp"

namespace striplab {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst measured quantity compared against the gate
  double tolerance = 0.0;  // gate actually applied (after scaling)
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 2026;
  int workers = 1;
  double tolerance_scale = 1.0;   // < 1 tightens every gate, > 1 loosens
  std::vector<int> criteria;      // subset of 1..10; empty runs all

  void validate() const {
    if (!(tolerance_scale > 0.0)) throw std::invalid_argument("tolerance scale must be positive");
    for (int c : criteria)
      if (c < 1 || c > 10) throw std::invalid_argument("criteria indices must lie in 1..10");
  }
};

namespace detail {

inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// worst |emp - ref| / ref over a list of paired values
inline double worst_rel(const std::vector<double>& emp, const std::vector<double>& ref) {
  double w = 0.0;
  for (std::size_t i = 0; i < emp.size(); ++i) w = std::max(w, std::abs(emp[i] - ref[i]) / ref[i]);
  return w;
}

}  // namespace detail

// 1. closed exit density against the one-sided finite-difference normal
// derivative of the interior harmonic-measure kernel at random boundary pairs
inline CriterionResult criterion_exit_density(const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res{1, "exit-density-vs-normal-derivative"};
  res.tolerance = 1e-6 * opt.tolerance_scale;
  PathRng rng(opt.seed, 0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Side a_side = rng.uniform() < 0.5 ? Side::lower : Side::upper;
    const Side b_side = rng.uniform() < 0.5 ? Side::lower : Side::upper;
    const double d = 0.25 + 5.75 * rng.uniform();
    const double x1 = -3.0 + 6.0 * rng.uniform();
    const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const BoundaryPoint a{x1, a_side}, b{x1 + sign * d, b_side};
    const double closed = feller_density(a, b);
    // second-order one-sided stencil in the inward normal at a
    const double h = 1e-4 * std::min(1.0, d);
    auto off = [&](double height) {
      const double x2 = a_side == Side::lower ? height : kPi - height;
      return poisson_kernel_raw(b.xi1 - a.xi1, x2, b_side);
    };
    const double fd = 0.5 * (4.0 * off(h) - off(2.0 * h)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - closed) / closed);
  }
  res.measured = worst;
  res.passed = worst <= res.tolerance;
  res.detail = "max relative error over 1000 boundary pairs";
  res.seconds = detail::elapsed(t0);
  return res;
}

// 2. damped boundary functional extrapolated over a damping schedule against
// the closed bilinear pairing for three bump pairs; the computed sequence
// must increase strictly along the schedule
inline CriterionResult criterion_damped_pairing(const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res{2, "damped-pairing-limit"};
  res.tolerance = 1e-2 * opt.tolerance_scale;
  struct Case {
    BoundaryPair phi, psi;
    double closed;
  };
  const Case cases[] = {
      {{BoundaryFunction::hat(0.0, 0.5), BoundaryFunction::zero()},
       {BoundaryFunction::zero(), BoundaryFunction::hat(0.0, 0.5)},
       0.0097473702347624881816},
      {{BoundaryFunction::hat(0.0, 0.5), BoundaryFunction::zero()},
       {BoundaryFunction::hat(3.0, 0.5), BoundaryFunction::zero()},
       0.0023211121936004544594},
      {{BoundaryFunction::gaussian(1.0, 0.0, 1.0), BoundaryFunction::zero()},
       {BoundaryFunction::zero(), BoundaryFunction::gaussian(1.0, 1.0, 1.0)},
       0.088971690082432730955},
  };
  bool monotone = true;
  double worst = 0.0;
  for (const Case& c : cases) {
    std::vector<double> us;
    for (double alpha : {6.25, 16.0, 49.0}) us.push_back(feller_functional(alpha, c.phi, c.psi));
    monotone = monotone && us[0] < us[1] && us[1] < us[2];
    // one Aitken step on the tail of the sequence
    const double q = (us[2] - us[1]) / (us[1] - us[0]);
    const double ext = us[2] + (us[2] - us[1]) * q / (1.0 - q);
    worst = std::max(worst, std::abs(ext - c.closed) / c.closed);
  }
  res.measured = worst;
  res.passed = monotone && worst <= res.tolerance;
  res.detail = monotone ? "worst extrapolated relative gap over 3 pairs"
                        : "damped values failed to increase along the schedule";
  res.seconds = detail::elapsed(t0);
  return res;
}

// 3. boundary trace energy against the interior gradient energy of the
// harmonic extension for three registry data
inline CriterionResult criterion_trace_energy(const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res{3, "trace-vs-interior-energy"};
  res.tolerance = 1e-3 * opt.tolerance_scale;
  const BoundaryPair datas[] = {
      {BoundaryFunction::gaussian(1.0, 0.0, 1.0), BoundaryFunction::zero()},
      {BoundaryFunction::gaussian(0.8, 0.5, 0.7), BoundaryFunction::zero()},
      {BoundaryFunction::gaussian(1.0, -0.4, 1.2), BoundaryFunction::zero()},
  };
  double worst = 0.0;
  for (const BoundaryPair& f : datas) {
    const double tr = trace_energy(f).value;
    const double in = interior_energy(f).value;
    worst = std::max(worst, std::abs(in - tr) / tr);
  }
  res.measured = worst;
  res.passed = worst <= res.tolerance;
  res.detail = "worst relative defect over 3 boundary data";
  res.seconds = detail::elapsed(t0);
  return res;
}

namespace detail {

// shared ensemble for criteria 4 and 5: exits from mid-height
inline const ExitEnsemble& midheight_exits(const AcceptanceOptions& opt) {
  static std::optional<ExitEnsemble> cached;
  static std::uint64_t cached_seed = 0;
  static int cached_workers = 0;
  if (!cached || cached_seed != opt.seed || cached_workers != opt.workers) {
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.n_paths = 200000;
    cfg.seed = opt.seed;
    cfg.bridge_correction = true;
    cfg.workers = opt.workers;
    cached = sample_exit_ensemble({0.0, kPi / 2.0}, cfg);
    cached_seed = opt.seed;
    cached_workers = opt.workers;
  }
  return *cached;
}

}  // namespace detail

// 4. exit-place histogram against bin integrals of the closed harmonic-measure
// density, plus the 3:1 side split from quarter height
inline CriterionResult criterion_exit_place(const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res{4, "exit-place-histogram"};
  res.tolerance = 0.05 * opt.tolerance_scale;
  const ExitEnsemble& ens = detail::midheight_exits(opt);
  if (ens.aborted > 0) {
    res.detail = "ensemble aborted on a non-finite increment";
    res.seconds = detail::elapsed(t0);
    return res;
  }
  const double n = static_cast<double>(ens.samples.size());
  const std::vector<double> edges{-4.0, -2.0, 0.0, 2.0, 4.0};
  std::vector<double> emp, model;
  for (Side side : {Side::lower, Side::upper}) {
    std::vector<double> xs;
    for (const ExitSample& s : ens.samples)
      if (s.side == side) xs.push_back(s.xi1);
    const EmpiricalLaw law = EmpiricalLaw::binned(edges, xs);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      emp.push_back(static_cast<double>(law.counts[i]) / n);
      auto dens = [&](double v) { return poisson_kernel_raw(v, kPi / 2.0, side); };
      model.push_back(integrate(dens, edges[i], edges[i + 1], 1e-12).value);
    }
  }
  const double worst = detail::worst_rel(emp, model);

  // independent quarter-height run for the side probability
  SimConfig cfg;
  cfg.dt = 1e-4;
  cfg.n_paths = 200000;
  cfg.seed = opt.seed;
  cfg.bridge_correction = true;
  cfg.workers = opt.workers;
  const ExitEnsemble quarter = sample_exit_ensemble({0.0, kPi / 4.0}, cfg);
  std::int64_t lower_hits = 0;
  for (const ExitSample& s : quarter.samples)
    if (s.side == Side::lower) ++lower_hits;
  const double side_prob = static_cast<double>(lower_hits) / static_cast<double>(quarter.samples.size());
  const double side_err = std::abs(side_prob - 0.75);
  const bool side_ok = quarter.aborted == 0 && side_err <= 0.01 * opt.tolerance_scale;

  res.measured = worst;
  res.passed = worst <= res.tolerance && side_ok;
  res.detail = "sup relative bin error; lower-side probability " + std::to_string(side_prob);
  res.seconds = detail::elapsed(t0);
  return res;
}

// 5. exit-time empirical CDF against the integrated two-sided hitting density
// at four check times, on the criterion-4 ensemble
inline CriterionResult criterion_exit_time(const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res{5, "exit-time-ecdf"};
  res.tolerance = 0.01 * opt.tolerance_scale;
  const ExitEnsemble& ens = detail::midheight_exits(opt);
  if (ens.aborted > 0) {
    res.detail = "ensemble aborted on a non-finite increment";
    res.seconds = detail::elapsed(t0);
    return res;
  }
  std::vector<double> taus;
  taus.reserve(ens.samples.size());
  for (const ExitSample& s : ens.samples) taus.push_back(s.tau);
  const EmpiricalLaw law = EmpiricalLaw::ecdf(std::move(taus));
  double worst = 0.0;
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    const double model =
        hitting_cdf(t, kPi / 2.0, Side::lower) + hitting_cdf(t, kPi / 2.0, Side::upper);
    worst = std::max(worst, std::abs(law.ecdf_at(t) - model));
  }
  res.measured = worst;
  res.passed = worst <= res.tolerance;
  res.detail = "max CDF gap at t in {0.1, 0.5, 1, 2}";
  res.seconds = detail::elapsed(t0);
  return res;
}

// 6. excursion jump law: side-change ratio and conditional displacement CDFs
// of harvested excursions against the closed exit-density tails
inline CriterionResult criterion_excursion_law(const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res{6, "excursion-jump-law"};
  res.tolerance = 0.05 * opt.tolerance_scale;
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_paths = 300;
  cfg.horizon = 200.0;
  cfg.seed = opt.seed;
  cfg.workers = opt.workers;
  const HarvestResult harvest = excursion_harvest({0.0, kPi / 2.0}, cfg, 0.1, 1.0);
  const JumpLawReport law = excursion_jump_law(harvest.records, 1.0);
  const double ks = std::max(law.ks_same, law.ks_cross);
  const double ratio_err = std::abs(law.side_ratio - law.expected_ratio) / law.expected_ratio;
  res.measured = ks;
  res.passed = law.sufficient && ratio_err <= 0.10 * opt.tolerance_scale && ks <= res.tolerance;
  res.detail = "KS distance (worst of both kinds); side ratio " + std::to_string(law.side_ratio) +
               " vs " + std::to_string(law.expected_ratio) + ", " +
               std::to_string(law.same_count + law.cross_count) + " filtered records";
  res.seconds = detail::elapsed(t0);
  return res;
}

// 7. component inequalities over random draws: the first-component bound, the
// quadratic lower bound of the scaled cosh, and scale monotonicity of the
// second component
inline CriterionResult criterion_component_inequalities(const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res{7, "component-inequalities"};
  res.tolerance = 1e-12 * opt.tolerance_scale;
  PathRng rng(opt.seed, 1);
  double worst = -kInf;
  for (int i = 0; i < 100; ++i) {
    const double ell = 0.25 * std::pow(16.0, rng.uniform());
    const double u_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double u_mag = 0.05 + 8.0 * rng.uniform();
    const double u = u_sign * u_mag;
    BoundaryFunction f;
    const double roll = rng.uniform();
    if (roll < 0.4) {
      const double amp = 0.3 + rng.uniform();
      const double center = 2.0 * rng.uniform() - 1.0;
      const double width = 0.4 + 1.6 * rng.uniform();
      f = BoundaryFunction::gaussian(amp, center, width);
    } else if (roll < 0.8) {
      const double center = 2.0 * rng.uniform() - 1.0;
      const double width = 0.3 + 1.7 * rng.uniform();
      f = BoundaryFunction::hat(center, width);
    } else {
      const double lo = -1.0 - rng.uniform();
      const double hi = 1.0 + rng.uniform();
      const double ramp = 0.5 + rng.uniform();
      f = BoundaryFunction::plateau(lo, hi, ramp);
    }
    const bool two_sided = rng.uniform() < 0.5;
    BoundaryPair fp{f, two_sided ? BoundaryFunction::hat(rng.uniform(), 1.0)
                                 : BoundaryFunction::zero()};
    const double n2 = fp.lower.l2_norm_sq() + fp.upper.l2_norm_sq();
    const double bound = 2.0 / ell * n2;
    worst = std::max(worst, (form_A1(ell, fp).value - bound) / bound);
    const double quad = 0.5 * u * u;
    worst = std::max(worst, (quad - ell * ell * cosh_m1(u / ell)) / quad);
    const double ell2 = ell * (1.25 + 2.0 * rng.uniform());
    const double a2a = form_A2(ell, fp).value;
    const double a2b = form_A2(ell2, fp).value;
    worst = std::max(worst, (a2a - a2b) / a2b);
  }
  res.measured = worst;
  res.passed = worst <= res.tolerance;
  res.detail = "worst relative excess over 100 draws x 3 inequalities";
  res.seconds = detail::elapsed(t0);
  return res;
}

// 8. scaling limits of the two components for the one-sided unit gaussian:
// the scaled first component against the squared data norm along a vanishing
// schedule, and the second component against its large-scale cap
inline CriterionResult criterion_scaling_limits(const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res{8, "scaling-limits"};
  res.tolerance = 0.02 * opt.tolerance_scale;
  const BoundaryPair f{BoundaryFunction::gaussian(1.0, 0.0, 1.0), BoundaryFunction::zero()};
  const double target1 = std::sqrt(kPi / 2.0);

  bool ok = true;
  double prev_gap = kInf;
  double final1 = 0.0;
  for (double ell : {1.0, 0.5, 0.25, 0.125}) {
    const double gap = std::abs(ell * form_A1(ell, f).value - target1) / target1;
    ok = ok && gap <= prev_gap;
    prev_gap = gap;
    final1 = gap;
  }
  ok = ok && final1 <= res.tolerance;

  const double cap = 8.0 * kPi * form_Ainf(f).value;
  double prev_val = -kInf;
  prev_gap = kInf;
  double final2 = 0.0;
  for (double ell : {1.0, 2.0, 4.0, 8.0}) {
    const double val = form_A2(ell, f).value;
    const double gap = (cap - val) / cap;
    ok = ok && val > prev_val && gap < prev_gap;
    prev_val = val;
    prev_gap = gap;
    final2 = gap;
  }
  ok = ok && final2 <= res.tolerance;

  res.measured = std::max(final1, final2);
  res.passed = ok;
  res.detail = "final relative gaps " + std::to_string(final1) + " (scaled first component), " +
               std::to_string(final2) + " (second component vs cap)";
  res.seconds = detail::elapsed(t0);
  return res;
}

// 9. Galerkin resolvent scans toward the three limiting forms, plus the
// block identity of the difference-form matrix
inline CriterionResult criterion_resolvent_scans(const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res{9, "resolvent-scan-convergence"};
  res.tolerance = 0.05 * opt.tolerance_scale;
  const GalerkinBasis basis{8.0, 129};
  const BoundaryPair f{BoundaryFunction::gaussian(1.0, 0.0, 1.0), BoundaryFunction::zero()};

  bool ok = true;
  double worst_final = 0.0;
  struct Scan {
    double target;
    std::vector<double> schedule;
  };
  const Scan scans[] = {
      {0.0, {1.0, 0.5, 0.25, 0.125}},
      {2.0, {1.0, 1.5, 1.9, 1.99}},
      {kInf, {1.0, 2.0, 4.0, 8.0}},
  };
  for (const Scan& s : scans) {
    const MoscoScanReport rep = mosco_scan(s.target, s.schedule, 1.0, f, basis);
    for (std::size_t i = 1; i < rep.relative_gaps.size(); ++i)
      ok = ok && rep.relative_gaps[i] < rep.relative_gaps[i - 1];
    worst_final = std::max(worst_final, rep.relative_gaps.back());
  }
  ok = ok && worst_final <= res.tolerance;

  // difference-form block identity: the assembled quadratic form equals the
  // mass-matrix norm of the between-sides difference vector; two-sided data
  // exercises all four blocks
  const BoundaryPair two{BoundaryFunction::gaussian(1.0, 0.0, 1.0), BoundaryFunction::hat(0.5, 1.0)};
  const MassMatrix M = assemble_mass(basis);
  const FormMatrix A0 = assemble_form(FormKind::a0, 0.0, basis);
  const Eigen::VectorXd tv = nodal_coefficients(two, basis);
  const int m = basis.nodes;
  const Eigen::VectorXd diff = tv.head(m) - tv.tail(m);
  const double via_blocks = tv.dot(A0.A * tv);
  const double via_mass = diff.dot(M.M.topLeftCorner(m, m) * diff) / kTwoPi;
  const double identity_defect = std::abs(via_blocks - via_mass) / via_blocks;
  ok = ok && identity_defect <= 1e-12 * opt.tolerance_scale;

  res.measured = worst_final;
  res.passed = ok;
  res.detail = "worst final relative resolvent gap; block identity defect " +
               std::to_string(identity_defect);
  res.seconds = detail::elapsed(t0);
  return res;
}

// 10. kernel self-consistency: the two series representations of the killed
// heat kernel and the hitting density, the semigroup composition law, and the
// time integral of the hitting density against the harmonic-measure mass
inline CriterionResult criterion_kernel_consistency(const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res{10, "kernel-self-consistency"};
  res.tolerance = 1e-10 * opt.tolerance_scale;

  // spectral vs image representations across the time switch; small times
  // need far more spectral modes than the dispatching default ever uses
  SeriesTruncation wide;
  wide.n_max = 4096;
  wide.k_max = 64;
  double worst_rep = 0.0;
  const std::vector<double> heights{0.3, kPi / 4.0, kPi / 2.0, 2.0, kPi - 0.3};
  for (int k = 0; k <= 8; ++k) {
    const double t = 1e-3 * std::pow(10.0, 0.5 * static_cast<double>(k));
    for (double x2 : heights) {
      for (double y2 : heights) {
        const double a = killed_heat_kernel_spectral(t, x2, y2, wide);
        const double b = killed_heat_kernel_image(t, x2, y2, wide);
        worst_rep = std::max(worst_rep, std::abs(a - b));
      }
      for (Side s : {Side::lower, Side::upper}) {
        const double a = hitting_density_spectral(t, x2, s, wide);
        const double b = hitting_density_image(t, x2, s, wide);
        worst_rep = std::max(worst_rep, std::abs(a - b));
      }
    }
  }
  bool ok = worst_rep <= res.tolerance;

  // semigroup composition over the transverse interval
  double worst_ck = 0.0;
  for (const auto& [s, t] : {std::pair{0.1, 0.2}, {0.05, 0.4}, {0.5, 0.5}}) {
    for (double x2 : {kPi / 4.0, kPi / 2.0}) {
      for (double y2 : {1.0, 2.5}) {
        auto integrand = [&, s = s, t = t](double z) {
          return killed_heat_kernel(s, x2, z) * killed_heat_kernel(t, z, y2);
        };
        const double composed =
            integrate_path(integrand, {0.0, x2, y2, kPi}, 1e-12).value;
        worst_ck = std::max(worst_ck, std::abs(composed - killed_heat_kernel(s + t, x2, y2)));
      }
    }
  }
  ok = ok && worst_ck <= 1e-8 * opt.tolerance_scale;

  // hitting-density time integral against the side mass
  double worst_mass = 0.0;
  for (double x2 : {kPi / 4.0, kPi / 2.0, 3.0 * kPi / 4.0}) {
    for (Side side : {Side::lower, Side::upper}) {
      auto dens = [&](double t) { return hitting_density(t, x2, side); };
      const double mass =
          integrate_path(dens, {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 60.0}, 1e-12)
              .value;
      worst_mass = std::max(worst_mass, std::abs(mass - poisson_side_mass(x2, side)));
    }
  }
  ok = ok && worst_mass <= 1e-8 * opt.tolerance_scale;

  res.measured = worst_rep;
  res.passed = ok;
  res.detail = "representations " + std::to_string(worst_rep) + ", composition " +
               std::to_string(worst_ck) + ", mass identity " + std::to_string(worst_mass);
  res.seconds = detail::elapsed(t0);
  return res;
}

inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {},
                                                   std::ostream* log = nullptr) {
  opt.validate();
  using Runner = CriterionResult (*)(const AcceptanceOptions&);
  const Runner runners[] = {
      criterion_exit_density,  criterion_damped_pairing,         criterion_trace_energy,
      criterion_exit_place,    criterion_exit_time,              criterion_excursion_law,
      criterion_component_inequalities, criterion_scaling_limits, criterion_resolvent_scans,
      criterion_kernel_consistency,
  };
  std::vector<CriterionResult> results;
  for (int i = 0; i < 10; ++i) {
    if (!opt.criteria.empty() &&
        std::find(opt.criteria.begin(), opt.criteria.end(), i + 1) == opt.criteria.end())
      continue;
    const CriterionResult r = runners[i](opt);
    if (log) {
      (*log) << "criterion " << r.index << " [" << r.name << "]: "
             << (r.passed ? "pass" : "FAIL") << "  measured " << r.measured << " vs tolerance "
             << r.tolerance << "  (" << r.detail << ", " << r.seconds << " s)\n";
      log->flush();
    }
    results.push_back(r);
  }
  return results;
}

}  // namespace striplab
