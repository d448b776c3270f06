#pragma once

// Path simulation for the strip: exit samples of unreflected vertical motion,
// reflected long-run streams, and excursion (boundary-jump) harvesting, all
// driven by counter-based per-path RNG streams so ensembles are reproducible
// for any worker count.

#include <striplab/common.hpp>
#include <striplab/kernels.hpp>
#include <striplab/parallel.hpp>
#include <striplab/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace striplab {

struct SimConfig {
  double dt = 1e-3;
  std::int64_t n_paths = 10000;
  std::uint64_t seed = 1;
  bool bridge_correction = true;
  double horizon = 50.0;  // reflected runs only; exit runs stop at the exit
  int workers = 1;

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (n_paths < 1) throw std::invalid_argument("n_paths must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  }
};

struct PathState {
  double b1 = 0.0;
  double b2 = 0.0;  // stays in [0, pi] on reflected streams
  double t = 0.0;
};

struct ExitSample {
  double tau = 0.0;  // > 0
  Side side = Side::lower;
  double xi1 = 0.0;  // horizontal coordinate at the exit instant
};

struct ExcursionRecord {
  double start_x1 = 0.0;
  double end_x1 = 0.0;
  Side start_side = Side::lower;
  Side end_side = Side::lower;
  double max_height = 0.0;  // distance to the nearer boundary at the apex, in (0, pi/2]
  double duration = 0.0;
};

// Histogram or ECDF container; for the binned form the counts sum to total
// and samples falling outside the edge range are tallied separately.
struct EmpiricalLaw {
  std::vector<double> edges;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
  std::int64_t out_of_range = 0;
  std::vector<double> samples;  // sorted when the ECDF form is used

  static EmpiricalLaw binned(std::vector<double> edges, const std::vector<double>& values) {
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
      throw std::invalid_argument("bin edges must be sorted with at least two entries");
    EmpiricalLaw law;
    law.edges = std::move(edges);
    law.counts.assign(law.edges.size() - 1, 0);
    for (double v : values) {
      if (v < law.edges.front() || v > law.edges.back()) {
        ++law.out_of_range;
        continue;
      }
      auto it = std::upper_bound(law.edges.begin(), law.edges.end(), v);
      std::size_t bin = static_cast<std::size_t>(it - law.edges.begin());
      bin = bin == 0 ? 0 : bin - 1;                          // v == edges.front()
      if (bin >= law.counts.size()) bin = law.counts.size() - 1;  // v == edges.back()
      ++law.counts[bin];
      ++law.total;
    }
    return law;
  }

  static EmpiricalLaw ecdf(std::vector<double> values) {
    EmpiricalLaw law;
    std::sort(values.begin(), values.end());
    law.total = static_cast<std::int64_t>(values.size());
    law.samples = std::move(values);
    return law;
  }

  std::int64_t sample_count() const { return total + out_of_range; }

  // fraction of all offered samples landing in bin i
  double bin_fraction(std::size_t i) const {
    return sample_count() == 0 ? 0.0
                               : static_cast<double>(counts.at(i)) / static_cast<double>(sample_count());
  }

  // fraction of samples <= t (ECDF form)
  double ecdf_at(double t) const {
    if (samples.empty()) return 0.0;
    auto it = std::upper_bound(samples.begin(), samples.end(), t);
    return static_cast<double>(it - samples.begin()) / static_cast<double>(samples.size());
  }
};

// Fold a free vertical position into [0, pi]: reduce mod 2*pi, reflect the
// upper half.  Exact in distribution for the reflected walk at grid times.
inline double fold_reflect(double y) {
  y = std::fmod(y, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  return y > kPi ? kTwoPi - y : y;
}

namespace detail {

// substream roles within a path's counter space
inline constexpr std::uint32_t kStreamNormals = 0;
inline constexpr std::uint32_t kStreamUniforms = 1;
inline constexpr std::uint32_t kStreamUniformsAlt = 2;  // second lattice for coupled runs

// crossing probability below e^{-42} is treated as zero
inline constexpr double kBridgeExponentCap = 21.0;

struct StepExit {
  double tau_frac;  // crossing instant as a fraction of the step
  Side side;
};

// One vertical step from y (distance coordinates d0 = y, u0 = pi - y), with
// optional one-sided bridge checks against both walls.  Two-wall crossings in
// a single step are below the e^{-42} cutoff for any dt <= 1e-3.
template <typename Normals, typename Uniforms>
inline std::optional<StepExit> advance_vertical(double& y, double dt, double sqrt_dt, bool bridge,
                                                Normals&& next_normal, Uniforms& uniforms) {
  const double y1 = y + sqrt_dt * next_normal();
  if (!std::isfinite(y1)) throw std::runtime_error("non-finite increment");
  if (y1 <= 0.0 || y1 >= kPi) {
    const Side side = y1 <= 0.0 ? Side::lower : Side::upper;
    const double frac = bridge ? uniforms.uniform() : 1.0;
    y = y1;
    return StepExit{frac, side};
  }
  if (bridge) {
    if (y * y1 < kBridgeExponentCap * dt &&
        uniforms.uniform() < std::exp(-2.0 * y * y1 / dt)) {
      const double frac = uniforms.uniform();
      y = y1;
      return StepExit{frac, Side::lower};
    }
    const double d0 = kPi - y;
    const double d1 = kPi - y1;
    if (d0 * d1 < kBridgeExponentCap * dt && uniforms.uniform() < std::exp(-2.0 * d0 * d1 / dt)) {
      const double frac = uniforms.uniform();
      y = y1;
      return StepExit{frac, Side::upper};
    }
  }
  y = y1;
  return std::nullopt;
}

// exit-run guard: vertical exit beyond this time has probability < 1e-100
inline constexpr double kExitTimeGuard = 1000.0;

}  // namespace detail

// ---------------------------------------------------------------------------
// Exit sampling: vertical coordinate runs unreflected until it leaves (0, pi)
// (the pre-exit law needs no reflection); the horizontal coordinate is an
// independent Brownian motion, so its exit value is x1 + sqrt(tau) * Z in one
// draw.  With bridge correction each step also samples a within-step wall
// crossing with probability exp(-2 d0 d1 / dt) per wall and attributes the
// crossing instant uniformly inside the step.
// ---------------------------------------------------------------------------

inline std::optional<ExitSample> sample_exit(const InteriorPoint& x, const SimConfig& cfg,
                                             std::uint64_t path_index = 0) {
  cfg.validate();
  PathRng normals(cfg.seed, path_index, detail::kStreamNormals);
  PathRng uniforms(cfg.seed, path_index, detail::kStreamUniforms);
  const double sqrt_dt = std::sqrt(cfg.dt);
  double y = x.x2;
  double t = 0.0;
  try {
    while (t < detail::kExitTimeGuard) {
      const auto exit = detail::advance_vertical(
          y, cfg.dt, sqrt_dt, cfg.bridge_correction, [&] { return normals.normal(); }, uniforms);
      if (exit) {
        const double tau = t + exit->tau_frac * cfg.dt;
        const double xi1 = x.x1 + std::sqrt(tau) * normals.normal();
        if (!std::isfinite(xi1)) return std::nullopt;
        return ExitSample{tau, exit->side, xi1};
      }
      t += cfg.dt;
    }
  } catch (const std::runtime_error&) {
    return std::nullopt;  // non-finite increment; caller tallies the abort
  }
  return std::nullopt;  // guard-time cap; probability < 1e-100 per path
}

struct ExitEnsemble {
  std::vector<ExitSample> samples;  // in path order, aborted paths skipped
  std::int64_t aborted = 0;
  std::int64_t first_aborted_path = -1;
};

inline ExitEnsemble sample_exit_ensemble(const InteriorPoint& x, const SimConfig& cfg) {
  cfg.validate();
  auto per_path = parallel_map(static_cast<std::size_t>(cfg.n_paths), cfg.workers,
                               [&](std::size_t i) { return sample_exit(x, cfg, i); });
  ExitEnsemble out;
  out.samples.reserve(per_path.size());
  for (std::size_t i = 0; i < per_path.size(); ++i) {
    if (per_path[i]) {
      out.samples.push_back(*per_path[i]);
    } else {
      ++out.aborted;
      if (out.first_aborted_path < 0) out.first_aborted_path = static_cast<std::int64_t>(i);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exit-time law: ECDF of tau against the integrated hitting density
// (hitting_cdf summed over both sides), with the largest gap over the
// requested checkpoints reported.
// ---------------------------------------------------------------------------

struct ExitTimeReport {
  EmpiricalLaw law;  // ECDF form
  std::vector<double> check_times;
  std::vector<double> empirical;
  std::vector<double> model;
  double max_gap = 0.0;
  std::int64_t aborted = 0;
};

inline ExitTimeReport empirical_exit_time(const InteriorPoint& x, const SimConfig& cfg,
                                          std::vector<double> check_times = {0.1, 0.5, 1.0, 2.0}) {
  ExitEnsemble ens = sample_exit_ensemble(x, cfg);
  std::vector<double> taus;
  taus.reserve(ens.samples.size());
  for (const ExitSample& s : ens.samples) taus.push_back(s.tau);
  ExitTimeReport report;
  report.law = EmpiricalLaw::ecdf(std::move(taus));
  report.check_times = std::move(check_times);
  report.aborted = ens.aborted;
  for (double t : report.check_times) {
    const double emp = report.law.ecdf_at(t);
    const double mod = hitting_cdf(t, x.x2, Side::lower) + hitting_cdf(t, x.x2, Side::upper);
    report.empirical.push_back(emp);
    report.model.push_back(mod);
    report.max_gap = std::max(report.max_gap, std::abs(emp - mod));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Reflected stream: vertical coordinate folded into [0, pi] each step (exact
// in law at grid times), horizontal coordinate a plain Gaussian walk.  The
// visitor sees the initial state and every grid state up to the horizon.
// ---------------------------------------------------------------------------

template <typename Visitor>
inline void simulate_reflected(const InteriorPoint& x, const SimConfig& cfg,
                               std::uint64_t path_index, Visitor&& visit) {
  cfg.validate();
  PathRng normals(cfg.seed, path_index, detail::kStreamNormals);
  const double sqrt_dt = std::sqrt(cfg.dt);
  PathState s{x.x1, x.x2, 0.0};
  visit(static_cast<const PathState&>(s));
  const auto steps = static_cast<std::int64_t>(std::ceil(cfg.horizon / cfg.dt - 0.5));
  for (std::int64_t k = 0; k < steps; ++k) {
    const double z1 = normals.normal();
    const double z2 = normals.normal();
    s.b1 += sqrt_dt * z1;
    double y = s.b2 + sqrt_dt * z2;
    // single-reflection fast path; increments are far smaller than the strip
    if (y < 0.0) y = -y;
    if (y > kPi) y = kTwoPi - y;
    if (y < 0.0 || y > kPi) y = fold_reflect(y);
    if (!std::isfinite(y) || !std::isfinite(s.b1)) throw std::runtime_error("non-finite increment");
    s.b2 = y;
    s.t = static_cast<double>(k + 1) * cfg.dt;
    visit(static_cast<const PathState&>(s));
  }
}

// ---------------------------------------------------------------------------
// Excursion harvesting.  An excursion is a maximal stretch of grid instants
// farther than h_min/10 from both walls, delimited by the last near-wall grid
// instant before and the first one after; its endpoints project to the wall
// nearest at those instants.  Records are kept when the apex height reaches
// h_min and the horizontal displacement exceeds delta.  Stretches clipped by
// the stream's start or end that already reached h_min are discarded but
// counted as truncated.
// ---------------------------------------------------------------------------

class ExcursionHarvester {
 public:
  ExcursionHarvester(double h_min, double delta) : h_min_(h_min), delta_(delta), eps_(h_min / 10.0) {
    if (!(h_min > 0.0) || !(h_min < kPi / 2.0))
      throw std::invalid_argument("h_min must lie in (0, pi/2)");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  }

  void feed(const PathState& s) {
    const double dist = std::min(s.b2, kPi - s.b2);
    const Side near_side = s.b2 <= kPi / 2.0 ? Side::lower : Side::upper;
    if (dist <= eps_) {
      if (segment_open_) {
        if (segment_anchored_ && segment_height_ >= h_min_) {
          const ExcursionRecord rec{anchor_x1_, s.b1,          anchor_side_,
                                    near_side,  segment_height_, s.t - anchor_t_};
          if (std::abs(rec.end_x1 - rec.start_x1) > delta_) records_.push_back(rec);
        } else if (!segment_anchored_ && segment_height_ >= h_min_) {
          ++truncated_;  // clipped at the stream start
        }
        segment_open_ = false;
      }
      anchor_x1_ = s.b1;
      anchor_side_ = near_side;
      anchor_t_ = s.t;
      anchored_ = true;
    } else {
      if (!segment_open_) {
        segment_open_ = true;
        segment_anchored_ = anchored_;
        segment_height_ = dist;
      } else if (dist > segment_height_) {
        segment_height_ = dist;
      }
    }
  }

  // close the stream: an open segment that already qualified is truncated
  void finish() {
    if (segment_open_ && segment_height_ >= h_min_) ++truncated_;
    segment_open_ = false;
    anchored_ = false;
  }

  const std::vector<ExcursionRecord>& records() const { return records_; }
  std::vector<ExcursionRecord>&& take_records() { return std::move(records_); }
  std::int64_t truncated() const { return truncated_; }

 private:
  double h_min_;
  double delta_;
  double eps_;
  std::vector<ExcursionRecord> records_;
  std::int64_t truncated_ = 0;
  bool anchored_ = false;   // a near-wall instant has been seen
  bool segment_open_ = false;
  bool segment_anchored_ = false;  // open segment has a valid start anchor
  double anchor_x1_ = 0.0;
  Side anchor_side_ = Side::lower;
  double anchor_t_ = 0.0;
  double segment_height_ = 0.0;
};

struct HarvestResult {
  std::vector<ExcursionRecord> records;  // concatenated in path order
  std::int64_t truncated = 0;
};

inline HarvestResult excursion_harvest(const InteriorPoint& x, const SimConfig& cfg, double h_min,
                                       double delta) {
  cfg.validate();
  ExcursionHarvester{h_min, delta};  // validate thresholds before spawning work
  auto per_path = parallel_map(static_cast<std::size_t>(cfg.n_paths), cfg.workers,
                               [&](std::size_t i) {
                                 ExcursionHarvester h(h_min, delta);
                                 simulate_reflected(x, cfg, i, [&](const PathState& s) { h.feed(s); });
                                 h.finish();
                                 return std::pair(h.take_records(), h.truncated());
                               });
  HarvestResult out;
  for (auto& [recs, trunc] : per_path) {
    out.records.insert(out.records.end(), recs.begin(), recs.end());
    out.truncated += trunc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Jump-law comparison.  Same-wall and cross-wall displacement tails of the
// boundary jump intensity integrate in closed form, giving a count ratio of
// coth(delta/2) and the two conditional |displacement| laws below.
// ---------------------------------------------------------------------------

inline double same_side_tail_cdf(double u, double delta) {
  const double c = 1.0 / std::tanh(delta / 2.0);
  return (c - 1.0 / std::tanh(u / 2.0)) / (c - 1.0);
}

inline double cross_side_tail_cdf(double u, double delta) {
  const double s = std::tanh(delta / 2.0);
  return (std::tanh(u / 2.0) - s) / (1.0 - s);
}

struct JumpLawReport {
  double delta = 0.0;
  std::int64_t same_count = 0;
  std::int64_t cross_count = 0;
  double side_ratio = 0.0;      // same / cross
  double expected_ratio = 0.0;  // coth(delta/2)
  double ks_same = 0.0;
  double ks_cross = 0.0;
  double positive_fraction = 0.0;  // displacement sign balance, -> 1/2
  bool sufficient = false;         // >= 1e4 records backing the comparison
};

namespace detail {

template <typename Cdf>
inline double ks_distance(std::vector<double>& sorted_values, Cdf&& cdf) {
  std::sort(sorted_values.begin(), sorted_values.end());
  const double n = static_cast<double>(sorted_values.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < sorted_values.size(); ++i) {
    const double f = cdf(sorted_values[i]);
    ks = std::max(ks, std::max(std::abs((i + 1.0) / n - f), std::abs(i / n - f)));
  }
  return ks;
}

}  // namespace detail

inline JumpLawReport excursion_jump_law(const std::vector<ExcursionRecord>& records, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  JumpLawReport report;
  report.delta = delta;
  report.expected_ratio = 1.0 / std::tanh(delta / 2.0);
  std::vector<double> same, cross;
  std::int64_t positive = 0, kept = 0;
  for (const ExcursionRecord& r : records) {
    const double d = r.end_x1 - r.start_x1;
    if (!(std::abs(d) > delta)) continue;
    ++kept;
    if (d > 0.0) ++positive;
    (r.start_side == r.end_side ? same : cross).push_back(std::abs(d));
  }
  report.same_count = static_cast<std::int64_t>(same.size());
  report.cross_count = static_cast<std::int64_t>(cross.size());
  report.side_ratio = cross.empty() ? kInf : static_cast<double>(same.size()) / cross.size();
  if (!same.empty())
    report.ks_same = detail::ks_distance(same, [&](double u) { return same_side_tail_cdf(u, delta); });
  if (!cross.empty())
    report.ks_cross =
        detail::ks_distance(cross, [&](double u) { return cross_side_tail_cdf(u, delta); });
  report.positive_fraction = kept == 0 ? 0.0 : static_cast<double>(positive) / kept;
  report.sufficient = kept >= 10000;
  return report;
}

// ---------------------------------------------------------------------------
// Bias probe: the same Brownian paths discretized at dt and dt/2 (the coarse
// increment is the sum of the two fine half-increments), so the difference in
// the lower-wall exit frequency isolates the step-size bias from resampling
// noise.  Wall-crossing uniforms stay on separate substreams.
// ---------------------------------------------------------------------------

struct BridgeBiasReport {
  double coarse_estimate = 0.0;  // lower-wall frequency at dt
  double fine_estimate = 0.0;    // lower-wall frequency at dt/2
  double difference = 0.0;
  double standard_error = 0.0;  // binomial s.e. of a single estimate
  std::int64_t n_paths = 0;
};

inline BridgeBiasReport bridge_bias_probe(const InteriorPoint& x, const SimConfig& cfg) {
  cfg.validate();
  const double fine_dt = cfg.dt / 2.0;
  const double sqrt_fine = std::sqrt(fine_dt);
  auto lower_pair = parallel_map(
      static_cast<std::size_t>(cfg.n_paths), cfg.workers, [&](std::size_t i) -> std::pair<int, int> {
        auto run = [&](bool coarse, std::uint32_t uniform_stream) -> int {
          PathRng normals(cfg.seed, i, detail::kStreamNormals);
          PathRng uniforms(cfg.seed, i, uniform_stream);
          const double dt = coarse ? cfg.dt : fine_dt;
          const double sqrt_dt = std::sqrt(dt);
          // the coarse step consumes the same two fine draws, summed
          auto next = [&]() -> double {
            if (!coarse) return normals.normal();
            return (normals.normal() + normals.normal()) * (sqrt_fine / sqrt_dt);
          };
          double y = x.x2;
          for (double t = 0.0; t < detail::kExitTimeGuard; t += dt) {
            const auto exit =
                detail::advance_vertical(y, dt, sqrt_dt, cfg.bridge_correction, next, uniforms);
            if (exit) return exit->side == Side::lower ? 1 : 0;
          }
          return 0;
        };
        return {run(true, detail::kStreamUniforms), run(false, detail::kStreamUniformsAlt)};
      });
  BridgeBiasReport report;
  report.n_paths = cfg.n_paths;
  std::int64_t coarse = 0, fine = 0;
  for (auto [c, f] : lower_pair) {
    coarse += c;
    fine += f;
  }
  report.coarse_estimate = static_cast<double>(coarse) / cfg.n_paths;
  report.fine_estimate = static_cast<double>(fine) / cfg.n_paths;
  report.difference = report.fine_estimate - report.coarse_estimate;
  const double p = report.coarse_estimate;
  report.standard_error = std::sqrt(std::max(p * (1.0 - p), 1e-12) / cfg.n_paths);
  return report;
}

}  // namespace striplab
