// Command-line laboratory around the strip boundary-process library: kernel
// tables, energy-form evaluation, damped-pairing limits, resolvent-convergence
// scans, path simulation, and the acceptance suite.  Every run writes its
// artifacts plus a manifest (merged parameters + content hashes) into the
// output directory; fixed seeds make reruns byte-identical.
//
// Exit codes: 0 success, 2 usage error, 3 tolerance failure, 4 divergence.

#include <striplab/acceptance.hpp>
#include <striplab/boundary_data.hpp>
#include <striplab/common.hpp>
#include <striplab/forms.hpp>
#include <striplab/galerkin.hpp>
#include <striplab/kernels.hpp>
#include <striplab/montecarlo.hpp>
#include <striplab/quadrature.hpp>
#include <striplab/report.hpp>
#include <striplab/version.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace {

using striplab::Json;

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kToleranceFailure = 3;
constexpr int kDivergence = 4;
constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// JSON stays parseable when a value is +-inf: encode non-finite as a string
Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return striplab::format_number(v);
}

// config file: a flat JSON object of flag values; a manifest works too (its
// "params" member is unwrapped), so a finished run can be replayed directly
Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  Json cfg;
  try {
    cfg = Json::parse(in);
  } catch (const Json::exception& e) {
    throw UsageError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (cfg.is_object() && cfg.contains("params") && cfg.at("params").is_object())
    cfg = cfg.at("params");
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
  return cfg;
}

// flags win over the config file; config keys are the long flag names without
// the leading dashes (positionals keep their bare name)
struct Overlay {
  Json cfg = Json::object();

  template <typename T>
  void fill(const CLI::App& scope, const std::string& opt_name, T& value) const {
    std::string key = opt_name;
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    if (!cfg.contains(key) || scope.count(opt_name) > 0) return;
    try {
      cfg.at(key).get_to(value);
    } catch (const Json::exception&) {
      throw UsageError("config key '" + key + "' has the wrong type");
    }
  }
};

struct RunContext {
  std::filesystem::path dir;
  std::uint64_t seed = 2026;
  int workers = 1;
  Json params = Json::object();
  std::vector<std::filesystem::path> artifacts;

  void add_text_artifact(const std::string& name, const std::string& text) {
    const auto path = dir / name;
    striplab::write_text_file(path, text);
    artifacts.push_back(path);
  }

  void add_report(const Json& params_json, const Json& results, const Json& errors) {
    const auto path = dir / "report.json";
    striplab::write_json_file(path, striplab::report_envelope(params_json, results, errors));
    artifacts.push_back(path);
  }
};

struct Grid {
  double min = 0.0;
  double max = 0.0;
  double step = 0.0;

  int rows() const {
    if (!(step > 0.0)) throw UsageError("grid step must be positive");
    if (!(max >= min)) throw UsageError("grid max must not be below min");
    const double n = std::floor((max - min) / step + 1e-9) + 1.0;
    if (n > 200000.0) throw UsageError("grid would exceed 200000 rows");
    return static_cast<int>(n);
  }
  double at(int i) const { return min + step * static_cast<double>(i); }
};

const char* side_name(striplab::Side s) { return s == striplab::Side::lower ? "lower" : "upper"; }

// ---------------------------------------------------------------------------
// eval-kernel
// ---------------------------------------------------------------------------

struct EvalKernelArgs {
  std::string kernel;
  double x2 = striplab::kPi / 2.0;
  double y2 = striplab::kPi / 2.0;
  double ell = 1.0;
  double min = kUnset, max = kUnset, step = kUnset;
  double tail_tol = 1e-12;
  int n_max = 4096;
  int k_max = 64;
  double t_switch = 0.5;
};

int run_eval_kernel(RunContext& ctx, const EvalKernelArgs& a) {
  using namespace striplab;
  static const std::vector<std::string> known{"poisson", "p0", "h", "feller", "k1", "k2"};
  if (std::find(known.begin(), known.end(), a.kernel) == known.end())
    throw UsageError("unknown kernel '" + a.kernel +
                     "' (choose among poisson, p0, h, feller, k1, k2)");

  const bool time_grid = a.kernel == "p0" || a.kernel == "h";
  const Grid grid{std::isnan(a.min) ? (time_grid ? 0.1 : -4.0) : a.min,
                  std::isnan(a.max) ? (time_grid ? 2.0 : 4.0) : a.max,
                  std::isnan(a.step) ? (time_grid ? 0.1 : 0.5) : a.step};
  const int rows = grid.rows();
  const SeriesTruncation trunc{a.tail_tol, a.n_max, a.k_max, a.t_switch};
  if ((a.kernel == "poisson" || time_grid) && !(a.x2 > 0.0 && a.x2 < kPi))
    throw UsageError("x2 must lie strictly inside (0, pi)");
  if (a.kernel == "p0" && !(a.y2 > 0.0 && a.y2 < kPi))
    throw UsageError("y2 must lie strictly inside (0, pi)");
  if (time_grid && !(grid.min > 0.0)) throw UsageError("time grid must start above 0");

  ctx.params = Json{{"kernel", a.kernel}, {"x2", a.x2},         {"y2", a.y2},
                    {"ell", a.ell},       {"min", grid.min},    {"max", grid.max},
                    {"step", grid.step},  {"tail-tol", a.tail_tol}, {"n-max", a.n_max},
                    {"k-max", a.k_max},   {"t-switch", a.t_switch}, {"seed", ctx.seed},
                    {"workers", ctx.workers}};

  CsvTable table;
  if (a.kernel == "poisson" || a.kernel == "h")
    table.header = {a.kernel == "poisson" ? "v" : "t", "lower", "upper"};
  else if (a.kernel == "feller")
    table.header = {"d", "same", "cross"};
  else
    table.header = {a.kernel == "p0" ? "t" : "u", "value"};

  std::vector<double> xs, ys;  // first value column, finite points only
  for (int i = 0; i < rows; ++i) {
    const double g = grid.at(i);
    std::vector<double> vals;
    if (a.kernel == "poisson")
      vals = {poisson_kernel_raw(g, a.x2, Side::lower), poisson_kernel_raw(g, a.x2, Side::upper)};
    else if (a.kernel == "p0")
      vals = {killed_heat_kernel(g, a.x2, a.y2, trunc)};
    else if (a.kernel == "h")
      vals = {hitting_density(g, a.x2, Side::lower, trunc),
              hitting_density(g, a.x2, Side::upper, trunc)};
    else if (a.kernel == "feller")
      vals = {feller_density({0.0, Side::lower}, {g, Side::lower}),
              feller_density({0.0, Side::lower}, {g, Side::upper})};
    else if (a.kernel == "k1")
      vals = {jump_kernel_k1(a.ell, g)};
    else
      vals = {jump_kernel_k2(a.ell, g)};

    auto& row = table.add_row();
    row.push_back(format_number(g));
    for (double v : vals) row.push_back(format_number(v));
    if (std::isfinite(vals[0])) {
      xs.push_back(g);
      ys.push_back(vals[0]);
    }
  }

  const std::string base = "eval_" + a.kernel;
  ctx.add_text_artifact(base + ".csv", table.to_string());
  ctx.add_text_artifact(base + ".svg", render_svg_curve(a.kernel + " kernel", table.header[0],
                                                        table.header[1], xs, ys));
  Json results{{"kernel", a.kernel},
               {"rows", rows},
               {"header", table.header},
               {"artifacts", Json::array({base + ".csv", base + ".svg"})}};
  ctx.add_report(ctx.params, results, Json::array());
  std::cout << "eval-kernel " << a.kernel << ": " << rows << " rows -> "
            << (ctx.dir / (base + ".csv")).string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// energy
// ---------------------------------------------------------------------------

struct EnergyArgs {
  std::string form = "A0";
  double ell = 1.0;
  std::string lower = "zero";
  std::string upper = "zero";
  double window = 30.0;
  double quad_tol = 1e-9;
  double pad = 12.0;
  double diag_split = 0.125;
  int nodes_per_unit = 1;
  double tensor_tol = 3e-5;
};

int run_energy(RunContext& ctx, const EnergyArgs& a) {
  using namespace striplab;
  const BoundaryPair f{BoundaryFunction::parse(a.lower), BoundaryFunction::parse(a.upper)};
  QuadratureSpec spec;
  spec.window = a.window;
  spec.tol = a.quad_tol;
  spec.pad = a.pad;
  spec.diag_split = a.diag_split;
  spec.nodes_per_unit = a.nodes_per_unit;

  ctx.params = Json{{"form", a.form},          {"ell", a.ell},
                    {"lower", a.lower},        {"upper", a.upper},
                    {"window", a.window},      {"quad-tol", a.quad_tol},
                    {"pad", a.pad},            {"diag-split", a.diag_split},
                    {"nodes-per-unit", a.nodes_per_unit}, {"tensor-tol", a.tensor_tol},
                    {"seed", ctx.seed},        {"workers", ctx.workers}};

  EnergyReport rep;
  if (a.form == "A0")
    rep = form_A0(f, spec);
  else if (a.form == "A1")
    rep = form_A1(a.ell, f, spec);
  else if (a.form == "A2")
    rep = form_A2(a.ell, f, spec);
  else if (a.form == "A")
    rep = form_A(a.ell, f, spec);
  else if (a.form == "traceT")
    rep = trace_energy(f, spec);
  else if (a.form == "Ainf")
    rep = form_Ainf(f, spec);
  else if (a.form == "interior")
    rep = interior_energy(f, spec, a.tensor_tol);
  else
    throw UsageError("unknown form '" + a.form +
                     "' (choose among A0, A1, A2, A, Ainf, traceT, interior)");

  Json breakdown = Json::object();
  for (const auto& [key, v] : rep.breakdown) breakdown[key] = json_number(v);
  Json results{{"form", a.form},
               {"data", f.label()},
               {"value", json_number(rep.value)},
               {"quad_error", json_number(rep.quad_error)},
               {"tail_bound", json_number(rep.tail_bound)},
               {"divergent", rep.divergent},
               {"breakdown", breakdown}};
  Json errors = Json::array();
  if (rep.divergent) errors.push_back("form value diverges for the given boundary data");
  ctx.add_report(ctx.params, results, errors);
  std::cout << "energy " << a.form << " [" << f.label() << "]: value "
            << format_number(rep.value) << (rep.divergent ? " (divergent)" : "") << "\n";
  return rep.divergent ? kDivergence : kOk;
}

// ---------------------------------------------------------------------------
// feller-check
// ---------------------------------------------------------------------------

struct FellerCheckArgs {
  std::string phi_lower = "hat(0,0.5)";
  std::string phi_upper = "zero";
  std::string psi_lower = "zero";
  std::string psi_upper = "hat(0,0.5)";
  std::vector<double> alphas{6.25, 16.0, 49.0};
  double tol = 1e-2;
  double tensor_tol = 3e-5;
};

// one Aitken step on the tail of the sequence; falls back to the last value
// when the increments do not contract
double extrapolate(const std::vector<double>& u) {
  const std::size_t n = u.size();
  if (n < 3) return u.back();
  const double d1 = u[n - 2] - u[n - 3];
  const double d2 = u[n - 1] - u[n - 2];
  if (d1 == 0.0) return u.back();
  const double q = d2 / d1;
  if (!(std::abs(q) < 1.0)) return u.back();
  return u[n - 1] + d2 * q / (1.0 - q);
}

int run_feller_check(RunContext& ctx, const FellerCheckArgs& a) {
  using namespace striplab;
  if (a.alphas.empty()) throw UsageError("alpha schedule must not be empty");
  for (std::size_t i = 1; i < a.alphas.size(); ++i)
    if (!(a.alphas[i] > a.alphas[i - 1])) throw UsageError("alphas must increase strictly");
  const BoundaryPair phi{BoundaryFunction::parse(a.phi_lower), BoundaryFunction::parse(a.phi_upper)};
  const BoundaryPair psi{BoundaryFunction::parse(a.psi_lower), BoundaryFunction::parse(a.psi_upper)};

  ctx.params = Json{{"phi-lower", a.phi_lower}, {"phi-upper", a.phi_upper},
                    {"psi-lower", a.psi_lower}, {"psi-upper", a.psi_upper},
                    {"alphas", a.alphas},       {"tol", a.tol},
                    {"tensor-tol", a.tensor_tol}, {"seed", ctx.seed},
                    {"workers", ctx.workers}};

  const EnergyReport closed = closed_feller_functional(phi, psi);
  Json errors = Json::array();
  if (closed.divergent) {
    Json results{{"closed_form", json_number(closed.value)}, {"divergent", true}};
    errors.push_back("closed pairing diverges for the given boundary data");
    ctx.add_report(ctx.params, results, errors);
    std::cout << "feller-check: closed pairing diverges\n";
    return kDivergence;
  }

  std::vector<double> us;
  for (double alpha : a.alphas) {
    us.push_back(feller_functional(alpha, phi, psi, {}, a.tensor_tol));
    std::cout << "  alpha " << format_number(alpha) << ": " << format_number(us.back()) << "\n";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < us.size(); ++i) monotone = monotone && us[i] > us[i - 1];
  const double ext = extrapolate(us);
  const double gap = closed.value != 0.0 ? std::abs(ext - closed.value) / std::abs(closed.value)
                                         : std::abs(ext - closed.value);

  Json results{{"alphas", a.alphas},
               {"u_alpha", us},
               {"monotone", monotone},
               {"extrapolated", json_number(ext)},
               {"closed_form", json_number(closed.value)},
               {"relative_gap", json_number(gap)},
               {"tol", a.tol}};
  const bool ok = gap <= a.tol;
  if (!ok)
    errors.push_back("relative gap " + format_number(gap) + " exceeds tolerance " +
                     format_number(a.tol));
  ctx.add_report(ctx.params, results, errors);
  std::cout << "feller-check: extrapolated " << format_number(ext) << " vs closed "
            << format_number(closed.value) << ", relative gap " << format_number(gap) << " ("
            << (ok ? "ok" : "exceeds tolerance") << ")\n";
  return ok ? kOk : kToleranceFailure;
}

// ---------------------------------------------------------------------------
// mosco-scan
// ---------------------------------------------------------------------------

struct MoscoScanArgs {
  std::string target = "0";
  std::vector<double> schedule{1.0, 0.5, 0.25, 0.125};
  double alpha = 1.0;
  double window = 8.0;
  int nodes = 129;
  std::string lower = "gauss(1,0,1)";
  std::string upper = "zero";
};

int run_mosco_scan(RunContext& ctx, const MoscoScanArgs& a) {
  using namespace striplab;
  double target_ell = 0.0;
  if (a.target == "inf" || a.target == "infinity") {
    target_ell = kInf;
  } else {
    try {
      std::size_t used = 0;
      target_ell = std::stod(a.target, &used);
      if (used != a.target.size()) throw std::invalid_argument(a.target);
    } catch (const std::exception&) {
      throw UsageError("target must be 0, a positive scale, or 'inf'");
    }
  }
  const BoundaryPair f{BoundaryFunction::parse(a.lower), BoundaryFunction::parse(a.upper)};
  const GalerkinBasis basis{a.window, a.nodes};

  ctx.params = Json{{"target", a.target},   {"schedule", a.schedule}, {"alpha", a.alpha},
                    {"window", a.window},   {"nodes", a.nodes},       {"lower", a.lower},
                    {"upper", a.upper},     {"seed", ctx.seed},       {"workers", ctx.workers}};

  const MoscoScanReport rep = mosco_scan(target_ell, a.schedule, a.alpha, f, basis);

  CsvTable table;
  table.header = {"ell", "form_value", "gap", "relative_gap"};
  for (std::size_t i = 0; i < rep.schedule.size(); ++i) {
    auto& row = table.add_row();
    row.push_back(format_number(rep.schedule[i]));
    row.push_back(format_number(rep.form_values[i]));
    row.push_back(format_number(rep.gaps[i]));
    row.push_back(format_number(rep.relative_gaps[i]));
  }
  ctx.add_text_artifact("mosco_scan.csv", table.to_string());
  ctx.add_text_artifact("mosco_scan.svg",
                        render_svg_curve("resolvent gap vs scale (target " + a.target + ")",
                                         "ell", "relative gap", rep.schedule, rep.relative_gaps));

  Json results{{"target", a.target},
               {"data", rep.data_label},
               {"schedule", rep.schedule},
               {"form_values", rep.form_values},
               {"gaps", rep.gaps},
               {"relative_gaps", rep.relative_gaps},
               {"target_norm", json_number(rep.target_norm)},
               {"target_form_value", json_number(rep.target_form_value)},
               {"artifacts", Json::array({"mosco_scan.csv", "mosco_scan.svg"})}};
  ctx.add_report(ctx.params, results, Json::array());
  std::cout << "mosco-scan target " << a.target << ": " << rep.schedule.size()
            << " rows, final relative gap " << format_number(rep.relative_gaps.back()) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string mode = "exit";
  double x1 = 0.0;
  double x2 = striplab::kPi / 2.0;
  double dt = 1e-3;
  std::int64_t n_paths = 10000;
  double horizon = 50.0;
  bool bridge = true;
  std::vector<double> edges{-4.0, -2.0, 0.0, 2.0, 4.0};
  std::vector<double> times{0.1, 0.5, 1.0, 2.0};
  double h_min = 0.1;
  double delta = 1.0;
};

int run_simulate(RunContext& ctx, const SimulateArgs& a) {
  using namespace striplab;
  if (a.mode != "exit" && a.mode != "excursions")
    throw UsageError("unknown mode '" + a.mode + "' (choose exit or excursions)");
  if (!(a.x2 > 0.0 && a.x2 < kPi)) throw UsageError("x2 must lie strictly inside (0, pi)");
  SimConfig cfg;
  cfg.dt = a.dt;
  cfg.n_paths = a.n_paths;
  cfg.seed = ctx.seed;
  cfg.bridge_correction = a.bridge;
  cfg.horizon = a.horizon;
  cfg.workers = ctx.workers;
  cfg.validate();
  const InteriorPoint x{a.x1, a.x2};

  ctx.params = Json{{"mode", a.mode},       {"x1", a.x1},
                    {"x2", a.x2},           {"dt", a.dt},
                    {"n-paths", a.n_paths}, {"horizon", a.horizon},
                    {"bridge", a.bridge},   {"edges", a.edges},
                    {"times", a.times},     {"h-min", a.h_min},
                    {"delta", a.delta},     {"seed", ctx.seed},
                    {"workers", ctx.workers}};

  if (a.mode == "exit") {
    if (a.edges.size() < 2) throw UsageError("need at least two bin edges");
    const ExitEnsemble ens = sample_exit_ensemble(x, cfg);
    std::vector<double> taus, disp_lower, disp_upper;
    std::int64_t lower_count = 0;
    for (const ExitSample& s : ens.samples) {
      taus.push_back(s.tau);
      (s.side == Side::lower ? disp_lower : disp_upper).push_back(s.xi1 - a.x1);
      if (s.side == Side::lower) ++lower_count;
    }
    const auto n_samples = static_cast<std::int64_t>(ens.samples.size());
    if (n_samples == 0) throw std::runtime_error("every path aborted before exiting");

    CsvTable hist;
    hist.header = {"side", "lo", "hi", "count", "fraction", "model"};
    double worst_bin_rel = 0.0;
    for (Side s : {Side::lower, Side::upper}) {
      const EmpiricalLaw law =
          EmpiricalLaw::binned(a.edges, s == Side::lower ? disp_lower : disp_upper);
      for (std::size_t i = 0; i + 1 < a.edges.size(); ++i) {
        const double model =
            integrate([&](double v) { return poisson_kernel_raw(v, a.x2, s); }, a.edges[i],
                      a.edges[i + 1], 1e-12)
                .value;
        const double frac = static_cast<double>(law.counts[i]) / static_cast<double>(n_samples);
        worst_bin_rel = std::max(worst_bin_rel, std::abs(frac - model) / model);
        auto& row = hist.add_row();
        row.push_back(side_name(s));
        row.push_back(format_number(a.edges[i]));
        row.push_back(format_number(a.edges[i + 1]));
        row.push_back(std::to_string(law.counts[i]));
        row.push_back(format_number(frac));
        row.push_back(format_number(model));
      }
    }
    ctx.add_text_artifact("exit_histogram.csv", hist.to_string());

    const EmpiricalLaw tau_law = EmpiricalLaw::ecdf(std::move(taus));
    CsvTable times_table;
    times_table.header = {"t", "empirical", "model"};
    double max_tau_gap = 0.0;
    Json checkpoints = Json::array();
    for (double t : a.times) {
      const double emp = tau_law.ecdf_at(t);
      const double model = hitting_cdf(t, a.x2, Side::lower) + hitting_cdf(t, a.x2, Side::upper);
      max_tau_gap = std::max(max_tau_gap, std::abs(emp - model));
      auto& row = times_table.add_row();
      row.push_back(format_number(t));
      row.push_back(format_number(emp));
      row.push_back(format_number(model));
      checkpoints.push_back(Json{{"t", t}, {"empirical", emp}, {"model", model}});
    }
    ctx.add_text_artifact("exit_times.csv", times_table.to_string());

    const double side_prob = static_cast<double>(lower_count) / static_cast<double>(n_samples);
    Json results{{"n_samples", n_samples},
                 {"aborted", ens.aborted},
                 {"lower_count", lower_count},
                 {"side_probability_lower", side_prob},
                 {"model_side_probability_lower", poisson_side_mass(a.x2, Side::lower)},
                 {"worst_bin_relative_error", worst_bin_rel},
                 {"tau_checkpoints", checkpoints},
                 {"max_tau_gap", max_tau_gap},
                 {"artifacts", Json::array({"exit_histogram.csv", "exit_times.csv"})}};
    ctx.add_report(ctx.params, results, Json::array());
    std::cout << "simulate exit: " << n_samples << " exits, lower-side probability "
              << format_number(side_prob) << " (model "
              << format_number(poisson_side_mass(a.x2, Side::lower)) << ")\n";
    return kOk;
  }

  const HarvestResult harvest = excursion_harvest(x, cfg, a.h_min, a.delta);
  const JumpLawReport law = excursion_jump_law(harvest.records, a.delta);
  CsvTable recs;
  recs.header = {"start_x1", "end_x1", "start_side", "end_side", "max_height", "duration"};
  for (const ExcursionRecord& r : harvest.records) {
    auto& row = recs.add_row();
    row.push_back(format_number(r.start_x1));
    row.push_back(format_number(r.end_x1));
    row.push_back(side_name(r.start_side));
    row.push_back(side_name(r.end_side));
    row.push_back(format_number(r.max_height));
    row.push_back(format_number(r.duration));
  }
  ctx.add_text_artifact("excursions.csv", recs.to_string());
  Json results{{"record_count", static_cast<std::int64_t>(harvest.records.size())},
               {"truncated", harvest.truncated},
               {"delta", law.delta},
               {"same_count", law.same_count},
               {"cross_count", law.cross_count},
               {"side_ratio", json_number(law.side_ratio)},
               {"expected_ratio", law.expected_ratio},
               {"ks_same", law.ks_same},
               {"ks_cross", law.ks_cross},
               {"positive_fraction", law.positive_fraction},
               {"sufficient", law.sufficient},
               {"artifacts", Json::array({"excursions.csv"})}};
  ctx.add_report(ctx.params, results, Json::array());
  std::cout << "simulate excursions: " << harvest.records.size() << " records, side ratio "
            << format_number(law.side_ratio) << " (expected "
            << format_number(law.expected_ratio) << ")\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// acceptance
// ---------------------------------------------------------------------------

struct AcceptanceArgs {
  std::vector<int> criteria;
  double tolerance_scale = 1.0;
};

int run_acceptance_cmd(RunContext& ctx, const AcceptanceArgs& a) {
  using namespace striplab;
  AcceptanceOptions opt;
  opt.seed = ctx.seed;
  opt.workers = ctx.workers;
  opt.tolerance_scale = a.tolerance_scale;
  opt.criteria = a.criteria;

  ctx.params = Json{{"criteria", a.criteria},
                    {"tolerance-scale", a.tolerance_scale},
                    {"seed", ctx.seed},
                    {"workers", ctx.workers}};

  const std::vector<CriterionResult> results = run_acceptance(opt, &std::cout);

  CsvTable table;
  table.header = {"index", "name", "passed", "measured", "tolerance", "detail"};
  Json rows = Json::array();
  Json errors = Json::array();
  int failed = 0;
  for (const CriterionResult& r : results) {
    auto& row = table.add_row();
    row.push_back(std::to_string(r.index));
    row.push_back(r.name);
    row.push_back(r.passed ? "true" : "false");
    row.push_back(format_number(r.measured));
    row.push_back(format_number(r.tolerance));
    row.push_back(r.detail);
    rows.push_back(Json{{"index", r.index},
                        {"name", r.name},
                        {"passed", r.passed},
                        {"measured", json_number(r.measured)},
                        {"tolerance", json_number(r.tolerance)},
                        {"detail", r.detail}});
    if (!r.passed) {
      ++failed;
      errors.push_back("criterion " + std::to_string(r.index) + " (" + r.name + ") failed");
    }
  }
  ctx.add_text_artifact("acceptance.csv", table.to_string());
  Json summary{{"criteria", rows},
               {"passed", static_cast<int>(results.size()) - failed},
               {"failed", failed},
               {"artifacts", Json::array({"acceptance.csv"})}};
  ctx.add_report(ctx.params, summary, errors);
  std::cout << (static_cast<int>(results.size()) - failed) << " of " << results.size()
            << " criteria passed\n";
  return failed == 0 ? kOk : kToleranceFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strip boundary-process laboratory", "striplab"};
  app.set_version_flag("--version", std::string(striplab::kVersion));
  app.require_subcommand(1);

  std::string config_path, out_flag;
  RunContext ctx;
  ctx.workers = default_workers();
  app.add_option("--config", config_path, "JSON file of flag values; explicit flags win")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_flag, "output directory (default $STRIPLAB_OUT or ./out)");
  app.add_option("--seed", ctx.seed, "base seed for every stochastic component");
  app.add_option("--workers", ctx.workers, "parallel worker cap (default: logical cores)");

  EvalKernelArgs ek;
  CLI::App* eval = app.add_subcommand("eval-kernel", "tabulate a kernel over a grid");
  eval->fallthrough();
  eval->add_option("kernel", ek.kernel, "poisson, p0, h, feller, k1, or k2");
  eval->add_option("--x2", ek.x2, "interior height");
  eval->add_option("--y2", ek.y2, "second height (p0 only)");
  eval->add_option("--ell", ek.ell, "scale parameter (k1/k2 only)");
  eval->add_option("--min", ek.min, "grid start");
  eval->add_option("--max", ek.max, "grid end");
  eval->add_option("--step", ek.step, "grid step");
  eval->add_option("--tail-tol", ek.tail_tol, "series tail tolerance");
  eval->add_option("--n-max", ek.n_max, "spectral term cap");
  eval->add_option("--k-max", ek.k_max, "image term cap");
  eval->add_option("--t-switch", ek.t_switch, "image/spectral crossover time");

  EnergyArgs en;
  CLI::App* energy = app.add_subcommand("energy", "evaluate an energy form on boundary data");
  energy->fallthrough();
  energy->add_option("--form", en.form, "A0, A1, A2, A, Ainf, traceT, or interior");
  energy->add_option("--ell", en.ell, "scale parameter (A1/A2/A)");
  energy->add_option("--lower", en.lower, "lower boundary data, e.g. gauss(1,0,1)");
  energy->add_option("--upper", en.upper, "upper boundary data");
  energy->add_option("--window", en.window, "same-side integration window");
  energy->add_option("--quad-tol", en.quad_tol, "quadrature tolerance");
  energy->add_option("--pad", en.pad, "longitudinal padding");
  energy->add_option("--diag-split", en.diag_split, "first panel width at the diagonal");
  energy->add_option("--nodes-per-unit", en.nodes_per_unit, "tensor column density");
  energy->add_option("--tensor-tol", en.tensor_tol, "tensor quadrature budget (interior)");

  FellerCheckArgs fc;
  CLI::App* feller = app.add_subcommand(
      "feller-check", "damped pairing sequence against the closed bilinear value");
  feller->fallthrough();
  feller->add_option("--phi-lower", fc.phi_lower, "first pair, lower data");
  feller->add_option("--phi-upper", fc.phi_upper, "first pair, upper data");
  feller->add_option("--psi-lower", fc.psi_lower, "second pair, lower data");
  feller->add_option("--psi-upper", fc.psi_upper, "second pair, upper data");
  feller->add_option("--alphas", fc.alphas, "increasing damping schedule")->delimiter(',');
  feller->add_option("--tol", fc.tol, "relative gap gate");
  feller->add_option("--tensor-tol", fc.tensor_tol, "tensor quadrature budget");

  MoscoScanArgs ms;
  CLI::App* mosco = app.add_subcommand("mosco-scan", "resolvent convergence along a scale schedule");
  mosco->fallthrough();
  mosco->add_option("--target", ms.target, "limit scale: 0, a positive number, or inf");
  mosco->add_option("--schedule", ms.schedule, "scale schedule")->delimiter(',');
  mosco->add_option("--alpha", ms.alpha, "resolvent parameter");
  mosco->add_option("--window", ms.window, "basis window half-width");
  mosco->add_option("--nodes", ms.nodes, "nodes per boundary line");
  mosco->add_option("--lower", ms.lower, "lower boundary data");
  mosco->add_option("--upper", ms.upper, "upper boundary data");

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "sample paths of the reflected walk");
  simulate->fallthrough();
  simulate->add_option("--mode", sim.mode, "exit or excursions");
  simulate->add_option("--x1", sim.x1, "start abscissa");
  simulate->add_option("--x2", sim.x2, "start height");
  simulate->add_option("--dt", sim.dt, "time step");
  simulate->add_option("--n-paths", sim.n_paths, "path count");
  simulate->add_option("--horizon", sim.horizon, "reflected-run horizon (excursions)");
  simulate->add_flag("--bridge,!--no-bridge", sim.bridge, "sub-step wall-crossing correction");
  simulate->add_option("--edges", sim.edges, "exit displacement bin edges")->delimiter(',');
  simulate->add_option("--times", sim.times, "exit-time checkpoints")->delimiter(',');
  simulate->add_option("--h-min", sim.h_min, "excursion apex threshold");
  simulate->add_option("--delta", sim.delta, "excursion displacement threshold");

  AcceptanceArgs acc;
  CLI::App* acceptance = app.add_subcommand("acceptance", "run the acceptance suite");
  acceptance->fallthrough();
  acceptance->add_option("--criteria", acc.criteria, "subset of 1..10 (default: all)")
      ->delimiter(',');
  acceptance->add_option("--tolerance-scale", acc.tolerance_scale, "scale every gate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    Overlay overlay;
    if (!config_path.empty()) overlay.cfg = load_config(config_path);
    overlay.fill(app, "--seed", ctx.seed);
    overlay.fill(app, "--workers", ctx.workers);
    overlay.fill(app, "--out", out_flag);
    if (ctx.workers < 1) throw UsageError("workers must be at least 1");
    ctx.dir = striplab::resolve_out_dir(out_flag);

    std::string subname;
    int code = 0;
    if (app.got_subcommand(eval)) {
      subname = "eval-kernel";
      overlay.fill(*eval, "kernel", ek.kernel);
      overlay.fill(*eval, "--x2", ek.x2);
      overlay.fill(*eval, "--y2", ek.y2);
      overlay.fill(*eval, "--ell", ek.ell);
      overlay.fill(*eval, "--min", ek.min);
      overlay.fill(*eval, "--max", ek.max);
      overlay.fill(*eval, "--step", ek.step);
      overlay.fill(*eval, "--tail-tol", ek.tail_tol);
      overlay.fill(*eval, "--n-max", ek.n_max);
      overlay.fill(*eval, "--k-max", ek.k_max);
      overlay.fill(*eval, "--t-switch", ek.t_switch);
      code = run_eval_kernel(ctx, ek);
    } else if (app.got_subcommand(energy)) {
      subname = "energy";
      overlay.fill(*energy, "--form", en.form);
      overlay.fill(*energy, "--ell", en.ell);
      overlay.fill(*energy, "--lower", en.lower);
      overlay.fill(*energy, "--upper", en.upper);
      overlay.fill(*energy, "--window", en.window);
      overlay.fill(*energy, "--quad-tol", en.quad_tol);
      overlay.fill(*energy, "--pad", en.pad);
      overlay.fill(*energy, "--diag-split", en.diag_split);
      overlay.fill(*energy, "--nodes-per-unit", en.nodes_per_unit);
      overlay.fill(*energy, "--tensor-tol", en.tensor_tol);
      code = run_energy(ctx, en);
    } else if (app.got_subcommand(feller)) {
      subname = "feller-check";
      overlay.fill(*feller, "--phi-lower", fc.phi_lower);
      overlay.fill(*feller, "--phi-upper", fc.phi_upper);
      overlay.fill(*feller, "--psi-lower", fc.psi_lower);
      overlay.fill(*feller, "--psi-upper", fc.psi_upper);
      overlay.fill(*feller, "--alphas", fc.alphas);
      overlay.fill(*feller, "--tol", fc.tol);
      overlay.fill(*feller, "--tensor-tol", fc.tensor_tol);
      code = run_feller_check(ctx, fc);
    } else if (app.got_subcommand(mosco)) {
      subname = "mosco-scan";
      overlay.fill(*mosco, "--target", ms.target);
      overlay.fill(*mosco, "--schedule", ms.schedule);
      overlay.fill(*mosco, "--alpha", ms.alpha);
      overlay.fill(*mosco, "--window", ms.window);
      overlay.fill(*mosco, "--nodes", ms.nodes);
      overlay.fill(*mosco, "--lower", ms.lower);
      overlay.fill(*mosco, "--upper", ms.upper);
      code = run_mosco_scan(ctx, ms);
    } else if (app.got_subcommand(simulate)) {
      subname = "simulate";
      overlay.fill(*simulate, "--mode", sim.mode);
      overlay.fill(*simulate, "--x1", sim.x1);
      overlay.fill(*simulate, "--x2", sim.x2);
      overlay.fill(*simulate, "--dt", sim.dt);
      overlay.fill(*simulate, "--n-paths", sim.n_paths);
      overlay.fill(*simulate, "--horizon", sim.horizon);
      overlay.fill(*simulate, "--bridge", sim.bridge);
      overlay.fill(*simulate, "--edges", sim.edges);
      overlay.fill(*simulate, "--times", sim.times);
      overlay.fill(*simulate, "--h-min", sim.h_min);
      overlay.fill(*simulate, "--delta", sim.delta);
      code = run_simulate(ctx, sim);
    } else {
      subname = "acceptance";
      overlay.fill(*acceptance, "--criteria", acc.criteria);
      overlay.fill(*acceptance, "--tolerance-scale", acc.tolerance_scale);
      code = run_acceptance_cmd(ctx, acc);
    }

    striplab::write_manifest(ctx.dir, subname, ctx.params, ctx.artifacts);
    return code;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
