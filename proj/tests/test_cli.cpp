#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "striplab/common.hpp"
#include "striplab/report.hpp"

using striplab::kPi;
using Json = nlohmann::ordered_json;

namespace {

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

std::string binary() {
  const char* bin = std::getenv("STRIPLAB_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

// fresh artifact directory per test section, removed on destruction
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("striplab_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }

  std::string str() const { return path.string(); }
};

// run the tool through the shell, returning its exit code; output lands in
// <dir>/run.log so failures stay inspectable
int run(const std::string& args, const TempDir& dir, const std::string& env_prefix = "") {
  const std::string cmd = env_prefix + "\"" + binary() + "\" " + args + " > \"" +
                          (dir.path / "run.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

Json load_json(const std::filesystem::path& p) { return Json::parse(read_file(p)); }

}  // namespace

TEST_CASE("kernel tables have the contracted shape", "[cli]") {
  TempDir dir;
  REQUIRE(run("eval-kernel poisson --out " + dir.str(), dir) == 0);
  const auto rows = lines_of(read_file(dir.path / "eval_poisson.csv"));
  REQUIRE(rows.size() == 18);  // header + 17 grid points
  REQUIRE(rows[0] == "v,lower,upper");
  REQUIRE(split_csv_row(rows[1])[0] == "-4");
  REQUIRE(split_csv_row(rows[17])[0] == "4");
  // the default slice sits on the midline, so the two sides agree to rounding
  const auto mid = split_csv_row(rows[9]);
  REQUIRE(close_rel(std::stod(mid[1]), std::stod(mid[2]), 1e-14));
  REQUIRE(std::filesystem::exists(dir.path / "eval_poisson.svg"));
  REQUIRE(std::filesystem::exists(dir.path / "manifest.json"));

  TempDir dir2;
  REQUIRE(run("eval-kernel feller --min 3.141592653589793 --max 3.141592653589793 --step 1 "
              "--out " + dir2.str(), dir2) == 0);
  const auto feller = lines_of(read_file(dir2.path / "eval_feller.csv"));
  REQUIRE(feller.size() == 2);
  REQUIRE(feller[0] == "d,same,cross");
  const auto cells = split_csv_row(feller[1]);
  REQUIRE(close_rel(std::stod(cells[1]), 1.0 / (4.0 * kPi * (std::cosh(kPi) - 1.0)), 1e-12));
  REQUIRE(close_rel(std::stod(cells[2]), 1.0 / (4.0 * kPi * (std::cosh(kPi) + 1.0)), 1e-12));

  TempDir dir3;
  REQUIRE(run("eval-kernel fourier --out " + dir3.str(), dir3) == 2);
}

TEST_CASE("energy runs report the envelope and flag divergence", "[cli]") {
  TempDir dir;
  REQUIRE(run("energy --form A0 --lower \"gauss(1,0,1)\" --upper zero --out " + dir.str(),
              dir) == 0);
  const Json rep = load_json(dir.path / "report.json");
  REQUIRE(rep.contains("params"));
  REQUIRE(rep.contains("results"));
  REQUIRE(rep.contains("errors"));
  REQUIRE(rep.at("version") == "0.1.0");
  // (1/2pi) * l2 norm of the gaussian = sqrt(pi/2) / (2 pi)
  REQUIRE(close_rel(rep.at("results").at("value").get<double>(),
                    std::sqrt(kPi / 2.0) / (2.0 * kPi), 1e-9));
  REQUIRE(rep.at("errors").empty());

  TempDir dir2;
  REQUIRE(run("energy --form traceT --lower \"const(2)\" --upper \"const(2)\" --out " +
              dir2.str(), dir2) == 0);
  REQUIRE(load_json(dir2.path / "report.json").at("results").at("value").get<double>() == 0.0);

  TempDir dir3;
  REQUIRE(run("energy --form Ainf --lower \"ind(0,1)\" --upper zero --out " + dir3.str(),
              dir3) == 4);
  const Json div = load_json(dir3.path / "report.json");
  REQUIRE(div.at("results").at("divergent").get<bool>());
  REQUIRE_FALSE(div.at("errors").empty());
  REQUIRE(std::filesystem::exists(dir3.path / "manifest.json"));

  TempDir dir4;
  REQUIRE(run("energy --form B7 --out " + dir4.str(), dir4) == 2);
}

TEST_CASE("damped pairing check extrapolates to the closed value", "[cli]") {
  TempDir dir;
  REQUIRE(run("feller-check --alphas 16,49 --tensor-tol 3e-4 --out " + dir.str(), dir) == 0);
  const Json res = load_json(dir.path / "report.json").at("results");
  const auto us = res.at("u_alpha").get<std::vector<double>>();
  REQUIRE(us.size() == 2);
  REQUIRE(us[0] < us[1]);
  REQUIRE(res.at("monotone").get<bool>());
  REQUIRE(res.at("relative_gap").get<double>() <= 1e-2);
  // closed bilinear value of the default cross-side hat pair
  REQUIRE(close_rel(res.at("closed_form").get<double>(), 0.0097473702347624881816, 1e-9));
}

TEST_CASE("scale scans write one row per schedule entry", "[cli]") {
  TempDir dir;
  REQUIRE(run("mosco-scan --target 2 --schedule 2 --out " + dir.str(), dir) == 0);
  const auto rows = lines_of(read_file(dir.path / "mosco_scan.csv"));
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0] == "ell,form_value,gap,relative_gap");
  // the schedule hits the target scale exactly, so the gap vanishes exactly
  REQUIRE(std::stod(split_csv_row(rows[1])[2]) == 0.0);

  TempDir dir2;
  REQUIRE(run("mosco-scan --out " + dir2.str(), dir2) == 0);
  const Json res = load_json(dir2.path / "report.json").at("results");
  const auto gaps = res.at("relative_gaps").get<std::vector<double>>();
  REQUIRE(gaps.size() == 4);
  REQUIRE(gaps.back() <= 0.05);
  REQUIRE(lines_of(read_file(dir2.path / "mosco_scan.csv")).size() == 5);
  REQUIRE(std::filesystem::exists(dir2.path / "mosco_scan.svg"));
}

TEST_CASE("exit simulation matches the side split and reruns byte-identically", "[cli]") {
  const std::string flags = "simulate --mode exit --x2 0.7853981633974483 --n-paths 50000 ";
  TempDir dir;
  REQUIRE(run(flags + "--out " + dir.str(), dir) == 0);
  const Json res = load_json(dir.path / "report.json").at("results");
  // quarter-height start: the lower wall receives 3/4 of the exits
  REQUIRE(std::abs(res.at("side_probability_lower").get<double>() - 0.75) <= 0.01);
  REQUIRE(res.at("model_side_probability_lower").get<double>() == 0.75);
  REQUIRE(res.at("aborted").get<std::int64_t>() == 0);

  TempDir dir2;
  REQUIRE(run(flags + "--out " + dir2.str(), dir2) == 0);
  for (const char* name : {"exit_histogram.csv", "exit_times.csv", "report.json",
                           "manifest.json"})
    REQUIRE(read_file(dir.path / name) == read_file(dir2.path / name));

  // manifest hashes certify the artifact bytes
  const Json manifest = load_json(dir.path / "manifest.json");
  for (const char* name : {"exit_histogram.csv", "exit_times.csv", "report.json"})
    REQUIRE(manifest.at("artifacts").at(name).get<std::string>() ==
            striplab::hash_file(dir.path / name));
}

TEST_CASE("excursion simulation reports the jump-law summary", "[cli]") {
  TempDir dir;
  REQUIRE(run("simulate --mode excursions --n-paths 100 --horizon 100 --out " + dir.str(),
              dir) == 0);
  const Json res = load_json(dir.path / "report.json").at("results");
  REQUIRE(res.at("side_ratio").get<double>() > 0.0);
  REQUIRE(close_rel(res.at("expected_ratio").get<double>(), 1.0 / std::tanh(0.5), 1e-12));
  const auto rows = lines_of(read_file(dir.path / "excursions.csv"));
  REQUIRE(static_cast<std::int64_t>(rows.size()) ==
          res.at("record_count").get<std::int64_t>() + 1);

  TempDir dir2;
  REQUIRE(run("simulate --mode sideways --out " + dir2.str(), dir2) == 2);
}

TEST_CASE("acceptance subcommand gates and always writes a manifest", "[cli]") {
  TempDir dir;
  REQUIRE(run("acceptance --criteria 10 --out " + dir.str(), dir) == 0);
  const Json rep = load_json(dir.path / "report.json");
  REQUIRE(rep.at("results").at("failed").get<int>() == 0);
  REQUIRE(std::filesystem::exists(dir.path / "acceptance.csv"));
  REQUIRE(std::filesystem::exists(dir.path / "manifest.json"));

  // a corrupted gate must fail loudly yet leave the full audit trail
  TempDir dir2;
  REQUIRE(run("acceptance --criteria 1 --tolerance-scale 1e-6 --out " + dir2.str(), dir2) == 3);
  const Json rep2 = load_json(dir2.path / "report.json");
  REQUIRE(rep2.at("results").at("failed").get<int>() == 1);
  REQUIRE_FALSE(rep2.at("errors").empty());
  REQUIRE(std::filesystem::exists(dir2.path / "manifest.json"));
}

TEST_CASE("config files fill defaults while explicit flags win", "[cli]") {
  TempDir dir;
  {
    std::ofstream cfg(dir.path / "cfg.json");
    cfg << R"({"step": 1.0, "x2": 0.7853981633974483, "seed": 7})" << "\n";
  }
  REQUIRE(run("eval-kernel poisson --config " + (dir.path / "cfg.json").string() +
              " --step 0.5 --out " + dir.str(), dir) == 0);
  const Json params = load_json(dir.path / "report.json").at("params");
  REQUIRE(params.at("step").get<double>() == 0.5);  // flag beats config
  REQUIRE(params.at("x2").get<double>() == 0.7853981633974483);
  REQUIRE(params.at("seed").get<std::uint64_t>() == 7);

  // a finished manifest replays as a config and reproduces the bytes
  TempDir dir2;
  REQUIRE(run("eval-kernel poisson --config " + (dir.path / "manifest.json").string() +
              " --out " + dir2.str(), dir2) == 0);
  REQUIRE(read_file(dir.path / "eval_poisson.csv") == read_file(dir2.path / "eval_poisson.csv"));

  // the environment variable supplies the default output directory
  TempDir dir3;
  const std::string sub = (dir3.path / "envout").string();
  REQUIRE(run("eval-kernel k1", dir3, "STRIPLAB_OUT=\"" + sub + "\" ") == 0);
  REQUIRE(std::filesystem::exists(std::filesystem::path(sub) / "eval_k1.csv"));
}
