// Acceptance gate: runs the ten end-to-end criteria and prints one line per
// criterion; exits nonzero if any gate fails.

#include <striplab/acceptance.hpp>

#include <cstdio>

int main() {
  striplab::AcceptanceOptions opt;
  const auto results = striplab::run_acceptance(opt);
  int failed = 0;
  double total = 0.0;
  for (const auto& r : results) {
    std::printf("criterion %2d  %-34s %s  measured %.6g vs tolerance %.6g  (%s; %.1f s)\n",
                r.index, r.name.c_str(), r.passed ? "pass" : "FAIL", r.measured, r.tolerance,
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    if (!r.passed) ++failed;
    total += r.seconds;
  }
  std::printf("%d of %zu criteria passed (%.1f s total)\n", static_cast<int>(results.size()) - failed,
              results.size(), total);
  return failed == 0 ? 0 : 1;
}
