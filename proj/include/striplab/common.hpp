#pragma once

// Basic geometry of the strip R x [0, pi] and shared small types.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace striplab {

inline constexpr double kPi = std::numbers::pi_v<double>;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Which boundary line of the strip a point lives on.
enum class Side { lower, upper };

inline Side other(Side s) { return s == Side::lower ? Side::upper : Side::lower; }

inline const char* to_string(Side s) { return s == Side::lower ? "lower" : "upper"; }

inline Side side_from_string(const std::string& s) {
  if (s == "lower" || s == "0") return Side::lower;
  if (s == "upper" || s == "pi") return Side::upper;
  throw std::invalid_argument("unknown side: " + s);
}

struct BoundaryPoint {
  double xi1;
  Side side;
};

// The members of the boundary energy family: the difference form (a0), the
// cross-side and same-side jump pieces (a1, a2), their normalized combination
// at a finite scale (a_ell), the large-scale limit (a_inf), and the interior
// trace energy (trace).
enum class FormKind { a0, a1, a2, a_ell, a_inf, trace };

inline std::string to_string(FormKind k) {
  switch (k) {
    case FormKind::a0: return "A0";
    case FormKind::a1: return "A1";
    case FormKind::a2: return "A2";
    case FormKind::a_ell: return "A";
    case FormKind::a_inf: return "Ainf";
    case FormKind::trace: return "traceT";
  }
  return "?";
}

// Interior point; construction enforces x2 in the open interval (0, pi).
struct InteriorPoint {
  double x1;
  double x2;
  InteriorPoint(double x1_, double x2_) : x1(x1_), x2(x2_) {
    if (!(x2 > 0.0 && x2 < kPi) || !std::isfinite(x1))
      throw std::invalid_argument("interior point requires finite x1 and x2 in (0, pi)");
  }
};

// Truncation policy for the spectral/image series of the interval heat kernel.
// The evaluator picks the representation by t_switch and the term count from
// tail_tol; it refuses (throws) if the caps cannot honor tail_tol.
struct SeriesTruncation {
  double tail_tol = 1e-12;
  int n_max = 64;   // spectral modes cap
  int k_max = 8;    // image copies cap
  double t_switch = 0.5;
};

// Distance from x2 to the boundary line `s` (lower: x2, upper: pi - x2).
inline double boundary_distance(double x2, Side s) {
  return s == Side::lower ? x2 : kPi - x2;
}

}  // namespace striplab
