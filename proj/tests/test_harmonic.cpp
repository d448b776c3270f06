#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "striplab/harmonic.hpp"

using namespace striplab;

namespace {

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

bool close_abs(double a, double b, double tol) { return std::abs(a - b) <= tol; }

const BoundaryPair kGaussLower{BoundaryFunction::gaussian(1.0, 0.0, 1.0),
                               BoundaryFunction::zero()};

}  // namespace

TEST_CASE("registry functions evaluate, parse, and label consistently", "[data]") {
  auto g = BoundaryFunction::parse("gauss(1,0,1)");
  REQUIRE(close_rel(g(0.5), std::exp(-0.25), 1e-15));
  REQUIRE(g.label() == "gauss(1,0,1)");
  auto h = BoundaryFunction::parse("hat(0, 0.5)");
  REQUIRE(close_rel(h(0.25), 0.5, 1e-15));
  REQUIRE(h(0.6) == 0.0);
  auto ind = BoundaryFunction::parse("ind(0,1)");
  REQUIRE(ind(0.5) == 1.0);
  REQUIRE(ind(1.5) == 0.0);
  auto p = BoundaryFunction::parse("plateau(-1,1,0.5)");
  REQUIRE(p(0.0) == 1.0);
  REQUIRE(close_rel(p(1.25), 0.5, 1e-12));
  REQUIRE(p(1.6) == 0.0);
  auto grid = BoundaryFunction::parse("grid(0,0.5,0,1,0)");
  REQUIRE(close_rel(grid(0.25), 0.5, 1e-15));
  REQUIRE(grid(1.0) == 0.0);
  REQUIRE(grid(-0.1) == 0.0);
  REQUIRE(BoundaryFunction::parse("zero").is_zero());
  REQUIRE(BoundaryFunction::parse("const(2)")(17.0) == 2.0);
  REQUIRE_THROWS_AS(BoundaryFunction::parse("wiggle(1)"), std::invalid_argument);
  REQUIRE_THROWS_AS(BoundaryFunction::parse("gauss(1,0)"), std::invalid_argument);
  REQUIRE_THROWS_AS(BoundaryFunction::parse("hat(0,0.5)x"), std::invalid_argument);
}

TEST_CASE("registry norms match quadrature", "[data]") {
  for (const char* spec : {"gauss(1.5,0.3,0.8)", "hat(1,0.7)", "plateau(-1,2,0.5)",
                           "grid(0,0.25,0,0.5,1,0.25,0)", "ind(-1,2)"}) {
    auto f = BoundaryFunction::parse(spec);
    const SupportRange r = f.range(1e-16);
    auto sq = [&](double x) { return f(x) * f(x); };
    REQUIRE(close_rel(integrate(sq, r.lo, r.hi, 1e-12).value, f.l2_norm_sq(), 1e-9));
    if (f.half_order_regular()) {
      auto dsq = [&](double x) { return f.derivative(x) * f.derivative(x); };
      REQUIRE(close_rel(integrate_path(dsq, {r.lo, 0.5 * (r.lo + r.hi), r.hi}, 1e-12).value,
                        f.deriv_l2_norm_sq(), 1e-8));
    }
  }
  REQUIRE(std::isinf(BoundaryFunction::indicator(0, 1).deriv_l2_norm_sq()));
  REQUIRE(std::isinf(BoundaryFunction::constant(2).l2_norm_sq()));
}

TEST_CASE("registry derivatives match finite differences", "[data]") {
  const double step = 1e-6;
  for (const char* spec : {"gauss(1,0.5,1.3)", "hat(0,0.8)", "plateau(0,1,0.4)"}) {
    auto f = BoundaryFunction::parse(spec);
    for (double x : {0.11, 0.47, 1.21}) {
      const double fd = (f(x + step) - f(x - step)) / (2.0 * step);
      REQUIRE(close_abs(f.derivative(x), fd, 1e-5));
    }
  }
}

TEST_CASE("registry transforms match oscillatory quadrature", "[data]") {
  for (const char* spec : {"gauss(1.3,0.4,0.9)", "ind(-0.5,1.5)", "hat(0.3,0.8)",
                           "plateau(-1,1,0.5)", "grid(0,0.5,0.2,1,0.5,0.1)"}) {
    auto f = BoundaryFunction::parse(spec);
    const SupportRange r = f.range(1e-18);
    for (double xi : {0.0, 0.7, 3.1, kPi / 0.5}) {
      auto re = [&](double x) { return f(x) * std::cos(xi * x); };
      auto im = [&](double x) { return -f(x) * std::sin(xi * x); };
      const std::vector<double> path{r.lo, 0.5 * (r.lo + r.hi), r.hi};
      const auto ft = f.fourier(xi);
      REQUIRE(close_abs(ft.real(), integrate_path(re, path, 1e-13).value, 1e-10));
      REQUIRE(close_abs(ft.imag(), integrate_path(im, path, 1e-13).value, 1e-10));
    }
    const auto decay = f.fourier_decay();
    for (double xi : {10.0, 35.0, 120.0}) {
      const double envelope = decay.super
                                  ? decay.amp * std::exp(-0.25 * decay.width * decay.width * xi * xi)
                                  : decay.amp / std::pow(xi, decay.power);
      if (xi >= decay.floor) REQUIRE(std::abs(f.fourier(xi)) <= envelope * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("heat convolution closed forms match quadrature", "[data]") {
  for (const char* spec : {"gauss(1,0.5,0.7)", "ind(0,1)", "hat(0,0.5)", "plateau(0,1,0.3)"}) {
    auto f = BoundaryFunction::parse(spec);
    for (double t : {0.05, 0.8}) {
      for (double x : {0.0, 0.9, 2.5}) {
        auto g = [&](double y) {
          return f(y) * std::exp(-(y - x) * (y - x) / (2.0 * t)) / std::sqrt(kTwoPi * t);
        };
        const SupportRange r = f.range(1e-18);
        const double direct = integrate_path(g, {r.lo, 0.5 * (r.lo + r.hi), r.hi}, 1e-12).value;
        REQUIRE(close_abs(f.heat_convolution(t, x), direct, 1e-10));
      }
    }
  }
  REQUIRE(BoundaryFunction::constant(3.0).heat_convolution(0.5, 1.0) == 3.0);
  REQUIRE_THROWS_AS(BoundaryFunction::hat(0, 1).heat_convolution(0.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("extension of constant data is exact", "[harmonic]") {
  const BoundaryPair ones{BoundaryFunction::constant(1.0), BoundaryFunction::constant(1.0)};
  const BoundaryPair lower1{BoundaryFunction::constant(1.0), BoundaryFunction::zero()};
  for (auto [x1, x2] : {std::pair{0.0, 1.0}, std::pair{-3.0, kPi / 4.0}, std::pair{7.0, 3.0}}) {
    REQUIRE(close_rel(harmonic_extension(ones, {x1, x2}).value, 1.0, 1e-14));
    REQUIRE(close_rel(harmonic_extension(lower1, {x1, x2}).value, 1.0 - x2 / kPi, 1e-14));
  }
  REQUIRE(close_rel(harmonic_extension(lower1, {2.0, kPi / 4.0}).value, 0.75, 1e-14));
}

TEST_CASE("extension matches fixed reference values", "[harmonic]") {
  REQUIRE(close_rel(harmonic_extension(kGaussLower, {0.0, kPi / 2.0}).value,
                    0.23539989657148930126, 1e-9));
  REQUIRE(close_rel(harmonic_extension(kGaussLower, {0.7, 2.0}).value,
                    0.14091372320866289211, 1e-9));
  const BoundaryPair indLower{BoundaryFunction::indicator(0.0, 1.0), BoundaryFunction::zero()};
  REQUIRE(close_rel(harmonic_extension(indLower, {0.5, kPi / 2.0}).value,
                    0.15291004662390396067, 1e-9));
}

TEST_CASE("extension is linear in the data", "[harmonic]") {
  const BoundaryPair mixed{BoundaryFunction::gaussian(1.0, 0.0, 1.0),
                           BoundaryFunction::constant(1.0)};
  const InteriorPoint x{0.4, 1.1};
  const double sum = harmonic_extension(kGaussLower, x).value + x.x2 / kPi;
  REQUIRE(close_rel(harmonic_extension(mixed, x).value, sum, 1e-10));
}

TEST_CASE("extension near the boundary approaches the data", "[harmonic]") {
  const BoundaryPair hatLower{BoundaryFunction::hat(0.0, 1.0), BoundaryFunction::zero()};
  REQUIRE(close_abs(harmonic_extension(hatLower, {0.0, 1e-5}).value, 1.0, 1e-4));
  REQUIRE(close_abs(harmonic_extension(hatLower, {0.0, kPi - 1e-5}).value, 0.0, 1e-4));
}

TEST_CASE("point identity at the centered midline evaluation", "[harmonic]") {
  // at x = (0, pi/2) the kernel on both lines reduces to 1/(2 pi cosh xi)
  const BoundaryFunction sq = BoundaryFunction::gaussian(1.0, 0.0, 1.0 / std::sqrt(2.0));
  const BoundaryPair pair{sq, sq};
  const double lhs = harmonic_extension(pair, {0.0, kPi / 2.0}).value;
  auto g = [&](double xi) { return sq(xi) / std::cosh(xi) / kPi; };
  const double rhs = integrate_path(g, {-30.0, 0.0, 30.0}, 1e-12).value;
  REQUIRE(close_rel(lhs, 0.35981588764106239862, 1e-9));
  REQUIRE(close_rel(lhs, rhs, 1e-9));
}

TEST_CASE("maximum principle on sampled interior points", "[harmonic]") {
  const BoundaryPair pair{BoundaryFunction::gaussian(0.7, -1.0, 0.5),
                          BoundaryFunction::hat(2.0, 1.0)};
  for (double x1 : {-2.0, 0.0, 2.0}) {
    for (double x2 : {0.3, 1.6, 2.9}) {
      const double v = harmonic_extension(pair, {x1, x2}).value;
      REQUIRE(v >= -1e-10);
      REQUIRE(v <= 1.0 + 1e-10);
    }
  }
}

TEST_CASE("discrete laplacian of the extension decays at second order", "[harmonic]") {
  const InteriorPoint x{0.3, 1.0};
  auto H = [&](double a, double b) {
    return harmonic_extension(kGaussLower, {a, b}, 1e-12).value;
  };
  auto lap = [&](double h) {
    return (H(x.x1 + h, x.x2) + H(x.x1 - h, x.x2) + H(x.x1, x.x2 + h) + H(x.x1, x.x2 - h) -
            4.0 * H(x.x1, x.x2)) /
           (h * h);
  };
  const double d2 = std::abs(lap(1e-2));
  const double d1 = std::abs(lap(5e-3));
  REQUIRE(d2 <= 1e-4);
  REQUIRE(d1 <= 2.5e-5);
}

TEST_CASE("gradient of the extension", "[harmonic]") {
  const BoundaryPair lower1{BoundaryFunction::constant(1.0), BoundaryFunction::zero()};
  auto g = grad_harmonic_extension(lower1, {1.3, 0.9});
  REQUIRE(close_abs(g[0].value, 0.0, 1e-14));
  REQUIRE(close_rel(g[1].value, -1.0 / kPi, 1e-14));

  const BoundaryPair pair{BoundaryFunction::gaussian(1.0, 0.0, 1.0),
                          BoundaryFunction::hat(1.0, 2.0)};
  const double h = 1e-4;
  for (auto [x1, x2] : {std::pair{0.0, kPi / 2}, std::pair{-1.2, 0.7}, std::pair{2.1, 2.6},
                        std::pair{0.5, 0.15}}) {
    auto grad = grad_harmonic_extension(pair, {x1, x2}, 1e-11);
    auto at = [&](double a, double b) { return harmonic_extension(pair, {a, b}, 1e-11).value; };
    const double fd1 = (at(x1 + h, x2) - at(x1 - h, x2)) / (2.0 * h);
    const double fd2 = (at(x1, x2 + h) - at(x1, x2 - h)) / (2.0 * h);
    REQUIRE(close_rel(grad[0].value, fd1, 1e-5));
    REQUIRE(close_rel(grad[1].value, fd2, 1e-5));
  }
}

TEST_CASE("damped extension reduces to the plain one and decreases in alpha", "[harmonic]") {
  const BoundaryPair pair{BoundaryFunction::plateau(-1.0, 1.0, 0.5),
                          BoundaryFunction::grid(0.0, 0.5, {0.0, 1.0, 0.5, 0.0})};
  for (int i = 0; i < 10; ++i) {
    const InteriorPoint x{-2.0 + 0.45 * i, 0.3 + 0.27 * i};
    const double h0 = harmonic_extension(pair, x).value;
    REQUIRE(close_rel(alpha_harmonic_extension(0.0, pair, x).value, h0, 1e-12));
    const double h_tiny = alpha_harmonic_extension(1e-8, pair, x).value;
    REQUIRE(close_abs(h_tiny, h0, 1e-6));
    const double h1 = alpha_harmonic_extension(1.0, pair, x).value;
    const double h10 = alpha_harmonic_extension(10.0, pair, x).value;
    REQUIRE(h0 >= h1);
    REQUIRE(h1 >= h10);
    REQUIRE(h10 >= 0.0);
  }
}

TEST_CASE("damped extension matches fixed reference value", "[harmonic]") {
  REQUIRE(close_rel(alpha_harmonic_extension(1.0, kGaussLower, {0.0, kPi / 2.0}).value,
                    0.063775569659654297546, 1e-8));
}

TEST_CASE("damped extension of constant data uses the hyperbolic mass", "[harmonic]") {
  const BoundaryPair ones{BoundaryFunction::constant(1.0), BoundaryFunction::constant(1.0)};
  const double alpha = 1.0, x2 = kPi / 2.0;
  auto f = [&](double t) {
    return std::exp(-alpha * t) *
           (hitting_density(t, x2, Side::lower) + hitting_density(t, x2, Side::upper));
  };
  const double direct = integrate_path(f, {1e-6, 0.05, 0.5, 2.0, 10.0, 45.0}, 1e-12).value;
  REQUIRE(close_rel(alpha_harmonic_extension(alpha, ones, {3.0, x2}).value, direct, 1e-10));
}

TEST_CASE("squared strip norm of the extension", "[harmonic]") {
  const BoundaryPair indLower{BoundaryFunction::indicator(0.0, 1.0), BoundaryFunction::zero()};
  const auto rep = extension_l2_norm_sq(indLower, 1e-8);
  REQUIRE(close_abs(rep.value, 0.39898170208823977219, 1e-6));
  REQUIRE(rep.tail_bound <= 1e-8);
  REQUIRE(rep.quad_error <= 1e-8);
  REQUIRE(extension_l2_norm_sq({BoundaryFunction::zero(), BoundaryFunction::zero()}).value ==
          0.0);
  REQUIRE_THROWS_AS(
      extension_l2_norm_sq({BoundaryFunction::constant(1.0), BoundaryFunction::zero()}),
      std::invalid_argument);
}

TEST_CASE("strip norm obeys the convolution inequality", "[harmonic]") {
  const BoundaryPair sets[] = {
      {BoundaryFunction::gaussian(1.0, 0.0, 1.0), BoundaryFunction::gaussian(1.0, 0.0, 1.0)},
      {BoundaryFunction::hat(0.0, 1.0), BoundaryFunction::zero()},
      {BoundaryFunction::indicator(0.0, 1.0), BoundaryFunction::zero()},
  };
  for (const auto& pair : sets) {
    const double bound = kPi * (pair.lower.l2_norm_sq() + pair.upper.l2_norm_sq());
    const auto rep = extension_l2_norm_sq(pair, 1e-7);
    REQUIRE(rep.value >= 0.0);
    REQUIRE(rep.value <= bound);
  }
}
