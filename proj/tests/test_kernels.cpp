#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "striplab/kernels.hpp"
#include "striplab/quadrature.hpp"

using namespace striplab;

namespace {

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

bool close_abs(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("points and sides validate their domains", "[common]") {
  REQUIRE_NOTHROW(InteriorPoint(0.0, 1.5));
  REQUIRE_THROWS_AS(InteriorPoint(0.0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(InteriorPoint(0.0, kPi), std::invalid_argument);
  REQUIRE_THROWS_AS(InteriorPoint(std::nan(""), 1.0), std::invalid_argument);
  REQUIRE(other(Side::lower) == Side::upper);
  REQUIRE(side_from_string("upper") == Side::upper);
  REQUIRE_THROWS_AS(side_from_string("sideways"), std::invalid_argument);
  REQUIRE(close_rel(boundary_distance(1.0, Side::upper), kPi - 1.0, 1e-15));
}

TEST_CASE("poisson kernel matches fixed reference values", "[kernels]") {
  const InteriorPoint x{0.0, kPi / 2.0};
  REQUIRE(close_rel(poisson_kernel(x, {0.0, Side::lower}), 0.15915494309189533577, 1e-14));
  REQUIRE(close_rel(poisson_kernel(x, {1.0, Side::lower}), 0.103141041045435247, 1e-14));
  // midline symmetry between the two sides
  REQUIRE(close_rel(poisson_kernel(x, {1.0, Side::upper}),
                    poisson_kernel(x, {1.0, Side::lower}), 1e-15));
}

TEST_CASE("poisson kernel mass on each side is linear in height", "[kernels]") {
  for (double x2 : {0.4, kPi / 2.0, 2.8}) {
    for (Side side : {Side::lower, Side::upper}) {
      auto f = [&](double xi1) { return poisson_kernel_raw(-xi1, x2, side); };
      Integral m = integrate_path(f, {-45.0, -5.0, 0.0, 5.0, 45.0}, 1e-12);
      REQUIRE(close_abs(m.value, poisson_side_mass(x2, side), 1e-11));
    }
  }
}

TEST_CASE("poisson kernel partial derivatives match finite differences", "[kernels]") {
  const double h = 1e-5;
  for (double v : {-2.0, 0.3, 1.7}) {
    for (double x2 : {0.5, 2.0}) {
      for (Side side : {Side::lower, Side::upper}) {
        const double fd1 =
            (poisson_kernel_raw(v + h, x2, side) - poisson_kernel_raw(v - h, x2, side)) /
            (2.0 * h);
        const double fd2 =
            (poisson_kernel_raw(v, x2 + h, side) - poisson_kernel_raw(v, x2 - h, side)) /
            (2.0 * h);
        REQUIRE(close_rel(poisson_kernel_dx1(v, x2, side), fd1, 1e-6));
        REQUIRE(close_rel(poisson_kernel_dx2(v, x2, side), fd2, 1e-6));
      }
    }
  }
}

TEST_CASE("half the boundary normal derivative of the poisson kernel gives the jump intensity",
          "[kernels]") {
  for (double v : {0.2, 0.5, 1.0, 2.0, 6.0}) {
    const double same = feller_density({0.0, Side::lower}, {v, Side::lower});
    const double cross = feller_density({0.0, Side::lower}, {v, Side::upper});
    REQUIRE(close_rel(same, 0.5 * poisson_kernel_dx2(v, 0.0, Side::lower), 1e-14));
    REQUIRE(close_rel(cross, 0.5 * poisson_kernel_dx2(v, 0.0, Side::upper), 1e-14));
  }
}

TEST_CASE("gaussian transition density", "[kernels]") {
  REQUIRE(close_rel(gaussian_transition(2.0, 1.0, 0.0),
                    std::exp(-0.25) / std::sqrt(4.0 * kPi), 1e-15));
  REQUIRE_THROWS_AS(gaussian_transition(0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("killed heat kernel matches fixed reference value and symmetry", "[kernels]") {
  REQUIRE(close_rel(killed_heat_kernel(1.0, kPi / 2.0, kPi / 2.0),
                    0.39320398984329470453, 1e-13));
  REQUIRE(close_rel(killed_heat_kernel(0.7, 0.8, 2.1), killed_heat_kernel(0.7, 2.1, 0.8), 1e-14));
}

TEST_CASE("killed heat kernel representations agree across the switch", "[kernels]") {
  for (double t : {0.2, 0.35, 0.5, 0.7, 1.0}) {
    for (auto [a, b] : {std::pair{0.3, 2.9}, std::pair{3.0, 3.1}, std::pair{1.0, 1.0}}) {
      const double ps = killed_heat_kernel_spectral(t, a, b);
      const double pi_ = killed_heat_kernel_image(t, a, b);
      REQUIRE(close_abs(ps, pi_, 1e-11));
    }
  }
}

TEST_CASE("killed heat kernel satisfies the semigroup identity", "[kernels]") {
  const double x2 = 1.0, y2 = 2.0;
  auto f = [&](double z) {
    return killed_heat_kernel(0.3, x2, z) * killed_heat_kernel(0.7, z, y2);
  };
  Integral conv = integrate(f, 0.0, kPi, 1e-12);
  REQUIRE(close_rel(conv.value, killed_heat_kernel(1.0, x2, y2), 1e-10));
}

TEST_CASE("exit density matches fixed reference values", "[kernels]") {
  REQUIRE(close_rel(hitting_density(1.0, kPi / 2.0, Side::lower),
                    0.18246232609071181045, 1e-13));
  REQUIRE(close_rel(hitting_density(0.01, kPi / 4.0, Side::lower),
                    1.2626018346675177158e-11, 1e-8));
  // reflection between the sides
  REQUIRE(close_rel(hitting_density(0.8, 1.0, Side::upper),
                    hitting_density(0.8, kPi - 1.0, Side::lower), 1e-14));
  // representations agree across the switch
  for (double t : {0.3, 0.5, 0.9}) {
    REQUIRE(close_abs(hitting_density_spectral(t, 2.5, Side::lower),
                      hitting_density_image(t, 2.5, Side::lower), 1e-11));
  }
}

TEST_CASE("exit time distribution integrates the exit density", "[kernels]") {
  const double x2 = kPi / 2.0;
  // both-side exit probability at fixed times
  auto total = [&](double t) {
    return hitting_cdf(t, x2, Side::lower) + hitting_cdf(t, x2, Side::upper);
  };
  REQUIRE(close_rel(total(0.1), 1.3578714295397217667e-6, 1e-9));
  REQUIRE(close_rel(total(0.5), 0.052642149790305553854, 1e-12));
  REQUIRE(close_rel(total(1.0), 0.23245503454423444427, 1e-12));
  REQUIRE(close_rel(total(2.0), 0.5316537245495003444, 1e-12));
  REQUIRE(close_abs(total(1.8690456657532245439), 0.5, 1e-13));
  // distribution minus distribution equals integrated density across the
  // representation switch
  auto h = [&](double t) { return hitting_density(t, x2, Side::lower); };
  Integral inc = integrate_path(h, {0.2, 0.5, 1.0}, 1e-12);
  REQUIRE(close_abs(inc.value,
                    hitting_cdf(1.0, x2, Side::lower) - hitting_cdf(0.2, x2, Side::lower),
                    1e-10));
  // all-time mass splits like the poisson kernel mass
  REQUIRE(close_rel(hitting_cdf(60.0, 1.0, Side::lower), poisson_side_mass(1.0, Side::lower),
                    1e-12));
}

TEST_CASE("surviving mass plus exited mass is one", "[kernels]") {
  const double t = 1.0, x2 = kPi / 2.0;
  auto f = [&](double y) { return killed_heat_kernel(t, x2, y); };
  Integral alive = integrate(f, 0.0, kPi, 1e-12);
  const double exited =
      hitting_cdf(t, x2, Side::lower) + hitting_cdf(t, x2, Side::upper);
  REQUIRE(close_abs(alive.value + exited, 1.0, 1e-10));
}

TEST_CASE("laplace transform of the exit law matches the closed hyperbolic form", "[kernels]") {
  const double alpha = 1.0, x2 = kPi / 2.0;
  auto f = [&](double t) {
    return std::exp(-alpha * t) * hitting_density(t, x2, Side::lower);
  };
  Integral lap = integrate_path(f, {1e-6, 0.05, 0.5, 2.0, 10.0, 45.0}, 1e-12);
  const double s = std::sqrt(2.0 * alpha);
  const double closed = std::sinh(s * (kPi - x2)) / std::sinh(s * kPi);
  REQUIRE(close_rel(closed, 0.10719187617379400235, 1e-14));
  REQUIRE(close_rel(lap.value, closed, 1e-10));
}

TEST_CASE("time-weighted boundary kernel matches references and its zero-damping limit",
          "[kernels]") {
  const InteriorPoint x{0.0, kPi / 2.0};
  Integral p1 = alpha_poisson_kernel(1.0, x, {0.0, Side::lower});
  REQUIRE(close_rel(p1.value, 0.046964161722932154502, 1e-9));
  Integral p0 = alpha_poisson_kernel(0.0, x, {1.0, Side::lower});
  REQUIRE(close_rel(p0.value, poisson_kernel(x, {1.0, Side::lower}), 1e-9));
  REQUIRE_THROWS_AS(alpha_poisson_kernel(-1.0, x, {0.0, Side::lower}), std::invalid_argument);
}

TEST_CASE("boundary jump intensity has the hyperbolic closed form", "[kernels]") {
  REQUIRE(close_rel(feller_density({0.0, Side::lower}, {kPi, Side::lower}),
                    0.0075130119512380002616, 1e-14));
  REQUIRE(close_rel(feller_density({2.0, Side::lower}, {2.0, Side::upper}),
                    0.039788735772973833942, 1e-14));
  REQUIRE(std::isinf(feller_density({1.0, Side::upper}, {1.0, Side::upper})));
  // symmetry and translation invariance
  REQUIRE(close_rel(feller_density({0.3, Side::lower}, {1.9, Side::upper}),
                    feller_density({1.9, Side::upper}, {0.3, Side::lower}), 1e-15));
  REQUIRE(close_rel(feller_density({0.3, Side::lower}, {1.9, Side::lower}),
                    feller_density({5.3, Side::lower}, {6.9, Side::lower}), 1e-15));
}

TEST_CASE("scaled jump kernels: values, ordering, and limits", "[kernels]") {
  REQUIRE(close_rel(jump_kernel_k2(1.0, 1.0), 1.8413471884155846379, 1e-14));
  for (double u : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    double prev = 0.0;
    for (double ell : {1.0, 2.0, 4.0, 8.0, 64.0}) {
      const double k2 = jump_kernel_k2(ell, u);
      REQUIRE(k2 <= jump_kernel_kinf(u) * (1.0 + 1e-14));
      REQUIRE(k2 > prev);
      prev = k2;
      REQUIRE(jump_kernel_k1(ell, u) < k2);
    }
    REQUIRE(close_rel(jump_kernel_k2(1e6, u), jump_kernel_kinf(u), 1e-10));
  }
  REQUIRE(std::isinf(jump_kernel_k2(2.0, 0.0)));
  REQUIRE(std::isinf(jump_kernel_kinf(0.0)));
  REQUIRE_THROWS_AS(jump_kernel_k1(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("jump kernel masses and tails match quadrature", "[kernels]") {
  const double ell = 2.0, U = 1.5;
  auto k1 = [&](double u) { return jump_kernel_k1(ell, u); };
  auto k2 = [&](double u) { return jump_kernel_k2(ell, u); };
  Integral m = integrate_path(k1, {-60.0 * ell, -5.0 * ell, 0.0, 5.0 * ell, 60.0 * ell}, 1e-13);
  REQUIRE(close_rel(m.value, jump_kernel_k1_total(ell), 1e-11));
  Integral t1 = integrate_path(k1, {U, 5.0 * ell, 70.0 * ell}, 1e-13);
  REQUIRE(close_rel(2.0 * t1.value, jump_kernel_k1_tail(ell, U), 1e-11));
  Integral t2 = integrate_path(k2, {U, 5.0 * ell, 70.0 * ell}, 1e-13);
  REQUIRE(close_rel(2.0 * t2.value, jump_kernel_k2_tail(ell, U), 1e-11));
  REQUIRE(close_rel(jump_kernel_kinf_tail(U), 4.0 / U, 1e-15));
}

TEST_CASE("series truncation caps are enforced", "[kernels]") {
  SeriesTruncation tight;
  tight.n_max = 1;
  REQUIRE_THROWS_AS(killed_heat_kernel_spectral(0.6, 1.0, 1.0, tight), std::invalid_argument);
  SeriesTruncation flat;
  flat.k_max = 0;
  REQUIRE_THROWS_AS(killed_heat_kernel_image(0.3, 1.0, 1.0, flat), std::invalid_argument);
}

TEST_CASE("hyperbolic helper avoids cancellation near zero", "[kernels]") {
  REQUIRE(close_rel(cosh_m1(1e-8), 5e-17, 1e-12));
  REQUIRE(close_rel(cosh_m1(3.0), std::cosh(3.0) - 1.0, 1e-14));
}
