#include <doctest.h>

#include <cmath>

#include "maxsurf/canonical.hpp"

using namespace maxsurf;

TEST_CASE("catenoid data exposes g = z and eta = scale / z^2") {
  const WeierstrassData w = make_catenoid(2.0, 4.0);
  const Complex z(1.3, -0.7);
  CHECK(std::abs(w.g(z) - z) <= 1e-15);
  CHECK(std::abs(w.dg(z) - Complex(1.0, 0.0)) <= 1e-15);
  CHECK(std::abs(w.eta(z) - 2.0 / (z * z)) <= 1e-14);
  CHECK(w.domain.chart == HeightChart::LogRadial);
  CHECK(w.domain.R == doctest::Approx(4.0));
}

TEST_CASE("closed form graph is the catenoid profile") {
  CHECK(closed_form_catenoid_graph(3.0, 4.0, 1.0) == doctest::Approx(std::asinh(5.0)));
  CHECK(closed_form_catenoid_graph(0.0, 2.0, 2.0) == doctest::Approx(2.0 * std::asinh(1.0)));
}

TEST_CASE("riemann gauss map satisfies its defining equation") {
  const RiemannParameter param{1.5, Complex(1.0, 0.0), +1};
  const Rect rect{-0.75, 0.75, -0.75, 0.75};
  const RiemannGaussMap map(param, rect);
  for (const Complex z : {Complex(0.3, 0.2), Complex(-0.5, 0.6), Complex(0.7, -0.7)}) {
    const auto s = map.evaluate(z);
    const Complex lhs = s.p * s.p;
    const Complex rhs = s.g * (s.g * s.g + 2.0 * param.r * s.g + 1.0);
    CHECK(std::abs(lhs - rhs) <= 1e-9);
  }
}

TEST_CASE("riemann continuation is path independent") {
  const RiemannParameter param{1.5, Complex(1.0, 0.0), +1};
  const Rect rect{-0.75, 0.75, -0.75, 0.75};
  const RiemannGaussMap map(param, rect);
  const Complex target(0.5, 0.5);
  const auto cached = map.evaluate(target);
  // L-shaped continuation through a different corner
  const auto leg = map.continue_along(Complex(0.0, 0.0), Complex(0.0, 0.5));
  (void)leg;
  const auto direct = map.continue_along(Complex(0.0, 0.0), target);
  CHECK(std::abs(cached.g - direct.g) <= 1e-9);
  CHECK(std::abs(cached.p - direct.p) <= 1e-9);
}

TEST_CASE("riemann branch choice flips the initial derivative") {
  const Rect rect{-0.75, 0.75, -0.75, 0.75};
  const RiemannGaussMap plus({1.5, Complex(1.0, 0.0), +1}, rect);
  const RiemannGaussMap minus({1.5, Complex(1.0, 0.0), -1}, rect);
  const auto sp = plus.evaluate(Complex(0.0, 0.0));
  const auto sm = minus.evaluate(Complex(0.0, 0.0));
  CHECK(std::abs(sp.p + sm.p) <= 1e-12);
}

TEST_CASE("riemann weierstrass data uses h = 1/g in the strip chart") {
  const RiemannParameter param{1.5, Complex(1.0, 0.0), +1};
  const Rect rect{-0.75, 0.75, -0.75, 0.75};
  const WeierstrassData w = make_riemann(param, rect);
  CHECK(w.domain.chart == HeightChart::Linear);
  const Complex z(0.25, -0.3);
  const Complex g = w.g(z);
  CHECK(std::abs(w.eta(z) - 1.0 / g) <= 1e-12);
  // dg and d2g agree with centered differences of g
  const double d = 1e-5;
  const Complex dg_fd = (w.g(z + d) - w.g(z - d)) / (2.0 * d);
  CHECK(std::abs(w.dg(z) - dg_fd) <= 1e-7);
  const Complex d2g_fd = (w.g(z + d) - 2.0 * g + w.g(z - d)) / (d * d);
  CHECK(std::abs(w.d2g(z) - d2g_fd) <= 1e-4);
}
