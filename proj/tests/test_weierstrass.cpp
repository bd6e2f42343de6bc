#include <doctest.h>

#include <cmath>

#include "maxsurf/canonical.hpp"
#include "maxsurf/weierstrass.hpp"

using namespace maxsurf;

namespace {

LorentzVec catenoid_closed_form(Complex z) {
  const double r = std::abs(z);
  const double th = std::arg(z);
  const double rad = 0.5 * (r - 1.0 / r);
  return {rad * std::cos(th), rad * std::sin(th), std::log(r)};
}

}  // namespace

TEST_CASE("catenoid immersion matches the closed form") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const SurfaceGrid g = integrate_immersion(w, {64, 128, 0, 0});
  double worst = 0.0;
  for (int i = 0; i < g.n_r; ++i) {
    for (int j = 0; j < g.n_theta; ++j) {
      const SurfaceNode& n = g.at(i, j);
      if (!n.present) continue;
      worst = std::max(worst, (n.X - catenoid_closed_form(n.z)).euclidean_norm());
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("catenoid metric factor and curvature at z = 2") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const Complex z(2.0, 0.0);
  // lambda = |1 - r^2| * |h| / 2 = 3 * (1/4) / 2
  CHECK(metric_factor(w, z) == doctest::Approx(3.0 / 8.0).epsilon(1e-12));
  // K = [4 |g'| / (|1 - r^2|^2 |h|)]^2 = [4 / (9/4)]^2
  CHECK(gauss_curvature(w, z) == doctest::Approx(256.0 / 81.0).epsilon(1e-12));
}

TEST_CASE("metric factor vanishes on the cone circle") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  CHECK(metric_factor(w, Complex(1.0, 0.0)) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("gauss map of the catenoid is the stereographic image of z") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const Complex z(1.7, -0.4);
  const HyperbolicPoint got = gauss_map(w, z);
  const HyperbolicPoint want = stereographic(ExtComplex(z));
  CHECK((got.p - want.p).euclidean_norm() <= 1e-14);
}

TEST_CASE("period check closes on the annulus") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const PeriodCheck pc = period_check(w, 2.0);
  CHECK(pc.max_abs_re() <= 1e-10);
  // the third form has residue giving the vertical log period
  CHECK(pc.im3 == doctest::Approx(2.0 * M_PI).epsilon(1e-10));
}

TEST_CASE("segment integration is additive along a path") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const Complex a(1.5, 0.0), b(2.0, 0.7), c(3.0, -0.5);
  const LorentzVec Xa{};
  const LorentzVec direct = integrate_segment(w, a, c, Xa);
  const LorentzVec mid = integrate_segment(w, a, b, Xa);
  const LorentzVec via = integrate_segment(w, b, c, mid);
  CHECK((direct - via).euclidean_norm() <= 1e-10);
}

TEST_CASE("outer catenoid half is a maximal graph") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const SurfaceGrid g = integrate_immersion(w, {129, 256, 1.3, 4.0});
  const GraphResidual res = graph_residual(g, 64);
  CHECK(res.max_grad_sq < 1.0);
  CHECK(res.max_residual <= 0.1);
}

TEST_CASE("closed form catenoid graph satisfies the graph equation") {
  std::vector<std::vector<double>> field(41, std::vector<double>(41));
  const double h = 0.05;
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j)
      field[i][j] = closed_form_catenoid_graph(1.0 + j * h, 1.0 + i * h, 1.0);
  const GraphResidual res = maximal_graph_residual(field, h);
  CHECK(res.max_residual <= 5e-3);
}

TEST_CASE("mirror reflection satisfies the matching identity") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const WeierstrassData m = mirror_reflect(w);
  const SurfaceGrid mg = integrate_immersion(m, {64, 128, 0.25, 0.9});
  // P0 is the cone point image; for this catenoid X(cone) = 0, so the
  // reflected immersion must satisfy X*(z) + X(1/conj z) = 0.
  double worst = 0.0;
  int checked = 0;
  for (int i = 0; i < mg.n_r; ++i) {
    for (int j = 0; j < mg.n_theta; ++j) {
      const SurfaceNode& n = mg.at(i, j);
      if (!n.present) continue;
      const LorentzVec Xr = catenoid_closed_form(1.0 / std::conj(n.z));
      worst = std::max(worst, (n.X + Xr).euclidean_norm());
      ++checked;
    }
  }
  CHECK(checked > 1000);
  CHECK(worst <= 1e-9);
}

TEST_CASE("cone detector finds the catenoid waist") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const SurfaceGrid g = integrate_immersion(w, {129, 128, 0, 0});
  const auto cones = detect_conelike(g, 0.05);
  REQUIRE(cones.size() == 1);
  CHECK(cones[0].mean_abs_z == doctest::Approx(1.0).epsilon(0.05));
  CHECK(cones[0].spread <= 0.2);
  CHECK(cones[0].P0.euclidean_norm() <= 0.05);
}

TEST_CASE("annulus domain factory validates its input") {
  CHECK_THROWS_AS(AnnulusDomain::annulus(0.5), InvalidArgument);
  CHECK_NOTHROW(AnnulusDomain::annulus(4.0));
}
