#include <doctest.h>

#include <cmath>

#include "maxsurf/canonical.hpp"
#include "maxsurf/shiffman.hpp"

using namespace maxsurf;

TEST_CASE("level curvature of the catenoid ring at z = 2") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  // level circle radius (r - 1/r)/2 = 3/4, curvature 4/3
  CHECK(level_curvature(w, Complex(2.0, 0.0)) == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(level_curvature(w, Complex(0.0, 3.0)) == doctest::Approx(2.0 * 3.0 / (9.0 - 1.0)));
}

TEST_CASE("shiffman function vanishes for circle-foliated data") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  for (const Complex z : {Complex(1.5, 0.3), Complex(-2.0, 1.0), Complex(0.4, -0.2)}) {
    CHECK(std::abs(shiffman_u(w, z)) <= 1e-12);
  }
  const WeierstrassData r = make_riemann({1.5, Complex(1.0, 0.0), +1}, {-0.75, 0.75, -0.75, 0.75});
  for (const Complex z : {Complex(0.3, 0.2), Complex(-0.4, 0.5)}) {
    CHECK(std::abs(shiffman_u(r, z)) <= 1e-5);
  }
}

TEST_CASE("shiffman u equals the scaled angular curvature derivative") {
  // perturbed datum that is not circle-foliated; eta keeps the slab height
  // normalization g * eta = dz / z
  WeierstrassData w = make_catenoid(1.0, 4.0);
  w.g = [](Complex z) { return z * std::exp(0.1 * z); };
  w.dg = [](Complex z) { return (1.0 + 0.1 * z) * std::exp(0.1 * z); };
  w.d2g = [](Complex z) { return (0.2 + 0.01 * z) * std::exp(0.1 * z); };
  w.eta = [g = w.g](Complex z) { return 1.0 / (z * g(z)); };
  double worst = 0.0;
  const double dth = 1e-5;
  for (double rr = 1.5; rr <= 2.5; rr += 0.125) {
    for (int j = 0; j < 24; ++j) {
      const double th = 2.0 * M_PI * j / 24.0;
      const Complex z = std::polar(rr, th);
      const double kp = level_curvature(w, std::polar(rr, th + dth));
      const double km = level_curvature(w, std::polar(rr, th - dth));
      const double lam = metric_factor(w, z);
      const double fd = rr * lam * (kp - km) / (2.0 * dth);
      worst = std::max(worst, std::abs(shiffman_u(w, z) - fd));
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("level generator real part is harmonic and constant for the catenoid") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  CHECK(harmonic_h(w, Complex(2.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  const ShiffmanGridSpec spec{96, 96, std::log(1.2), std::log(3.5), 0.0, 2.0 * M_PI};
  CHECK(harmonic_h_residual(w, spec) <= 1e-3);
}

TEST_CASE("sampled field is small in u and masks the cone band") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const ShiffmanGridSpec spec{64, 64, std::log(0.3), std::log(3.5), 0.0, 2.0 * M_PI};
  const ShiffmanField f = sample_shiffman(w, spec);
  CHECK(f.max_abs_u() <= 1e-12);
  bool masked_any = false;
  for (int i = 0; i < f.n_s; ++i)
    for (int j = 0; j < f.n_t; ++j)
      if (!f.mask[f.idx(i, j)]) masked_any = true;
  CHECK(masked_any);  // guard band around |g| = 1
}

TEST_CASE("jacobi residual of u is small on a fine catenoid grid") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const ShiffmanGridSpec spec{128, 128, std::log(1.3), std::log(3.5), 0.0, 2.0 * M_PI};
  const ShiffmanField f = sample_shiffman(w, spec);
  CHECK(jacobi_residual(f) <= 1e-3);
  CHECK(harmonic_h_residual(f) <= 1e-3);
}

TEST_CASE("singular circle combination stays bounded near the cone") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  const double near = std::abs(singular_circle_combination(w, Complex(1.001, 0.0)));
  const double off = std::abs(singular_circle_combination(w, Complex(2.0, 0.0)));
  CHECK(std::isfinite(near));
  CHECK(near <= 100.0 * (off + 1.0));
}

TEST_CASE("curvature oracle from the intrinsic metric") {
  const WeierstrassData w = make_catenoid(1.0, 4.0);
  // K = -Laplacian(log lambda) / lambda^2 in the conformal chart, compared on
  // the band |z| in [1.5, 3].
  const double hs = 1e-4;
  for (double rr = 1.5; rr <= 3.0; rr += 0.25) {
    const Complex z(rr, 0.0);
    auto loglam = [&](double ds, double dt) {
      const Complex p = std::polar(std::exp(std::log(rr) + ds), dt);
      // chart factor: lambda_chart = lambda * |z| for the log-radial chart
      return std::log(metric_factor(w, p) * std::abs(p));
    };
    const double lap = (loglam(hs, 0) + loglam(-hs, 0) + loglam(0, hs) + loglam(0, -hs) -
                        4.0 * loglam(0, 0)) /
                       (hs * hs);
    const double lam_chart = metric_factor(w, z) * rr;
    const double oracle = -lap / (lam_chart * lam_chart);
    CHECK(gauss_curvature(w, z) == doctest::Approx(oracle).epsilon(0.02));
  }
}
