#include <doctest.h>

#include <cmath>

#include "maxsurf/canonical.hpp"
#include "maxsurf/perron.hpp"

using namespace maxsurf;

namespace {

PlanarDomain radial_domain(double h) {
  PlanarDomain dom;
  Hole hole;
  hole.kind = Hole::Kind::Circle;
  hole.r = 1.0;
  hole.phi = 0.0;
  dom.holes = {hole};
  dom.trunc_radius = 2.0;
  dom.h = h;
  dom.far_mode = FarFieldMode::Dirichlet;
  dom.far_value = std::asinh(2.0) - std::asinh(1.0);
  return dom;
}

double radial_exact(double x, double y) {
  return std::asinh(std::hypot(x, y)) - std::asinh(1.0);
}

double sup_error_vs_radial(const PdeGrid& g) {
  double worst = 0.0;
  for (const int k : g.interior) {
    const int i = static_cast<int>(k) / g.nx, j = static_cast<int>(k) % g.nx;
    worst = std::max(worst, std::abs(g.nu[k] - radial_exact(g.px(j), g.py(i))));
  }
  return worst;
}

}  // namespace

TEST_CASE("grid builder classifies the radial annulus") {
  const PlanarDomain dom = radial_domain(0.1);
  PdeGrid g = build_grid(dom);
  CHECK(!g.interior.empty());
  int cut_hole = 0, cut_far = 0;
  for (const int k : g.interior) {
    const int i = static_cast<int>(k) / g.nx, j = static_cast<int>(k) % g.nx;
    const double rho = std::hypot(g.px(j), g.py(i));
    CHECK(rho >= 1.0 - 1e-9);
    CHECK(rho <= 2.0 + 1e-9);
    for (int d = 0; d < 4; ++d) {
      CHECK(g.arm_len[k][d] > 0.0f);
      CHECK(g.arm_len[k][d] <= 1.0f);
      if (g.arm_cut[k][d] == 1) ++cut_hole;
      if (g.arm_cut[k][d] == 2) ++cut_far;
    }
  }
  CHECK(cut_hole > 0);
  CHECK(cut_far > 0);
}

TEST_CASE("planted exact solution has small stencil residual away from cuts") {
  const PlanarDomain dom = radial_domain(0.05);
  PdeGrid g = build_grid(dom);
  for (const int k : g.interior) {
    const int i = static_cast<int>(k) / g.nx, j = static_cast<int>(k) % g.nx;
    g.nu[k] = radial_exact(g.px(j), g.py(i));
  }
  double worst = 0.0;
  for (const int k : g.interior) {
    bool full = true;
    for (int d = 0; d < 4; ++d) full = full && g.arm_cut[k][d] == 0;
    if (!full) continue;
    const int i = static_cast<int>(k) / g.nx, j = static_cast<int>(k) % g.nx;
    if (std::hypot(g.px(j), g.py(i)) < 1.15) continue;  // skip the cut-adjacent ring
    worst = std::max(worst, std::abs(q_residual(g, i, j)));
  }
  CHECK(worst <= 5e-3);
}

TEST_CASE("relaxation solver reproduces the radial closed form") {
  const PlanarDomain dom = radial_domain(0.05);
  PdeGrid g = build_grid(dom);
  SolveOptions opt;
  opt.tol_change = 1e-10;
  const SolveResult res = relaxation_oracle(g, dom, opt);
  REQUIRE(res.converged);
  CHECK(sup_error_vs_radial(g) <= 2e-4);
  for (const int k : g.interior) CHECK(g.deficit(k) > 0.0);
}

TEST_CASE("perron iteration is monotone and barrier-bounded") {
  const PlanarDomain dom = radial_domain(0.1);
  PdeGrid g = build_grid(dom);
  const SubSuperPair pair = build_sub_super(dom, g);
  for (size_t k = 0; k < g.nu.size(); ++k) CHECK(pair.sub[k] <= pair.super[k] + 1e-12);

  g.nu = pair.sub;
  std::vector<double> prev = g.nu;
  const int rad = 4;
  for (int sweep = 0; sweep < 30; ++sweep) {
    for (int parity = 0; parity < 2; ++parity) {
      for (int ci = rad; ci < g.ny - rad; ci += rad) {
        for (int cj = rad + ((ci / rad + parity) % 2) * rad; cj < g.nx - rad; cj += 2 * rad) {
          if (!g.is_interior(g.idx(ci, cj))) continue;
          if (std::hypot(g.px(cj), g.py(ci)) + (rad + 1) * g.h >= dom.trunc_radius) continue;
          solution_lift(g, ci, cj, rad);
        }
      }
    }
    for (const int k : g.interior) {
      CHECK(g.nu[k] >= prev[k] - 1e-12);           // nondecreasing
      CHECK(g.nu[k] >= pair.sub[k] - 1e-12);       // above the subsolution
      CHECK(g.nu[k] <= pair.super[k] + 1e-12);     // below the supersolution
    }
    prev = g.nu;
  }
}

TEST_CASE("perron solver matches the relaxation oracle") {
  const PlanarDomain dom = radial_domain(0.1);
  PdeGrid gp = build_grid(dom);
  const SubSuperPair pair = build_sub_super(dom, gp);
  SolveOptions opt;
  opt.tol_change = 1e-10;
  const SolveResult rp = perron_solve(gp, dom, pair, opt);
  REQUIRE(rp.converged);

  PdeGrid go = build_grid(dom);
  const SolveResult ro = relaxation_oracle(go, dom, opt);
  REQUIRE(ro.converged);

  double gap = 0.0;
  for (const int k : gp.interior) gap = std::max(gap, std::abs(gp.nu[k] - go.nu[k]));
  CHECK(gap <= 1e-5);
}

TEST_CASE("pointwise max of two subsolutions is a subsolution") {
  PlanarDomain dom = radial_domain(0.1);
  dom.holes[0].phi = 0.5;
  dom.far_value = 0.5;
  PdeGrid g = build_grid(dom);
  // linear height fields are exact solutions, hence subsolutions; their max
  // has a convex kink and stays below the boundary data
  std::vector<double> v1(g.nu.size()), v2(g.nu.size()), vmax(g.nu.size());
  for (size_t k = 0; k < g.nu.size(); ++k) {
    const int i = static_cast<int>(k) / g.nx, j = static_cast<int>(k) % g.nx;
    v1[k] = 0.10 * g.px(j) - 0.2;
    v2[k] = -0.15 * g.px(j) - 0.2;
    vmax[k] = std::max(v1[k], v2[k]);
  }
  CHECK(discrete_subsolution(g, v1, 1e-9));
  CHECK(discrete_subsolution(g, v2, 1e-9));
  CHECK(discrete_subsolution(g, vmax, 1e-9));
}

TEST_CASE("far field refit recovers a planar end") {
  PlanarDomain dom;
  Hole hole;
  hole.kind = Hole::Kind::Circle;
  hole.r = 1.0;
  hole.phi = 0.8;
  dom.holes = {hole};
  dom.trunc_radius = 10.0;
  dom.h = 0.25;
  dom.far_mode = FarFieldMode::PlanarRobin;
  PdeGrid g = build_grid(dom);
  for (size_t k = 0; k < g.nu.size(); ++k) {
    const int i = static_cast<int>(k) / g.nx, j = static_cast<int>(k) % g.nx;
    const double rho = std::max(1.0, std::hypot(g.px(j), g.py(i)));
    g.nu[k] = 0.3 + 0.5 / rho;
  }
  const FarFieldFit fit = far_field_condition(g, dom, FarFieldMode::PlanarRobin);
  CHECK(fit.t0 == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(fit.c == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(std::abs(fit.beta) <= 1e-6);
}

TEST_CASE("domain validation rejects bad geometry") {
  PlanarDomain dom = radial_domain(0.1);
  dom.trunc_radius = 1.05;  // hole reaches the truncation circle
  CHECK_THROWS_AS(build_grid(dom), InvalidArgument);

  PlanarDomain robin = radial_domain(0.1);
  robin.far_mode = FarFieldMode::PlanarRobin;
  robin.trunc_radius = 3.0;  // below the 5x extent requirement
  CHECK_THROWS_AS(build_grid(robin), InvalidArgument);

  PlanarDomain empty;
  empty.trunc_radius = 5.0;
  empty.h = 0.1;
  CHECK_THROWS_AS(build_grid(empty), InvalidArgument);
}

TEST_CASE("barrier construction rejects an unbridgeable data jump") {
  PlanarDomain dom;
  Hole a, b;
  a.kind = Hole::Kind::Circle;
  a.r = 0.5;
  a.cx = -0.8;
  a.phi = +1.0;
  b.kind = Hole::Kind::Circle;
  b.r = 0.5;
  b.cx = 0.8;
  b.phi = -1.0;
  dom.holes = {a, b};
  dom.trunc_radius = 8.0;
  dom.h = 0.05;
  dom.far_mode = FarFieldMode::PlanarRobin;
  const PdeGrid g = build_grid(dom);
  CHECK_THROWS_AS(build_sub_super(dom, g), OrderingViolation);
}

TEST_CASE("lifting ball must stay inside the truncation") {
  const PlanarDomain dom = radial_domain(0.1);
  PdeGrid g = build_grid(dom);
  const SubSuperPair pair = build_sub_super(dom, g);
  g.nu = pair.sub;
  CHECK_THROWS_AS(solution_lift(g, g.ny / 2, g.nx - 2, 5.0), InvalidArgument);
}
