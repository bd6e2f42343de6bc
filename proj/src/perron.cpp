#include "maxsurf/perron.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>

namespace maxsurf {

namespace {

constexpr double kDeficitFloor = 1e-6;
constexpr double kMinArm = 1e-3;  // safety floor for Shortley-Weller arm fractions


double ellipse_boundary_distance(double px, double py, double a, double b) {
  // distance from (px, py) to the boundary of the axis-aligned ellipse:
  // coarse parametric scan refined by Newton on the stationarity condition.
  double best = std::numeric_limits<double>::infinity();
  double best_t = 0;
  for (int k = 0; k < 256; ++k) {
    const double t = 2.0 * M_PI * k / 256.0;
    const double d = std::hypot(px - a * std::cos(t), py - b * std::sin(t));
    if (d < best) {
      best = d;
      best_t = t;
    }
  }
  double t = best_t;
  for (int it = 0; it < 12; ++it) {
    const double ct = std::cos(t), st = std::sin(t);
    const double dx = px - a * ct, dy = py - b * st;
    const double f = dx * a * st - dy * b * ct;           // d/dt of half squared distance
    const double fp = dx * a * ct + dy * b * st + a * a * st * st + b * b * ct * ct;
    if (std::abs(fp) < 1e-300) break;
    t -= f / fp;
  }
  return std::hypot(px - a * std::cos(t), py - b * std::sin(t));
}

}  // namespace

bool Hole::contains(double x, double y) const {
  if (kind == Kind::Circle) return std::hypot(x - cx, y - cy) < r;
  const double u = (x - cx) / a, v = (y - cy) / b;
  return u * u + v * v < 1.0;
}

double Hole::signed_distance(double x, double y) const {
  if (kind == Kind::Circle) return std::hypot(x - cx, y - cy) - r;
  const double d = ellipse_boundary_distance(x - cx, y - cy, a, b);
  return contains(x, y) ? -d : d;
}

void PlanarDomain::validate() const {
  if (holes.empty() || holes.size() > 2) throw InvalidArgument("need one or two holes");
  if (!(h > 0)) throw InvalidArgument("grid spacing must be positive");
  if (!(trunc_radius > 0)) throw InvalidArgument("truncation radius must be positive");
  double max_extent = 0;
  for (const Hole& hole : holes) {
    max_extent = std::max(max_extent, hole.extent());
    const double d = std::hypot(hole.cx - trunc_cx, hole.cy - trunc_cy);
    if (d + hole.extent() >= trunc_radius - 2 * h) {
      throw InvalidArgument("hole reaches the truncation circle");
    }
  }
  if (far_mode == FarFieldMode::PlanarRobin && trunc_radius < 5.0 * max_extent) {
    throw InvalidArgument("truncation radius below 5x hole extent for the planar-end closure");
  }
  if (holes.size() == 2) {
    // clearance between the two hole boundaries
    double clearance = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 512; ++k) {
      const double t = 2.0 * M_PI * k / 512.0;
      const Hole& h0 = holes[0];
      double bx, by;
      if (h0.kind == Hole::Kind::Circle) {
        bx = h0.cx + h0.r * std::cos(t);
        by = h0.cy + h0.r * std::sin(t);
      } else {
        bx = h0.cx + h0.a * std::cos(t);
        by = h0.cy + h0.b * std::sin(t);
      }
      clearance = std::min(clearance, holes[1].signed_distance(bx, by));
    }
    if (clearance < 4.0 * h) throw InvalidArgument("holes overlap or clear less than 4h");
  }
}

double PdeGrid::arm_end_value(size_t k, int d) const {
  if (arm_cut[k][d] != 0) return arm_val[k][d];
  static const int off_i[4] = {0, 0, 1, -1};
  static const int off_j[4] = {1, -1, 0, 0};
  return nu[k + static_cast<size_t>(off_i[d]) * nx + off_j[d]];
}

void PdeGrid::gradient(size_t k, double& gx, double& gy) const {
  const double ue = arm_end_value(k, 0), uw = arm_end_value(k, 1);
  const double un = arm_end_value(k, 2), us = arm_end_value(k, 3);
  gx = (ue - uw) / ((arm_len[k][0] + arm_len[k][1]) * h);
  gy = (un - us) / ((arm_len[k][2] + arm_len[k][3]) * h);
}

double PdeGrid::deficit(size_t k) const {
  double gx, gy;
  gradient(k, gx, gy);
  return 1.0 - gx * gx - gy * gy;
}

double PdeGrid::residual(size_t k, double floor_) const {
  const double uP = nu[k];
  double ue[4], hl[4], slope[4];
  for (int d = 0; d < 4; ++d) {
    ue[d] = arm_end_value(k, d);
    hl[d] = arm_len[k][d] * h;
  }
  slope[0] = (ue[0] - uP) / hl[0];  // east face d/dx
  slope[1] = (uP - ue[1]) / hl[1];  // west face d/dx
  slope[2] = (ue[2] - uP) / hl[2];  // north face d/dy
  slope[3] = (uP - ue[3]) / hl[3];  // south face d/dy

  const double gxP = (ue[0] - ue[1]) / (hl[0] + hl[1]);
  const double gyP = (ue[2] - ue[3]) / (hl[2] + hl[3]);

  static const long long off[4] = {1, -1, 0, 0};
  double flux[4];
  for (int d = 0; d < 4; ++d) {
    double tang;  // tangential gradient component at the face
    if (arm_cut[k][d] == 0) {
      const size_t kn = d < 2 ? k + off[d] : (d == 2 ? k + nx : k - nx);
      double gxn, gyn;
      gradient(kn, gxn, gyn);
      tang = d < 2 ? 0.5 * (gyP + gyn) : 0.5 * (gxP + gxn);
    } else {
      tang = d < 2 ? gyP : gxP;
    }
    double def = 1.0 - slope[d] * slope[d] - tang * tang;
    if (floor_ < 0.0) {
      if (def <= 1e-10) throw SpacelikeViolation("gradient reaches the light cone on the stencil");
    } else {
      def = std::max(def, floor_);
    }
    flux[d] = slope[d] / std::sqrt(def);
  }
  return (flux[0] - flux[1]) / (0.5 * (hl[0] + hl[1])) +
         (flux[2] - flux[3]) / (0.5 * (hl[2] + hl[3]));
}

std::vector<std::vector<double>> PdeGrid::nu_as_field() const {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> f(ny, std::vector<double>(nx, nan));
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j)
      if (state[idx(i, j)] == NodeState::Interior) f[i][j] = nu[idx(i, j)];
  return f;
}

namespace {

// classification and Shortley-Weller arm setup for a given lattice; also used
// to build the aligned coarse lattices of the multilevel relaxation
PdeGrid build_grid_on(const PlanarDomain& dom, double x0, double y0, int nx, int ny, double h) {
  PdeGrid g;
  g.h = h;
  g.x0 = x0;
  g.y0 = y0;
  g.nx = nx;
  g.ny = ny;
  const size_t n = static_cast<size_t>(g.nx) * g.ny;
  g.state.assign(n, PdeGrid::NodeState::Interior);
  g.nu.assign(n, 0.0);
  g.arm_len.assign(n, {1.f, 1.f, 1.f, 1.f});
  g.arm_val.assign(n, {0, 0, 0, 0});
  g.arm_cut.assign(n, {0, 0, 0, 0});

  for (int i = 0; i < g.ny; ++i) {
    for (int j = 0; j < g.nx; ++j) {
      const size_t k = g.idx(i, j);
      const double x = g.px(j), y = g.py(i);
      // nodes sitting on a boundary (up to rounding) become Dirichlet nodes
      const double snap = 1e-9 * h;
      if (std::hypot(x - dom.trunc_cx, y - dom.trunc_cy) >= dom.trunc_radius - snap ||
          i == 0 || j == 0 || i == g.ny - 1 || j == g.nx - 1) {
        g.state[k] = PdeGrid::NodeState::FarField;
        g.nu[k] = dom.far_value;
        continue;
      }
      for (const Hole& hole : dom.holes) {
        if (hole.signed_distance(x, y) < snap) {
          g.state[k] = PdeGrid::NodeState::Hole;
          g.nu[k] = hole.phi;
          break;
        }
      }
    }
  }

  // Shortley-Weller arms: fraction along the axis to the crossed boundary.
  auto circle_cross = [](double px_, double py_, double ex, double ey, double cx, double cy,
                         double r) {
    // |p + t e - c|^2 = r^2, smallest t in (0, 1]
    const double dx = px_ - cx, dy = py_ - cy;
    const double A = ex * ex + ey * ey;
    const double B = 2.0 * (dx * ex + dy * ey);
    const double C = dx * dx + dy * dy - r * r;
    const double disc = B * B - 4 * A * C;
    if (disc < 0) return 1.0;
    const double sq = std::sqrt(disc);
    for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)}) {
      if (t > 1e-12 && t <= 1.0 + 1e-12) return std::min(t, 1.0);
    }
    return 1.0;
  };
  auto ellipse_cross = [](double px_, double py_, double ex, double ey, const Hole& hole) {
    const double dx = (px_ - hole.cx) / hole.a, dy = (py_ - hole.cy) / hole.b;
    const double fx = ex / hole.a, fy = ey / hole.b;
    const double A = fx * fx + fy * fy;
    const double B = 2.0 * (dx * fx + dy * fy);
    const double C = dx * dx + dy * dy - 1.0;
    const double disc = B * B - 4 * A * C;
    if (disc < 0) return 1.0;
    const double sq = std::sqrt(disc);
    for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)}) {
      if (t > 1e-12 && t <= 1.0 + 1e-12) return std::min(t, 1.0);
    }
    return 1.0;
  };

  static const int di[4] = {0, 0, 1, -1};
  static const int dj[4] = {1, -1, 0, 0};
  for (int i = 0; i < g.ny; ++i) {
    for (int j = 0; j < g.nx; ++j) {
      const size_t k = g.idx(i, j);
      if (g.state[k] != PdeGrid::NodeState::Interior) continue;
      g.interior.push_back(static_cast<int>(k));
      const double x = g.px(j), y = g.py(i);
      for (int d = 0; d < 4; ++d) {
        const int ni = i + di[d], nj = j + dj[d];
        const size_t kn = g.idx(ni, nj);
        if (g.state[kn] == PdeGrid::NodeState::Interior) continue;
        const double ex = dj[d] * h, ey = di[d] * h;
        // fallback: a snapped boundary node carries its Dirichlet value
        double t = 1.0;
        double val = g.nu[kn];
        if (g.state[kn] == PdeGrid::NodeState::Hole) {
          g.arm_cut[k][d] = 1;
          for (const Hole& hole : dom.holes) {
            if (!hole.contains(g.px(nj), g.py(ni))) continue;
            const double tc = hole.kind == Hole::Kind::Circle
                                  ? circle_cross(x, y, ex, ey, hole.cx, hole.cy, hole.r)
                                  : ellipse_cross(x, y, ex, ey, hole);
            if (tc < t) {
              t = tc;
              val = hole.phi;
            }
            break;
          }
        } else {
          g.arm_cut[k][d] = 2;
          const double tc = circle_cross(x, y, ex, ey, dom.trunc_cx, dom.trunc_cy,
                                         dom.trunc_radius);
          if (tc < t) {
            t = tc;
            val = dom.far_value;
          }
        }
        g.arm_len[k][d] = static_cast<float>(std::max(t, kMinArm));
        g.arm_val[k][d] = val;
      }
    }
  }
  return g;
}

}  // namespace

PdeGrid build_grid(const PlanarDomain& dom) {
  dom.validate();
  const double margin = 2.0 * dom.h;
  const double x0 = dom.trunc_cx - dom.trunc_radius - margin;
  const double y0 = dom.trunc_cy - dom.trunc_radius - margin;
  int span = static_cast<int>(std::ceil(2.0 * (dom.trunc_radius + margin) / dom.h));
  // pad to a multiple of 32 cells so the multilevel solver can halve cleanly;
  // the extra nodes lie outside the truncation circle
  span = ((span + 31) / 32) * 32;
  return build_grid_on(dom, x0, y0, span + 1, span + 1, dom.h);
}

double q_residual(const PdeGrid& grid, int i, int j) {
  const size_t k = grid.idx(i, j);
  if (!grid.is_interior(k)) throw InvalidArgument("q_residual needs an interior node");
  return grid.residual(k, -1.0);
}

double max_q_residual(const PdeGrid& grid) {
  double m = 0.0;
  for (int k : grid.interior) m = std::max(m, std::abs(grid.residual(k, 1e-10)));
  return m;
}

namespace {

// catenoid-profile barrier: phi0 - s * asinh(d / s)
double profile(double phi0, double s, double d) { return phi0 - s * std::asinh(d / s); }

}  // namespace

SubSuperPair build_sub_super(const PlanarDomain& dom, const PdeGrid& grid) {
  const size_t n = grid.nu.size();
  SubSuperPair pair;
  pair.sub.assign(n, 0.0);
  pair.super.assign(n, 0.0);

  double phi_min = dom.holes[0].phi, phi_max = dom.holes[0].phi;
  for (const Hole& h : dom.holes) {
    phi_min = std::min(phi_min, h.phi);
    phi_max = std::max(phi_max, h.phi);
  }
  if (dom.far_mode == FarFieldMode::Dirichlet) {
    phi_min = std::min(phi_min, dom.far_value);
    phi_max = std::max(phi_max, dom.far_value);
  }
  if (phi_max - phi_min < 1e-15 || dom.holes.size() < 2) {
    // constants are exact solutions; they bracket any solution with this data
    std::fill(pair.sub.begin(), pair.sub.end(), phi_min);
    std::fill(pair.super.begin(), pair.super.end(), phi_max);
    return pair;
  }

  const bool first_high = dom.holes[0].phi >= dom.holes[1].phi;
  const Hole& high = dom.holes[first_high ? 0 : 1];
  const Hole& low = dom.holes[first_high ? 1 : 0];
  const double jump = high.phi - low.phi;

  // minimal boundary-to-boundary separations
  auto min_sep = [&](const Hole& from, const Hole& to) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 512; ++k) {
      const double t = 2.0 * M_PI * k / 512.0;
      double bx, by;
      if (from.kind == Hole::Kind::Circle) {
        bx = from.cx + from.r * std::cos(t);
        by = from.cy + from.r * std::sin(t);
      } else {
        bx = from.cx + from.a * std::cos(t);
        by = from.cy + from.b * std::sin(t);
      }
      m = std::min(m, to.signed_distance(bx, by));
    }
    return m;
  };
  const double gap = min_sep(high, low);
  if (gap <= jump) {
    throw OrderingViolation("holes too close for the boundary data jump (|Dnu| < 1)");
  }
  // pick the profile scale so the drop across the gap exceeds the data jump
  auto pick_scale = [&](double need, double dist) {
    double lo = 1e-3, hi = 1e3;
    auto drop = [&](double s) { return s * std::asinh(dist / s); };
    if (drop(hi) <= need) throw OrderingViolation("no catenoid barrier fits the geometry");
    while (hi - lo > 1e-9 * hi) {
      const double mid = 0.5 * (lo + hi);
      (drop(mid) > need ? hi : lo) = mid;
    }
    return hi;
  };
  const double margin = 0.5 * (gap - jump);
  const double s_v = pick_scale(jump + std::min(margin, 0.45 * (gap - jump)), gap);
  const double s_w = s_v;

  for (int i = 0; i < grid.ny; ++i) {
    for (int j = 0; j < grid.nx; ++j) {
      const size_t k = grid.idx(i, j);
      const double x = grid.px(j), y = grid.py(i);
      const double dh = std::max(high.signed_distance(x, y), 0.0);
      const double dl = std::max(low.signed_distance(x, y), 0.0);
      pair.sub[k] = std::max(profile(high.phi, s_v, dh), low.phi);
      pair.super[k] = std::min(-profile(-low.phi, s_w, dl), high.phi);
    }
  }
  for (size_t k = 0; k < n; ++k) {
    if (pair.sub[k] > pair.super[k] + 1e-12) {
      throw OrderingViolation("subsolution exceeds supersolution");
    }
  }
  return pair;
}

bool discrete_subsolution(const PdeGrid& grid, const std::vector<double>& values, double tol) {
  // Stencil-sign surrogate on the uniform lattice: the candidate is given at
  // every node, so the operator is evaluated with plain full arms; boundary
  // arm data would fake kinks the candidate does not have.
  const double h = grid.h;
  for (int k : grid.interior) {
    const int i = k / grid.nx, j = k % grid.nx;
    if (i < 1 || i + 1 >= grid.ny || j < 1 || j + 1 >= grid.nx) continue;
    auto v = [&](int ii, int jj) { return values[grid.idx(ii, jj)]; };
    auto gy = [&](int ii, int jj) { return (v(ii + 1, jj) - v(ii - 1, jj)) / (2.0 * h); };
    auto gx = [&](int ii, int jj) { return (v(ii, jj + 1) - v(ii, jj - 1)) / (2.0 * h); };
    auto face_flux = [&](double sn, double st) {
      const double def = 1.0 - sn * sn - st * st;
      if (def <= 1e-10) throw SpacelikeViolation("candidate reaches the light cone");
      return sn / std::sqrt(def);
    };
    const double fe =
        face_flux((v(i, j + 1) - v(i, j)) / h, 0.5 * (gy(i, j) + gy(i, j + 1)));
    const double fw =
        face_flux((v(i, j) - v(i, j - 1)) / h, 0.5 * (gy(i, j) + gy(i, j - 1)));
    const double fn =
        face_flux((v(i + 1, j) - v(i, j)) / h, 0.5 * (gx(i, j) + gx(i + 1, j)));
    const double fs =
        face_flux((v(i, j) - v(i - 1, j)) / h, 0.5 * (gx(i, j) + gx(i - 1, j)));
    if ((fe - fw) / h + (fn - fs) / h < -tol) return false;
  }
  return true;
}

namespace {

// per-sweep cache of nodal gradients for the face-tangential terms; lagging
// them one sweep keeps the fixed point and cuts the per-node cost
struct GradCache {
  std::vector<double> gx, gy;
};

void fill_grad_cache(const PdeGrid& g, GradCache& c) {
  c.gx.assign(g.nu.size(), 0.0);
  c.gy.assign(g.nu.size(), 0.0);
  for (int k : g.interior) g.gradient(k, c.gx[k], c.gy[k]);
}

double cached_residual(const PdeGrid& g, size_t k, const GradCache& c) {
  const double uP = g.nu[k];
  double flux[4], hl[4];
  static const long long off[4] = {1, -1, 0, 0};
  for (int d = 0; d < 4; ++d) {
    hl[d] = g.arm_len[k][d] * g.h;
    const double sgn = d == 1 || d == 3 ? -1.0 : 1.0;
    const double slope = sgn * (g.arm_end_value(k, d) - uP) / hl[d];
    double tang;
    if (g.arm_cut[k][d] == 0) {
      const size_t kn = d < 2 ? k + off[d] : (d == 2 ? k + g.nx : k - g.nx);
      tang = d < 2 ? 0.5 * (c.gy[k] + c.gy[kn]) : 0.5 * (c.gx[k] + c.gx[kn]);
    } else {
      tang = d < 2 ? c.gy[k] : c.gx[k];
    }
    const double def = std::max(1.0 - slope * slope - tang * tang, kDeficitFloor);
    flux[d] = slope / std::sqrt(def);
  }
  return (flux[0] - flux[1]) / (0.5 * (hl[0] + hl[1])) +
         (flux[2] - flux[3]) / (0.5 * (hl[2] + hl[3]));
}

// one Gauss-Seidel-Newton pass over the given nodes; returns max |change|.
// rhs shifts the target equation to N(u) = rhs (used by the FAS levels).
double gsn_pass(PdeGrid& g, const std::vector<int>& nodes, double relax,
                const GradCache* cache = nullptr, const std::vector<double>* rhs = nullptr) {
  double change = 0.0;
  for (int k : nodes) {
    double R = cache ? cached_residual(g, k, *cache) : g.residual(k, kDeficitFloor);
    if (rhs) R -= (*rhs)[k];
    // exact Newton diagonal: the face-tangential gradients do not involve the
    // center value, so dF/du = -q (1 + slope^2 q^2) / arm. Slopes beyond the
    // light cone would blow the clamped derivative up, so bound them here;
    // the projection below removes such states anyway.
    double hl[4], ue[4], dq[4];
    const double uP = g.nu[k];
    for (int d = 0; d < 4; ++d) {
      hl[d] = g.arm_len[k][d] * g.h;
      ue[d] = g.arm_end_value(k, d);
      const double slope = std::min(std::abs(ue[d] - uP) / hl[d], 0.995);
      const double q2 = 1.0 / (1.0 - slope * slope);
      dq[d] = std::sqrt(q2) * (1.0 + slope * slope * q2);
    }
    const double diag = (dq[0] / hl[0] + dq[1] / hl[1]) / (0.5 * (hl[0] + hl[1])) +
                        (dq[2] / hl[2] + dq[3] / hl[3]) / (0.5 * (hl[2] + hl[3]));
    if (diag <= 0.0) continue;
    // over-relaxation is not stable on cut-cell stencils; damp those nodes
    double w = relax;
    for (int d = 0; d < 4; ++d) {
      if (g.arm_len[k][d] < 0.5f) w = std::min(w, 0.8);
    }
    double unew = uP + w * R / diag;
    // project onto the strict light cone of the arm ends; the solution itself
    // satisfies these bounds, and clamped deficits cripple Newton outside them
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int d = 0; d < 4; ++d) {
      lo = std::max(lo, ue[d] - 0.99 * hl[d]);
      hi = std::min(hi, ue[d] + 0.99 * hl[d]);
    }
    if (!rhs) {
      // homogeneous equation: the local update also obeys the discrete maximum
      // principle, which stays usable even when incompatible boundary data
      // leaves the light-cone window empty
      const double mn = std::min(std::min(ue[0], ue[1]), std::min(ue[2], ue[3]));
      const double mx = std::max(std::max(ue[0], ue[1]), std::max(ue[2], ue[3]));
      if (std::max(lo, mn) <= std::min(hi, mx)) {
        lo = std::max(lo, mn);
        hi = std::min(hi, mx);
      } else {
        lo = mn;
        hi = mx;
      }
    }
    if (lo < hi) unew = std::clamp(unew, lo, hi);
    g.nu[k] = unew;
    change = std::max(change, std::abs(unew - uP));
  }
  return change;
}

// Lagged-coefficient (secant modulus) relaxation for small-ball solves: the
// face flux denominators are frozen, the resulting linear problem is relaxed
// by Gauss-Seidel, and the coefficients are refreshed. Unlike the Newton
// sweeps this is monotone in the underlying energy, so it settles even from
// boundary data that is far outside the light cone of the current iterate.
bool kacanov_settle(PdeGrid& g, const std::vector<int>& nodes, double tol, double& last,
                    const std::vector<double>* rhs = nullptr) {
  static const long long off[4] = {1, -1, 0, 0};
  std::vector<std::array<double, 4>> q(nodes.size());
  last = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < 300; ++outer) {
    // freeze q_d = 1 / sqrt(face deficit), mirroring residual()
    for (size_t m = 0; m < nodes.size(); ++m) {
      const size_t k = nodes[m];
      const double uP = g.nu[k];
      double ue[4], hl[4], slope[4];
      for (int d = 0; d < 4; ++d) {
        ue[d] = g.arm_end_value(k, d);
        hl[d] = g.arm_len[k][d] * g.h;
        const double sgn = (d == 1 || d == 3) ? -1.0 : 1.0;
        slope[d] = sgn * (ue[d] - uP) / hl[d];
      }
      const double gxP = (ue[0] - ue[1]) / (hl[0] + hl[1]);
      const double gyP = (ue[2] - ue[3]) / (hl[2] + hl[3]);
      for (int d = 0; d < 4; ++d) {
        double tang;
        if (g.arm_cut[k][d] == 0) {
          const size_t kn = d < 2 ? k + off[d] : (d == 2 ? k + g.nx : k - g.nx);
          double gxn, gyn;
          g.gradient(kn, gxn, gyn);
          tang = d < 2 ? 0.5 * (gyP + gyn) : 0.5 * (gxP + gxn);
        } else {
          tang = d < 2 ? gyP : gxP;
        }
        const double def = std::max(1.0 - slope[d] * slope[d] - tang * tang, kDeficitFloor);
        q[m][d] = 1.0 / std::sqrt(def);
      }
    }
    // linear relaxation with the frozen coefficients
    double change = 0.0;
    for (int it = 0; it < 40; ++it) {
      double lin = 0.0;
      for (size_t m = 0; m < nodes.size(); ++m) {
        const size_t k = nodes[m];
        double num = 0.0, den = 0.0;
        for (int d = 0; d < 4; ++d) {
          const double hl = g.arm_len[k][d] * g.h;
          const double bar = d < 2 ? 0.5 * (g.arm_len[k][0] + g.arm_len[k][1]) * g.h
                                   : 0.5 * (g.arm_len[k][2] + g.arm_len[k][3]) * g.h;
          const double w = q[m][d] / (hl * bar);
          num += w * g.arm_end_value(k, d);
          den += w;
        }
        const double unew = (num - (rhs ? (*rhs)[k] : 0.0)) / den;
        lin = std::max(lin, std::abs(unew - g.nu[k]));
        change = std::max(change, std::abs(unew - g.nu[k]));
        g.nu[k] = unew;
      }
      if (lin < 0.1 * tol) break;
    }
    last = change;
    if (change < tol) return true;
  }
  return false;
}

constexpr int kFasSmooth = 3;

// one FAS (full approximation scheme) V-cycle over the aligned lattice stack;
// returns the max change seen on the finest level. trust[L] in [0, 1] fades
// the coarse correction to zero near holes the coarser lattice cannot
// resolve, where its equation is unreliable.
double fas_vcycle_impl(std::vector<PdeGrid*>& lv, const std::vector<std::vector<double>>& trust,
                       std::vector<std::vector<double>>& rhs, size_t L, double w) {
  PdeGrid& g = *lv[L];
  GradCache cache;
  const std::vector<double>* rp = rhs[L].empty() ? nullptr : &rhs[L];
  if (L + 1 == lv.size()) {
    // the lagged-coefficient solver stays stable on coarse lattices where the
    // cut cells are badly resolved and Newton steps run away
    double ch = 0.0;
    kacanov_settle(g, g.interior, 1e-13, ch, rp);
    return ch;
  }
  double change = 0.0;
  for (int it = 0; it < kFasSmooth; ++it) {
    fill_grad_cache(g, cache);
    change = std::max(change, gsn_pass(g, g.interior, w, &cache, rp));
  }

  PdeGrid& c = *lv[L + 1];
  fill_grad_cache(g, cache);
  for (int kc : c.interior) {
    const int I = kc / c.nx, J = kc % c.nx;
    const size_t kf = g.idx(2 * I, 2 * J);
    if (g.is_interior(kf)) c.nu[kc] = g.nu[kf];
  }
  const std::vector<double> u0 = c.nu;
  std::vector<double>& rc = rhs[L + 1];
  rc.assign(c.nu.size(), 0.0);
  for (int kc : c.interior) {
    const int I = kc / c.nx, J = kc % c.nx;
    const size_t kf = g.idx(2 * I, 2 * J);
    if (!g.is_interior(kf)) continue;
    auto fine_res = [&](size_t k) { return cached_residual(g, k, cache) - (rp ? (*rp)[k] : 0.0); };
    double rf = fine_res(kf);
    const size_t nb[4] = {kf + 1, kf - 1, kf + g.nx, kf - g.nx};
    bool full = true;
    for (size_t k : nb) full = full && g.is_interior(k);
    if (full) {
      // half weighting keeps the restricted residual smooth
      double acc = 0.0;
      for (size_t k : nb) acc += fine_res(k);
      rf = 0.5 * rf + 0.125 * acc;
    }
    rc[kc] = c.residual(kc, kDeficitFloor) - rf;
  }

  fas_vcycle_impl(lv, trust, rhs, L + 1, w);

  // bilinear prolongation of the coarse correction; it vanishes at coarse
  // boundary nodes, which the cycle never touches
  for (int k : g.interior) {
    const int i = k / g.nx, j = k % g.nx;
    const int I = i / 2, J = j / 2;
    auto e = [&](int a, int b) {
      const size_t kc = c.idx(a, b);
      return c.nu[kc] - u0[kc];
    };
    double corr;
    if (i % 2 == 0 && j % 2 == 0) {
      corr = e(I, J);
    } else if (i % 2 == 0) {
      corr = 0.5 * (e(I, J) + e(I, J + 1));
    } else if (j % 2 == 0) {
      corr = 0.5 * (e(I, J) + e(I + 1, J));
    } else {
      corr = 0.25 * (e(I, J) + e(I, J + 1) + e(I + 1, J) + e(I + 1, J + 1));
    }
    g.nu[k] += trust[L][k] * corr;
  }
  for (int it = 0; it < kFasSmooth; ++it) {
    fill_grad_cache(g, cache);
    change = std::max(change, gsn_pass(g, g.interior, w, &cache, rp));
  }
  return change;
}

double fas_vcycle(std::vector<PdeGrid*>& lv, const std::vector<std::vector<double>>& trust,
                  double w) {
  std::vector<std::vector<double>> rhs(lv.size());
  return fas_vcycle_impl(lv, trust, rhs, 0, w);
}

// correction-trust weights for each non-coarsest level: fade over a band of
// a few cells of the next-coarser lattice around every hole
std::vector<std::vector<double>> fas_trust(const std::vector<PdeGrid*>& lv,
                                           const PlanarDomain& dom) {
  constexpr double kBandCells = 3.0;
  std::vector<std::vector<double>> trust(lv.size());
  for (size_t L = 0; L + 1 < lv.size(); ++L) {
    const PdeGrid& g = *lv[L];
    const double band = kBandCells * lv[L + 1]->h;
    trust[L].assign(g.nu.size(), 0.0);
    for (int k : g.interior) {
      const int i = k / g.nx, j = k % g.nx;
      double dist = std::numeric_limits<double>::infinity();
      for (const Hole& hole : dom.holes) {
        dist = std::min(dist, hole.signed_distance(g.px(j), g.py(i)));
      }
      trust[L][k] = std::clamp(dist / band, 0.0, 1.0);
    }
  }
  return trust;
}

std::vector<int> ball_nodes(const PdeGrid& g, int ci, int cj, double radius) {
  std::vector<int> nodes;
  const int rad = static_cast<int>(std::ceil(radius));
  for (int i = ci - rad; i <= ci + rad; ++i) {
    for (int j = cj - rad; j <= cj + rad; ++j) {
      if (i < 0 || i >= g.ny || j < 0 || j >= g.nx) continue;
      const double d = std::hypot(double(i - ci), double(j - cj));
      if (d > radius) continue;
      nodes.push_back(static_cast<int>(g.idx(i, j)));
    }
  }
  return nodes;
}

}  // namespace

double solution_lift(PdeGrid& grid, int ci, int cj, double radius) {
  std::vector<int> nodes = ball_nodes(grid, ci, cj, radius);
  std::vector<int> inner;
  for (int k : nodes) {
    if (grid.state[k] == PdeGrid::NodeState::FarField) {
      throw InvalidArgument("ball reaches the far-field closure");
    }
    if (grid.is_interior(k)) inner.push_back(k);
  }
  if (inner.empty()) return 0.0;
  std::vector<double> before(inner.size());
  for (size_t m = 0; m < inner.size(); ++m) before[m] = grid.nu[inner[m]];

  double local = 0.0;
  if (!kacanov_settle(grid, inner, 1e-12, local) && local > 1e-6) {
    throw LocalSolveDiverged("ball solve failed to settle");
  }
  // monotone lifting: pointwise sup with the incoming subsolution
  double change = 0.0;
  for (size_t m = 0; m < inner.size(); ++m) {
    const int k = inner[m];
    grid.nu[k] = std::max(grid.nu[k], before[m]);
    change = std::max(change, grid.nu[k] - before[m]);
  }
  return change;
}

FarFieldFit far_field_fit(const PdeGrid& grid, const PlanarDomain& dom) {
  FarFieldFit fit;
  // ring sample just inside the truncation circle
  double s1 = 0, sr = 0, sl = 0, srr = 0, sll = 0, srl = 0;
  double sv = 0, svr = 0, svl = 0;
  int count = 0;
  for (int k : grid.interior) {
    const int i = k / grid.nx, j = k % grid.nx;
    const double rho = std::hypot(grid.px(j) - dom.trunc_cx, grid.py(i) - dom.trunc_cy);
    if (rho < 0.75 * dom.trunc_radius || rho > 0.97 * dom.trunc_radius) continue;
    const double br = 1.0 / rho, bl = std::log(rho), v = grid.nu[k];
    ++count;
    s1 += 1;
    sr += br;
    sl += bl;
    srr += br * br;
    sll += bl * bl;
    srl += br * bl;
    sv += v;
    svr += v * br;
    svl += v * bl;
  }
  if (count < 8) throw FitDegenerate("not enough ring samples for the far-field fit");
  {
    // two-parameter fit nu = t0 + c / rho
    const double det = s1 * srr - sr * sr;
    if (std::abs(det) < 1e-14 * (s1 * srr + 1.0)) throw FitDegenerate("singular far-field fit");
    fit.t0 = (srr * sv - sr * svr) / det;
    fit.c = (s1 * svr - sr * sv) / det;
  }
  {
    // three-parameter diagnostic fit nu = t0 + beta log rho + c / rho
    double m[3][3] = {{s1, sl, sr}, {sl, sll, srl}, {sr, srl, srr}};
    double rhs[3] = {sv, svl, svr};
    // Gaussian elimination
    bool ok = true;
    for (int c0 = 0; c0 < 3 && ok; ++c0) {
      int p = c0;
      for (int r2 = c0 + 1; r2 < 3; ++r2)
        if (std::abs(m[r2][c0]) > std::abs(m[p][c0])) p = r2;
      std::swap(m[c0], m[p]);
      std::swap(rhs[c0], rhs[p]);
      if (std::abs(m[c0][c0]) < 1e-14) {
        ok = false;
        break;
      }
      for (int r2 = c0 + 1; r2 < 3; ++r2) {
        const double f = m[r2][c0] / m[c0][c0];
        for (int cc = c0; cc < 3; ++cc) m[r2][cc] -= f * m[c0][cc];
        rhs[r2] -= f * rhs[c0];
      }
    }
    if (ok) {
      double sol[3];
      for (int r2 = 2; r2 >= 0; --r2) {
        double acc = rhs[r2];
        for (int cc = r2 + 1; cc < 3; ++cc) acc -= m[r2][cc] * sol[cc];
        sol[r2] = acc / m[r2][r2];
      }
      fit.beta = sol[1];
    }
  }
  return fit;
}

FarFieldFit far_field_condition(PdeGrid& grid, const PlanarDomain& dom, FarFieldMode mode) {
  FarFieldFit fit = far_field_fit(grid, dom);
  if (mode == FarFieldMode::Dirichlet) {
    fit.t0 = dom.far_value;  // closure kept fixed; fit reported for diagnostics
    return fit;
  }
  push_far_closure(grid, dom, fit.t0, fit.c);
  return fit;
}

void push_far_closure(PdeGrid& grid, const PlanarDomain& dom, double t0, double c) {
  // push the planar-end closure onto the far-field arms
  static const int di[4] = {0, 0, 1, -1};
  static const int dj[4] = {1, -1, 0, 0};
  for (int k : grid.interior) {
    const int i = k / grid.nx, j = k % grid.nx;
    for (int d = 0; d < 4; ++d) {
      if (grid.arm_cut[k][d] != 2) continue;
      const double ex = grid.px(j) + dj[d] * grid.arm_len[k][d] * grid.h;
      const double ey = grid.py(i) + di[d] * grid.arm_len[k][d] * grid.h;
      const double rho = std::hypot(ex - dom.trunc_cx, ey - dom.trunc_cy);
      grid.arm_val[k][d] = t0 + c / rho;
    }
  }
}

namespace {

// Outer iteration for the planar-end closure. The composite map
// (t0, c) -> push, solve interior, refit on the ring
// is nearly linear but has slope close to one (the ring mostly echoes the
// pushed data), so plain or damped refitting crawls. A finite-difference
// 2x2 Jacobian followed by Newton steps on fit(t0, c) = (t0, c) resolves the
// consistent closure in a handful of interior solves.
//
// push writes a closure onto the far arms; solve_to_tol relaxes the interior
// to the caller's tolerance and returns the last change. Returns true when
// both the closure and the interior settled.
bool settle_planar_closure(PdeGrid& grid, const PlanarDomain& dom, const SolveOptions& opt,
                           SolveResult& res, const std::function<void(double, double)>& push,
                           const std::function<double()>& solve_to_tol) {
  double x0, x1;
  {
    const FarFieldFit f0 = far_field_fit(grid, dom);
    x0 = f0.t0;
    x1 = f0.c;
  }
  FarFieldFit F;
  double change = 0.0;
  auto eval = [&](double t0, double c) {
    push(t0, c);
    change = solve_to_tol();
    F = far_field_fit(grid, dom);
    res.far.t0 = t0;
    res.far.c = c;
    res.far.beta = F.beta;
    if (std::getenv("MAXSURF_TRACE")) {
      std::fprintf(stderr, "[trace] sweep=%d change=%.3g push=(%.6g, %.6g) fit=(%.6g, %.6g)\n",
                   res.sweeps, change, t0, c, F.t0, F.c);
    }
  };

  eval(x0, x1);
  // response of the ring fit to each closure component
  const double d0 = 0.05;
  const double d1 = 0.05 * dom.trunc_radius;
  double j00, j01, j10, j11;
  {
    const FarFieldFit base = F;
    eval(x0 + d0, x1);
    j00 = (F.t0 - base.t0) / d0;
    j10 = (F.c - base.c) / d0;
    eval(x0, x1 + d1);
    j01 = (F.t0 - base.t0) / d1;
    j11 = (F.c - base.c) / d1;
    F = base;  // resume Newton from the base point fit
  }
  // Newton on G(x) = fit(x) - x, i.e. solve (J - I) d = -G
  const double a00 = j00 - 1.0, a01 = j01, a10 = j10, a11 = j11 - 1.0;
  const double det = a00 * a11 - a01 * a10;
  const bool newton_ok = std::abs(det) > 1e-10;
  for (int outer = 0; outer < 40 && res.sweeps < opt.max_sweeps; ++outer) {
    const double g0 = F.t0 - x0, g1 = F.c - x1;
    // the refit jitters at the level of the interior tolerance, so asking for
    // much more than that here only spins extra interior solves
    if (std::max(std::abs(g0), std::abs(g1) / dom.trunc_radius) < 1e-7 &&
        change < opt.tol_change) {
      return true;
    }
    if (newton_ok) {
      x0 -= (a11 * g0 - a01 * g1) / det;
      x1 -= (a00 * g1 - a10 * g0) / det;
    } else {
      x0 = F.t0;
      x1 = F.c;
    }
    eval(x0, x1);
  }
  return false;
}

}  // namespace

SolveResult perron_solve(PdeGrid& grid, const PlanarDomain& dom, const SubSuperPair& pair,
                         const SolveOptions& opt) {
  for (int k : grid.interior) grid.nu[k] = pair.sub[k];

  const int stride = std::max(1, static_cast<int>(std::lround(opt.ball_radius_cells)));
  struct Center {
    int i, j;
  };
  std::vector<Center> reds, blacks;
  for (int i = 0; i < grid.ny; i += stride) {
    for (int j = 0; j < grid.nx; j += stride) {
      (((i / stride + j / stride) % 2 == 0) ? reds : blacks).push_back({i, j});
    }
  }

  SolveResult res;
  int sweep = 0;
  auto ball_sweep = [&]() {
    double change = 0.0;
    for (const auto* batch : {&reds, &blacks}) {
      for (const Center& c : *batch) {
        std::vector<int> nodes = ball_nodes(grid, c.i, c.j, opt.ball_radius_cells);
        std::vector<int> inner;
        for (int k : nodes)
          if (grid.is_interior(k)) inner.push_back(k);
        if (inner.empty()) continue;
        std::vector<double> before(inner.size());
        for (size_t m = 0; m < inner.size(); ++m) before[m] = grid.nu[inner[m]];
        double last = 0.0;
        kacanov_settle(grid, inner, 1e-12, last);
        for (size_t m = 0; m < inner.size(); ++m) {
          const int k = inner[m];
          // Perron iterates stay between the barriers
          grid.nu[k] = std::clamp(grid.nu[k], pair.sub[k], pair.super[k]);
          change = std::max(change, std::abs(grid.nu[k] - before[m]));
        }
      }
    }
    ++sweep;
    res.sweeps = sweep;
    res.final_change = change;
    if (opt.record_history) res.history.push_back(change);
    return change;
  };

  if (dom.far_mode == FarFieldMode::PlanarRobin) {
    res.converged = settle_planar_closure(
        grid, dom, opt, res, [&](double t0, double c) { push_far_closure(grid, dom, t0, c); },
        [&]() {
          double change = ball_sweep();
          while (change > opt.tol_change && sweep < opt.max_sweeps) change = ball_sweep();
          return change;
        });
  } else {
    while (sweep < opt.max_sweeps) {
      if (ball_sweep() < opt.tol_change) {
        res.converged = true;
        break;
      }
    }
    res.far = far_field_condition(grid, dom, dom.far_mode);
  }
  res.max_residual = max_q_residual(grid);
  return res;
}

SolveResult relaxation_oracle(PdeGrid& grid, const PlanarDomain& dom, const SolveOptions& opt) {
  // start from the harmonic interpolant of the boundary data
  const double omega_lin = 2.0 / (1.0 + M_PI / std::max(grid.nx, grid.ny));
  for (int k : grid.interior) grid.nu[k] = 0.0;
  for (int it = 0; it < 50000; ++it) {
    double change = 0.0;
    for (int k : grid.interior) {
      double hl[4], ue[4];
      for (int d = 0; d < 4; ++d) {
        hl[d] = grid.arm_len[k][d] * grid.h;
        ue[d] = grid.arm_end_value(k, d);
      }
      const double diag = (1.0 / hl[0] + 1.0 / hl[1]) / (0.5 * (hl[0] + hl[1])) +
                          (1.0 / hl[2] + 1.0 / hl[3]) / (0.5 * (hl[2] + hl[3]));
      const double rhs = (ue[0] / hl[0] + ue[1] / hl[1]) / (0.5 * (hl[0] + hl[1])) +
                         (ue[2] / hl[2] + ue[3] / hl[3]) / (0.5 * (hl[2] + hl[3]));
      const double next = rhs / diag;
      const double step = omega_lin * (next - grid.nu[k]);
      grid.nu[k] += step;
      change = std::max(change, std::abs(step));
    }
    // rough interpolant only; the nonlinear sweeps do the real work
    if (change < 1e-5) break;
  }
  // the harmonic start may be too steep near the holes; pull it into the
  // spacelike cone before the nonlinear sweeps
  for (int pass = 0; pass < 200; ++pass) {
    bool steep = false;
    for (int k : grid.interior) {
      if (grid.deficit(k) < 0.02) {
        double acc = 0.0;
        for (int d = 0; d < 4; ++d) acc += grid.arm_end_value(k, d);
        grid.nu[k] = 0.75 * grid.nu[k] + 0.25 * (acc / 4.0);
        steep = true;
      }
    }
    if (!steep) break;
  }

  // aligned coarse lattices (same origin, doubled spacing) for the FAS
  // correction cycles; level 0 is the caller's grid
  std::vector<PdeGrid> coarse;
  std::vector<PdeGrid*> levels{&grid};
  {
    double h = grid.h;
    int nx = grid.nx, ny = grid.ny;
    const int max_levels =
        std::getenv("MAXSURF_LEVELS") ? std::atoi(std::getenv("MAXSURF_LEVELS")) : 99;
    while (static_cast<int>(coarse.size()) + 1 < max_levels && nx >= 65 && nx % 2 == 1 &&
           ny % 2 == 1) {
      h *= 2.0;
      nx = (nx + 1) / 2;
      ny = (ny + 1) / 2;
      coarse.push_back(build_grid_on(dom, grid.x0, grid.y0, nx, ny, h));
    }
    for (PdeGrid& c : coarse) levels.push_back(&c);
  }

  const std::vector<std::vector<double>> trust = fas_trust(levels, dom);

  SolveResult res;
  GradCache cache;
  const double w = std::min(opt.relax, 1.0);
  int sweep = 0;
  auto cycle = [&]() {
    double change;
    if (levels.size() > 1) {
      change = fas_vcycle(levels, trust, w);
      sweep += 2 * kFasSmooth;
    } else {
      fill_grad_cache(grid, cache);
      change = gsn_pass(grid, grid.interior, w, &cache);
      sweep += 1;
    }
    res.sweeps = sweep;
    res.final_change = change;
    if (opt.record_history) res.history.push_back(change);
    return change;
  };

  if (dom.far_mode == FarFieldMode::PlanarRobin) {
    res.converged = settle_planar_closure(
        grid, dom, opt, res,
        [&](double t0, double c) {
          push_far_closure(grid, dom, t0, c);
          for (PdeGrid& cg : coarse) push_far_closure(cg, dom, t0, c);
        },
        [&]() {
          double change = cycle();
          while (change > opt.tol_change && sweep < opt.max_sweeps) change = cycle();
          return change;
        });
  } else {
    while (sweep < opt.max_sweeps) {
      if (cycle() < opt.tol_change) {
        res.converged = true;
        break;
      }
    }
    res.far = far_field_condition(grid, dom, dom.far_mode);
  }
  res.max_residual = max_q_residual(grid);
  return res;
}

std::vector<ScanEntry> pde_slab_scan(const PdeGrid& grid, const std::vector<double>& heights,
                                     double tol_circle, double tol_line, int resample) {
  const auto field = grid.nu_as_field();
  std::vector<ScanEntry> out;
  for (double t : heights) {
    auto contours = extract_contours(field, grid.x0, grid.y0, grid.h, t);
    // prefer the longest closed contour away from the grid border
    const LevelCurve* best = nullptr;
    double best_len = 0.0;
    auto arc_len = [](const LevelCurve& c) {
      double L = 0;
      for (size_t k = 1; k < c.points.size(); ++k) {
        L += std::hypot(c.points[k].x - c.points[k - 1].x, c.points[k].y - c.points[k - 1].y);
      }
      return L;
    };
    const double border = 3.0 * grid.h;
    auto near_border = [&](const LevelCurve& c) {
      for (const auto& p : c.points) {
        if (p.x < grid.x0 + border || p.x > grid.x0 + (grid.nx - 1) * grid.h - border ||
            p.y < grid.y0 + border || p.y > grid.y0 + (grid.ny - 1) * grid.h - border) {
          return true;
        }
      }
      return false;
    };
    for (const auto& c : contours) {
      if (!c.closed || c.points.size() < 8 || near_border(c)) continue;
      const double L = arc_len(c);
      if (L > best_len) {
        best_len = L;
        best = &c;
      }
    }
    if (!best) {
      for (const auto& c : contours) {
        const double L = arc_len(c);
        if (c.points.size() >= 8 && L > best_len) {
          best_len = L;
          best = &c;
        }
      }
    }
    if (!best) throw TooFewPoints("no contour at the requested height");
    ScanEntry e;
    e.t = t;
    e.verdict = classify_curve(resample_curve(*best, resample), tol_circle, tol_line);
    out.push_back(e);
  }
  return out;
}

}  // namespace maxsurf
