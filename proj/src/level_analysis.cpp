#include "maxsurf/level_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace maxsurf {

std::string to_string(CurveKind k) {
  switch (k) {
    case CurveKind::Circle: return "Circle";
    case CurveKind::StraightLine: return "StraightLine";
    case CurveKind::ConvexJordan: return "ConvexJordan";
    case CurveKind::NonConvex: return "NonConvex";
    case CurveKind::ConePoint: return "ConePoint";
  }
  return "?";
}

LevelCurve extract_level(const SurfaceGrid& surface, double t) {
  if (!(t > -1.0 && t < 1.0)) throw OutOfSlab("height outside the open slab (-1, 1)");
  LevelCurve curve;
  curve.t = t;
  curve.source = "surface-ring";
  double s_target;
  if (surface.chart == HeightChart::LogRadial) {
    // level ring |z| = R^t with log R the outer chart radius
    s_target = t * surface.s_max;
  } else {
    s_target = t;  // X3 = Re z
  }
  if (s_target < surface.s_min - 1e-12 || s_target > surface.s_max + 1e-12) {
    throw OutOfSlab("level ring outside the sampled grid");
  }
  const double fs = (s_target - surface.s_min) / surface.ds();
  const int i0 = std::clamp(static_cast<int>(std::floor(fs)), 0, surface.n_r - 2);
  auto interpolate_rows = [&](int ilo, int ihi) {
    std::vector<PlanarPoint> pts;
    const double a = std::clamp((fs - ilo) / (ihi - ilo), 0.0, 1.0);
    for (int j = 0; j < surface.n_theta; ++j) {
      const SurfaceNode& lo = surface.at(ilo, j);
      const SurfaceNode& hi = surface.at(ihi, j);
      if (!(lo.present && hi.present)) continue;
      pts.push_back({(1.0 - a) * lo.X.x1 + a * hi.X.x1,
                     (1.0 - a) * lo.X.x2 + a * hi.X.x2});
    }
    return pts;
  };
  curve.points = interpolate_rows(i0, i0 + 1);
  if (curve.points.empty()) {
    // a fully absent row (e.g. a guarded puncture ring): widen the bracket one
    // row on each side
    const int ilo = std::max(i0 - 1, 0);
    const int ihi = std::min(i0 + 2, surface.n_r - 1);
    curve.points = interpolate_rows(ilo, ihi);
  }
  curve.closed = surface.periodic;
  // drop consecutive duplicates (degenerate cone rings keep one point apart)
  std::vector<PlanarPoint> cleaned;
  for (const auto& p : curve.points) {
    if (cleaned.empty() || std::hypot(p.x - cleaned.back().x, p.y - cleaned.back().y) >= 1e-15) {
      cleaned.push_back(p);
    }
  }
  curve.points = std::move(cleaned);
  return curve;
}

namespace {

double curve_diameter(const std::vector<PlanarPoint>& pts) {
  const size_t stride = pts.size() > 1024 ? pts.size() / 1024 + 1 : 1;
  double d = 0.0;
  for (size_t a = 0; a < pts.size(); a += stride)
    for (size_t b = a + stride; b < pts.size(); b += stride)
      d = std::max(d, std::hypot(pts[a].x - pts[b].x, pts[a].y - pts[b].y));
  return d;
}

}  // namespace

CurveVerdict classify_curve(const LevelCurve& c, double tol_circle, double tol_line) {
  const auto& pts = c.points;
  const int n = static_cast<int>(pts.size());
  if (n < 1) throw TooFewPoints("cannot classify an empty curve");

  const double diameter = curve_diameter(pts);
  CurveVerdict v;
  // collapsed levels (duplicate removal may leave very few points) are cone
  // points and need no fit
  if (n < 16 && diameter >= tol_circle) {
    throw TooFewPoints("need at least 16 points to classify");
  }
  if (tol_line <= 0.0) tol_line = 1e-3 * diameter;

  if (diameter < tol_circle) {
    v.kind = CurveKind::ConePoint;
    double cx = 0, cy = 0;
    for (const auto& p : pts) {
      cx += p.x;
      cy += p.y;
    }
    v.location = {cx / n, cy / n};
    v.spread = diameter;
    return v;
  }

  // Kasa algebraic circle fit: x^2 + y^2 + D x + E y + F = 0.
  {
    double sxx = 0, sxy = 0, syy = 0, sx = 0, sy = 0, sxz = 0, syz = 0, sz = 0;
    for (const auto& p : pts) {
      const double z = p.x * p.x + p.y * p.y;
      sxx += p.x * p.x;
      sxy += p.x * p.y;
      syy += p.y * p.y;
      sx += p.x;
      sy += p.y;
      sxz += p.x * z;
      syz += p.y * z;
      sz += z;
    }
    const double m[3][3] = {{sxx, sxy, sx}, {sxy, syy, sy}, {sx, sy, double(n)}};
    const double rhs[3] = {-sxz, -syz, -sz};
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (std::abs(det) > 1e-30) {
      auto solve3 = [&](int col) {
        double a[3][3];
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) a[i][j] = (j == col) ? rhs[i] : m[i][j];
        return (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])) /
               det;
      };
      const double D = solve3(0), E = solve3(1), F = solve3(2);
      const double cx = -D / 2.0, cy = -E / 2.0;
      const double r2 = cx * cx + cy * cy - F;
      if (r2 > 0.0) {
        const double radius = std::sqrt(r2);
        double ss = 0.0;
        for (const auto& p : pts) {
          const double d = std::hypot(p.x - cx, p.y - cy) - radius;
          ss += d * d;
        }
        const double rel = std::sqrt(ss / n) / radius;
        if (rel < tol_circle) {
          v.kind = CurveKind::Circle;
          v.center = {cx, cy};
          v.radius = radius;
          v.residual = rel;
          return v;
        }
      }
    }
  }

  // Total-least-squares line via the covariance eigenvector.
  {
    double mx = 0, my = 0;
    for (const auto& p : pts) {
      mx += p.x;
      my += p.y;
    }
    mx /= n;
    my /= n;
    double cxx = 0, cxy = 0, cyy = 0;
    for (const auto& p : pts) {
      cxx += (p.x - mx) * (p.x - mx);
      cxy += (p.x - mx) * (p.y - my);
      cyy += (p.y - my) * (p.y - my);
    }
    const double tr = cxx + cyy, dd = std::sqrt((cxx - cyy) * (cxx - cyy) + 4 * cxy * cxy);
    const double lmin = 0.5 * (tr - dd);
    const double rms = std::sqrt(std::max(lmin, 0.0) / n);
    if (rms < tol_line) {
      v.kind = CurveKind::StraightLine;
      const double lmax = 0.5 * (tr + dd);
      double dx, dy;
      if (std::abs(cxy) > 1e-300) {
        dx = lmax - cyy;
        dy = cxy;
      } else {
        dx = cxx >= cyy ? 1.0 : 0.0;
        dy = cxx >= cyy ? 0.0 : 1.0;
      }
      const double nn = std::hypot(dx, dy);
      v.direction = {dx / nn, dy / nn};
      v.residual = rms;
      return v;
    }
  }

  // Convexity: unanimous edge-cross signs and total turning of +-2pi.
  {
    double turning = 0.0;
    int sign_changes = 0;
    int last_sign = 0;
    const int m = c.closed ? n : n - 2;
    for (int k = 0; k < m; ++k) {
      const auto& p0 = pts[k % n];
      const auto& p1 = pts[(k + 1) % n];
      const auto& p2 = pts[(k + 2) % n];
      const double e1x = p1.x - p0.x, e1y = p1.y - p0.y;
      const double e2x = p2.x - p1.x, e2y = p2.y - p1.y;
      const double cross = e1x * e2y - e1y * e2x;
      const double dot = e1x * e2x + e1y * e2y;
      turning += std::atan2(cross, dot);
      const double scale = std::hypot(e1x, e1y) * std::hypot(e2x, e2y);
      if (std::abs(cross) <= 1e-9 * scale) continue;  // collinear, no evidence
      const int s = cross > 0 ? 1 : -1;
      if (last_sign != 0 && s != last_sign) ++sign_changes;
      last_sign = s;
    }
    if (c.closed && sign_changes == 0 && std::abs(std::abs(turning) - 2.0 * M_PI) < 0.1) {
      v.kind = CurveKind::ConvexJordan;
      v.turning = turning;
      return v;
    }
    v.kind = CurveKind::NonConvex;
    v.defect_count = sign_changes;
    v.turning = turning;
    return v;
  }
}

std::vector<ScanEntry> slab_scan(const SurfaceGrid& surface, const std::vector<double>& heights,
                                 double tol_circle, double tol_line) {
  std::vector<ScanEntry> out;
  for (double t : heights) {
    ScanEntry e;
    e.t = t;
    e.verdict = classify_curve(extract_level(surface, t), tol_circle, tol_line);
    out.push_back(e);
  }
  return out;
}

namespace {

// Edge keys for exact segment chaining: horizontal edge (i, j)-(i, j+1) and
// vertical edge (i, j)-(i+1, j).
long long hkey(int i, int j, int nx) { return (static_cast<long long>(i) * nx + j) * 2; }
long long vkey(int i, int j, int nx) { return (static_cast<long long>(i) * nx + j) * 2 + 1; }

}  // namespace

std::vector<LevelCurve> extract_contours(const std::vector<std::vector<double>>& field,
                                         double x0, double y0, double h, double level) {
  const int ny = static_cast<int>(field.size());
  const int nx = ny > 0 ? static_cast<int>(field[0].size()) : 0;
  auto val = [&](int i, int j) { return field[i][j]; };
  auto finite = [&](int i, int j) { return std::isfinite(val(i, j)); };
  auto crossing = [&](double a, double b) { return (a < level) != (b < level); };
  auto interp = [&](double a, double b) { return (level - a) / (b - a); };

  std::map<long long, PlanarPoint> points;
  std::multimap<long long, long long> links;

  auto hpoint = [&](int i, int j) {
    const double f = interp(val(i, j), val(i, j + 1));
    return PlanarPoint{x0 + (j + f) * h, y0 + i * h};
  };
  auto vpoint = [&](int i, int j) {
    const double f = interp(val(i, j), val(i + 1, j));
    return PlanarPoint{x0 + j * h, y0 + (i + f) * h};
  };
  auto add_seg = [&](long long a, PlanarPoint pa, long long b, PlanarPoint pb) {
    points[a] = pa;
    points[b] = pb;
    links.emplace(a, b);
    links.emplace(b, a);
  };

  for (int i = 0; i + 1 < ny; ++i) {
    for (int j = 0; j + 1 < nx; ++j) {
      if (!(finite(i, j) && finite(i, j + 1) && finite(i + 1, j) && finite(i + 1, j + 1))) {
        continue;
      }
      struct Cross {
        long long key;
        PlanarPoint p;
      };
      std::vector<Cross> cr;
      if (crossing(val(i, j), val(i, j + 1))) cr.push_back({hkey(i, j, nx), hpoint(i, j)});
      if (crossing(val(i + 1, j), val(i + 1, j + 1)))
        cr.push_back({hkey(i + 1, j, nx), hpoint(i + 1, j)});
      if (crossing(val(i, j), val(i + 1, j))) cr.push_back({vkey(i, j, nx), vpoint(i, j)});
      if (crossing(val(i, j + 1), val(i + 1, j + 1)))
        cr.push_back({vkey(i, j + 1, nx), vpoint(i, j + 1)});
      if (cr.size() == 2) {
        add_seg(cr[0].key, cr[0].p, cr[1].key, cr[1].p);
      } else if (cr.size() == 4) {
        // saddle: resolve with the cell-center value
        const double center =
            0.25 * (val(i, j) + val(i, j + 1) + val(i + 1, j) + val(i + 1, j + 1));
        // cr order: bottom, top, left, right
        const bool corner_low = val(i, j) < level;
        const bool center_low = center < level;
        if (corner_low == center_low) {
          add_seg(cr[0].key, cr[0].p, cr[3].key, cr[3].p);  // bottom-right
          add_seg(cr[1].key, cr[1].p, cr[2].key, cr[2].p);  // top-left
        } else {
          add_seg(cr[0].key, cr[0].p, cr[2].key, cr[2].p);  // bottom-left
          add_seg(cr[1].key, cr[1].p, cr[3].key, cr[3].p);  // top-right
        }
      }
    }
  }

  std::vector<LevelCurve> curves;
  std::map<long long, int> degree;
  for (const auto& [a, b] : links) degree[a]++;
  std::map<std::pair<long long, long long>, bool> used;
  auto next_unused = [&](long long from) -> long long {
    auto [lo, hi] = links.equal_range(from);
    for (auto it = lo; it != hi; ++it) {
      auto e = std::minmax(from, it->second);
      if (!used[{e.first, e.second}]) return it->second;
    }
    return -1;
  };
  auto walk = [&](long long start) {
    LevelCurve c;
    c.t = level;
    c.source = "marching-squares";
    long long cur = start;
    c.points.push_back(points[cur]);
    while (true) {
      const long long nxt = next_unused(cur);
      if (nxt < 0) break;
      auto e = std::minmax(cur, nxt);
      used[{e.first, e.second}] = true;
      cur = nxt;
      if (cur == start) {
        c.closed = true;
        break;
      }
      c.points.push_back(points[cur]);
    }
    return c;
  };
  // open chains first (start at odd-degree endpoints), then loops
  for (const auto& [key, deg] : degree) {
    if (deg == 1 && next_unused(key) >= 0) {
      LevelCurve c = walk(key);
      if (c.points.size() >= 2) curves.push_back(std::move(c));
    }
  }
  for (const auto& [key, deg] : degree) {
    if (next_unused(key) >= 0) {
      LevelCurve c = walk(key);
      if (c.points.size() >= 2) curves.push_back(std::move(c));
    }
  }
  return curves;
}

LevelCurve resample_curve(const LevelCurve& c, int n) {
  LevelCurve out;
  out.t = c.t;
  out.closed = c.closed;
  out.source = c.source;
  const auto& p = c.points;
  const int m = static_cast<int>(p.size());
  if (m < 2 || n < 2) {
    out.points = p;
    return out;
  }
  std::vector<double> cum(1, 0.0);
  const int edges = c.closed ? m : m - 1;
  for (int k = 0; k < edges; ++k) {
    const auto& a = p[k];
    const auto& b = p[(k + 1) % m];
    cum.push_back(cum.back() + std::hypot(b.x - a.x, b.y - a.y));
  }
  const double total = cum.back();
  if (total <= 0.0) {
    out.points = p;
    return out;
  }
  const int samples = c.closed ? n : n;
  for (int k = 0; k < samples; ++k) {
    const double s = c.closed ? total * k / samples : total * k / (samples - 1);
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    int e = std::clamp(static_cast<int>(it - cum.begin()) - 1, 0, edges - 1);
    const double seg = cum[e + 1] - cum[e];
    const double f = seg > 0 ? (s - cum[e]) / seg : 0.0;
    const auto& a = p[e];
    const auto& b = p[(e + 1) % m];
    out.points.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
  }
  return out;
}

}  // namespace maxsurf
