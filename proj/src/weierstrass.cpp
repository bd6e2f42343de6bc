#include "maxsurf/weierstrass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maxsurf {

namespace {

constexpr double kPunctureGuard = 1e-12;

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 8> kGlx = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlw = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

struct Omega3 {
  Complex w1, w2, w3;
  Omega3 operator+(const Omega3& o) const { return {w1 + o.w1, w2 + o.w2, w3 + o.w3}; }
  Omega3 operator-(const Omega3& o) const { return {w1 - o.w1, w2 - o.w2, w3 - o.w3}; }
  Omega3 operator*(Complex c) const { return {c * w1, c * w2, c * w3}; }
  double norm1() const { return std::abs(w1) + std::abs(w2) + std::abs(w3); }
};

Omega3 densities(const WeierstrassData& w, Complex z) {
  const Complex g = w.g(z);
  const Complex h = w.eta(z);
  const Complex g2 = g * g;
  return {0.5 * (1.0 + g2) * h, Complex(0.0, 0.5) * (1.0 - g2) * h, g * h};
}

// GL8 over the straight segment a -> b.
Omega3 gl8_segment(const WeierstrassData& w, Complex a, Complex b) {
  const Complex mid = 0.5 * (a + b);
  const Complex half = 0.5 * (b - a);
  Omega3 acc{0.0, 0.0, 0.0};
  for (int k = 0; k < 8; ++k) {
    acc = acc + densities(w, mid + kGlx[k] * half) * (kGlw[k] * half);
  }
  return acc;
}

Omega3 adaptive_segment(const WeierstrassData& w, Complex a, Complex b, int depth) {
  const Omega3 whole = gl8_segment(w, a, b);
  const Complex mid = 0.5 * (a + b);
  const Omega3 halves = gl8_segment(w, a, mid) + gl8_segment(w, mid, b);
  const double err = (whole - halves).norm1();
  if (halves.norm1() > 1e12) {
    throw QuadratureDivergence("segment integral exceeds 1e12");
  }
  if (err < 1e-13 + 1e-12 * halves.norm1() || depth >= 28) {
    return halves;
  }
  return adaptive_segment(w, a, mid, depth + 1) + adaptive_segment(w, mid, b, depth + 1);
}

void check_segment_guard(const WeierstrassData& w, Complex a, Complex b, double guard) {
  auto seg_dist = [&](Complex p) {
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    double t = ((p - a) * std::conj(ab)).real() / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
  };
  for (const Complex& p : w.domain.punctures) {
    if (seg_dist(p) < guard) throw PunctureEvaluation("integration path hits a puncture");
  }
  if (w.domain.end_puncture && seg_dist(*w.domain.end_puncture) < guard) {
    throw PunctureEvaluation("integration path hits the end puncture");
  }
}

double min_puncture_distance(const WeierstrassData& w, Complex z) {
  double d = std::numeric_limits<double>::infinity();
  for (const Complex& p : w.domain.punctures) d = std::min(d, std::abs(z - p));
  if (w.domain.end_puncture) d = std::min(d, std::abs(z - *w.domain.end_puncture));
  return d;
}

}  // namespace

AnnulusDomain AnnulusDomain::annulus(double R, std::vector<Complex> punctures,
                                     std::optional<Complex> end) {
  if (!(R > 1.0)) throw InvalidArgument("annulus requires R > 1");
  AnnulusDomain d;
  d.chart = HeightChart::LogRadial;
  d.R = R;
  for (const Complex& p : punctures) {
    const double m = std::abs(p);
    if (std::abs(m - R) > 1e-12 && std::abs(m - 1.0 / R) > 1e-12) {
      throw InvalidArgument("boundary puncture must sit on |z| = R or |z| = 1/R");
    }
  }
  d.punctures = std::move(punctures);
  if (end) {
    const double m = std::abs(*end);
    if (!(m > 1.0 / R && m < R)) throw InvalidArgument("end puncture must be strictly interior");
    d.end_puncture = end;
  }
  return d;
}

AnnulusDomain AnnulusDomain::rect(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0 && y1 > y0)) throw InvalidArgument("empty rectangle");
  AnnulusDomain d;
  d.chart = HeightChart::Linear;
  d.rx0 = x0;
  d.rx1 = x1;
  d.ry0 = y0;
  d.ry1 = y1;
  return d;
}

OmegaTriple omega_triple(const WeierstrassData& w, Complex z) {
  if (min_puncture_distance(w, z) < kPunctureGuard) {
    throw PunctureEvaluation("evaluation at a declared puncture");
  }
  const Omega3 d = densities(w, z);
  return {d.w1, d.w2, d.w3};
}

double metric_factor(const WeierstrassData& w, Complex z) {
  if (min_puncture_distance(w, z) < kPunctureGuard) {
    throw PunctureEvaluation("evaluation at a declared puncture");
  }
  const double m2 = std::norm(w.g(z));
  return 0.5 * std::abs(1.0 - m2) * std::abs(w.eta(z));
}

double gauss_curvature(const WeierstrassData& w, Complex z) {
  if (metric_factor(w, z) < 1e-12) {
    throw SingularPoint("curvature undefined where the metric degenerates");
  }
  const double m2 = std::norm(w.g(z));
  const double denom = std::abs(1.0 - m2) * std::abs(1.0 - m2) * std::abs(w.eta(z));
  const double root = 4.0 * std::abs(w.dg(z)) / denom;
  return root * root;
}

HyperbolicPoint gauss_map(const WeierstrassData& w, Complex z) {
  return stereographic(ExtComplex(w.g(z)));
}

Complex SurfaceGrid::chart_point(int i, int j) const {
  const double s = s_min + i * ds();
  const double t = t_min + j * dt();
  if (chart == HeightChart::LogRadial) return std::polar(std::exp(s), t);
  return Complex(s, t);
}

LorentzVec integrate_segment(const WeierstrassData& w, Complex a, Complex b,
                             const LorentzVec& X_a) {
  check_segment_guard(w, a, b, kPunctureGuard);
  const Omega3 v = adaptive_segment(w, a, b, 0);
  return {X_a.x1 + v.w1.real(), X_a.x2 + v.w2.real(), X_a.x3 + v.w3.real()};
}

SurfaceGrid integrate_immersion(const WeierstrassData& w, const GridSpec& spec) {
  if (spec.n_r < 8 || spec.n_theta < 8) throw InvalidArgument("grid resolution below 8x8");
  SurfaceGrid grid;
  grid.chart = w.domain.chart;
  grid.n_r = spec.n_r;
  grid.n_theta = spec.n_theta;
  grid.base_z = w.base_z;
  grid.base_X = w.base_X;
  if (grid.chart == HeightChart::LogRadial) {
    double r0 = spec.r_min, r1 = spec.r_max;
    if (r0 <= 0.0 || r1 <= 0.0) {
      r0 = 1.0 / w.domain.R;
      r1 = w.domain.R;
    }
    grid.s_min = std::log(r0);
    grid.s_max = std::log(r1);
    grid.t_min = 0.0;
    grid.t_max = 2.0 * M_PI;
    grid.periodic = true;
  } else {
    grid.s_min = w.domain.rx0;
    grid.s_max = w.domain.rx1;
    grid.t_min = w.domain.ry0;
    grid.t_max = w.domain.ry1;
    grid.periodic = false;
  }
  grid.nodes.assign(static_cast<size_t>(grid.n_r) * grid.n_theta, SurfaceNode{});

  // Puncture guard radius: two grid cells in chart units translated to |z|.
  const double cell = std::max(grid.ds(), grid.dt());
  auto guarded = [&](Complex z) {
    double scale = grid.chart == HeightChart::LogRadial ? std::abs(z) : 1.0;
    return min_puncture_distance(w, z) < 2.0 * cell * scale;
  };

  for (int i = 0; i < grid.n_r; ++i) {
    for (int j = 0; j < grid.n_theta; ++j) {
      SurfaceNode& n = grid.at(i, j);
      n.z = grid.chart_point(i, j);
      n.present = !guarded(n.z);
    }
  }

  // Anchor node: nearest grid node to the base point in chart coordinates.
  double bs, bt;
  if (grid.chart == HeightChart::LogRadial) {
    bs = std::log(std::abs(w.base_z));
    bt = std::arg(w.base_z);
    if (bt < 0.0) bt += 2.0 * M_PI;
  } else {
    bs = w.base_z.real();
    bt = w.base_z.imag();
  }
  int i0 = static_cast<int>(std::lround((bs - grid.s_min) / grid.ds()));
  int j0 = static_cast<int>(std::lround((bt - grid.t_min) / grid.dt()));
  i0 = std::clamp(i0, 0, grid.n_r - 1);
  j0 = std::clamp(j0, 0, grid.n_theta - 1);
  if (!grid.at(i0, j0).present) throw PunctureEvaluation("base point falls inside puncture guard");

  auto fill_node = [&](SurfaceNode& n, const LorentzVec& X) {
    n.X = X;
    n.g = w.g(n.z);
    const double m2 = std::norm(n.g);
    const double habs = std::abs(w.eta(n.z));
    n.lambda = 0.5 * std::abs(1.0 - m2) * habs;
    const double denom = std::abs(1.0 - m2) * std::abs(1.0 - m2) * habs;
    if (denom > 0.0) {
      const double root = 4.0 * std::abs(w.dg(n.z)) / denom;
      n.K = root * root;
    } else {
      n.K = std::numeric_limits<double>::infinity();
    }
  };

  fill_node(grid.at(i0, j0), integrate_segment(w, w.base_z, grid.at(i0, j0).z, w.base_X));

  std::vector<char> done(grid.nodes.size(), 0);
  done[static_cast<size_t>(i0) * grid.n_theta + j0] = 1;
  auto is_done = [&](int i, int j) { return done[static_cast<size_t>(i) * grid.n_theta + j] != 0; };
  auto advance = [&](int i_from, int j_from, int i_to, int j_to) {
    SurfaceNode& src = grid.at(i_from, j_from);
    SurfaceNode& dst = grid.at(i_to, j_to);
    if (!dst.present) return;
    try {
      fill_node(dst, integrate_segment(w, src.z, dst.z, src.X));
    } catch (const Error&) {
      // pole or unresolvable singularity on the segment: drop the node and let
      // the path tree route around it
      dst.present = false;
      return;
    }
    done[static_cast<size_t>(i_to) * grid.n_theta + j_to] = 1;
  };

  // Anchor ring first, then every radial column.
  for (int j = j0 + 1; j < grid.n_theta; ++j)
    if (is_done(i0, j - 1)) advance(i0, j - 1, i0, j);
  for (int j = j0 - 1; j >= 0; --j)
    if (is_done(i0, j + 1)) advance(i0, j + 1, i0, j);
  for (int j = 0; j < grid.n_theta; ++j) {
    if (!is_done(i0, j)) continue;
    for (int i = i0 + 1; i < grid.n_r; ++i)
      if (is_done(i - 1, j)) advance(i - 1, j, i, j);
    for (int i = i0 - 1; i >= 0; --i)
      if (is_done(i + 1, j)) advance(i + 1, j, i, j);
  }
  // mop-up passes: nodes orphaned by a dropped segment can still be reached
  // from another done neighbor
  for (int pass = 0; pass < 4; ++pass) {
    bool changed = false;
    for (int i = 0; i < grid.n_r; ++i) {
      for (int j = 0; j < grid.n_theta; ++j) {
        if (is_done(i, j) || !grid.at(i, j).present) continue;
        const int ni[4] = {i - 1, i + 1, i, i};
        const int nj[4] = {j, j, j - 1, j + 1};
        for (int d = 0; d < 4; ++d) {
          if (ni[d] < 0 || ni[d] >= grid.n_r || nj[d] < 0 || nj[d] >= grid.n_theta) continue;
          if (!is_done(ni[d], nj[d])) continue;
          advance(ni[d], nj[d], i, j);
          if (is_done(i, j)) {
            changed = true;
            break;
          }
        }
      }
    }
    if (!changed) break;
  }
  for (size_t k = 0; k < grid.nodes.size(); ++k) {
    if (!done[k]) grid.nodes[k].present = false;
  }
  return grid;
}

double PeriodCheck::max_abs_re() const {
  return std::max({std::abs(re1), std::abs(re2), std::abs(re3)});
}

PeriodCheck period_check(const WeierstrassData& w, double radius) {
  if (w.domain.chart == HeightChart::LogRadial) {
    if (!(radius > 1.0 / w.domain.R && radius < w.domain.R)) {
      throw InvalidArgument("loop radius outside the annulus");
    }
  }
  for (const Complex& p : w.domain.punctures) {
    if (std::abs(std::abs(p) - radius) < 1e-6) throw PunctureOnPath("loop passes a puncture");
  }
  if (w.domain.end_puncture &&
      std::abs(std::abs(*w.domain.end_puncture) - radius) < 1e-6) {
    throw PunctureOnPath("loop passes the end puncture");
  }

  // Loop integral in the angle parameter: dz = i z dtheta.
  auto loop_integrand = [&](double theta) {
    const Complex z = std::polar(radius, theta);
    const Omega3 d = densities(w, z);
    return d * (Complex(0.0, 1.0) * z);
  };
  const int base_segments = 16;
  Omega3 total{0.0, 0.0, 0.0};
  for (int s = 0; s < base_segments; ++s) {
    const double a = 2.0 * M_PI * s / base_segments;
    const double b = 2.0 * M_PI * (s + 1) / base_segments;
    // adaptive bisection on the parameter interval
    std::function<Omega3(double, double, int)> rec = [&](double lo, double hi,
                                                         int depth) -> Omega3 {
      auto gl = [&](double l, double h) {
        const double mid = 0.5 * (l + h), half = 0.5 * (h - l);
        Omega3 acc{0.0, 0.0, 0.0};
        for (int k = 0; k < 8; ++k)
          acc = acc + loop_integrand(mid + kGlx[k] * half) * Complex(kGlw[k] * half, 0.0);
        return acc;
      };
      const Omega3 whole = gl(lo, hi);
      const double mid = 0.5 * (lo + hi);
      const Omega3 halves = gl(lo, mid) + gl(mid, hi);
      if ((whole - halves).norm1() < 1e-14 + 1e-13 * halves.norm1() || depth >= 24) return halves;
      return rec(lo, mid, depth + 1) + rec(mid, hi, depth + 1);
    };
    total = total + rec(a, b, 0);
  }
  PeriodCheck out;
  out.re1 = total.w1.real();
  out.re2 = total.w2.real();
  out.re3 = total.w3.real();
  out.im3 = total.w3.imag();
  return out;
}

GraphResidual maximal_graph_residual(const std::vector<std::vector<double>>& zf, double h) {
  const int ny = static_cast<int>(zf.size());
  if (ny < 3) throw GridTooCoarse("graph field needs at least 3 rows");
  const int nx = static_cast<int>(zf[0].size());
  if (nx < 3) throw GridTooCoarse("graph field needs at least 3 columns");
  auto ok = [&](int i, int j) {
    return i >= 0 && i < ny && j >= 0 && j < nx && std::isfinite(zf[i][j]);
  };
  GraphResidual out;
  for (int i = 1; i + 1 < ny; ++i) {
    for (int j = 1; j + 1 < nx; ++j) {
      bool full = true;
      for (int di = -1; di <= 1 && full; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          if (!ok(i + di, j + dj)) {
            full = false;
            break;
          }
      if (!full) continue;
      const double zx = (zf[i][j + 1] - zf[i][j - 1]) / (2.0 * h);
      const double zy = (zf[i + 1][j] - zf[i - 1][j]) / (2.0 * h);
      const double zxx = (zf[i][j + 1] - 2.0 * zf[i][j] + zf[i][j - 1]) / (h * h);
      const double zyy = (zf[i + 1][j] - 2.0 * zf[i][j] + zf[i - 1][j]) / (h * h);
      const double zxy =
          (zf[i + 1][j + 1] - zf[i + 1][j - 1] - zf[i - 1][j + 1] + zf[i - 1][j - 1]) /
          (4.0 * h * h);
      const double grad2 = zx * zx + zy * zy;
      out.max_grad_sq = std::max(out.max_grad_sq, grad2);
      const double res =
          (1.0 - zy * zy) * zxx + 2.0 * zx * zy * zxy + (1.0 - zx * zx) * zyy;
      out.max_residual = std::max(out.max_residual, std::abs(res));
    }
  }
  if (out.max_grad_sq >= 1.0) {
    throw SpacelikeViolation("graph gradient reaches the light cone");
  }
  return out;
}

GraphResidual graph_residual(const SurfaceGrid& surface, int n_planar) {
  if (n_planar < 8) throw InvalidArgument("planar resolution below 8");
  // Collect quads with all four corners present and check orientation
  // consistency of the vertical projection.
  struct Quad {
    int i, j;
    double xlo, xhi, ylo, yhi;
  };
  std::vector<Quad> quads;
  double orient = 0.0;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  const int jmax = surface.periodic ? surface.n_theta : surface.n_theta - 1;
  for (int i = 0; i + 1 < surface.n_r; ++i) {
    for (int j = 0; j < jmax; ++j) {
      const int jn = (j + 1) % surface.n_theta;
      const SurfaceNode* c[4] = {&surface.at(i, j), &surface.at(i + 1, j),
                                 &surface.at(i + 1, jn), &surface.at(i, jn)};
      if (!(c[0]->present && c[1]->present && c[2]->present && c[3]->present)) continue;
      double area2 = 0.0;
      for (int k = 0; k < 4; ++k) {
        const auto& a = c[k]->X;
        const auto& b = c[(k + 1) % 4]->X;
        area2 += a.x1 * b.x2 - b.x1 * a.x2;
      }
      if (std::abs(area2) < 1e-300) continue;  // degenerate (cone circle)
      if (orient == 0.0) orient = area2 > 0 ? 1.0 : -1.0;
      if (area2 * orient < 0.0) throw NotAGraph("vertical projection folds");
      Quad q{i, j, 1e300, -1e300, 1e300, -1e300};
      for (auto* n : c) {
        q.xlo = std::min(q.xlo, n->X.x1);
        q.xhi = std::max(q.xhi, n->X.x1);
        q.ylo = std::min(q.ylo, n->X.x2);
        q.yhi = std::max(q.yhi, n->X.x2);
      }
      quads.push_back(q);
      xmin = std::min(xmin, q.xlo);
      xmax = std::max(xmax, q.xhi);
      ymin = std::min(ymin, q.ylo);
      ymax = std::max(ymax, q.yhi);
    }
  }
  if (quads.empty()) throw NotAGraph("no projectable quads");

  const double h = std::max(xmax - xmin, ymax - ymin) / (n_planar - 1);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> zf(n_planar, std::vector<double>(n_planar, nan));

  auto bilinear = [&](const Quad& q, double xi, double et, int comp) {
    const int jn = (q.j + 1) % surface.n_theta;
    const SurfaceNode* c[4] = {&surface.at(q.i, q.j), &surface.at(q.i + 1, q.j),
                               &surface.at(q.i + 1, jn), &surface.at(q.i, jn)};
    auto val = [&](int k) {
      return comp == 0 ? c[k]->X.x1 : (comp == 1 ? c[k]->X.x2 : c[k]->X.x3);
    };
    return (1 - xi) * (1 - et) * val(0) + xi * (1 - et) * val(1) + xi * et * val(2) +
           (1 - xi) * et * val(3);
  };

  for (const Quad& q : quads) {
    const int jlo = std::max(0, static_cast<int>(std::floor((q.xlo - xmin) / h)));
    const int jhi = std::min(n_planar - 1, static_cast<int>(std::ceil((q.xhi - xmin) / h)));
    const int ilo = std::max(0, static_cast<int>(std::floor((q.ylo - ymin) / h)));
    const int ihi = std::min(n_planar - 1, static_cast<int>(std::ceil((q.yhi - ymin) / h)));
    for (int pi = ilo; pi <= ihi; ++pi) {
      for (int pj = jlo; pj <= jhi; ++pj) {
        const double px = xmin + pj * h;
        const double py = ymin + pi * h;
        // Newton inversion of the bilinear map.
        double xi = 0.5, et = 0.5;
        bool conv = false;
        for (int it = 0; it < 30; ++it) {
          const double fx = bilinear(q, xi, et, 0) - px;
          const double fy = bilinear(q, xi, et, 1) - py;
          if (std::abs(fx) + std::abs(fy) < 1e-13 * (1.0 + std::abs(px) + std::abs(py))) {
            conv = true;
            break;
          }
          const double d = 1e-7;
          const double jxx = (bilinear(q, xi + d, et, 0) - bilinear(q, xi - d, et, 0)) / (2 * d);
          const double jxy = (bilinear(q, xi, et + d, 0) - bilinear(q, xi, et - d, 0)) / (2 * d);
          const double jyx = (bilinear(q, xi + d, et, 1) - bilinear(q, xi - d, et, 1)) / (2 * d);
          const double jyy = (bilinear(q, xi, et + d, 1) - bilinear(q, xi, et - d, 1)) / (2 * d);
          const double det = jxx * jyy - jxy * jyx;
          if (std::abs(det) < 1e-300) break;
          xi -= (jyy * fx - jxy * fy) / det;
          et -= (-jyx * fx + jxx * fy) / det;
          if (xi < -0.5 || xi > 1.5 || et < -0.5 || et > 1.5) break;
        }
        if (!conv || xi < -1e-9 || xi > 1.0 + 1e-9 || et < -1e-9 || et > 1.0 + 1e-9) continue;
        const double z = bilinear(q, xi, et, 2);
        if (std::isfinite(zf[pi][pj]) && std::abs(zf[pi][pj] - z) > 1e-9 * (1.0 + std::abs(z))) {
          throw NotAGraph("two sheets project to the same planar point");
        }
        zf[pi][pj] = z;
      }
    }
  }
  return maximal_graph_residual(zf, h);
}

std::vector<ConeFeature> detect_conelike(const SurfaceGrid& surface, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  const int nr = surface.n_r, nt = surface.n_theta;
  std::vector<int> comp(static_cast<size_t>(nr) * nt, -1);
  auto idx = [&](int i, int j) { return static_cast<size_t>(i) * nt + j; };
  auto in_set = [&](int i, int j) {
    const SurfaceNode& n = surface.at(i, j);
    return n.present && n.lambda < tol;
  };
  std::vector<ConeFeature> out;
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      if (!in_set(i, j) || comp[idx(i, j)] >= 0) continue;
      // flood fill
      std::vector<std::pair<int, int>> stack{{i, j}}, members;
      comp[idx(i, j)] = static_cast<int>(out.size());
      bool below = false, above = false;
      while (!stack.empty()) {
        auto [ci, cj] = stack.back();
        stack.pop_back();
        members.emplace_back(ci, cj);
        const double m = std::abs(surface.at(ci, cj).g);
        // |g| crossing is checked against the nodes adjacent to the set
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          int ni = ci + di[k], nj = cj + dj[k];
          if (surface.periodic) nj = (nj + nt) % nt;
          if (ni < 0 || ni >= nr || nj < 0 || nj >= nt) continue;
          const SurfaceNode& nb = surface.at(ni, nj);
          if (!nb.present) continue;
          if (std::abs(nb.g) < 1.0) below = true;
          if (std::abs(nb.g) > 1.0) above = true;
          if (in_set(ni, nj) && comp[idx(ni, nj)] < 0) {
            comp[idx(ni, nj)] = static_cast<int>(out.size());
            stack.emplace_back(ni, nj);
          }
        }
        if (m < 1.0) below = true;
        if (m > 1.0) above = true;
      }
      if (!(below && above)) continue;  // metric small but no |g| = 1 crossing
      ConeFeature f;
      f.node_count = static_cast<int>(members.size());
      LorentzVec sum{0, 0, 0};
      double zsum = 0.0;
      for (auto [ci, cj] : members) {
        sum = sum + surface.at(ci, cj).X;
        zsum += std::abs(surface.at(ci, cj).z);
      }
      f.P0 = sum * (1.0 / f.node_count);
      f.mean_abs_z = zsum / f.node_count;
      // max pairwise distance; subsample very large sets
      const size_t cap = 1500;
      const size_t stride = members.size() > cap ? members.size() / cap + 1 : 1;
      for (size_t a = 0; a < members.size(); a += stride) {
        for (size_t b = a + stride; b < members.size(); b += stride) {
          const LorentzVec d = surface.at(members[a].first, members[a].second).X -
                               surface.at(members[b].first, members[b].second).X;
          f.spread = std::max(f.spread, d.euclidean_norm());
        }
      }
      out.push_back(f);
    }
  }
  return out;
}

WeierstrassData mirror_reflect(const WeierstrassData& w) {
  if (w.domain.chart != HeightChart::LogRadial) {
    throw InvalidArgument("mirror reflection needs the annulus chart");
  }
  for (int k = 0; k < 64; ++k) {
    const Complex z = std::polar(1.0, 2.0 * M_PI * k / 64.0);
    if (std::abs(std::abs(w.g(z)) - 1.0) > 1e-9) {
      throw NotAConeCircle("|g| deviates from 1 on the unit circle");
    }
  }
  // Cone point: the whole circle |z| = 1 maps to a single point; integrate to
  // one representative.
  const LorentzVec P0 = integrate_segment(w, w.base_z, Complex(1.0, 0.0), w.base_X);

  auto g = w.g, dg = w.dg, d2g = w.d2g, eta = w.eta;
  auto G = [g](Complex zeta) { return std::conj(g(1.0 / std::conj(zeta))); };
  auto Gp = [dg](Complex zeta) {
    return -std::conj(dg(1.0 / std::conj(zeta))) / (zeta * zeta);
  };

  WeierstrassData m;
  m.domain = w.domain;
  std::vector<Complex> mirrored;
  for (const Complex& p : w.domain.punctures) mirrored.push_back(1.0 / std::conj(p));
  m.domain.punctures = mirrored;
  if (w.domain.end_puncture) m.domain.end_puncture = 1.0 / std::conj(*w.domain.end_puncture);
  m.g = [G](Complex zeta) { return 1.0 / G(zeta); };
  m.dg = [G, Gp](Complex zeta) {
    const Complex gv = G(zeta);
    return -Gp(zeta) / (gv * gv);
  };
  if (d2g) {
    m.d2g = [g = w.g, dg, d2g](Complex zeta) {
      const Complex u = 1.0 / std::conj(zeta);
      const Complex Gv = std::conj(g(u));
      const Complex Gpv = -std::conj(dg(u)) / (zeta * zeta);
      const Complex Gpp = std::conj(d2g(u)) / (zeta * zeta * zeta * zeta) +
                          2.0 * std::conj(dg(u)) / (zeta * zeta * zeta);
      return (2.0 * Gpv * Gpv - Gv * Gpp) / (Gv * Gv * Gv);
    };
  }
  m.eta = [G, eta](Complex zeta) {
    const Complex u = 1.0 / std::conj(zeta);
    const Complex gv = G(zeta);
    return gv * gv * std::conj(eta(u)) / (zeta * zeta);
  };
  m.base_z = 1.0 / std::conj(w.base_z);
  m.base_X = -w.base_X + 2.0 * P0;
  return m;
}

EndFit fit_end_asymptotics(const SurfaceGrid& surface, const ExtComplex& puncture,
                           double ring_cutoff) {
  // Local puncture coordinate.
  auto local = [&](Complex z) {
    if (puncture.is_inf) return 1.0 / z;
    return z - puncture.z;
  };
  if (ring_cutoff <= 0.0) {
    double rmax = 0.0;
    for (const auto& n : surface.nodes)
      if (n.present) rmax = std::max(rmax, std::abs(local(n.z)));
    ring_cutoff = 0.1 * rmax;
  }
  // Group by radial index; a ring qualifies if all its present nodes are
  // inside the cutoff.
  std::vector<int> rings;
  for (int i = 0; i < surface.n_r; ++i) {
    bool any = false, inside = true;
    for (int j = 0; j < surface.n_theta; ++j) {
      const SurfaceNode& n = surface.at(i, j);
      if (!n.present) continue;
      any = true;
      if (std::abs(local(n.z)) > ring_cutoff) inside = false;
    }
    if (any && inside) rings.push_back(i);
  }
  if (rings.size() < 3) throw InsufficientRings("need at least 3 rings near the puncture");

  // Vertical fit x3 = t0 + beta log rho.
  double sw = 0, sl = 0, sll = 0, sx = 0, slx = 0;
  for (int i : rings) {
    for (int j = 0; j < surface.n_theta; ++j) {
      const SurfaceNode& n = surface.at(i, j);
      if (!n.present) continue;
      const double l = std::log(std::abs(local(n.z)));
      sw += 1;
      sl += l;
      sll += l * l;
      sx += n.X.x3;
      slx += l * n.X.x3;
    }
  }
  const double det = sw * sll - sl * sl;
  if (std::abs(det) < 1e-14 * (sw * sll + 1.0)) throw FitDegenerate("collinear ring radii");
  EndFit fit;
  fit.beta = (sw * slx - sl * sx) / det;
  fit.t0 = (sll * sx - sl * slx) / det;

  // Horizontal fit: complex amplitude for both angular orientations.
  Complex a_pos{0, 0}, a_neg{0, 0};
  int count = 0;
  for (int i : rings) {
    for (int j = 0; j < surface.n_theta; ++j) {
      const SurfaceNode& n = surface.at(i, j);
      if (!n.present) continue;
      const Complex zeta = local(n.z);
      const Complex horiz(n.X.x1, n.X.x2);
      const double rho = std::abs(zeta);
      const Complex e = zeta / rho;  // e^{i phi}
      a_pos += horiz * rho / e;
      a_neg += horiz * rho * e;
      ++count;
    }
  }
  a_pos /= static_cast<double>(count);
  a_neg /= static_cast<double>(count);
  double res_pos = 0, res_neg = 0, scale = 0;
  for (int i : rings) {
    for (int j = 0; j < surface.n_theta; ++j) {
      const SurfaceNode& n = surface.at(i, j);
      if (!n.present) continue;
      const Complex zeta = local(n.z);
      const Complex horiz(n.X.x1, n.X.x2);
      const double rho = std::abs(zeta);
      const Complex e = zeta / rho;
      res_pos += std::norm(horiz - a_pos * e / rho);
      res_neg += std::norm(horiz - a_neg / (e * rho));
      scale += std::norm(horiz);
    }
  }
  const bool pos = res_pos <= res_neg;
  const Complex a = pos ? a_pos : a_neg;
  fit.orientation = pos ? +1 : -1;
  fit.alpha = std::abs(a);
  fit.residual = std::sqrt((pos ? res_pos : res_neg) / std::max(scale, 1e-300));
  fit.planar = std::abs(fit.beta) < 1e-3 * std::abs(fit.alpha);
  return fit;
}

}  // namespace maxsurf
