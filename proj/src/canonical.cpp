#include "maxsurf/canonical.hpp"

#include <cmath>

namespace maxsurf {

namespace {

constexpr double kLattice = 1.0 / 1024.0;  // cache quantum in the strip chart

long long quantize(double x) { return llround(x / kLattice); }

Complex rhs_poly(double r, Complex g) { return g * (g * g + 2.0 * r * g + 1.0); }

}  // namespace

WeierstrassData make_catenoid(double scale, double R) {
  if (!(scale > 0.0)) throw InvalidArgument("scale must be positive");
  WeierstrassData w;
  w.domain = AnnulusDomain::annulus(R);
  w.g = [](Complex z) { return z; };
  w.dg = [](Complex) { return Complex(1.0, 0.0); };
  w.d2g = [](Complex) { return Complex(0.0, 0.0); };
  w.eta = [scale](Complex z) { return scale / (z * z); };
  // Base at z = 2 on the closed-form surface; any interior base works, this
  // one keeps the cone point at the origin.
  w.base_z = Complex(2.0, 0.0);
  w.base_X = LorentzVec{scale * 0.5 * (2.0 - 0.5), 0.0, scale * std::log(2.0)};
  return w;
}

double closed_form_catenoid_graph(double x, double y, double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("scale must be positive");
  return scale * std::asinh(std::sqrt(x * x + y * y) / scale);
}

RiemannGaussMap::RiemannGaussMap(const RiemannParameter& param, const Rect& rect)
    : param_(param), rect_(rect) {
  if (std::abs(rhs_poly(param.r, param.g0)) < 1e-10) {
    throw InvalidArgument("g0 sits on a root of g (g^2 + 2 r g + 1)");
  }
  State s;
  s.g = param.g0;
  s.p = static_cast<double>(param.branch) * std::sqrt(rhs_poly(param.r, param.g0));
  trunk_[0] = s;
}

RiemannGaussMap::State RiemannGaussMap::integrate(State s, Complex a, Complex b) const {
  const double len = std::abs(b - a);
  if (len == 0.0) return s;
  const Complex dir = (b - a) / len;
  const double r = param_.r;
  auto f = [&](const State& y) {
    return State{dir * y.p, dir * 0.5 * (3.0 * y.g * y.g + 4.0 * r * y.g + 1.0)};
  };
  // Dormand-Prince 5(4) with absolute/relative control.
  double t = 0.0, h = std::min(len, 1e-2);
  while (t < len) {
    if (h < 1e-12) throw StepUnderflow("adaptive step fell below 1e-12");
    h = std::min(h, len - t);
    const State& y = s;
    const State k1 = f(y);
    auto axpy = [&](std::initializer_list<std::pair<double, const State*>> terms) {
      State r2 = y;
      for (auto [c, k] : terms) {
        r2.g += h * c * k->g;
        r2.p += h * c * k->p;
      }
      return r2;
    };
    const State k2 = f(axpy({{1.0 / 5, &k1}}));
    const State k3 = f(axpy({{3.0 / 40, &k1}, {9.0 / 40, &k2}}));
    const State k4 = f(axpy({{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}}));
    const State k5 = f(axpy({{19372.0 / 6561, &k1},
                             {-25360.0 / 2187, &k2},
                             {64448.0 / 6561, &k3},
                             {-212.0 / 729, &k4}}));
    const State k6 = f(axpy({{9017.0 / 3168, &k1},
                             {-355.0 / 33, &k2},
                             {46732.0 / 5247, &k3},
                             {49.0 / 176, &k4},
                             {-5103.0 / 18656, &k5}}));
    State y5 = axpy({{35.0 / 384, &k1},
                     {500.0 / 1113, &k3},
                     {125.0 / 192, &k4},
                     {-2187.0 / 6784, &k5},
                     {11.0 / 84, &k6}});
    const State k7 = f(y5);
    State y4 = axpy({{5179.0 / 57600, &k1},
                     {7571.0 / 16695, &k3},
                     {393.0 / 640, &k4},
                     {-92097.0 / 339200, &k5},
                     {187.0 / 2100, &k6},
                     {1.0 / 40, &k7}});
    const double err = std::abs(y5.g - y4.g) + std::abs(y5.p - y4.p);
    const double tol = 1e-12 + 1e-12 * (std::abs(y5.g) + std::abs(y5.p));
    if (err <= tol) {
      t += h;
      s = y5;
      if (std::abs(rhs_poly(param_.r, s.g)) < 1e-10) {
        throw BranchCollision("path met a root of g (g^2 + 2 r g + 1)");
      }
    }
    const double factor = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
    h *= std::clamp(factor, 0.2, 4.0);
  }
  return s;
}

RiemannGaussMap::State RiemannGaussMap::continue_along(Complex from, Complex to) const {
  return integrate(evaluate(from), from, to);
}

RiemannGaussMap::State RiemannGaussMap::evaluate(Complex z) const {
  const long long xq = quantize(z.real());
  const double x_lat = xq * kLattice;

  // Trunk state at (x_lat, 0), continued from the nearest cached trunk point.
  auto tit = trunk_.find(xq);
  if (tit == trunk_.end()) {
    auto lo = trunk_.lower_bound(xq);
    long long src;
    if (lo == trunk_.end()) {
      src = std::prev(lo)->first;
    } else if (lo == trunk_.begin()) {
      src = lo->first;
    } else {
      const long long above = lo->first;
      const long long below = std::prev(lo)->first;
      src = (above - xq) < (xq - below) ? above : below;
    }
    const State s =
        integrate(trunk_[src], Complex(src * kLattice, 0.0), Complex(x_lat, 0.0));
    tit = trunk_.emplace(xq, s).first;
  }

  const long long yq = quantize(z.imag());
  if (yq == 0 && quantize(z.real()) == xq && z == Complex(x_lat, 0.0)) return tit->second;

  auto& col = columns_[xq];
  if (col.empty()) col.emplace(0, tit->second);
  auto cit = col.find(yq);
  if (cit == col.end()) {
    auto lo = col.lower_bound(yq);
    long long src;
    if (lo == col.end()) {
      src = std::prev(lo)->first;
    } else if (lo == col.begin()) {
      src = lo->first;
    } else {
      const long long above = lo->first;
      const long long below = std::prev(lo)->first;
      src = (above - yq) < (yq - below) ? above : below;
    }
    const State s = integrate(col[src], Complex(x_lat, src * kLattice),
                              Complex(x_lat, yq * kLattice));
    cit = col.emplace(yq, s).first;
  }
  // Final short hop from the lattice point to z.
  return integrate(cit->second, Complex(x_lat, yq * kLattice), z);
}

WeierstrassData make_riemann(const RiemannParameter& param, const Rect& rect) {
  auto map = std::make_shared<RiemannGaussMap>(param, rect);
  const double r = param.r;
  WeierstrassData w;
  w.domain = AnnulusDomain::rect(rect.x0, rect.x1, rect.y0, rect.y1);
  w.g = [map](Complex z) { return map->evaluate(z).g; };
  w.dg = [map](Complex z) { return map->evaluate(z).p; };
  w.d2g = [map, r](Complex z) {
    const Complex g = map->evaluate(z).g;
    return 0.5 * (3.0 * g * g + 4.0 * r * g + 1.0);
  };
  w.eta = [map](Complex z) { return 1.0 / map->evaluate(z).g; };
  w.base_z = Complex(0.0, 0.0);
  w.base_X = LorentzVec{0.0, 0.0, 0.0};
  return w;
}

}  // namespace maxsurf
