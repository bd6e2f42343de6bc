#pragma once

#include <map>
#include <memory>

#include "maxsurf/weierstrass.hpp"

namespace maxsurf {

/// Parameters of the Gauss-map equation (g')^2 = g (g^2 + 2 r g + 1).
struct RiemannParameter {
  double r = 1.5;
  Complex g0{1.0, 0.0};
  int branch = +1;  // sign of the initial square root
};

struct Rect {
  double x0, x1, y0, y1;
};

/// Lorentzian catenoid data: g(z) = z, h(z) = scale / z^2 on the annulus
/// 1/R <= |z| <= R. The integrated surface is the rotational catenoid with a
/// cone point on the unit circle.
WeierstrassData make_catenoid(double scale, double R);

/// Circle-foliated example in the strip chart: the Gauss map solves
/// (g')^2 = g (g^2 + 2 r g + 1) continued from (z0 = 0, g0), h = 1/g, so
/// X3 = Re z. Evaluation integrates the equivalent first-order system
/// (g, p)' = (p, (3 g^2 + 4 r g + 1)/2) along a deterministic path tree with
/// cached states.
WeierstrassData make_riemann(const RiemannParameter& param, const Rect& rect);

/// s * arcsinh(sqrt(x^2 + y^2) / s): the catenoid graph over the plane and an
/// exact solution of the maximal graph equation.
double closed_form_catenoid_graph(double x, double y, double scale);

/// Holomorphic continuation state of the Riemann Gauss map; exposed so tests
/// can probe path independence directly.
class RiemannGaussMap {
 public:
  RiemannGaussMap(const RiemannParameter& param, const Rect& rect);

  struct State {
    Complex g, p;  // p = dg/dz
  };

  State evaluate(Complex z) const;

  /// Continuation along an explicit straight path from the cached start
  /// nearest to `from`; bypasses the column cache (used for path-independence
  /// checks).
  State continue_along(Complex from, Complex to) const;

 private:
  State integrate(State s, Complex a, Complex b) const;

  RiemannParameter param_;
  Rect rect_;
  // trunk along the real axis and per-column vertical caches
  mutable std::map<long long, State> trunk_;
  mutable std::map<long long, std::map<long long, State>> columns_;
};

}  // namespace maxsurf
