#pragma once

#include <cstdint>
#include <vector>

#include "maxsurf/weierstrass.hpp"

namespace maxsurf {

/// Chart-uniform sampling window for Shiffman diagnostics. Coordinates are in
/// the conformal chart (log r, theta) for the annulus, (x, y) for the strip.
struct ShiffmanGridSpec {
  int n_s = 0, n_t = 0;
  double s_min = 0, s_max = 0, t_min = 0, t_max = 0;
};

struct ShiffmanField {
  HeightChart chart = HeightChart::LogRadial;
  int n_s = 0, n_t = 0;
  double s_min = 0, t_min = 0, hs = 0, ht = 0;
  std::vector<double> u, kappa, h, lambda_chart, K;
  std::vector<uint8_t> mask;  // 1 = usable sample
  size_t idx(int i, int j) const { return static_cast<size_t>(i) * n_t + j; }
  double max_abs_u() const;
};

/// Planar curvature of the level curve through X(z).
double level_curvature(const WeierstrassData& w, Complex z);

/// The Lorentzian Shiffman function: the angular derivative of level-curve
/// curvature scaled by the metric, evaluated from (g, g', g'').
double shiffman_u(const WeierstrassData& w, Complex z);

/// Re of the level generator (z g'/g in the annulus chart, g'/g in the strip);
/// harmonic wherever g has no zero or pole.
double harmonic_h(const WeierstrassData& w, Complex z);

/// Samples u, kappa, h, the chart conformal factor and K on a uniform chart
/// grid; a guard band of 2 cells around the singular set |g| = 1 is masked.
ShiffmanField sample_shiffman(const WeierstrassData& w, const ShiffmanGridSpec& spec);

/// max over usable interior nodes of |Laplacian(u) - 2 K Lambda^2 u|.
double jacobi_residual(const ShiffmanField& field);

/// max over usable interior nodes of the 5-point Laplacian of h.
double harmonic_h_residual(const ShiffmanField& field);
double harmonic_h_residual(const WeierstrassData& w, const ShiffmanGridSpec& spec);

/// Im[(1/|g^2 - 1|)(d log g / dz)^2]; stays bounded across cone circles.
double singular_circle_combination(const WeierstrassData& w, Complex z);

}  // namespace maxsurf
