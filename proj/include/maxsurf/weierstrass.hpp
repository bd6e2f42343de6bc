#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "maxsurf/lorentz.hpp"

namespace maxsurf {

/// Which holomorphic chart carries the height function of the slab.
/// LogRadial: annulus chart, X3 proportional to log|z|, levels are rings.
/// Linear: strip chart, X3 = Re z, levels are vertical lines.
enum class HeightChart { LogRadial, Linear };

struct AnnulusDomain {
  HeightChart chart = HeightChart::LogRadial;
  double R = 0.0;  // annulus 1/R <= |z| <= R, R > 1
  double rx0 = 0.0, rx1 = 0.0, ry0 = 0.0, ry1 = 0.0;  // strip rectangle
  std::vector<Complex> punctures;                     // boundary punctures
  std::optional<Complex> end_puncture;                // interior end

  static AnnulusDomain annulus(double R,
                               std::vector<Complex> punctures = {},
                               std::optional<Complex> end = std::nullopt);
  static AnnulusDomain rect(double x0, double x1, double y0, double y1);
};

/// The pair (g, eta) as evaluable functions. eta is stored as the density
/// h(z) with eta = h(z) dz. dg is required from the provider; d2g is needed
/// only by the Shiffman evaluator and may be left empty otherwise.
struct WeierstrassData {
  std::function<Complex(Complex)> g;
  std::function<Complex(Complex)> dg;
  std::function<Complex(Complex)> d2g;
  std::function<Complex(Complex)> eta;
  AnnulusDomain domain;
  Complex base_z{1.0, 0.0};
  LorentzVec base_X{};
};

struct OmegaTriple {
  Complex w1, w2, w3;
};

/// Densities of the three representation forms at z.
OmegaTriple omega_triple(const WeierstrassData& w, Complex z);

/// |1 - |g|^2| |h(z)| / 2; vanishes exactly on the singular set |g| = 1.
double metric_factor(const WeierstrassData& w, Complex z);

/// [4|g'| / (|1 - |g|^2|^2 |h|)]^2 >= 0.
double gauss_curvature(const WeierstrassData& w, Complex z);

/// sigma(g(z)).
HyperbolicPoint gauss_map(const WeierstrassData& w, Complex z);

struct GridSpec {
  int n_r = 0;
  int n_theta = 0;
  double r_min = 0.0;  // annulus radial extent; 0 means 1/R .. R
  double r_max = 0.0;
};

struct SurfaceNode {
  Complex z;
  LorentzVec X;
  Complex g;
  double lambda = 0.0;
  double K = 0.0;
  bool present = false;
};

struct SurfaceGrid {
  HeightChart chart = HeightChart::LogRadial;
  int n_r = 0, n_theta = 0;
  bool periodic = false;       // second index wraps (annulus rings)
  double s_min = 0.0, s_max = 0.0;  // chart abscissa: log r, or x
  double t_min = 0.0, t_max = 0.0;  // theta, or y
  std::vector<SurfaceNode> nodes;   // row-major, i * n_theta + j
  Complex base_z{};
  LorentzVec base_X{};

  SurfaceNode& at(int i, int j) { return nodes[static_cast<size_t>(i) * n_theta + j]; }
  const SurfaceNode& at(int i, int j) const { return nodes[static_cast<size_t>(i) * n_theta + j]; }
  double ds() const { return n_r > 1 ? (s_max - s_min) / (n_r - 1) : 0.0; }
  double dt() const {
    if (periodic) return n_theta > 0 ? (t_max - t_min) / n_theta : 0.0;
    return n_theta > 1 ? (t_max - t_min) / (n_theta - 1) : 0.0;
  }
  Complex chart_point(int i, int j) const;
};

/// Integrates Re of the form triple from the base point over a deterministic
/// radial-then-angular path tree and fills metric and curvature samples.
SurfaceGrid integrate_immersion(const WeierstrassData& w, const GridSpec& spec);

/// Real part of X obtained by quadrature along the straight segment a -> b.
LorentzVec integrate_segment(const WeierstrassData& w, Complex a, Complex b,
                             const LorentzVec& X_a);

struct PeriodCheck {
  double re1 = 0.0, re2 = 0.0, re3 = 0.0;  // real parts of the loop integrals
  double im3 = 0.0;                        // Im of the third loop integral
  double max_abs_re() const;
};

/// Loop integrals of the form triple over |z| = radius.
PeriodCheck period_check(const WeierstrassData& w, double radius);

struct GraphResidual {
  double max_residual = 0.0;
  double max_grad_sq = 0.0;
};

/// Quasilinear maximal-graph residual of a height field sampled on a uniform
/// planar grid with spacing h. NaN entries mark absent samples.
GraphResidual maximal_graph_residual(const std::vector<std::vector<double>>& zfield, double h);

/// Resamples X3 over the x1x2-plane by bilinear inversion of the grid quads,
/// then evaluates the graph residual on an n x n planar grid.
GraphResidual graph_residual(const SurfaceGrid& surface, int n_planar);

struct ConeFeature {
  LorentzVec P0;          // centroid of the collapsed image
  double spread = 0.0;    // max pairwise distance over the level set image
  int node_count = 0;
  double mean_abs_z = 0.0;
};

/// Connected grid sets with lambda < tol where |g| crosses 1.
std::vector<ConeFeature> detect_conelike(const SurfaceGrid& surface, double tol);

/// Reflection about the cone circle |z| = 1: returns data whose immersion
/// satisfies X*(z) = -X(1/conj(z)) + 2 P0.
WeierstrassData mirror_reflect(const WeierstrassData& w);

struct EndFit {
  double alpha = 0.0;
  double beta = 0.0;
  double t0 = 0.0;
  bool planar = false;
  int orientation = +1;   // sign of the angular dependence e^{i orientation phi}
  double residual = 0.0;  // rms misfit of the horizontal model
};

/// Least-squares fit of the end model
///   x1 + i x2 ~ alpha rho^-1 e^{i s phi},  x3 ~ t0 + beta log rho
/// in the local puncture coordinate. ring_cutoff <= 0 selects rings within
/// 0.1 * (outer chart radius) of the puncture.
EndFit fit_end_asymptotics(const SurfaceGrid& surface, const ExtComplex& puncture,
                           double ring_cutoff = 0.0);

}  // namespace maxsurf
