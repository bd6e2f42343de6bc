#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "maxsurf/level_analysis.hpp"

namespace maxsurf {

struct Hole {
  enum class Kind { Circle, Ellipse };
  Kind kind = Kind::Circle;
  double cx = 0, cy = 0;
  double r = 1;            // circle radius
  double a = 1, b = 1;     // ellipse semi-axes (axis aligned)
  double phi = 0;          // Dirichlet data on this hole boundary

  double extent() const { return kind == Kind::Circle ? r : std::max(a, b); }
  bool contains(double x, double y) const;
  /// Euclidean distance from an exterior point to the hole boundary (>= 0
  /// outside, < 0 inside).
  double signed_distance(double x, double y) const;
};

enum class FarFieldMode { Dirichlet, PlanarRobin };

struct PlanarDomain {
  std::vector<Hole> holes;  // one or two
  double trunc_cx = 0, trunc_cy = 0;
  double trunc_radius = 0;
  double h = 0;  // grid spacing
  FarFieldMode far_mode = FarFieldMode::PlanarRobin;
  double far_value = 0;  // Dirichlet far-field value

  void validate() const;
};

class PdeGrid {
 public:
  enum class NodeState : uint8_t { Interior, Hole, FarField };

  int nx = 0, ny = 0;
  double x0 = 0, y0 = 0, h = 0;
  std::vector<NodeState> state;
  std::vector<double> nu;
  // Shortley-Weller arms in order E, W, N, S. arm_cut: 0 full arm to a grid
  // node, 1 cut by a hole boundary, 2 cut by the far-field circle.
  std::vector<std::array<float, 4>> arm_len;
  std::vector<std::array<double, 4>> arm_val;
  std::vector<std::array<int8_t, 4>> arm_cut;
  std::vector<int> interior;  // flat indices of interior nodes, row-major

  size_t idx(int i, int j) const { return static_cast<size_t>(i) * nx + j; }
  double px(int j) const { return x0 + j * h; }
  double py(int i) const { return y0 + i * h; }
  bool is_interior(size_t k) const { return state[k] == NodeState::Interior; }

  double arm_end_value(size_t k, int d) const;
  /// Nodal gradient by arm-aware central differences.
  void gradient(size_t k, double& gx, double& gy) const;
  /// Conservative flux-divergence residual; floor < 0 checks the spacelike
  /// condition strictly and throws, floor >= 0 clamps face deficits.
  double residual(size_t k, double floor_) const;
  double deficit(size_t k) const;

  std::vector<std::vector<double>> nu_as_field() const;  // NaN off-domain
};

PdeGrid build_grid(const PlanarDomain& dom);

/// Residual of the divergence-form maximal graph operator at node (i, j).
double q_residual(const PdeGrid& grid, int i, int j);
double max_q_residual(const PdeGrid& grid);

struct SubSuperPair {
  std::vector<double> sub, super;  // per flat node index
};

/// Catenoid-profile barriers matched to the hole data; constants when all
/// boundary values agree.
SubSuperPair build_sub_super(const PlanarDomain& dom, const PdeGrid& grid);

/// Stencil-residual test of the discrete subsolution property (q >= -tol at
/// interior nodes, evaluated with the candidate values in place).
bool discrete_subsolution(const PdeGrid& grid, const std::vector<double>& values, double tol);

/// Replaces values inside the grid disk by the local Dirichlet solution with
/// rim data from the current values, then takes the pointwise sup with the
/// input (monotone lifting). Returns the max value change.
double solution_lift(PdeGrid& grid, int ci, int cj, double radius);

struct FarFieldFit {
  double t0 = 0, c = 0, beta = 0;
};

/// Refits the planar-end closure nu ~ t0 + c/rho on an interior ring and
/// pushes it onto the far-field arms; reports the fitted end height. In
/// Dirichlet mode the stored value is kept and reported as t0.
FarFieldFit far_field_condition(PdeGrid& grid, const PlanarDomain& dom, FarFieldMode mode);

/// Ring fit of the planar-end profile without touching the grid closure.
FarFieldFit far_field_fit(const PdeGrid& grid, const PlanarDomain& dom);

/// Write the closure t0 + c / rho onto the truncation-boundary arms.
void push_far_closure(PdeGrid& grid, const PlanarDomain& dom, double t0, double c);

struct SolveOptions {
  int max_sweeps = 20000;
  double tol_change = 1e-8;
  double relax = 1.0;         // local Newton relaxation
  double ball_radius_cells = 8.0;
  bool record_history = false;
};

struct SolveResult {
  bool converged = false;
  int sweeps = 0;
  double final_change = 0;
  double max_residual = 0;
  FarFieldFit far;
  std::vector<double> history;  // sup-change per sweep when recorded
};

/// Perron iteration: red-black schedule of overlapping disk liftings started
/// from the subsolution.
SolveResult perron_solve(PdeGrid& grid, const PlanarDomain& dom, const SubSuperPair& pair,
                         const SolveOptions& opt);

/// Independent cross-check: global damped Newton / Gauss-Seidel relaxation
/// from the harmonic interpolant of the boundary data.
SolveResult relaxation_oracle(PdeGrid& grid, const PlanarDomain& dom, const SolveOptions& opt);

/// Marching-squares level classification on the solved grid.
std::vector<ScanEntry> pde_slab_scan(const PdeGrid& grid, const std::vector<double>& heights,
                                     double tol_circle = 1e-3, double tol_line = 0.0,
                                     int resample = 256);

}  // namespace maxsurf
