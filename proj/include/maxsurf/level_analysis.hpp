#pragma once

#include <string>
#include <vector>

#include "maxsurf/weierstrass.hpp"

namespace maxsurf {

struct PlanarPoint {
  double x = 0, y = 0;
};

struct LevelCurve {
  double t = 0;                    // height
  std::vector<PlanarPoint> points; // ordered; first != last when closed
  bool closed = false;
  std::string source;              // "surface-ring" or "marching-squares"
};

enum class CurveKind { Circle, StraightLine, ConvexJordan, NonConvex, ConePoint };

struct CurveVerdict {
  CurveKind kind = CurveKind::NonConvex;
  // Circle
  PlanarPoint center{};
  double radius = 0;
  // StraightLine
  PlanarPoint direction{};
  // ConvexJordan
  double turning = 0;
  // NonConvex
  int defect_count = 0;
  // ConePoint
  PlanarPoint location{};
  double spread = 0;
  double residual = 0;
};

std::string to_string(CurveKind k);

/// Level curve of a surface grid at normalized height t in (-1, 1): the ring
/// |z| = R^t for annulus grids, the vertical strip line Re z = t for strip
/// grids, interpolated between grid rings/columns.
LevelCurve extract_level(const SurfaceGrid& surface, double t);

/// Fit-and-classify pipeline: cone point, circle (Kasa), straight line (total
/// least squares), then convexity by turning.
CurveVerdict classify_curve(const LevelCurve& c, double tol_circle = 1e-3,
                            double tol_line = 0.0);

struct ScanEntry {
  double t = 0;
  CurveVerdict verdict;
};

std::vector<ScanEntry> slab_scan(const SurfaceGrid& surface, const std::vector<double>& heights,
                                 double tol_circle = 1e-3, double tol_line = 0.0);

/// Marching-squares contours of a scalar field sampled on a uniform planar
/// grid (NaN marks holes). Returns chained polylines; closed loops are marked.
std::vector<LevelCurve> extract_contours(const std::vector<std::vector<double>>& field,
                                         double x0, double y0, double h, double level);

/// Arc-length resampling onto n points; used to tame marching-squares jitter
/// before convexity classification.
LevelCurve resample_curve(const LevelCurve& c, int n);

}  // namespace maxsurf
