#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include "maxsurf/errors.hpp"

namespace maxsurf {

using Complex = std::complex<double>;

/// Point or vector of L^3, the (+,+,-) signature space.
struct LorentzVec {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;

  LorentzVec() = default;
  LorentzVec(double a, double b, double c) : x1(a), x2(b), x3(c) {}

  LorentzVec operator+(const LorentzVec& o) const { return {x1 + o.x1, x2 + o.x2, x3 + o.x3}; }
  LorentzVec operator-(const LorentzVec& o) const { return {x1 - o.x1, x2 - o.x2, x3 - o.x3}; }
  LorentzVec operator*(double k) const { return {k * x1, k * x2, k * x3}; }
  LorentzVec operator-() const { return {-x1, -x2, -x3}; }

  bool finite() const {
    return std::isfinite(x1) && std::isfinite(x2) && std::isfinite(x3);
  }

  /// Euclidean norm, used for spread/diagnostic distances only.
  double euclidean_norm() const { return std::sqrt(x1 * x1 + x2 * x2 + x3 * x3); }
};

inline LorentzVec operator*(double k, const LorentzVec& v) { return v * k; }

enum class CausalClass { Spacelike, Timelike, Lightlike };

/// a1*b1 + a2*b2 - a3*b3.
inline double lorentz_inner(const LorentzVec& a, const LorentzVec& b) {
  return a.x1 * b.x1 + a.x2 * b.x2 - a.x3 * b.x3;
}

/// Causal type of v. The zero vector is spacelike by convention; the comparison
/// is exact on the computed inner product, callers needing a tolerance snap
/// their input first.
inline CausalClass classify(const LorentzVec& v) {
  const double q = lorentz_inner(v, v);
  if (q > 0.0) return CausalClass::Spacelike;
  if (q < 0.0) return CausalClass::Timelike;
  if (v.x1 == 0.0 && v.x2 == 0.0 && v.x3 == 0.0) return CausalClass::Spacelike;
  return CausalClass::Lightlike;
}

/// Extended complex plane value; infinity is a first-class input because the
/// Gauss map takes the value infinity at vertical-normal points.
struct ExtComplex {
  Complex z{0.0, 0.0};
  bool is_inf = false;

  ExtComplex() = default;
  ExtComplex(Complex v) : z(v) {}  // NOLINT: implicit by design
  ExtComplex(double v) : z(v, 0.0) {}
  static ExtComplex infinity() {
    ExtComplex e;
    e.is_inf = true;
    return e;
  }
};

/// Point on the hyperbolic sphere x1^2 + x2^2 - x3^2 = -1.
struct HyperbolicPoint {
  LorentzVec p;

  explicit HyperbolicPoint(const LorentzVec& v) : p(v) {
    const double q = lorentz_inner(p, p);
    // the inner product cancels two O(x3^2) terms, so the check scales with
    // the squared magnitude
    if (std::abs(q + 1.0) > 1e-12 * (1.0 + p.x3 * p.x3) || std::abs(p.x3) < 1.0 - 1e-12) {
      throw InvalidArgument("point does not lie on the hyperbolic sphere");
    }
  }
};

/// Stereographic projection from the north pole onto the hyperbolic sphere.
/// Undefined on the unit circle, where the image escapes to infinity.
inline HyperbolicPoint stereographic(const ExtComplex& z) {
  if (z.is_inf) return HyperbolicPoint(LorentzVec{0.0, 0.0, 1.0});
  const double m2 = std::norm(z.z);
  const double d = m2 - 1.0;
  if (std::abs(std::abs(z.z) - 1.0) < 1e-14) {
    throw UnitModulusInput("stereographic projection undefined on |z| = 1");
  }
  return HyperbolicPoint(LorentzVec{2.0 * z.z.imag() / d, -2.0 * z.z.real() / d, (m2 + 1.0) / d});
}

}  // namespace maxsurf
