#include <doctest.h>

#include <random>

#include "maxsurf/lorentz.hpp"

using namespace maxsurf;

TEST_CASE("inner product has (+,+,-) signature") {
  CHECK(lorentz_inner({1, 0, 0}, {1, 0, 0}) == 1.0);
  CHECK(lorentz_inner({0, 1, 0}, {0, 1, 0}) == 1.0);
  CHECK(lorentz_inner({0, 0, 1}, {0, 0, 1}) == -1.0);
  CHECK(lorentz_inner({1, 2, 3}, {4, 5, 6}) == doctest::Approx(4 + 10 - 18));
}

TEST_CASE("causal classification") {
  CHECK(classify({1, 0, 0.5}) == CausalClass::Spacelike);
  CHECK(classify({0.5, 0, 1}) == CausalClass::Timelike);
  CHECK(classify({1, 0, 1}) == CausalClass::Lightlike);
  CHECK(classify({3, 4, 5}) == CausalClass::Lightlike);
  // zero vector is spacelike by convention
  CHECK(classify({0, 0, 0}) == CausalClass::Spacelike);
}

TEST_CASE("stereographic image lies on the hyperbolic sphere") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-4.0, 4.0);
  int tested = 0;
  while (tested < 10000) {
    const Complex z(dist(rng), dist(rng));
    if (std::abs(std::abs(z) - 1.0) < 1e-3) continue;
    const HyperbolicPoint s = stereographic(ExtComplex(z));
    CHECK(std::abs(lorentz_inner(s.p, s.p) + 1.0) <= 1e-12 * (1.0 + s.p.x3 * s.p.x3));
    // sheet matches the side of the unit circle
    if (std::abs(z) < 1.0) {
      CHECK(s.p.x3 < 0.0);
    } else {
      CHECK(s.p.x3 > 0.0);
    }
    ++tested;
  }
}

TEST_CASE("stereographic maps infinity to the north pole exactly") {
  const HyperbolicPoint s = stereographic(ExtComplex::infinity());
  CHECK(s.p.x1 == 0.0);
  CHECK(s.p.x2 == 0.0);
  CHECK(s.p.x3 == 1.0);
}

TEST_CASE("stereographic maps zero to the south pole") {
  const HyperbolicPoint s = stereographic(ExtComplex(Complex(0, 0)));
  CHECK(s.p.x1 == 0.0);
  CHECK(s.p.x2 == 0.0);
  CHECK(s.p.x3 == -1.0);
}

TEST_CASE("stereographic rejects unit-modulus input") {
  CHECK_THROWS_AS(stereographic(ExtComplex(Complex(1.0, 0.0))), UnitModulusInput);
  CHECK_THROWS_AS(stereographic(ExtComplex(Complex(std::sqrt(0.5), std::sqrt(0.5)))),
                  UnitModulusInput);
}

TEST_CASE("hyperbolic point constructor validates the quadric") {
  CHECK_THROWS_AS(HyperbolicPoint(LorentzVec{1, 0, 0}), InvalidArgument);
  CHECK_THROWS_AS(HyperbolicPoint(LorentzVec{0.3, 0.2, 0.5}), InvalidArgument);
  CHECK_NOTHROW(HyperbolicPoint(LorentzVec{3, 4, std::sqrt(26.0)}));
}
