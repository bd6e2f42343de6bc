// pybind11 bindings for the geometry side of the library: canonical examples,
// immersion integration, Shiffman diagnostics and level classification.
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "maxsurf/canonical.hpp"
#include "maxsurf/level_analysis.hpp"
#include "maxsurf/shiffman.hpp"
#include "maxsurf/weierstrass.hpp"

namespace py = pybind11;
using namespace maxsurf;

namespace {

py::tuple vec_tuple(const LorentzVec& v) { return py::make_tuple(v.x1, v.x2, v.x3); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "maximal surfaces in Lorentz-Minkowski space: core routines";

  py::register_exception<Error>(m, "MaxsurfError", PyExc_ValueError);

  m.def(
      "lorentz_inner",
      [](py::tuple a, py::tuple b) {
        return lorentz_inner(
            {a[0].cast<double>(), a[1].cast<double>(), a[2].cast<double>()},
            {b[0].cast<double>(), b[1].cast<double>(), b[2].cast<double>()});
      },
      py::arg("a"), py::arg("b"), "signature (+,+,-) inner product of two 3-tuples");

  m.def(
      "stereographic", [](Complex z) { return vec_tuple(stereographic(ExtComplex(z)).p); },
      py::arg("z"), "projection of z onto the hyperbolic sphere x1^2 + x2^2 - x3^2 = -1");
  m.def(
      "stereographic_infinity",
      [] { return vec_tuple(stereographic(ExtComplex::infinity()).p); },
      "image of the point at infinity, the north pole (0, 0, 1)");

  py::class_<WeierstrassData>(m, "WeierstrassData",
                              "Gauss map / height differential pair on its parameter domain");

  m.def("make_catenoid", &make_catenoid, py::arg("scale") = 1.0, py::arg("R") = 4.0,
        "Lorentzian catenoid data g = z, eta = scale dz / z^2 on the annulus 1/R < |z| < R");
  m.def(
      "make_riemann",
      [](double r, Complex g0, int branch, std::array<double, 4> rect) {
        return make_riemann({r, g0, branch}, {rect[0], rect[1], rect[2], rect[3]});
      },
      py::arg("r"), py::arg("g0") = Complex(1.0, 0.0), py::arg("branch") = 1,
      py::arg("rect") = std::array<double, 4>{-0.6, 0.6, -0.6, 0.6},
      "Riemann-type data with (g')^2 = g (g^2 + 2 r g + 1) in a strip rectangle");

  m.def("metric_factor", &metric_factor, py::arg("data"), py::arg("z"),
        "conformal factor lambda; zero exactly on cone circles");
  m.def("gauss_curvature", &gauss_curvature, py::arg("data"), py::arg("z"));
  m.def("level_curvature", &level_curvature, py::arg("data"), py::arg("z"),
        "planar curvature of the level curve through X(z)");
  m.def("shiffman_u", &shiffman_u, py::arg("data"), py::arg("z"),
        "Lorentzian Shiffman function; identically zero iff the levels are circles");
  m.def("harmonic_h", &harmonic_h, py::arg("data"), py::arg("z"));

  py::class_<SurfaceGrid>(m, "SurfaceGrid", "integrated immersion on a chart grid")
      .def_readonly("n_r", &SurfaceGrid::n_r)
      .def_readonly("n_theta", &SurfaceGrid::n_theta)
      .def(
          "point",
          [](const SurfaceGrid& g, int i, int j) -> py::object {
            if (i < 0 || i >= g.n_r || j < 0 || j >= g.n_theta) {
              throw py::index_error("grid index out of range");
            }
            const SurfaceNode& n = g.at(i, j);
            if (!n.present) return py::none();
            return py::make_tuple(n.z, vec_tuple(n.X));
          },
          py::arg("i"), py::arg("j"),
          "(z, (x1, x2, x3)) at node (i, j), or None where the node is absent");

  m.def(
      "integrate_immersion",
      [](const WeierstrassData& w, int n_r, int n_theta, double r_min, double r_max) {
        return integrate_immersion(w, {n_r, n_theta, r_min, r_max});
      },
      py::arg("data"), py::arg("n_r"), py::arg("n_theta"), py::arg("r_min") = 0.0,
      py::arg("r_max") = 0.0, "integrate the Weierstrass forms to surface points");

  m.def(
      "slab_scan",
      [](const SurfaceGrid& g, const std::vector<double>& heights, double tol_circle) {
        py::list out;
        for (const ScanEntry& e : slab_scan(g, heights, tol_circle)) {
          py::dict d;
          d["t"] = e.t;
          d["kind"] = to_string(e.verdict.kind);
          d["radius"] = e.verdict.radius;
          d["residual"] = e.verdict.residual;
          out.append(d);
        }
        return out;
      },
      py::arg("surface"), py::arg("heights"), py::arg("tol_circle") = 1e-3,
      "classify the level curve at each normalized height");
}
