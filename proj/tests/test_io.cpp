#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "maxsurf/canonical.hpp"
#include "maxsurf/io.hpp"

using namespace maxsurf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / "maxsurf_io_test";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("17-digit formatting round-trips doubles exactly") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(std::stod(io::fmt17(v)) == v);
  }
  CHECK(std::stod(io::fmt17(0.1)) == 0.1);
  CHECK(io::fmt17(1.0) == "1");
}

TEST_CASE("surface csv round-trips bit-exactly through the manifest") {
  const WeierstrassData w = make_catenoid(1.0, 3.0);
  const SurfaceGrid g = integrate_immersion(w, {17, 32, 0, 0});
  const fs::path dir = temp_dir();
  const fs::path csv = dir / "surface.csv";
  io::write_surface_csv(g, csv.string());
  const io::json manifest = {{"grid", io::surface_shape(g)}};
  const SurfaceGrid back = io::read_surface(manifest, csv.string());
  REQUIRE(back.n_r == g.n_r);
  REQUIRE(back.n_theta == g.n_theta);
  CHECK(back.periodic == g.periodic);
  for (size_t k = 0; k < g.nodes.size(); ++k) {
    REQUIRE(back.nodes[k].present == g.nodes[k].present);
    if (!g.nodes[k].present) continue;
    CHECK(back.nodes[k].X.x1 == g.nodes[k].X.x1);
    CHECK(back.nodes[k].X.x2 == g.nodes[k].X.x2);
    CHECK(back.nodes[k].X.x3 == g.nodes[k].X.x3);
    CHECK(back.nodes[k].lambda == g.nodes[k].lambda);
    CHECK(back.nodes[k].K == g.nodes[k].K);
    CHECK(back.nodes[k].z == g.nodes[k].z);
  }
}

TEST_CASE("surface writers are deterministic") {
  const WeierstrassData w = make_catenoid(1.0, 3.0);
  const SurfaceGrid g = integrate_immersion(w, {9, 16, 0, 0});
  const fs::path dir = temp_dir();
  io::write_surface_csv(g, (dir / "a.csv").string());
  io::write_surface_csv(g, (dir / "b.csv").string());
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  io::write_surface_obj(g, (dir / "a.obj").string());
  io::write_surface_obj(g, (dir / "b.obj").string());
  CHECK(slurp(dir / "a.obj") == slurp(dir / "b.obj"));
}

TEST_CASE("truncated csv raises an io error") {
  const WeierstrassData w = make_catenoid(1.0, 3.0);
  const SurfaceGrid g = integrate_immersion(w, {9, 16, 0, 0});
  const fs::path dir = temp_dir();
  const fs::path csv = dir / "trunc.csv";
  io::write_surface_csv(g, csv.string());
  std::string body = slurp(csv);
  io::write_text(csv.string(), body.substr(0, body.size() / 2));
  const io::json manifest = {{"grid", io::surface_shape(g)}};
  CHECK_THROWS_AS(io::read_surface(manifest, csv.string()), IoError);
  CHECK_THROWS_AS(io::read_surface(manifest, (dir / "missing.csv").string()), IoError);
  CHECK_THROWS_AS(io::read_surface(io::json::object(), csv.string()), IoError);
}

TEST_CASE("toml reader handles sections, types and fallbacks") {
  const fs::path p = temp_dir() / "cfg.toml";
  io::write_text(p.string(),
                 "# top comment\n"
                 "[alpha]\n"
                 "count = 42\n"
                 "name = \"ring # one\"  # trailing comment\n"
                 "flag = true\n"
                 "[beta]\n"
                 "levels = [0.5, -0.25, 1.0]\n"
                 "scale = 2.5e-3\n");
  const io::TomlFile t(p.string());
  CHECK(t.number("alpha", "count") == 42.0);
  CHECK(t.text("alpha", "name") == "ring # one");
  CHECK(t.number("beta", "scale") == doctest::Approx(2.5e-3));
  CHECK(t.numbers("beta", "levels") == std::vector<double>{0.5, -0.25, 1.0});
  CHECK(t.number("alpha", "missing", 7.0) == 7.0);
  CHECK(t.text("gamma", "nope", "dflt") == "dflt");
  CHECK(t.has("alpha", "flag"));
  CHECK(!t.has("alpha", "levels"));
  CHECK_THROWS_AS(t.number("alpha", "missing"), IoError);
}

TEST_CASE("solver config loader resolves the shipped files") {
  const io::SolveConfig radial = io::read_solve_config(CONFIG_DIR "/radial_annulus.toml");
  CHECK(radial.domain.holes.size() == 1);
  CHECK(radial.domain.far_mode == FarFieldMode::Dirichlet);
  CHECK(radial.method == "relaxation");
  CHECK(radial.reference == "radial-catenoid");
  CHECK(radial.domain.h == doctest::Approx(0.01));

  const io::SolveConfig t52 = io::read_solve_config(CONFIG_DIR "/theorem52.toml");
  REQUIRE(t52.domain.holes.size() == 2);
  CHECK(t52.domain.holes[1].kind == Hole::Kind::Ellipse);
  CHECK(t52.domain.far_mode == FarFieldMode::PlanarRobin);
  CHECK(!t52.scan_heights.empty());
}

TEST_CASE("verdict records carry kind-specific fields") {
  ScanEntry e;
  e.t = 0.25;
  e.verdict.kind = CurveKind::Circle;
  e.verdict.center = {1.0, -2.0};
  e.verdict.radius = 3.0;
  e.verdict.residual = 1e-6;
  const io::json j = io::verdict_record(e);
  CHECK(j.at("t") == 0.25);
  CHECK(j.at("kind") == "Circle");
  CHECK(j.at("params").at("radius") == 3.0);
  CHECK(j.at("params").at("center")[0] == 1.0);
  CHECK(j.at("residual") == 1e-6);
}

TEST_CASE("malformed json raises an io error") {
  const fs::path p = temp_dir() / "bad.json";
  io::write_text(p.string(), "{ not json ");
  CHECK_THROWS_AS(io::read_json(p.string()), IoError);
}
