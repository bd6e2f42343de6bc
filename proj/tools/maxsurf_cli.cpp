// Command-line front end: generate canonical examples, run diagnostics on
// exported surfaces, solve exterior Dirichlet problems, export level curves.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maxsurf/canonical.hpp"
#include "maxsurf/io.hpp"
#include "maxsurf/level_analysis.hpp"
#include "maxsurf/perron.hpp"
#include "maxsurf/shiffman.hpp"

namespace fs = std::filesystem;
using maxsurf::io::json;

namespace {

struct GlobalOpts {
  std::string out = ".";
  int threads = 1;
  bool verbose = false;
};

void note(const GlobalOpts& g, const std::string& msg) {
  if (g.verbose) std::cerr << msg << "\n";
}

std::pair<int, int> parse_grid(const std::string& s) {
  int a = 0, b = 0;
  char x = 0;
  if (std::sscanf(s.c_str(), "%d%c%d", &a, &x, &b) != 3 || x != 'x' || a < 2 || b < 2) {
    throw maxsurf::InvalidArgument("grid must look like 128x256");
  }
  return {a, b};
}

maxsurf::WeierstrassData data_from_manifest(const json& manifest) {
  const std::string kind = manifest.at("kind");
  const json& p = manifest.at("params");
  if (kind == "catenoid") {
    return maxsurf::make_catenoid(p.at("scale"), p.at("R"));
  }
  if (kind == "riemann") {
    maxsurf::RiemannParameter param;
    param.r = p.at("r");
    param.g0 = maxsurf::Complex(p.at("g0")[0], p.at("g0")[1]);
    param.branch = p.at("branch");
    const json& r = p.at("rect");
    return maxsurf::make_riemann(param, maxsurf::Rect{r[0], r[1], r[2], r[3]});
  }
  throw maxsurf::IoError("unknown surface kind in manifest: " + kind);
}

json scan_report(const maxsurf::SurfaceGrid& surface, const std::vector<double>& heights,
                 double tol_circle) {
  json out = json::array();
  for (double t : heights) {
    json rec;
    try {
      maxsurf::ScanEntry e;
      e.t = t;
      e.verdict = maxsurf::classify_curve(maxsurf::extract_level(surface, t), tol_circle);
      rec = maxsurf::io::verdict_record(e);
    } catch (const maxsurf::Error& err) {
      rec["t"] = t;
      rec["kind"] = "error";
      rec["message"] = err.what();
    }
    out.push_back(rec);
  }
  return out;
}

int cmd_generate(const GlobalOpts& g, const std::string& kind, double scale, double R,
                 double riemann_r, const std::string& g0_text, int branch,
                 const std::vector<double>& rect, const std::string& grid_text) {
  fs::create_directories(g.out);
  auto [n_r, n_theta] = parse_grid(grid_text);

  maxsurf::WeierstrassData data;
  json manifest;
  manifest["kind"] = kind;
  if (kind == "catenoid") {
    data = maxsurf::make_catenoid(scale, R);
    manifest["params"] = {{"scale", scale}, {"R", R}};
  } else {
    double g0r = 0, g0i = 0;
    if (std::sscanf(g0_text.c_str(), "%lf,%lf", &g0r, &g0i) < 1) {
      throw maxsurf::InvalidArgument("--g0 must be re or re,im");
    }
    maxsurf::RiemannParameter param;
    param.r = riemann_r;
    param.g0 = maxsurf::Complex(g0r, g0i);
    param.branch = branch;
    maxsurf::Rect rc{rect[0], rect[1], rect[2], rect[3]};
    data = maxsurf::make_riemann(param, rc);
    manifest["params"] = {{"r", riemann_r},
                          {"g0", {g0r, g0i}},
                          {"branch", branch},
                          {"rect", {rc.x0, rc.x1, rc.y0, rc.y1}}};
  }

  maxsurf::GridSpec spec;
  spec.n_r = n_r;
  spec.n_theta = n_theta;
  note(g, "integrating immersion on " + grid_text);
  maxsurf::SurfaceGrid surface = maxsurf::integrate_immersion(data, spec);
  manifest["grid"] = maxsurf::io::surface_shape(surface);

  json dom;
  dom["chart"] = data.domain.chart == maxsurf::HeightChart::LogRadial ? "log-radial" : "linear";
  dom["R"] = data.domain.R;
  dom["punctures"] = json::array();
  for (const auto& p : data.domain.punctures) dom["punctures"].push_back({p.real(), p.imag()});
  dom["end_puncture"] = nullptr;
  if (data.domain.end_puncture) {
    dom["end_puncture"] = {data.domain.end_puncture->real(), data.domain.end_puncture->imag()};
  }
  manifest["domain"] = dom;

  if (data.domain.chart == maxsurf::HeightChart::LogRadial) {
    const double radius = 0.5 * (1.0 / data.domain.R + data.domain.R);
    const maxsurf::PeriodCheck pc = maxsurf::period_check(data, radius);
    manifest["period_check"] = {
        {"radius", radius}, {"re1", pc.re1}, {"re2", pc.re2}, {"re3", pc.re3}, {"im3", pc.im3}};
  } else {
    manifest["period_check"] = nullptr;
  }

  if (kind == "riemann") {
    maxsurf::ShiffmanGridSpec sspec;
    sspec.n_s = 64;
    sspec.n_t = 64;
    sspec.s_min = surface.s_min;
    sspec.s_max = surface.s_max;
    sspec.t_min = surface.t_min;
    sspec.t_max = surface.t_max;
    manifest["diagnostics"] = {
        {"max_abs_u", maxsurf::sample_shiffman(data, sspec).max_abs_u()}};
  }

  const std::string stem = (fs::path(g.out) / kind).string();
  maxsurf::io::write_surface_csv(surface, stem + ".csv");
  maxsurf::io::write_surface_obj(surface, stem + ".obj");
  manifest["csv"] = kind + ".csv";
  maxsurf::io::write_text(stem + ".json", manifest.dump(2) + "\n");
  note(g, "wrote " + stem + ".{csv,obj,json}");
  return 0;
}

int cmd_diagnose(const GlobalOpts& g, const std::string& manifest_path,
                 const std::vector<double>& heights, double cone_tol, double tol_circle) {
  const json manifest = maxsurf::io::read_json(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::string csv_name;
  try {
    csv_name = manifest.at("csv");
  } catch (const json::exception&) {
    throw maxsurf::IoError("manifest lacks a csv reference");
  }
  maxsurf::SurfaceGrid surface = maxsurf::io::read_surface(manifest, (dir / csv_name).string());
  maxsurf::WeierstrassData data = data_from_manifest(manifest);

  json report;
  report["source"] = manifest_path;
  report["levels"] = scan_report(surface, heights, tol_circle);

  maxsurf::ShiffmanGridSpec sspec;
  sspec.n_s = 128;
  sspec.n_t = 128;
  sspec.s_min = surface.s_min;
  sspec.s_max = surface.s_max;
  sspec.t_min = surface.t_min;
  sspec.t_max = surface.t_max;
  const maxsurf::ShiffmanField field = maxsurf::sample_shiffman(data, sspec);
  report["max_abs_u"] = field.max_abs_u();
  try {
    report["jacobi_residual"] = maxsurf::jacobi_residual(field);
    report["harmonic_h_residual"] = maxsurf::harmonic_h_residual(field);
  } catch (const maxsurf::GridTooCoarse& e) {
    report["jacobi_residual"] = nullptr;
    report["harmonic_h_residual"] = nullptr;
    report["stencil_note"] = e.what();
  }

  report["cone_points"] = json::array();
  for (const auto& cone : maxsurf::detect_conelike(surface, cone_tol)) {
    report["cone_points"].push_back({{"P0", {cone.P0.x1, cone.P0.x2, cone.P0.x3}},
                                     {"spread", cone.spread},
                                     {"nodes", cone.node_count}});
  }

  report["end_fit"] = nullptr;
  if (!manifest.at("domain").at("end_puncture").is_null()) {
    const json& ep = manifest["domain"]["end_puncture"];
    const maxsurf::EndFit fit = maxsurf::fit_end_asymptotics(
        surface, maxsurf::ExtComplex(maxsurf::Complex(ep[0], ep[1])));
    report["end_fit"] = {{"alpha", fit.alpha},
                         {"beta", fit.beta},
                         {"t0", fit.t0},
                         {"planar", fit.planar},
                         {"residual", fit.residual}};
  }

  fs::create_directories(g.out);
  const std::string path = (fs::path(g.out) / "report.json").string();
  maxsurf::io::write_text(path, report.dump(2) + "\n");
  note(g, "wrote " + path);
  return 0;
}

int cmd_solve(const GlobalOpts& g, const std::string& config_path) {
  maxsurf::io::SolveConfig cfg = maxsurf::io::read_solve_config(config_path);
  fs::create_directories(g.out);

  maxsurf::PdeGrid grid = maxsurf::build_grid(cfg.domain);
  const maxsurf::SubSuperPair pair = maxsurf::build_sub_super(cfg.domain, grid);
  cfg.options.record_history = true;
  note(g, "solving with method=" + cfg.method);
  const maxsurf::SolveResult result =
      cfg.method == "perron" ? maxsurf::perron_solve(grid, cfg.domain, pair, cfg.options)
                             : maxsurf::relaxation_oracle(grid, cfg.domain, cfg.options);

  maxsurf::io::write_nu_csv(grid, (fs::path(g.out) / "nu.csv").string());
  maxsurf::io::write_graph_obj(grid, (fs::path(g.out) / "graph.obj").string());

  json log;
  log["converged"] = result.converged;
  log["sweeps"] = result.sweeps;
  log["final_change"] = result.final_change;
  log["max_residual"] = result.max_residual;
  log["far_field"] = {{"t0", result.far.t0}, {"c", result.far.c}, {"beta", result.far.beta}};
  if (cfg.reference == "radial-catenoid") {
    double err = 0.0;
    for (int k : grid.interior) {
      const int i = k / grid.nx, j = k % grid.nx;
      const double rho = std::hypot(grid.px(j), grid.py(i));
      err = std::max(err, std::abs(grid.nu[k] - (std::asinh(rho) - std::asinh(1.0))));
    }
    log["closed_form_error"] = err;
  }
  log["history"] = result.history;
  maxsurf::io::write_text((fs::path(g.out) / "solve_log.json").string(), log.dump(2) + "\n");

  if (!cfg.scan_heights.empty()) {
    json verdicts;
    // the hole boundaries are the nu = phi level curves; the grid scan cannot
    // reach them, so classify them from their exact parametrizations
    verdicts["boundaries"] = json::array();
    for (const maxsurf::Hole& hole : cfg.domain.holes) {
      maxsurf::LevelCurve c;
      c.closed = true;
      for (int k = 0; k < 256; ++k) {
        const double t = 2.0 * M_PI * k / 256.0;
        if (hole.kind == maxsurf::Hole::Kind::Circle) {
          c.points.push_back({hole.cx + hole.r * std::cos(t), hole.cy + hole.r * std::sin(t)});
        } else {
          c.points.push_back({hole.cx + hole.a * std::cos(t), hole.cy + hole.b * std::sin(t)});
        }
      }
      maxsurf::ScanEntry e;
      e.t = hole.phi;
      e.verdict = maxsurf::classify_curve(c, cfg.tol_circle);
      verdicts["boundaries"].push_back(maxsurf::io::verdict_record(e));
    }
    verdicts["levels"] = json::array();
    for (const maxsurf::ScanEntry& e :
         maxsurf::pde_slab_scan(grid, cfg.scan_heights, cfg.tol_circle)) {
      verdicts["levels"].push_back(maxsurf::io::verdict_record(e));
    }
    maxsurf::io::write_text((fs::path(g.out) / "verdicts.json").string(),
                            verdicts.dump(2) + "\n");
  }

  if (!result.converged) {
    std::cerr << "solver did not converge in " << result.sweeps
              << " sweeps; best iterate written to nu.csv\n";
    return 3;
  }
  note(g, "converged in " + std::to_string(result.sweeps) + " sweeps");
  return 0;
}

int cmd_export(const GlobalOpts& g, const std::string& manifest_path,
               const std::vector<double>& heights, double tol_circle) {
  const json manifest = maxsurf::io::read_json(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::string csv_name;
  try {
    csv_name = manifest.at("csv");
  } catch (const json::exception&) {
    throw maxsurf::IoError("manifest lacks a csv reference");
  }
  maxsurf::SurfaceGrid surface = maxsurf::io::read_surface(manifest, (dir / csv_name).string());

  fs::create_directories(g.out);
  std::vector<maxsurf::LevelCurve> curves;
  for (double t : heights) curves.push_back(maxsurf::extract_level(surface, t));
  maxsurf::io::write_levels_csv(curves, (fs::path(g.out) / "levels.csv").string());

  json verdicts = scan_report(surface, heights, tol_circle);
  maxsurf::io::write_text((fs::path(g.out) / "verdicts.json").string(), verdicts.dump(2) + "\n");
  note(g, "wrote levels.csv and verdicts.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maximal-surface toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", g.verbose, "progress notes on stderr");

  // generate
  auto* gen = app.add_subcommand("generate", "integrate a canonical example");
  std::string gen_kind;
  gen->add_option("kind", gen_kind, "catenoid or riemann")
      ->required()
      ->check(CLI::IsMember({"catenoid", "riemann"}));
  double scale = 1.0, R = 4.0, riemann_r = 0.0;
  std::string g0_text = "1";
  int branch = 1;
  std::vector<double> rect = {-0.75, 0.75, -0.75, 0.75};
  std::string grid_text = "128x256";
  gen->add_option("--scale", scale, "catenoid scale")->capture_default_str();
  gen->add_option("--R", R, "annulus outer radius")->check(CLI::Range(1.0001, 1e6));
  auto* ropt = gen->add_option("--r", riemann_r, "Gauss-map parameter r > 1");
  gen->add_option("--g0", g0_text, "initial Gauss-map value re[,im]")->capture_default_str();
  gen->add_option("--branch", branch, "initial square-root branch")
      ->check(CLI::IsMember({-1, 1}));
  gen->add_option("--rect", rect, "strip rectangle x0 x1 y0 y1")->expected(4);
  gen->add_option("--grid", grid_text, "resolution NxM")->capture_default_str();

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "report on a generated surface");
  std::string surface_path;
  std::vector<double> heights;
  double cone_tol = 0.05, tol_circle = 1e-3;
  diag->add_option("surface", surface_path, "manifest JSON path")->required();
  diag->add_option("--heights", heights, "normalized level heights in (-1,1)");
  diag->add_option("--cone-tol", cone_tol, "metric threshold for cone detection")
      ->capture_default_str();
  diag->add_option("--tol-circle", tol_circle, "relative circle-fit tolerance")
      ->capture_default_str();

  // solve
  auto* solve = app.add_subcommand("solve", "exterior Dirichlet problem from a config");
  std::string config_path;
  solve->add_option("config", config_path, "TOML config path")->required();

  // export
  auto* exp = app.add_subcommand("export", "level curves from a generated surface");
  std::string exp_surface;
  std::vector<double> exp_heights;
  double exp_tol_circle = 1e-3;
  exp->add_option("surface", exp_surface, "manifest JSON path")->required();
  exp->add_option("--heights", exp_heights, "normalized level heights in (-1,1)")->required();
  exp->add_option("--tol-circle", exp_tol_circle, "relative circle-fit tolerance")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      if (gen_kind == "riemann" && ropt->count() == 0) {
        std::cerr << "generate riemann requires --r\n";
        return 2;
      }
      return cmd_generate(g, gen_kind, scale, R, riemann_r, g0_text, branch, rect, grid_text);
    }
    if (diag->parsed()) return cmd_diagnose(g, surface_path, heights, cone_tol, tol_circle);
    if (solve->parsed()) return cmd_solve(g, config_path);
    if (exp->parsed()) return cmd_export(g, exp_surface, exp_heights, exp_tol_circle);
  } catch (const maxsurf::NotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const maxsurf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
