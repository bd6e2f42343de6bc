#include "maxsurf/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace maxsurf::io {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << body;
  if (!out) throw IoError("write failed: " + path);
}

void write_surface_csv(const SurfaceGrid& g, const std::string& path) {
  std::string body = "r,theta,re_z,im_z,x1,x2,x3,re_g,im_g,lambda,K\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < g.n_r; ++i) {
    for (int j = 0; j < g.n_theta; ++j) {
      const SurfaceNode& n = g.at(i, j);
      const Complex z = g.chart_point(i, j);
      const double r = g.chart == HeightChart::LogRadial ? std::abs(z) : z.real();
      const double th = g.chart == HeightChart::LogRadial ? std::arg(z) : z.imag();
      double cols[11] = {r, th, z.real(), z.imag(), nan, nan, nan, nan, nan, nan, nan};
      if (n.present) {
        cols[4] = n.X.x1;
        cols[5] = n.X.x2;
        cols[6] = n.X.x3;
        cols[7] = n.g.real();
        cols[8] = n.g.imag();
        cols[9] = n.lambda;
        cols[10] = n.K;
      }
      for (int c = 0; c < 11; ++c) {
        body += fmt17(cols[c]);
        body += c == 10 ? '\n' : ',';
      }
    }
  }
  write_text(path, body);
}

void write_surface_obj(const SurfaceGrid& g, const std::string& path) {
  std::string body;
  std::vector<int> vert(static_cast<size_t>(g.n_r) * g.n_theta, 0);
  int count = 0;
  for (int i = 0; i < g.n_r; ++i) {
    for (int j = 0; j < g.n_theta; ++j) {
      const SurfaceNode& n = g.at(i, j);
      if (!n.present) continue;
      vert[static_cast<size_t>(i) * g.n_theta + j] = ++count;
      body += "v " + fmt17(n.X.x1) + " " + fmt17(n.X.x2) + " " + fmt17(n.X.x3) + "\n";
    }
  }
  const int jmax = g.periodic ? g.n_theta : g.n_theta - 1;
  for (int i = 0; i + 1 < g.n_r; ++i) {
    for (int j = 0; j < jmax; ++j) {
      const int jn = (j + 1) % g.n_theta;
      const int a = vert[static_cast<size_t>(i) * g.n_theta + j];
      const int b = vert[static_cast<size_t>(i) * g.n_theta + jn];
      const int c = vert[static_cast<size_t>(i + 1) * g.n_theta + jn];
      const int d = vert[static_cast<size_t>(i + 1) * g.n_theta + j];
      if (a && b && c && d) {
        body += "f " + std::to_string(a) + " " + std::to_string(b) + " " + std::to_string(c) + "\n";
        body += "f " + std::to_string(a) + " " + std::to_string(c) + " " + std::to_string(d) + "\n";
      }
    }
  }
  write_text(path, body);
}

json surface_shape(const SurfaceGrid& g) {
  json s;
  s["chart"] = g.chart == HeightChart::LogRadial ? "log-radial" : "linear";
  s["n_r"] = g.n_r;
  s["n_theta"] = g.n_theta;
  s["periodic"] = g.periodic;
  s["s_min"] = g.s_min;
  s["s_max"] = g.s_max;
  s["t_min"] = g.t_min;
  s["t_max"] = g.t_max;
  s["base_z"] = {g.base_z.real(), g.base_z.imag()};
  s["base_X"] = {g.base_X.x1, g.base_X.x2, g.base_X.x3};
  return s;
}

SurfaceGrid read_surface(const json& manifest, const std::string& csv_path) {
  SurfaceGrid g;
  try {
    const json& s = manifest.at("grid");
    g.chart = s.at("chart") == "log-radial" ? HeightChart::LogRadial : HeightChart::Linear;
    g.n_r = s.at("n_r");
    g.n_theta = s.at("n_theta");
    g.periodic = s.at("periodic");
    g.s_min = s.at("s_min");
    g.s_max = s.at("s_max");
    g.t_min = s.at("t_min");
    g.t_max = s.at("t_max");
    g.base_z = Complex(s.at("base_z")[0], s.at("base_z")[1]);
    g.base_X = LorentzVec{s.at("base_X")[0], s.at("base_X")[1], s.at("base_X")[2]};
  } catch (const json::exception& e) {
    throw IoError(std::string("bad manifest grid record: ") + e.what());
  }
  if (g.n_r < 2 || g.n_theta < 2) throw IoError("manifest grid too small");
  g.nodes.assign(static_cast<size_t>(g.n_r) * g.n_theta, SurfaceNode{});

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + csv_path);
  size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= g.nodes.size()) throw IoError("CSV has more rows than the manifest grid");
    double cols[11];
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 11; ++c) {
      if (!std::getline(ss, cell, ',')) throw IoError("short CSV row in " + csv_path);
      char* end = nullptr;
      cols[c] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw IoError("non-numeric CSV cell in " + csv_path);
    }
    SurfaceNode& n = g.nodes[row];
    n.z = Complex(cols[2], cols[3]);
    if (std::isfinite(cols[4])) {
      n.X = LorentzVec{cols[4], cols[5], cols[6]};
      n.g = Complex(cols[7], cols[8]);
      n.lambda = cols[9];
      n.K = cols[10];
      n.present = true;
    }
    ++row;
  }
  if (row != g.nodes.size()) throw IoError("CSV truncated: " + csv_path);
  return g;
}

void write_shiffman_csv(const ShiffmanField& f, const std::string& path) {
  std::string body = "re_z,im_z,u,kappa,h,lambda,K\n";
  for (int i = 0; i < f.n_s; ++i) {
    for (int j = 0; j < f.n_t; ++j) {
      const size_t k = f.idx(i, j);
      if (!f.mask[k]) continue;
      const double s = f.s_min + i * f.hs;
      const double t = f.t_min + j * f.ht;
      const Complex z = f.chart == HeightChart::LogRadial ? std::polar(std::exp(s), t)
                                                          : Complex(s, t);
      body += fmt17(z.real()) + "," + fmt17(z.imag()) + "," + fmt17(f.u[k]) + "," +
              fmt17(f.kappa[k]) + "," + fmt17(f.h[k]) + "," + fmt17(f.lambda_chart[k]) + "," +
              fmt17(f.K[k]) + "\n";
    }
  }
  write_text(path, body);
}

void write_levels_csv(const std::vector<LevelCurve>& curves, const std::string& path) {
  std::string body = "t,index,x1,x2\n";
  for (const LevelCurve& c : curves) {
    int index = 0;
    for (const PlanarPoint& p : c.points) {
      body += fmt17(c.t) + "," + std::to_string(index++) + "," + fmt17(p.x) + "," +
              fmt17(p.y) + "\n";
    }
  }
  write_text(path, body);
}

json verdict_record(const ScanEntry& e) {
  json rec;
  rec["t"] = e.t;
  rec["kind"] = to_string(e.verdict.kind);
  json params;
  switch (e.verdict.kind) {
    case CurveKind::Circle:
      params["center"] = {e.verdict.center.x, e.verdict.center.y};
      params["radius"] = e.verdict.radius;
      break;
    case CurveKind::StraightLine:
      params["direction"] = {e.verdict.direction.x, e.verdict.direction.y};
      break;
    case CurveKind::ConvexJordan:
      params["turning"] = e.verdict.turning;
      break;
    case CurveKind::NonConvex:
      params["defect_count"] = e.verdict.defect_count;
      break;
    case CurveKind::ConePoint:
      params["location"] = {e.verdict.location.x, e.verdict.location.y};
      params["spread"] = e.verdict.spread;
      break;
  }
  rec["params"] = params;
  rec["residual"] = e.verdict.residual;
  return rec;
}

void write_nu_csv(const PdeGrid& grid, const std::string& path) {
  std::string body = "x,y,nu,deficit\n";
  for (int k : grid.interior) {
    const int i = k / grid.nx, j = k % grid.nx;
    body += fmt17(grid.px(j)) + "," + fmt17(grid.py(i)) + "," + fmt17(grid.nu[k]) + "," +
            fmt17(grid.deficit(k)) + "\n";
  }
  write_text(path, body);
}

void write_graph_obj(const PdeGrid& grid, const std::string& path) {
  std::string body;
  std::vector<int> vert(grid.nu.size(), 0);
  int count = 0;
  for (int k : grid.interior) {
    const int i = k / grid.nx, j = k % grid.nx;
    vert[k] = ++count;
    body += "v " + fmt17(grid.px(j)) + " " + fmt17(grid.py(i)) + " " + fmt17(grid.nu[k]) + "\n";
  }
  for (int i = 0; i + 1 < grid.ny; ++i) {
    for (int j = 0; j + 1 < grid.nx; ++j) {
      const int a = vert[grid.idx(i, j)];
      const int b = vert[grid.idx(i, j + 1)];
      const int c = vert[grid.idx(i + 1, j + 1)];
      const int d = vert[grid.idx(i + 1, j)];
      if (a && b && c && d) {
        body += "f " + std::to_string(a) + " " + std::to_string(b) + " " + std::to_string(c) + "\n";
        body += "f " + std::to_string(a) + " " + std::to_string(c) + " " + std::to_string(d) + "\n";
      }
    }
  }
  write_text(path, body);
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

TomlFile::TomlFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments outside quotes
    bool quoted = false;
    for (size_t k = 0; k < line.size(); ++k) {
      if (line[k] == '"') quoted = !quoted;
      if (line[k] == '#' && !quoted) {
        line = line.substr(0, k);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw IoError(path + ":" + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      data_[section];
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    data_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
}

const std::string& TomlFile::raw(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  if (s == data_.end()) throw IoError("missing config section [" + section + "]");
  auto k = s->second.find(key);
  if (k == s->second.end()) throw IoError("missing config key " + section + "." + key);
  return k->second;
}

bool TomlFile::has(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  return s != data_.end() && s->second.count(key) > 0;
}

double TomlFile::number(const std::string& section, const std::string& key) const {
  const std::string& v = raw(section, key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw IoError("config value " + section + "." + key + " is not a number: " + v);
  }
  return x;
}

double TomlFile::number(const std::string& section, const std::string& key,
                        double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

std::string TomlFile::text(const std::string& section, const std::string& key) const {
  std::string v = raw(section, key);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return v;
}

std::string TomlFile::text(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return has(section, key) ? text(section, key) : fallback;
}

std::vector<double> TomlFile::numbers(const std::string& section, const std::string& key) const {
  std::string v = raw(section, key);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    throw IoError("config value " + section + "." + key + " is not an array");
  }
  v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    char* end = nullptr;
    out.push_back(std::strtod(cell.c_str(), &end));
    if (end == cell.c_str()) throw IoError("bad array element in " + section + "." + key);
  }
  return out;
}

std::vector<std::string> TomlFile::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : data_) out.push_back(name);
  return out;
}

SolveConfig read_solve_config(const std::string& path) {
  TomlFile toml(path);
  SolveConfig cfg;
  cfg.domain.trunc_cx = toml.number("domain", "center_x", 0.0);
  cfg.domain.trunc_cy = toml.number("domain", "center_y", 0.0);
  cfg.domain.trunc_radius = toml.number("domain", "truncation_radius");
  cfg.domain.h = toml.number("domain", "h");
  const std::string mode = toml.text("domain", "far_mode", "planar");
  if (mode == "planar") {
    cfg.domain.far_mode = FarFieldMode::PlanarRobin;
  } else if (mode == "dirichlet") {
    cfg.domain.far_mode = FarFieldMode::Dirichlet;
  } else {
    throw IoError("far_mode must be \"planar\" or \"dirichlet\"");
  }
  cfg.domain.far_value = toml.number("domain", "far_value", 0.0);

  for (const std::string& name : toml.sections()) {
    if (name.rfind("hole", 0) != 0) continue;
    Hole hole;
    const std::string kind = toml.text(name, "kind", "circle");
    if (kind == "circle") {
      hole.kind = Hole::Kind::Circle;
      hole.r = toml.number(name, "r");
    } else if (kind == "ellipse") {
      hole.kind = Hole::Kind::Ellipse;
      hole.a = toml.number(name, "a");
      hole.b = toml.number(name, "b");
    } else {
      throw IoError("hole kind must be \"circle\" or \"ellipse\"");
    }
    hole.cx = toml.number(name, "cx", 0.0);
    hole.cy = toml.number(name, "cy", 0.0);
    hole.phi = toml.number(name, "phi");
    cfg.domain.holes.push_back(hole);
  }

  cfg.method = toml.text("solver", "method", "perron");
  if (cfg.method != "perron" && cfg.method != "relaxation") {
    throw IoError("solver method must be \"perron\" or \"relaxation\"");
  }
  cfg.options.max_sweeps = static_cast<int>(toml.number("solver", "max_sweeps", 20000));
  cfg.options.tol_change = toml.number("solver", "tol_change", 1e-8);
  cfg.options.relax = toml.number("solver", "relax", 1.0);
  cfg.options.ball_radius_cells = toml.number("solver", "ball_radius_cells", 8.0);
  if (cfg.options.max_sweeps <= 0 || cfg.options.tol_change <= 0 || cfg.options.relax <= 0) {
    throw IoError("solver limits and tolerances must be positive");
  }

  if (toml.has("scan", "heights")) cfg.scan_heights = toml.numbers("scan", "heights");
  cfg.tol_circle = toml.number("scan", "tol_circle", 1e-3);
  cfg.reference = toml.text("reference", "kind", "");
  return cfg;
}

}  // namespace maxsurf::io
