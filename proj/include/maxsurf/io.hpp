#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxsurf/level_analysis.hpp"
#include "maxsurf/perron.hpp"
#include "maxsurf/shiffman.hpp"
#include "maxsurf/weierstrass.hpp"

namespace maxsurf::io {

using json = nlohmann::ordered_json;

/// 17-significant-digit decimal form used by every CSV writer.
std::string fmt17(double v);

void write_text(const std::string& path, const std::string& body);

// Surface artifacts. The CSV lists every grid node in row-major order with
// columns r, theta, re_z, im_z, x1, x2, x3, re_g, im_g, lambda, K; absent
// nodes carry nan data columns. The manifest records the grid shape needed to
// rebuild the SurfaceGrid from the CSV.
void write_surface_csv(const SurfaceGrid& g, const std::string& path);
void write_surface_obj(const SurfaceGrid& g, const std::string& path);
json surface_shape(const SurfaceGrid& g);
SurfaceGrid read_surface(const json& manifest, const std::string& csv_path);

void write_shiffman_csv(const ShiffmanField& f, const std::string& path);

void write_levels_csv(const std::vector<LevelCurve>& curves, const std::string& path);
json verdict_record(const ScanEntry& e);

void write_nu_csv(const PdeGrid& grid, const std::string& path);
void write_graph_obj(const PdeGrid& grid, const std::string& path);

json read_json(const std::string& path);

/// Minimal flat TOML reader: [section] headers, key = value lines with
/// numbers, quoted strings, booleans and inline arrays of numbers. Enough for
/// the shipped solver configs.
class TomlFile {
 public:
  explicit TomlFile(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  std::string text(const std::string& section, const std::string& key) const;
  std::string text(const std::string& section, const std::string& key,
                   const std::string& fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;

 private:
  const std::string& raw(const std::string& section, const std::string& key) const;
  std::map<std::string, std::map<std::string, std::string>> data_;
};

/// Solver problem description as read from a config file.
struct SolveConfig {
  PlanarDomain domain;
  std::string method = "perron";  // or "relaxation"
  SolveOptions options;
  std::vector<double> scan_heights;
  double tol_circle = 1e-3;
  std::string reference;  // "radial-catenoid" enables a closed-form error line
};

SolveConfig read_solve_config(const std::string& path);

}  // namespace maxsurf::io
