#include "odt/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace odt {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

struct Ini {
  // section -> key -> value, plus origin for error messages
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string origin;

  double num(const std::string& sec, const std::string& key, const std::string& value) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      throw ValidationError(origin + ": [" + sec + "] " + key + ": not a number: '" + value + "'");
    }
  }

  long integer(const std::string& sec, const std::string& key, const std::string& value) const {
    long v = 0;
    const auto* first = value.data();
    const auto* last = value.data() + value.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
      throw ValidationError(origin + ": [" + sec + "] " + key + ": not an integer: '" + value +
                            "'");
    return v;
  }

  std::vector<double> numbers(const std::string& sec, const std::string& key,
                              const std::string& value) const {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(num(sec, key, trim(item)));
    return out;
  }
};

Ini parse_ini(const std::string& text, const std::string& origin) {
  Ini ini;
  ini.origin = origin;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // '#' starts a comment anywhere; ';' only at the start of a line, since
    // it separates direction triples inside values.
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      ini.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": key outside any section");
    ini.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return ini;
}

void apply_grid(RunConfig& cfg, const Ini& ini, const std::string& sec, const std::string& key,
                const std::string& value) {
  if (key == "nx") cfg.grid.nx = int(ini.integer(sec, key, value));
  else if (key == "ny") cfg.grid.ny = int(ini.integer(sec, key, value));
  else if (key == "nz") cfg.grid.nz = int(ini.integer(sec, key, value));
  else if (key == "dx") cfg.grid.dx = ini.num(sec, key, value);
  else if (key == "dy") cfg.grid.dy = ini.num(sec, key, value);
  else if (key == "dz") cfg.grid.dz = ini.num(sec, key, value);
  else throw ValidationError(ini.origin + ": unknown key [" + sec + "] " + key);
}

void apply_optics(RunConfig& cfg, const Ini& ini, const std::string& sec, const std::string& key,
                  const std::string& value) {
  auto& o = cfg.optics;
  if (key == "wavelength") o.wavelength = ini.num(sec, key, value);
  else if (key == "n_medium") o.n_medium = ini.num(sec, key, value);
  else if (key == "na_illum") o.na_illum = ini.num(sec, key, value);
  else if (key == "na_detect") o.na_detect = ini.num(sec, key, value);
  else if (key == "n_angles") o.n_angles = int(ini.integer(sec, key, value));
  else if (key == "pattern") {
    if (value == "circle") o.pattern = OpticsGeometry::Pattern::circle;
    else if (value == "spiral") o.pattern = OpticsGeometry::Pattern::spiral;
    else if (value == "custom") o.pattern = OpticsGeometry::Pattern::custom;
    else throw ValidationError(ini.origin + ": [optics] pattern: expected circle|spiral|custom");
  } else if (key == "directions") {
    // semicolon-separated triples: "x,y,z; x,y,z; ..."
    std::stringstream ss(value);
    std::string triple;
    o.directions.clear();
    while (std::getline(ss, triple, ';')) {
      const auto v = ini.numbers(sec, key, trim(triple));
      if (v.size() != 3)
        throw ValidationError(ini.origin + ": [optics] directions: expected x,y,z triples");
      o.directions.push_back({v[0], v[1], v[2]});
    }
  } else {
    throw ValidationError(ini.origin + ": unknown key [" + sec + "] " + key);
  }
}

void apply_phantom(RunConfig& cfg, const Ini& ini, const std::string& sec, const std::string& key,
                   const std::string& value) {
  auto& p = cfg.phantom;
  auto triple = [&](std::array<double, 3>& dst) {
    const auto v = ini.numbers(sec, key, value);
    if (v.size() != 3)
      throw ValidationError(ini.origin + ": [phantom] " + key + ": expected x,y,z");
    dst = {v[0], v[1], v[2]};
  };
  if (key == "kind") {
    if (value == "sphere") p.kind = PhantomSpec::Kind::sphere;
    else if (value == "sphere_pair") p.kind = PhantomSpec::Kind::sphere_pair;
    else if (value == "shell_cell") p.kind = PhantomSpec::Kind::shell_cell;
    else throw ValidationError(ini.origin + ": [phantom] kind: expected sphere|sphere_pair|shell_cell");
  } else if (key == "center") triple(p.center);
  else if (key == "radius") p.radius = ini.num(sec, key, value);
  else if (key == "contrast") p.contrast = ini.num(sec, key, value);
  else if (key == "center2") triple(p.center2);
  else if (key == "radius2") p.radius2 = ini.num(sec, key, value);
  else if (key == "contrast2") p.contrast2 = ini.num(sec, key, value);
  else if (key == "shell_thickness") p.shell_thickness = ini.num(sec, key, value);
  else if (key == "shell_contrast") p.shell_contrast = ini.num(sec, key, value);
  else if (key == "granule_count") p.granule_count = int(ini.integer(sec, key, value));
  else if (key == "granule_radius") p.granule_radius = ini.num(sec, key, value);
  else if (key == "granule_contrast") p.granule_contrast = ini.num(sec, key, value);
  else if (key == "seed") p.seed = std::uint64_t(ini.integer(sec, key, value));
  else if (key == "background") p.background = ini.num(sec, key, value);
  else if (key == "edge") {
    if (value == "hard") p.edge = PhantomSpec::Edge::hard;
    else if (value == "smooth") p.edge = PhantomSpec::Edge::smooth;
    else throw ValidationError(ini.origin + ": [phantom] edge: expected hard|smooth");
  } else if (key == "edge_width") p.edge_width_voxels = ini.num(sec, key, value);
  else throw ValidationError(ini.origin + ": unknown key [" + sec + "] " + key);
}

void apply_solver(RunConfig& cfg, const Ini& ini, const std::string& sec, const std::string& key,
                  const std::string& value) {
  auto& s = cfg.solver;
  if (key == "preset") {
    cfg.solver_preset = value;
    s = SolverParams::preset(value);
  } else if (key == "outer") s.n_outer = int(ini.integer(sec, key, value));
  else if (key == "inner") s.n_inner = int(ini.integer(sec, key, value));
  else if (key == "mu") s.mu = ini.num(sec, key, value);
  else if (key == "tau") s.tau = ini.num(sec, key, value);
  else if (key == "gamma") s.gamma = ini.num(sec, key, value);
  else if (key == "nonneg") {
    if (value == "project") s.nonneg = NonnegMode::project;
    else if (value == "paper_shrink") s.nonneg = NonnegMode::paper_shrink;
    else throw ValidationError(ini.origin + ": [solver] nonneg: expected project|paper_shrink");
  } else if (key == "tol_fupdate") s.tol_fupdate = ini.num(sec, key, value);
  else throw ValidationError(ini.origin + ": unknown key [" + sec + "] " + key);
}

void apply_patch(RunConfig& cfg, const Ini& ini, const std::string& sec, const std::string& key,
                 const std::string& value) {
  if (key == "patch") cfg.patch.patch = int(ini.integer(sec, key, value));
  else if (key == "stride") cfg.patch.stride = int(ini.integer(sec, key, value));
  else if (key == "window") {
    if (value == "partition_of_unity")
      cfg.patch.window = PatchLayout::Window::partition_of_unity;
    else if (value == "paper_literal") cfg.patch.window = PatchLayout::Window::paper_literal;
    else
      throw ValidationError(ini.origin +
                            ": [patch] window: expected partition_of_unity|paper_literal");
  } else if (key == "enabled") {
    if (value == "true" || value == "1") cfg.patched = true;
    else if (value == "false" || value == "0") cfg.patched = false;
    else throw ValidationError(ini.origin + ": [patch] enabled: expected true|false");
  } else throw ValidationError(ini.origin + ": unknown key [" + sec + "] " + key);
}

void apply_output(RunConfig& cfg, const Ini& ini, const std::string& sec, const std::string& key,
                  const std::string& value) {
  if (key == "dir") cfg.output_dir = value;
  else if (key == "threads") cfg.threads = int(ini.integer(sec, key, value));
  else if (key == "zrange") cfg.z_range_um = ini.num(sec, key, value);
  else throw ValidationError(ini.origin + ": unknown key [" + sec + "] " + key);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  const Ini ini = parse_ini(text, origin);
  RunConfig cfg;
  // A preset is a base that explicit solver keys refine, so apply it first.
  if (auto sec = ini.sections.find("solver"); sec != ini.sections.end())
    if (auto preset = sec->second.find("preset"); preset != sec->second.end())
      apply_solver(cfg, ini, "solver", "preset", preset->second);
  for (const auto& [sec, entries] : ini.sections) {
    for (const auto& [key, value] : entries) {
      if (sec == "solver" && key == "preset") continue;
      if (sec == "grid") apply_grid(cfg, ini, sec, key, value);
      else if (sec == "optics") apply_optics(cfg, ini, sec, key, value);
      else if (sec == "phantom") apply_phantom(cfg, ini, sec, key, value);
      else if (sec == "solver") apply_solver(cfg, ini, sec, key, value);
      else if (sec == "patch") apply_patch(cfg, ini, sec, key, value);
      else if (sec == "output") apply_output(cfg, ini, sec, key, value);
      else throw ValidationError(origin + ": unknown section [" + sec + "]");
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

}  // namespace odt
