#include "spraymom/cli_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "spraymom/errors.hpp"

namespace spraymom {

namespace {

std::string where(const YAML::Node& node, const std::string& source) {
  const YAML::Mark mark = node.Mark();
  if (mark.line < 0) {
    return source;
  }
  return fmt::format("{}:{}", source, mark.line + 1);
}

void reject_unknown(const YAML::Node& node, const std::set<std::string>& allowed,
                    const std::string& section, const std::string& source) {
  if (!node.IsMap()) {
    throw ConfigError(fmt::format("{}: section '{}' must be a mapping", where(node, source), section));
  }
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (allowed.count(key) == 0) {
      throw ConfigError(
          fmt::format("{}: unknown key '{}' in section '{}'", where(kv.first, source), key, section));
    }
  }
}

double read_double(const YAML::Node& node, const std::string& key, const std::string& source) {
  const auto text = node.as<std::string>();
  if (text == "inf" || text == ".inf" || text == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) {
      throw std::invalid_argument(text);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: '{}' expects a number, got '{}'", where(node, source), key, text));
  }
}

std::size_t read_size(const YAML::Node& node, const std::string& key, const std::string& source) {
  const double v = read_double(node, key, source);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
    throw ConfigError(
        fmt::format("{}: '{}' expects a positive integer", where(node, source), key));
  }
  return static_cast<std::size_t>(v);
}

int read_int(const YAML::Node& node, const std::string& key, const std::string& source) {
  const double v = read_double(node, key, source);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ConfigError(fmt::format("{}: '{}' expects an integer", where(node, source), key));
  }
  return static_cast<int>(v);
}

template <std::size_t N>
std::array<double, N> read_array(const YAML::Node& node, const std::string& key,
                                 const std::string& source) {
  if (!node.IsSequence() || node.size() != N) {
    throw ConfigError(
        fmt::format("{}: '{}' expects a list of {} numbers", where(node, source), key, N));
  }
  std::array<double, N> out{};
  for (std::size_t k = 0; k < N; ++k) {
    out[k] = read_double(node[k], key, source);
  }
  return out;
}

Boundary parse_boundary(const std::string& s, const YAML::Node& node, const std::string& source) {
  if (s == "periodic") {
    return Boundary::periodic;
  }
  if (s == "outflow") {
    return Boundary::outflow;
  }
  throw ConfigError(fmt::format("{}: unknown boundary '{}'", where(node, source), s));
}

std::string_view boundary_name(Boundary b) { return b == Boundary::periodic ? "periodic" : "outflow"; }

EvaporationLaw::Kind parse_law(const std::string& s, const YAML::Node& node,
                               const std::string& source) {
  if (s == "d2") {
    return EvaporationLaw::Kind::d2;
  }
  if (s == "linear") {
    return EvaporationLaw::Kind::linear;
  }
  throw ConfigError(fmt::format("{}: unknown evaporation law '{}' (d2 or linear)", where(node, source), s));
}

std::string_view law_name(EvaporationLaw::Kind k) {
  return k == EvaporationLaw::Kind::linear ? "linear" : "d2";
}

GasField parse_gas(const std::string& s, const YAML::Node& node, const std::string& source) {
  if (s == "none") {
    return GasField::none;
  }
  if (s == "taylor_green") {
    return GasField::taylor_green;
  }
  throw ConfigError(fmt::format("{}: unknown gas field '{}'", where(node, source), s));
}

std::string_view gas_name(GasField g) { return g == GasField::taylor_green ? "taylor_green" : "none"; }

SplitKind parse_split(const std::string& s, const YAML::Node& node, const std::string& source) {
  if (s == "strang") {
    return SplitKind::strang;
  }
  if (s == "lie_xy") {
    return SplitKind::lie_xy;
  }
  if (s == "lie_yx") {
    return SplitKind::lie_yx;
  }
  throw ConfigError(fmt::format("{}: unknown splitting '{}'", where(node, source), s));
}

std::string_view split_name(SplitKind k) {
  switch (k) {
    case SplitKind::strang:
      return "strang";
    case SplitKind::lie_xy:
      return "lie_xy";
    case SplitKind::lie_yx:
      return "lie_yx";
  }
  return "strang";
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  return fmt::format("{:.17g}", v);
}

CaseConfig parse_config_string(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
  if (!root.IsMap()) {
    throw ConfigError(fmt::format("{}: expected a mapping at the top level", source));
  }
  reject_unknown(root, {"case", "basis", "grid", "time", "physics", "schemes", "output", "initial"},
                 "<top>", source);
  if (!root["case"]) {
    throw ConfigError(fmt::format("{}: missing required key 'case'", source));
  }

  CaseConfig cfg;
  try {
    cfg = default_config(parse_case_id(root["case"].as<std::string>()));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", where(root["case"], source), e.what()));
  }

  try {
    if (const YAML::Node n = root["basis"]) {
      cfg.basis = parse_basis(n.as<std::string>());
      if (cfg.basis.kind == BasisKind::integer) {
        cfg.schemes.neg_count = 0;
      }
    }
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}: {}", where(root["basis"], source), e.what()));
  }

  if (const YAML::Node g = root["grid"]) {
    reject_unknown(g, {"nx", "ny", "x_min", "x_max", "y_min", "y_max", "boundary"}, "grid", source);
    if (g["nx"]) cfg.grid.nx = read_size(g["nx"], "nx", source);
    if (g["ny"]) cfg.grid.ny = read_size(g["ny"], "ny", source);
    if (g["x_min"]) cfg.grid.x_min = read_double(g["x_min"], "x_min", source);
    if (g["x_max"]) cfg.grid.x_max = read_double(g["x_max"], "x_max", source);
    if (g["y_min"]) cfg.grid.y_min = read_double(g["y_min"], "y_min", source);
    if (g["y_max"]) cfg.grid.y_max = read_double(g["y_max"], "y_max", source);
    if (g["boundary"]) {
      cfg.grid.boundary = parse_boundary(g["boundary"].as<std::string>(), g["boundary"], source);
    }
  }
  if (const YAML::Node t = root["time"]) {
    reject_unknown(t, {"dt", "cfl", "t_end"}, "time", source);
    if (t["dt"]) cfg.time.dt = read_double(t["dt"], "dt", source);
    if (t["cfl"]) cfg.time.cfl = read_double(t["cfl"], "cfl", source);
    if (t["t_end"]) cfg.time.t_end = read_double(t["t_end"], "t_end", source);
  }
  if (const YAML::Node p = root["physics"]) {
    reject_unknown(p, {"law", "K", "a", "b", "theta", "gas"}, "physics", source);
    if (p["law"]) cfg.physics.law = parse_law(p["law"].as<std::string>(), p["law"], source);
    if (p["K"]) cfg.physics.K = read_double(p["K"], "K", source);
    if (p["a"]) cfg.physics.a = read_double(p["a"], "a", source);
    if (p["b"]) cfg.physics.b = read_double(p["b"], "b", source);
    if (p["theta"]) cfg.physics.theta = read_double(p["theta"], "theta", source);
    if (p["gas"]) cfg.physics.gas = parse_gas(p["gas"].as<std::string>(), p["gas"], source);
  }
  if (const YAML::Node s = root["schemes"]) {
    reject_unknown(s,
                   {"transport_order", "evaporation", "neg_count", "maxent_epsilon",
                    "maxent_max_iter", "splitting"},
                   "schemes", source);
    if (s["transport_order"]) {
      cfg.schemes.transport_order = read_int(s["transport_order"], "transport_order", source);
    }
    if (s["evaporation"]) {
      const auto e = s["evaporation"].as<std::string>();
      if (e == "nemo") {
        cfg.schemes.evaporation = EvaporationScheme::nemo;
      } else if (e == "fully_kinetic") {
        cfg.schemes.evaporation = EvaporationScheme::fully_kinetic;
      } else {
        throw ConfigError(fmt::format("{}: unknown evaporation scheme '{}'",
                                      where(s["evaporation"], source), e));
      }
    }
    if (s["neg_count"]) cfg.schemes.neg_count = read_int(s["neg_count"], "neg_count", source);
    if (s["maxent_epsilon"]) {
      cfg.schemes.maxent_epsilon = read_double(s["maxent_epsilon"], "maxent_epsilon", source);
    }
    if (s["maxent_max_iter"]) {
      cfg.schemes.maxent_max_iter = read_int(s["maxent_max_iter"], "maxent_max_iter", source);
    }
    if (s["splitting"]) {
      cfg.schemes.splitting = parse_split(s["splitting"].as<std::string>(), s["splitting"], source);
    }
  }
  if (const YAML::Node o = root["output"]) {
    reject_unknown(o, {"directory", "snapshot_times"}, "output", source);
    if (o["directory"]) cfg.output.directory = o["directory"].as<std::string>();
    if (const YAML::Node st = o["snapshot_times"]) {
      if (!st.IsSequence()) {
        throw ConfigError(fmt::format("{}: snapshot_times must be a list", where(st, source)));
      }
      cfg.output.snapshot_times.clear();
      for (const auto& v : st) {
        cfg.output.snapshot_times.push_back(read_double(v, "snapshot_times", source));
      }
    }
  }
  if (const YAML::Node in = root["initial"]) {
    reject_unknown(in, {"moments", "velocity"}, "initial", source);
    if (in["moments"]) cfg.initial.moments = read_array<kMomentCount>(in["moments"], "moments", source);
    if (in["velocity"]) cfg.initial.velocity = read_array<2>(in["velocity"], "velocity", source);
  }

  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", source, e.what()));
  }
  return cfg;
}

CaseConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path.string());
}

std::string serialize_config(const CaseConfig& cfg) {
  std::string out;
  auto line = [&out](std::string_view s) {
    out += s;
    out += '\n';
  };
  const auto d = format_double;
  line(fmt::format("case: {}", to_string(cfg.case_id)));
  line(fmt::format("basis: {}", cfg.basis.name()));
  line("grid:");
  line(fmt::format("  nx: {}", cfg.grid.nx));
  line(fmt::format("  ny: {}", cfg.grid.ny));
  line(fmt::format("  x_min: {}", d(cfg.grid.x_min)));
  line(fmt::format("  x_max: {}", d(cfg.grid.x_max)));
  line(fmt::format("  y_min: {}", d(cfg.grid.y_min)));
  line(fmt::format("  y_max: {}", d(cfg.grid.y_max)));
  line(fmt::format("  boundary: {}", boundary_name(cfg.grid.boundary)));
  line("time:");
  line(fmt::format("  dt: {}", d(cfg.time.dt)));
  line(fmt::format("  cfl: {}", d(cfg.time.cfl)));
  line(fmt::format("  t_end: {}", d(cfg.time.t_end)));
  line("physics:");
  line(fmt::format("  law: {}", law_name(cfg.physics.law)));
  line(fmt::format("  K: {}", d(cfg.physics.K)));
  line(fmt::format("  a: {}", d(cfg.physics.a)));
  line(fmt::format("  b: {}", d(cfg.physics.b)));
  line(fmt::format("  theta: {}", d(cfg.physics.theta)));
  line(fmt::format("  gas: {}", gas_name(cfg.physics.gas)));
  line("schemes:");
  line(fmt::format("  transport_order: {}", cfg.schemes.transport_order));
  line(fmt::format("  evaporation: {}", cfg.schemes.evaporation == EvaporationScheme::nemo
                                            ? "nemo"
                                            : "fully_kinetic"));
  line(fmt::format("  neg_count: {}", cfg.schemes.neg_count));
  line(fmt::format("  maxent_epsilon: {}", d(cfg.schemes.maxent_epsilon)));
  line(fmt::format("  maxent_max_iter: {}", cfg.schemes.maxent_max_iter));
  line(fmt::format("  splitting: {}", split_name(cfg.schemes.splitting)));
  line("output:");
  line(fmt::format("  directory: \"{}\"", cfg.output.directory));
  std::string times;
  for (std::size_t k = 0; k < cfg.output.snapshot_times.size(); ++k) {
    times += (k ? ", " : "") + d(cfg.output.snapshot_times[k]);
  }
  line(fmt::format("  snapshot_times: [{}]", times));
  line("initial:");
  const MomentArray& m = cfg.initial.moments;
  line(fmt::format("  moments: [{}, {}, {}, {}]", d(m[0]), d(m[1]), d(m[2]), d(m[3])));
  line(fmt::format("  velocity: [{}, {}]", d(cfg.initial.velocity[0]), d(cfg.initial.velocity[1])));
  return out;
}

std::filesystem::path resolve_output_dir(const CaseConfig& cfg, const std::string& override_dir) {
  if (!override_dir.empty()) {
    return override_dir;
  }
  if (const char* env = std::getenv("SPRAYMOM_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return cfg.output.directory;
}

void write_snapshot(std::ostream& os, const Grid2D& grid, const CaseConfig& cfg, double t,
                    double dt) {
  os << fmt::format("# case={} basis={} t={} dt={} nx={} ny={}\n", to_string(cfg.case_id),
                    cfg.basis.name(), format_double(t), format_double(dt), grid.nx, grid.ny);
  const bool frac = cfg.basis.kind == BasisKind::fractional;
  os << (frac ? "# i j x y m0 m1/2 m1 m3/2 u v alpha Sigma SigmaH SigmaG\n"
              : "# i j x y m0 m1 m2 m3 u v alpha Sigma SigmaH SigmaG\n");
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const CellState& c = grid.at(i, j);
      const GeometricOutputs g = cell_geometry(c.moments);
      os << fmt::format("{} {} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} "
                        "{:.17g} {:.17g} {:.17g} {:.17g}\n",
                        i, j, grid.xc(i), grid.yc(j), c.moments[0], c.moments[1], c.moments[2],
                        c.moments[3], c.velocity[0], c.velocity[1], g.volume_fraction,
                        g.interface_area, g.mean_curvature, g.gauss_curvature);
    }
  }
}

std::filesystem::path write_snapshot_file(const std::filesystem::path& dir, const Grid2D& grid,
                                          const CaseConfig& cfg, double t, double dt) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path =
      dir / fmt::format("{}_{}_t{:.6f}.dat", to_string(cfg.case_id), cfg.basis.name(), t);
  std::ofstream out(path);
  if (!out) {
    throw Error(fmt::format("cannot write snapshot '{}'", path.string()));
  }
  write_snapshot(out, grid, cfg, t, dt);
  return path;
}

void write_summary(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& entries) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw Error(fmt::format("cannot write summary '{}'", path.string()));
  }
  for (const auto& [k, v] : entries) {
    out << k << " = " << v << '\n';
  }
}

}  // namespace spraymom
