#include "spraymom/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "spraymom/cli_io.hpp"
#include "spraymom/errors.hpp"
#include "spraymom/parallel.hpp"

namespace spraymom {

namespace {

constexpr double kVacuumFraction = 1e-12;

// exp(-20 (sqrt S - 1/4)^2 (sqrt S + 1)) written as a maximum-entropy density.
MaxEntDensity smooth_ndf(ExponentBasis basis) {
  return {basis, {1.25, -8.75, 10.0, 20.0}};
}

double smooth_ndf_value(double s) {
  return evaluate_density(smooth_ndf(ExponentBasis::fractional()), s);
}

// int_lo^hi S^q dS
double power_integral(double q, double lo, double hi) {
  return (std::pow(hi, q + 1.0) - std::pow(lo, q + 1.0)) / (q + 1.0);
}

// Size profile of the 1D convergence case at position x (without the spatial Gaussian).
double convergence_size_profile(double x, double s) {
  const double d = std::sqrt(s) - 0.5 * (1.0 - x);
  return std::exp(-d * d / 0.3);
}

double convergence_spatial(double x) {
  const double d = x - 0.25;
  return 10.0 * std::exp(-d * d / 0.01);
}

MomentArray convergence_moments(double x, ExponentBasis basis) {
  MomentArray m{};
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    m[k] = convergence_spatial(x) *
           size_moment([x](double s) { return convergence_size_profile(x, s); }, basis.exponent(k),
                       0.0, 1.0, 48);
  }
  return m;
}

double convergence_velocity(double x) { return x < 0.5 ? 0.5 - x : 0.0; }

double crossing_m0(double x) {
  const double a = (x - 0.25) / 0.1;
  const double b = (x - 0.75) / 0.1;
  return std::exp(-a * a) + std::exp(-b * b);
}

double crossing_velocity(double x) { return x < 0.5 ? 0.5 : -0.5; }

CellState make_cell(ExponentBasis basis, const MomentArray& m, const Vec2& velocity) {
  CellState c;
  c.moments.basis = basis;
  c.moments.values = m;
  c.velocity = velocity;
  const double unit = m[basis.unit_order_index()];
  c.momentum = {unit * velocity[0], unit * velocity[1]};
  return c;
}

// Cell average over [a, b] of moments and momentum of a 1D profile, 8-point Gauss-Legendre split at
// the velocity kink x = 0.5.
CellState cell_average_1d(double a, double b, ExponentBasis basis,
                          const std::function<MomentArray(double)>& moments,
                          const std::function<double(double)>& velocity) {
  std::vector<std::pair<double, double>> parts;
  if (a < 0.5 && b > 0.5) {
    parts = {{a, 0.5}, {0.5, b}};
  } else {
    parts = {{a, b}};
  }
  MomentArray m{};
  double momentum = 0.0;
  const std::size_t unit = basis.unit_order_index();
  for (const auto& [lo, hi] : parts) {
    const QuadratureRule rule = gauss_legendre(8, lo, hi);
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const MomentArray mx = moments(rule.nodes[g]);
      for (std::size_t k = 0; k < kMomentCount; ++k) {
        m[k] += rule.weights[g] * mx[k];
      }
      momentum += rule.weights[g] * mx[unit] * velocity(rule.nodes[g]);
    }
  }
  const double len = b - a;
  for (double& v : m) {
    v /= len;
  }
  momentum /= len;
  CellState c;
  c.moments.basis = basis;
  c.moments.values = m;
  c.momentum = {momentum, 0.0};
  c.velocity = {m[unit] > 0.0 ? momentum / m[unit] : 0.0, 0.0};
  return c;
}

double reference_m0(const Grid2D& g) {
  double r = 0.0;
  for (const CellState& c : g.cells) {
    r = std::max(r, c.moments.m0());
  }
  return r;
}

MomentArray totals(const Grid2D& g) {
  MomentArray t{};
  const double vol = g.dx * g.dy;
  for (const CellState& c : g.cells) {
    for (std::size_t k = 0; k < kMomentCount; ++k) {
      t[k] += c.moments[k] * vol;
    }
  }
  return t;
}

// Exact 0D reference: the initial density of the case transported along characteristics.
std::function<double(double)> exact_initial_density(const CaseConfig& cfg,
                                                    std::vector<double>& breakpoints,
                                                    const MomentVector& m0) {
  switch (cfg.case_id) {
    case CaseId::evap0d_smooth:
    case CaseId::evap0d_linear:
      return smooth_ndf_value;
    default: {
      // the exact solution is taken from the maximum-entropy reconstruction of the initial moments
      const MaxEntResult me = maxent_reconstruct(m0);
      const MaxEntDensity d = me.density;
      breakpoints.clear();
      return [d](double s) { return evaluate_density(d, s); };
    }
  }
}

double relative_error(double a, double b, double scale) {
  return scale > 0.0 ? std::abs(a - b) / scale : std::abs(a - b);
}

}  // namespace

std::string_view to_string(CaseId id) {
  switch (id) {
    case CaseId::evap0d_smooth:
      return "evap0d_smooth";
    case CaseId::evap0d_square:
      return "evap0d_square";
    case CaseId::evap0d_linear:
      return "evap0d_linear";
    case CaseId::transport1d_convergence:
      return "transport1d_convergence";
    case CaseId::crossing1d:
      return "crossing1d";
    case CaseId::taylor_green_2d:
      return "taylor_green_2d";
    case CaseId::custom:
      return "custom";
  }
  return "?";
}

CaseId parse_case_id(std::string_view name) {
  for (CaseId id : {CaseId::evap0d_smooth, CaseId::evap0d_square, CaseId::evap0d_linear,
                    CaseId::transport1d_convergence, CaseId::crossing1d, CaseId::taylor_green_2d,
                    CaseId::custom}) {
    if (to_string(id) == name) {
      return id;
    }
  }
  throw ConfigError(fmt::format("unknown case id '{}'", name));
}

EvaporationLaw CaseConfig::law() const {
  switch (physics.law) {
    case EvaporationLaw::Kind::d2:
      return EvaporationLaw::d2(physics.K);
    case EvaporationLaw::Kind::linear:
      return EvaporationLaw::linear(physics.a, physics.b);
    case EvaporationLaw::Kind::custom:
      break;
  }
  throw ConfigError("custom evaporation laws cannot be described in a case file");
}

CaseConfig default_config(CaseId id) {
  CaseConfig c;
  c.case_id = id;
  c.output.directory = "out";
  switch (id) {
    case CaseId::evap0d_smooth:
      c.time.dt = 0.002;
      c.time.t_end = 0.2;
      c.physics.K = 1.0;
      break;
    case CaseId::evap0d_square:
      c.time.dt = 6e-3;
      c.time.t_end = 0.6;
      c.physics.K = 1.0;
      break;
    case CaseId::evap0d_linear:
      c.time.dt = 2e-3;
      c.time.t_end = 0.6;
      c.physics.law = EvaporationLaw::Kind::linear;
      c.physics.a = 0.5;
      c.physics.b = 1.0;
      break;
    case CaseId::transport1d_convergence:
      c.grid.nx = 128;
      c.grid.boundary = Boundary::outflow;
      c.time.t_end = 0.8;
      break;
    case CaseId::crossing1d:
      c.grid.nx = 128;
      c.grid.boundary = Boundary::periodic;
      c.time.t_end = 1.2;
      break;
    case CaseId::taylor_green_2d:
      c.grid.nx = 128;
      c.grid.ny = 128;
      c.grid.boundary = Boundary::periodic;
      c.time.t_end = 1.0;
      c.physics.K = 0.5;
      c.physics.theta = 0.1;
      c.physics.gas = GasField::taylor_green;
      break;
    case CaseId::custom:
      c.time.dt = 1e-3;
      c.time.t_end = 0.1;
      c.physics.K = 1.0;
      c.initial.moments = {1.0, 2.0 / 3.0, 0.5, 0.4};
      break;
  }
  return c;
}

void validate(const CaseConfig& cfg) {
  if (cfg.grid.nx < 1 || cfg.grid.ny < 1) {
    throw ConfigError("grid sizes must be positive");
  }
  if (!(cfg.grid.x_min < cfg.grid.x_max) || !(cfg.grid.y_min < cfg.grid.y_max)) {
    throw ConfigError("grid extents must satisfy min < max");
  }
  if (!(cfg.time.t_end > 0.0)) {
    throw ConfigError("time.t_end must be positive");
  }
  if (cfg.time.dt < 0.0) {
    throw ConfigError("time.dt must be non-negative (0 selects the CFL step)");
  }
  if (!(cfg.time.cfl > 0.0) || cfg.time.cfl > 1.0) {
    throw ConfigError("time.cfl must lie in (0, 1]");
  }
  if (cfg.zero_dimensional() && cfg.time.dt == 0.0) {
    throw ConfigError("0D cases need an explicit time.dt");
  }
  if (cfg.schemes.transport_order != 1 && cfg.schemes.transport_order != 2) {
    throw ConfigError("schemes.transport_order must be 1 or 2");
  }
  if (cfg.schemes.neg_count < 0 || cfg.schemes.neg_count > 2) {
    throw ConfigError(
        fmt::format("schemes.neg_count must be 0, 1 or 2, got {}", cfg.schemes.neg_count));
  }
  if (cfg.basis.kind == BasisKind::integer && cfg.schemes.neg_count != 0) {
    throw ConfigError("the integer basis supports only schemes.neg_count = 0");
  }
  if (!(cfg.schemes.maxent_epsilon > 0.0) || cfg.schemes.maxent_max_iter < 1) {
    throw ConfigError("maximum-entropy tolerance and iteration cap must be positive");
  }
  if (cfg.physics.K < 0.0 || cfg.physics.a < 0.0 || cfg.physics.b < 0.0) {
    throw ConfigError("evaporation coefficients must be non-negative");
  }
  if (!(cfg.physics.theta > 0.0)) {
    throw ConfigError("physics.theta must be positive (use inf to disable drag)");
  }
  if (cfg.schemes.evaporation == EvaporationScheme::fully_kinetic &&
      std::isfinite(cfg.physics.theta)) {
    throw ConfigError("the fully-kinetic scheme has no node velocities; drag needs nemo");
  }
  if (cfg.case_id == CaseId::custom && !cfg.zero_dimensional()) {
    throw ConfigError("the custom case is a single cell (grid 1 x 1)");
  }
  for (double t : cfg.output.snapshot_times) {
    if (t < 0.0 || t > cfg.time.t_end * (1.0 + 1e-12)) {
      throw ConfigError(fmt::format("snapshot time {} outside [0, t_end]", t));
    }
  }
}

double ErrorReport::max_error() const {
  return *std::max_element(max_relative_error.begin(), max_relative_error.end());
}

double ErrorReport::max_secondary() const {
  return *std::max_element(max_secondary_error.begin(), max_secondary_error.end());
}

Vec2 gas_velocity(GasField field, double x, double y) {
  if (field == GasField::taylor_green) {
    const double tp = 2.0 * std::numbers::pi;
    return {std::sin(tp * x) * std::cos(tp * y), -std::cos(tp * x) * std::sin(tp * y)};
  }
  return {0.0, 0.0};
}

Grid2D initial_grid(const CaseConfig& cfg) {
  Grid2D g;
  g.nx = cfg.grid.nx;
  g.ny = cfg.grid.ny;
  g.x0 = cfg.grid.x_min;
  g.y0 = cfg.grid.y_min;
  g.dx = (cfg.grid.x_max - cfg.grid.x_min) / static_cast<double>(g.nx);
  g.dy = (cfg.grid.y_max - cfg.grid.y_min) / static_cast<double>(g.ny);
  g.boundary = cfg.grid.boundary;
  g.basis = cfg.basis;
  g.cells.resize(g.nx * g.ny);
  const ExponentBasis basis = cfg.basis;

  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double xa = g.x0 + static_cast<double>(i) * g.dx;
      const double xb = xa + g.dx;
      CellState& c = g.at(i, j);
      switch (cfg.case_id) {
        case CaseId::evap0d_smooth:
        case CaseId::evap0d_linear:
          c = make_cell(basis,
                        exact_kinetic_moments(smooth_ndf_value, EvaporationLaw::d2(0.0), 0.0, basis)
                            .values,
                        {0.0, 0.0});
          break;
        case CaseId::evap0d_square: {
          MomentArray m{};
          for (std::size_t k = 0; k < kMomentCount; ++k) {
            m[k] = power_integral(basis.exponent(k), 0.1, 0.6);
          }
          c = make_cell(basis, m, {0.0, 0.0});
          break;
        }
        case CaseId::transport1d_convergence:
          c = cell_average_1d(
              xa, xb, basis, [basis](double x) { return convergence_moments(x, basis); },
              convergence_velocity);
          break;
        case CaseId::crossing1d:
          c = cell_average_1d(
              xa, xb, basis,
              [basis](double x) {
                MomentArray m{};
                for (std::size_t k = 0; k < kMomentCount; ++k) {
                  m[k] = crossing_m0(x) / (basis.exponent(k) + 1.0);
                }
                return m;
              },
              crossing_velocity);
          break;
        case CaseId::taylor_green_2d: {
          const double x = g.xc(i);
          const double y = g.yc(j);
          const double r = 0.1;
          const double d2 = (x - 0.15) * (x - 0.15) + (y - 0.15) * (y - 0.15);
          MomentArray m{};
          if (d2 < 2.0 * r * r) {
            const double spatial = std::exp(-d2 / (r * r));
            for (std::size_t k = 0; k < kMomentCount; ++k) {
              m[k] = spatial * power_integral(basis.exponent(k), 0.25, 0.75);
            }
          }
          c = make_cell(basis, m, gas_velocity(cfg.physics.gas, x, y));
          if (m[0] == 0.0) {
            c.velocity = {0.0, 0.0};
            c.momentum = {0.0, 0.0};
          }
          break;
        }
        case CaseId::custom:
          c = make_cell(basis, cfg.initial.moments, cfg.initial.velocity);
          break;
      }
    }
  }
  g.vacuum_m0 = kVacuumFraction * reference_m0(g);
  return g;
}

RunArtifacts run_case(const CaseConfig& cfg, const RunOptions& options) {
  validate(cfg);
  RunArtifacts art;
  Grid2D grid = initial_grid(cfg);
  const EvaporationLaw law = cfg.law();
  const bool has_source = !law.is_null() || std::isfinite(cfg.physics.theta);
  const bool moving = !cfg.zero_dimensional();
  const int threads = std::max(options.threads, 1);

  // time step
  double dt = cfg.time.dt;
  if (dt == 0.0) {
    double speed = std::max(max_speed(grid.cells, 0, grid.vacuum_m0),
                            max_speed(grid.cells, 1, grid.vacuum_m0));
    if (cfg.physics.gas == GasField::taylor_green && std::isfinite(cfg.physics.theta)) {
      speed = std::max(speed, 1.0);
    }
    const double h = std::min(grid.nx > 1 ? grid.dx : INFINITY, grid.ny > 1 ? grid.dy : INFINITY);
    dt = speed > 0.0 ? cfg.time.cfl * h / speed : cfg.time.t_end;
  }
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.time.t_end / dt - 1e-9));
  dt = cfg.time.t_end / static_cast<double>(steps);
  art.dt = dt;
  art.initial_totals = totals(grid);

  std::filesystem::path out_dir;
  if (options.write_snapshots) {
    out_dir = resolve_output_dir(cfg, options.output_dir);
    std::filesystem::create_directories(out_dir);
  }
  std::vector<bool> snapshot_done(cfg.output.snapshot_times.size(), false);
  auto maybe_snapshot = [&](double t) {
    if (!options.write_snapshots) {
      return;
    }
    for (std::size_t s = 0; s < snapshot_done.size(); ++s) {
      if (!snapshot_done[s] && std::abs(t - cfg.output.snapshot_times[s]) <= 0.5 * dt + 1e-12) {
        snapshot_done[s] = true;
        art.snapshot_files.push_back(write_snapshot_file(out_dir, grid, cfg, t, dt).string());
      }
    }
  };
  maybe_snapshot(0.0);

  // 0D references
  MomentVector fk_state = grid.cells[0].moments;
  std::optional<MaxEntDensity> fk_warm;
  std::function<double(double)> exact_n0;
  std::vector<double> breakpoints;
  const MomentArray m_initial = grid.cells[0].moments.values;
  if (!moving) {
    art.report.reference = "fully_kinetic";
    art.report.secondary_reference = "exact";
    exact_n0 = exact_initial_density(cfg, breakpoints, grid.cells[0].moments);
  }

  std::vector<std::optional<MaxEntDensity>> warm(grid.cells.size());
  std::vector<MomentArray> cell_flux(grid.cells.size());
  std::vector<std::size_t> cell_warnings(grid.cells.size(), 0);

  NemoOptions base_options;
  base_options.neg_count = cfg.schemes.neg_count;
  base_options.maxent.epsilon = cfg.schemes.maxent_epsilon;
  base_options.maxent.max_iter = cfg.schemes.maxent_max_iter;
  base_options.discrete_fallback = moving;

  double t = 0.0;
  for (std::size_t step = 0; step < steps; ++step) {
    const double t_next = dt * static_cast<double>(step + 1);
    try {
      if (moving) {
        if (grid.ny == 1) {
          sweep_2d(grid, 0, dt, cfg.schemes.transport_order, threads);
        } else if (grid.nx == 1) {
          sweep_2d(grid, 1, dt, cfg.schemes.transport_order, threads);
        } else {
          split_step_2d(grid, dt, cfg.schemes.transport_order, cfg.schemes.splitting, threads);
        }
      }
    } catch (const Error& e) {
      throw SimulationError(
          fmt::format("{} at t={} (transport step {}): {}", to_string(cfg.case_id), t, step, e.what()));
    }

    if (has_source) {
      parallel_for(grid.cells.size(), threads, [&](std::size_t idx) {
        CellState& c = grid.cells[idx];
        cell_flux[idx] = {};
        if (c.moments.m0() <= grid.vacuum_m0) {
          return;
        }
        NemoOptions opt = base_options;
        if (warm[idx]) {
          opt.warm_start = &*warm[idx];
        }
        const std::size_t i = idx % grid.nx;
        const std::size_t j = idx / grid.nx;
        try {
          if (cfg.schemes.evaporation == EvaporationScheme::fully_kinetic) {
            EvaporationStepResult r = step_fully_kinetic(c.moments, law, dt, opt);
            c.moments = r.updated;
            c.momentum = {c.moments.unit_order() * c.velocity[0],
                          c.moments.unit_order() * c.velocity[1]};
            cell_flux[idx] = r.disappearance_flux;
            warm[idx] = r.density;
          } else {
            const Vec2 ug = gas_velocity(cfg.physics.gas, grid.xc(i), grid.yc(j));
            DragStepResult r = step_evap_drag(c, law, cfg.physics.theta, dt, ug, opt);
            cell_flux[idx] = r.evaporation.disappearance_flux;
            cell_warnings[idx] += r.evaporation.warnings.size();
            if (r.evaporation.density) {
              warm[idx] = r.evaporation.density;
            }
            c = r.state;
            if (moving) {
              c.velocity = recover_velocity(c.moments, c.momentum, grid.vacuum_m0);
            }
          }
        } catch (const Error& e) {
          throw SimulationError(fmt::format("{} at t={} in cell ({}, {}): {}", to_string(cfg.case_id),
                                            t, i, j, e.what()));
        }
      });
      const double vol = grid.dx * grid.dy;
      for (const MomentArray& f : cell_flux) {
        for (std::size_t k = 0; k < kMomentCount; ++k) {
          art.evaporated_totals[k] += f[k] * vol;
        }
      }
    }
    t = t_next;

    // audits
    for (const CellState& c : grid.cells) {
      bool finite = std::isfinite(c.momentum[0]) && std::isfinite(c.momentum[1]);
      for (double v : c.moments.values) {
        finite = finite && std::isfinite(v);
      }
      if (!finite) {
        ++art.nonfinite_cells;
        continue;
      }
      if (options.audit_realizability && c.moments.m0() > grid.vacuum_m0 &&
          is_realizable(c.moments) == Realizability::outside) {
        ++art.realizability_violations;
      }
    }
    if (!has_source) {
      const MomentArray now = totals(grid);
      for (std::size_t k = 0; k < kMomentCount; ++k) {
        art.max_conservation_drift =
            std::max(art.max_conservation_drift,
                     relative_error(now[k], art.initial_totals[k], std::abs(art.initial_totals[k])));
      }
    }

    if (!moving) {
      // fully-kinetic reference and exact solution at the same instants
      NemoOptions fk_opt = base_options;
      if (fk_warm) {
        fk_opt.warm_start = &*fk_warm;
      }
      const EvaporationStepResult fk = step_fully_kinetic(fk_state, law, dt, fk_opt);
      fk_state = fk.updated;
      if (fk.density) {
        fk_warm = fk.density;
      }
      const MomentVector exact = exact_kinetic_moments(exact_n0, law, t, cfg.basis, breakpoints);
      MomentArray e1{};
      MomentArray e2{};
      for (std::size_t k = 0; k < kMomentCount; ++k) {
        e1[k] = relative_error(grid.cells[0].moments[k], fk_state[k], m_initial[k]);
        e2[k] = relative_error(grid.cells[0].moments[k], exact[k], m_initial[k]);
        art.report.max_relative_error[k] = std::max(art.report.max_relative_error[k], e1[k]);
        art.report.max_secondary_error[k] = std::max(art.report.max_secondary_error[k], e2[k]);
      }
      art.report.times.push_back(t);
      art.report.relative_errors.push_back(e1);
      art.report.secondary_errors.push_back(e2);
    }
    maybe_snapshot(t);
  }
  for (std::size_t w : cell_warnings) {
    art.evaporation_warnings += w;
  }
  art.steps = steps;
  art.final_totals = totals(grid);
  art.final_grid = std::move(grid);
  return art;
}

std::vector<double> convergence_reference_m0(std::size_t nx, double t) {
  if (!(t < 1.0)) {
    throw ArgumentError("the characteristic reference is valid only before trajectories cross (t < 1)");
  }
  const ExponentBasis basis = ExponentBasis::fractional();
  auto m0_initial = [basis](double x) {
    if (x < 0.0 || x > 1.0) {
      return 0.0;
    }
    return convergence_moments(x, basis)[0];
  };
  auto m0_exact = [&](double x) {
    if (x >= 0.5) {
      return m0_initial(x);
    }
    if (x < 0.5 * t) {
      return 0.0;
    }
    const double x0 = (x - 0.5 * t) / (1.0 - t);
    return m0_initial(x0) / (1.0 - t);
  };
  const double dx = 1.0 / static_cast<double>(nx);
  std::vector<double> out(nx, 0.0);
  for (std::size_t i = 0; i < nx; ++i) {
    const double a = static_cast<double>(i) * dx;
    const double b = a + dx;
    std::vector<double> cuts{a};
    for (double c : {0.5 * t, 0.5}) {
      if (c > a && c < b) {
        cuts.push_back(c);
      }
    }
    cuts.push_back(b);
    double sum = 0.0;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      const QuadratureRule rule = gauss_legendre(12, cuts[p], cuts[p + 1]);
      for (std::size_t g = 0; g < rule.size(); ++g) {
        sum += rule.weights[g] * m0_exact(rule.nodes[g]);
      }
    }
    out[i] = sum / dx;
  }
  return out;
}

double fit_order(const std::vector<std::size_t>& grids, const std::vector<double>& errors) {
  if (grids.size() != errors.size() || grids.size() < 2) {
    throw ArgumentError("fit_order: need matching grid and error lists with at least two levels");
  }
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  const double n = static_cast<double>(grids.size());
  for (std::size_t k = 0; k < grids.size(); ++k) {
    const double x = std::log(static_cast<double>(grids[k]));
    const double y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ErrorReport convergence_study(const CaseConfig& base, const std::vector<std::size_t>& grids,
                              int threads) {
  if (base.case_id != CaseId::transport1d_convergence) {
    throw ArgumentError("convergence_study needs the transport1d_convergence case");
  }
  if (grids.size() < 3) {
    throw ArgumentError("convergence_study needs at least three grid levels");
  }
  ErrorReport report;
  report.reference = "characteristics";
  for (std::size_t nx : grids) {
    CaseConfig cfg = base;
    cfg.grid.nx = nx;
    cfg.grid.ny = 1;
    RunOptions opt;
    opt.threads = threads;
    const RunArtifacts art = run_case(cfg, opt);
    const std::vector<double> ref = convergence_reference_m0(nx, cfg.time.t_end);
    const double dx = art.final_grid.dx;
    double l1 = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      l1 += std::abs(art.final_grid.cells[i].moments.m0() - ref[i]) * dx;
    }
    report.grids.push_back(nx);
    report.l1_errors.push_back(l1);
  }
  report.fitted_order = fit_order(report.grids, report.l1_errors);
  return report;
}

double volume_fraction(const MomentVector& m) {
  return cell_geometry(m).volume_fraction;
}

GeometricOutputs cell_geometry(const MomentVector& m) {
  if (m.m0() <= 0.0) {
    return {};
  }
  if (m.basis.kind == BasisKind::fractional) {
    return geometric_outputs(m);
  }
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  double half = 0.0;
  double three_halves = 0.0;
  bool done = false;
  if (is_realizable(m) == Realizability::interior) {
    try {
      const MaxEntResult me = maxent_reconstruct(m);
      const std::array<double, 2> orders{0.5, 1.5};
      const std::vector<double> v = moments_of_density(me.density, orders, 0.0, 1.0);
      half = v[0];
      three_halves = v[1];
      done = true;
    } catch (const Error&) {
      done = false;
    }
  }
  if (!done) {
    const PrincipalRepresentation rep = lower_principal_rep_integer(m.values, 0.0);
    half = rep.moment(0.5);
    three_halves = rep.moment(1.5);
  }
  return {4.0 * std::numbers::pi * m[0], 2.0 * sqrt_pi * half, m[1], three_halves / (6.0 * sqrt_pi)};
}

ModelComparison compare_models_2d(const CaseConfig& cfg, int threads) {
  if (cfg.grid.nx < 2 || cfg.grid.ny < 2) {
    throw ArgumentError("compare_models_2d needs a two-dimensional grid");
  }
  CaseConfig frac = cfg;
  frac.basis = ExponentBasis::fractional();
  CaseConfig integ = cfg;
  integ.basis = ExponentBasis::integer();
  integ.schemes.neg_count = 0;

  ModelComparison out;
  const Grid2D g0 = initial_grid(frac);
  for (const CellState& c : g0.cells) {
    out.alpha0_l1 += std::abs(volume_fraction(c.moments));
  }
  RunOptions opt;
  opt.threads = threads;
  out.fractional = run_case(frac, opt);
  out.integer = run_case(integ, opt);

  std::vector<double> diff(g0.cells.size(), 0.0);
  parallel_for(g0.cells.size(), threads, [&](std::size_t k) {
    const double af = volume_fraction(out.fractional.final_grid.cells[k].moments);
    const double ai = volume_fraction(out.integer.final_grid.cells[k].moments);
    diff[k] = std::abs(af - ai);
  });
  double sum = 0.0;
  for (double d : diff) {
    sum += d;
  }
  out.relative_l1_difference = out.alpha0_l1 > 0.0 ? sum / out.alpha0_l1 : 0.0;
  return out;
}

}  // namespace spraymom
