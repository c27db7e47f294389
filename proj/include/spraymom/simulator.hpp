#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spraymom/drag_source.hpp"
#include "spraymom/evaporation.hpp"
#include "spraymom/transport.hpp"

namespace spraymom {

enum class CaseId {
  evap0d_smooth,
  evap0d_square,
  evap0d_linear,
  transport1d_convergence,
  crossing1d,
  taylor_green_2d,
  custom
};

std::string_view to_string(CaseId id);
CaseId parse_case_id(std::string_view name);

struct GridConfig {
  std::size_t nx = 1;
  std::size_t ny = 1;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  Boundary boundary = Boundary::periodic;
};

struct TimeConfig {
  double dt = 0.0;  // 0 selects the step from the CFL number
  double cfl = 0.5;
  double t_end = 0.0;
};

enum class GasField { none, taylor_green };

struct PhysicsConfig {
  EvaporationLaw::Kind law = EvaporationLaw::Kind::d2;
  double K = 0.0;
  double a = 0.0;
  double b = 0.0;
  double theta = std::numeric_limits<double>::infinity();
  GasField gas = GasField::none;
};

enum class EvaporationScheme { nemo, fully_kinetic };

struct SchemeConfig {
  int transport_order = 2;
  EvaporationScheme evaporation = EvaporationScheme::nemo;
  int neg_count = 1;
  double maxent_epsilon = 1e-10;
  int maxent_max_iter = 100;
  SplitKind splitting = SplitKind::strang;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<double> snapshot_times;
};

/// Initial state of the `custom` case: one cell with these moments and velocity.
struct InitialConfig {
  MomentArray moments{};
  Vec2 velocity{};
};

struct CaseConfig {
  CaseId case_id = CaseId::custom;
  ExponentBasis basis{};
  GridConfig grid;
  TimeConfig time;
  PhysicsConfig physics;
  SchemeConfig schemes;
  OutputConfig output;
  InitialConfig initial;

  EvaporationLaw law() const;
  bool zero_dimensional() const { return grid.nx == 1 && grid.ny == 1; }
};

/// Configuration of a named case with every parameter at its documented value.
CaseConfig default_config(CaseId id);

/// Throws ConfigError describing the first inconsistency.
void validate(const CaseConfig& cfg);

struct ErrorReport {
  std::string reference;
  std::vector<double> times;
  std::vector<MomentArray> relative_errors;  // |m - m_ref| / m(0)
  MomentArray max_relative_error{};
  std::string secondary_reference;
  std::vector<MomentArray> secondary_errors;
  MomentArray max_secondary_error{};
  std::vector<std::size_t> grids;
  std::vector<double> l1_errors;
  double fitted_order = std::numeric_limits<double>::quiet_NaN();

  double max_error() const;
  double max_secondary() const;
};

struct RunOptions {
  int threads = 1;
  bool write_snapshots = false;
  std::string output_dir;  // overrides cfg.output.directory when non-empty
  bool audit_realizability = true;
};

struct RunArtifacts {
  ErrorReport report;
  Grid2D final_grid;
  std::vector<std::string> snapshot_files;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t realizability_violations = 0;
  std::size_t nonfinite_cells = 0;
  std::size_t evaporation_warnings = 0;
  MomentArray initial_totals{};
  MomentArray final_totals{};
  MomentArray evaporated_totals{};  // accumulated disappearance fluxes (cell volume weighted)
  double max_conservation_drift = 0.0;  // transport-only relative drift of the totals
};

/// Initial grid of a case (0D cases are a single cell).
Grid2D initial_grid(const CaseConfig& cfg);

/// Gas velocity at a point.
Vec2 gas_velocity(GasField field, double x, double y);

/// Time integration: transport (dimensional splitting in 2D) then the evaporation + drag source
/// in every non-vacuum cell. 0D cases also track the fully-kinetic reference and the exact
/// solution.
RunArtifacts run_case(const CaseConfig& cfg, const RunOptions& options = {});

/// L1 error of m0 against the exact characteristic solution of the 1D convergence case, for each
/// grid, plus the least-squares order.
ErrorReport convergence_study(const CaseConfig& base, const std::vector<std::size_t>& grids,
                              int threads = 1);

/// Exact cell averages of m0 at time t for the 1D convergence case.
std::vector<double> convergence_reference_m0(std::size_t nx, double t);

/// Least-squares slope of log(error) against log(1 / n).
double fit_order(const std::vector<std::size_t>& grids, const std::vector<double>& errors);

/// Volume fraction of a cell: m_{3/2} / (6 sqrt(pi)) for the fractional basis, through the
/// maximum-entropy density for the integer basis.
double volume_fraction(const MomentVector& m);

/// Geometric interface variables of a cell for either basis (integer basis via maximum entropy).
GeometricOutputs cell_geometry(const MomentVector& m);

struct ModelComparison {
  double relative_l1_difference = 0.0;
  double alpha0_l1 = 0.0;
  RunArtifacts fractional;
  RunArtifacts integer;
};

/// Runs the fractional model and the integer-moment baseline on identical grids and returns
/// ||alpha_frac - alpha_int||_1 / ||alpha(0)||_1 at the final time.
ModelComparison compare_models_2d(const CaseConfig& cfg, int threads = 1);

}  // namespace spraymom
