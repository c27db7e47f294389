#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "spraymom/drag_source.hpp"
#include "spraymom/moment_space.hpp"

namespace spraymom {

enum class Boundary { periodic, outflow };

/// Four moments followed by the normal and tangential momentum components.
using FluxVector = std::array<double, 6>;

/// One row (or column) of cells advected along `axis` (0 = x, 1 = y).
struct Field1D {
  std::vector<CellState> cells;
  double dx = 1.0;
  Boundary boundary = Boundary::periodic;
  ExponentBasis basis{};
  std::size_t axis = 0;
  double vacuum_m0 = 0.0;  // cells with m0 at or below this are vacuum
};

/// Linear reconstruction of one cell in the local coordinate xi = x - x_i.
struct CellReconstruction {
  bool vacuum = false;
  bool first_order = true;
  std::size_t axis = 0;
  CellState state;  // cell averages (used as-is when first_order)
  double m0 = 0.0;
  double dm0 = 0.0;
  std::array<double, 3> pbar{};
  std::array<double, 3> dp{};
  double ubar = 0.0;  // normal velocity
  double du = 0.0;
  double vbar = 0.0;  // tangential velocity
  double dv = 0.0;

  /// m0, the three higher moments, and the unit-order moment times the normal and tangential
  /// velocities, at offset xi.
  FluxVector density_at(double xi) const;
};

/// 1/2 (sgn(b - a) + sgn(c - b)).
double slope_phi(double a, double b, double c);

/// Upwind kinetic flux between two piecewise-constant cells, along `axis`.
FluxVector flux_order1(const CellState& left, const CellState& right, std::size_t axis = 0);

/// Second-order reconstruction of cell i (neighbors taken through the boundary rule).
CellReconstruction reconstruct_cell(std::size_t i, const Field1D& field, double dt);

/// Second-order kinetic flux through the right face of cell i.
FluxVector flux_order2(std::size_t i, const Field1D& field, double dt);

/// Conservative update of every cell by first- or second-order kinetic fluxes.
Field1D advance_1d(const Field1D& field, double dt, int order);

/// Velocity recovered from momentum: P / m_unit above the vacuum threshold, zero otherwise.
Vec2 recover_velocity(const MomentVector& m, const Vec2& momentum, double vacuum_m0);

struct Grid2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 1.0;
  double dy = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;
  Boundary boundary = Boundary::periodic;
  ExponentBasis basis{};
  double vacuum_m0 = 0.0;
  std::vector<CellState> cells;  // row-major, index j * nx + i

  CellState& at(std::size_t i, std::size_t j) { return cells[j * nx + i]; }
  const CellState& at(std::size_t i, std::size_t j) const { return cells[j * nx + i]; }
  double xc(std::size_t i) const { return x0 + (static_cast<double>(i) + 0.5) * dx; }
  double yc(std::size_t j) const { return y0 + (static_cast<double>(j) + 0.5) * dy; }
};

enum class SplitKind { strang, lie_xy, lie_yx };

/// Sweep along one axis over every row/column. `threads` > 1 runs lines concurrently.
void sweep_2d(Grid2D& grid, std::size_t axis, double dt, int order, int threads = 1);

/// Dimensional splitting: Strang X(dt/2) Y(dt) X(dt/2) by default.
void split_step_2d(Grid2D& grid, double dt, int order, SplitKind kind = SplitKind::strang,
                   int threads = 1);

/// Largest |u| along an axis over non-vacuum cells.
double max_speed(const std::vector<CellState>& cells, std::size_t axis, double vacuum_m0);

}  // namespace spraymom
