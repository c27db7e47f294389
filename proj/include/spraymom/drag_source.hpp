#pragma once

#include <array>

#include "spraymom/evaporation.hpp"
#include "spraymom/moment_space.hpp"

namespace spraymom {

using Vec2 = std::array<double, 2>;

struct CellState {
  MomentVector moments;
  Vec2 momentum{};  // unit-order moment times velocity
  Vec2 velocity{};
};

/// Velocity c(tau) of a droplet of initial size s0 relaxing toward u_gas with dc/dt = (u_gas - c)/(theta S(t))
/// while S(t) follows the d2 law with rate K. theta = +inf leaves c unchanged.
double drag_relaxed_velocity_d2(double c0, double u_gas, double s0, double K, double theta,
                                double tau);

/// Same for a general law: the decay exponent int dt / (theta S(t)) is integrated by RK4 along
/// the characteristic.
double drag_relaxed_velocity(double c0, double u_gas, double s0, const EvaporationLaw& law,
                             double theta, double tau);

struct DragStepResult {
  CellState state;
  EvaporationStepResult evaporation;
};

/// Coupled evaporation + Stokes drag over dt for one cell with gas velocity u_gas.
/// Moments follow step_nemo; the surviving quadrature nodes carry the cell velocity and relax
/// individually; momentum is reassembled from the evolved nodes.
DragStepResult step_evap_drag(const CellState& cell, const EvaporationLaw& law, double theta,
                              double dt, const Vec2& u_gas, const NemoOptions& options = {});

}  // namespace spraymom
