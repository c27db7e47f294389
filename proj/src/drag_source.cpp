#include "spraymom/drag_source.hpp"

#include <algorithm>
#include <cmath>

#include "spraymom/errors.hpp"

namespace spraymom {

double drag_relaxed_velocity_d2(double c0, double u_gas, double s0, double K, double theta,
                                double tau) {
  if (!std::isfinite(theta) || tau == 0.0) {
    return c0;
  }
  if (s0 <= 0.0) {
    return u_gas;
  }
  if (K == 0.0) {
    return u_gas + (c0 - u_gas) * std::exp(-tau / (theta * s0));
  }
  const double ratio = (s0 - K * tau) / s0;
  if (ratio <= 0.0) {
    return u_gas;
  }
  return u_gas + (c0 - u_gas) * std::pow(ratio, 1.0 / (theta * K));
}

double drag_relaxed_velocity(double c0, double u_gas, double s0, const EvaporationLaw& law,
                             double theta, double tau) {
  if (law.kind == EvaporationLaw::Kind::d2) {
    return drag_relaxed_velocity_d2(c0, u_gas, s0, law.K, theta, tau);
  }
  if (!std::isfinite(theta) || tau == 0.0) {
    return c0;
  }
  if (s0 <= 0.0) {
    return u_gas;
  }
  // state (S, I) with dS/dt = R(S), dI/dt = 1/S
  const int n = std::max(8, static_cast<int>(std::ceil(std::abs(tau) / 2.5e-4)));
  const double h = tau / n;
  double s = s0;
  double integral = 0.0;
  auto R = [&law](double x) { return law.rate(std::max(x, 0.0)); };
  for (int i = 0; i < n; ++i) {
    const double s1 = s;
    const double k1 = R(s1);
    const double s2 = s + 0.5 * h * k1;
    const double k2 = R(s2);
    const double s3 = s + 0.5 * h * k2;
    const double k3 = R(s3);
    const double s4 = s + h * k3;
    const double k4 = R(s4);
    if (s2 <= 0.0 || s3 <= 0.0 || s4 <= 0.0) {
      return u_gas;
    }
    integral += h / 6.0 * (1.0 / s1 + 2.0 / s2 + 2.0 / s3 + 1.0 / s4);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (s <= 0.0) {
      return u_gas;
    }
  }
  return u_gas + (c0 - u_gas) * std::exp(-integral / theta);
}

DragStepResult step_evap_drag(const CellState& cell, const EvaporationLaw& law, double theta,
                              double dt, const Vec2& u_gas, const NemoOptions& options) {
  if (!(theta > 0.0)) {
    throw ArgumentError("step_evap_drag: Stokes coefficient theta must be positive");
  }
  DragStepResult out;
  out.evaporation = step_nemo(cell.moments, law, dt, options);
  EvaporationStepResult& evap = out.evaporation;
  out.state.moments = evap.updated;

  if (evap.updated.m0() <= 0.0) {
    out.state.velocity = u_gas;
    out.state.momentum = {0.0, 0.0};
    return out;
  }
  if (dt == 0.0 || !std::isfinite(theta)) {
    out.state.velocity = cell.velocity;
    for (std::size_t d = 0; d < 2; ++d) {
      out.state.momentum[d] = out.state.moments.unit_order() * cell.velocity[d];
    }
    return out;
  }

  if (!evap.quadrature_used) {
    // no evaporation: the nodes keep their sizes and only relax in velocity
    const MomentVector& m = cell.moments;
    PrincipalRepresentation rep = m.basis.kind == BasisKind::fractional
                                      ? lower_principal_rep_fractional(m.values, {}, 0, 0.0)
                                      : lower_principal_rep_integer(m.values, 0.0);
    evap.evolved_nodes = rep.nodes;
    evap.quadrature_used = std::move(rep);
  }

  const PrincipalRepresentation& rep = *evap.quadrature_used;
  Vec2 momentum{0.0, 0.0};
  for (std::size_t j = 0; j < rep.size(); ++j) {
    const double s_end = evap.evolved_nodes[j];
    if (s_end <= 0.0) {
      continue;
    }
    for (std::size_t d = 0; d < 2; ++d) {
      const double c = drag_relaxed_velocity(cell.velocity[d], u_gas[d], rep.nodes[j], law, theta, dt);
      momentum[d] += rep.weights[j] * s_end * c;
    }
  }
  out.state.momentum = momentum;
  const double m1 = out.state.moments.unit_order();
  if (m1 > 0.0) {
    out.state.velocity = {momentum[0] / m1, momentum[1] / m1};
  } else {
    out.state.velocity = u_gas;
    out.state.momentum = {0.0, 0.0};
  }
  return out;
}

}  // namespace spraymom
