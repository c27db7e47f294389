#include "spraymom/transport.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "spraymom/errors.hpp"
#include "spraymom/parallel.hpp"

namespace spraymom {

namespace {

constexpr double kStageDenominator = 1e-13;
constexpr double kEnvelopeSlack = 1e-12;

// 4-point Gauss-Legendre on [-1/2, 1/2] with weights summing to one. Exact for the degree-6
// products appearing in the cell averages and face integrals.
struct UnitRule {
  std::array<double, 4> x{};
  std::array<double, 4> w{};
};

const UnitRule& unit_rule() {
  static const UnitRule rule = [] {
    const QuadratureRule& gl = gauss_legendre_unit(4);
    UnitRule r;
    for (std::size_t g = 0; g < 4; ++g) {
      r.x[g] = gl.nodes[g] - 0.5;
      r.w[g] = gl.weights[g];
    }
    return r;
  }();
  return rule;
}

std::size_t tangential(std::size_t axis) { return 1 - axis; }

FluxVector conserved(const CellState& c, std::size_t axis) {
  return {c.moments[0], c.moments[1], c.moments[2], c.moments[3], c.momentum[axis],
          c.momentum[tangential(axis)]};
}

// Products of canonical moments giving the normalized moments 1..3.
std::array<double, 3> canonical_products(double p1, double p2, double p3) {
  const double inner = (1.0 - p1) * p2 + p1;
  return {p1, p1 * inner, p1 * ((1.0 - p1) * (1.0 - p2) * p2 * p3 + inner * inner)};
}

struct CellCanonical {
  bool usable = false;
  std::array<double, 3> p{};
};

CellCanonical cell_canonical(const CellState& c, double vacuum_m0) {
  CellCanonical out;
  if (c.moments.m0() <= vacuum_m0) {
    return out;
  }
  const CanonicalMoments cm = canonical_moments(c.moments);
  if (cm.defined < 3) {
    return out;
  }
  for (double v : cm.p) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      return out;
    }
  }
  out.usable = true;
  out.p = cm.p;
  return out;
}

bool within(double v, double lo, double hi) {
  return v >= lo - kEnvelopeSlack && v <= hi + kEnvelopeSlack;
}

// Picks the limited slope for a bar relation pbar = a + b D, following the bound
// D = phi min(|right - a| / (dx + 2b), |a - left| / (dx - 2b)), then checks the endpoint values
// against the neighbor envelope. Returns nullopt if even the zero slope leaves the envelope.
std::optional<std::pair<double, double>> limited_stage(double left, double center, double right,
                                                       double a, double b, double dx,
                                                       double lo_bound, double hi_bound,
                                                       double cap = INFINITY) {
  const double lo = std::max(std::min({left, center, right}), lo_bound);
  const double hi = std::min(std::max({left, center, right}), hi_bound);
  double slope = 0.0;
  const double phi = slope_phi(left, center, right);
  const double den_r = dx + 2.0 * b;
  const double den_l = dx - 2.0 * b;
  if (phi != 0.0 && den_r > kStageDenominator * dx && den_l > kStageDenominator * dx) {
    slope = phi * std::min({std::abs(right - a) / den_r, std::abs(a - left) / den_l, cap});
  }
  auto ok = [&](double s) {
    const double bar = a + b * s;
    return within(bar - 0.5 * dx * s, lo, hi) && within(bar + 0.5 * dx * s, lo, hi);
  };
  if (ok(slope)) {
    return std::make_pair(a + b * slope, slope);
  }
  if (ok(0.0)) {
    return std::make_pair(a, 0.0);
  }
  return std::nullopt;
}

CellReconstruction first_order_reconstruction(const CellState& c, std::size_t axis,
                                              double vacuum_m0) {
  CellReconstruction r;
  r.state = c;
  r.axis = axis;
  r.first_order = true;
  r.vacuum = c.moments.m0() <= vacuum_m0;
  return r;
}

CellReconstruction reconstruct(const CellState& left, const CellState& center,
                               const CellState& right, double dx, double dt, std::size_t axis,
                               double vacuum_m0) {
  CellReconstruction rec = first_order_reconstruction(center, axis, vacuum_m0);
  const CellCanonical cc = cell_canonical(center, vacuum_m0);
  if (rec.vacuum || !cc.usable) {
    return rec;
  }
  const CellCanonical cl = cell_canonical(left, vacuum_m0);
  const CellCanonical cr = cell_canonical(right, vacuum_m0);
  const MomentVector& m = center.moments;
  const std::size_t unit = m.basis.unit_order_index();
  const UnitRule& q = unit_rule();
  std::array<double, 4> xi{};
  for (std::size_t g = 0; g < 4; ++g) {
    xi[g] = q.x[g] * dx;
  }
  auto avg = [&q](auto&& f) {
    double s = 0.0;
    for (std::size_t g = 0; g < 4; ++g) {
      s += q.w[g] * f(g);
    }
    return s;
  };

  // number density: positivity bound 2 m0 / dx
  const double m0 = m.m0();
  const double m0l = left.moments.m0();
  const double m0r = right.moments.m0();
  const double dm0 = slope_phi(m0l, m0, m0r) *
                     std::min({std::abs(m0r - m0) / dx, std::abs(m0 - m0l) / dx, 2.0 * m0 / dx});
  std::array<double, 4> m0x{};
  for (std::size_t g = 0; g < 4; ++g) {
    m0x[g] = m0 + dm0 * xi[g];
  }

  std::array<double, 3> pbar{};
  std::array<double, 3> dp{};
  std::array<std::array<double, 4>, 3> px{};
  for (std::size_t k = 0; k < 3; ++k) {
    // pbar_k = a + b Dp_k from the cell-average identity of moment k + 1
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    if (k == 0) {
      A = m0;
      B = avg([&](std::size_t g) { return m0x[g] * xi[g]; });
    } else {
      auto weight = [&](std::size_t g) {
        const double p1 = px[0][g];
        if (k == 1) {
          return m0x[g] * p1 * (1.0 - p1);
        }
        const double p2 = px[1][g];
        return m0x[g] * p1 * (1.0 - p1) * (1.0 - p2) * p2;
      };
      auto rest = [&](std::size_t g) {
        const double p1 = px[0][g];
        if (k == 1) {
          return m0x[g] * p1 * p1;
        }
        const double inner = (1.0 - p1) * px[1][g] + p1;
        return m0x[g] * p1 * inner * inner;
      };
      A = avg(weight);
      B = avg([&](std::size_t g) { return weight(g) * xi[g]; });
      C = avg(rest);
    }
    if (!(A > kStageDenominator * m0)) {
      return rec;
    }
    const double a = (m[k + 1] - C) / A;
    const double b = -B / A;
    if (!(a >= -kEnvelopeSlack && a <= 1.0 + kEnvelopeSlack)) {
      return rec;
    }
    const double pl = cl.usable ? cl.p[k] : cc.p[k];
    const double pr = cr.usable ? cr.p[k] : cc.p[k];
    const auto stage = limited_stage(pl, cc.p[k], pr, a, b, dx, 0.0, 1.0);
    if (!stage) {
      return rec;
    }
    pbar[k] = stage->first;
    dp[k] = stage->second;
    for (std::size_t g = 0; g < 4; ++g) {
      px[k][g] = std::clamp(pbar[k] + dp[k] * xi[g], 0.0, 1.0);
    }
  }

  // velocities weighted by the unit-order moment
  std::array<double, 4> mu{};
  for (std::size_t g = 0; g < 4; ++g) {
    const auto prod = canonical_products(px[0][g], px[1][g], px[2][g]);
    mu[g] = m0x[g] * prod[unit - 1];
  }
  const double mu_avg = avg([&](std::size_t g) { return mu[g]; });
  if (!(mu_avg > 0.0)) {
    return rec;
  }
  const double b_u = -avg([&](std::size_t g) { return mu[g] * xi[g]; }) / mu_avg;
  const std::size_t t = tangential(axis);
  auto velocity_of = [&](const CellState& c, double fallback, std::size_t comp) {
    return c.moments.m0() > vacuum_m0 && c.moments.unit_order() > 0.0 ? c.velocity[comp] : fallback;
  };
  const double a_u = center.momentum[axis] / mu_avg;
  const double a_v = center.momentum[t] / mu_avg;
  const double ui = center.velocity[axis];
  const double vi = center.velocity[t];
  const auto su = limited_stage(velocity_of(left, ui, axis), ui, velocity_of(right, ui, axis), a_u,
                                b_u, dx, -INFINITY, INFINITY, dt > 0.0 ? 1.0 / dt : INFINITY);
  const auto sv = limited_stage(velocity_of(left, vi, t), vi, velocity_of(right, vi, t), a_v, b_u,
                                dx, -INFINITY, INFINITY);
  if (!su || !sv) {
    return rec;
  }

  rec.first_order = false;
  rec.m0 = m0;
  rec.dm0 = dm0;
  rec.pbar = pbar;
  rec.dp = dp;
  rec.ubar = su->first;
  rec.du = su->second;
  rec.vbar = sv->first;
  rec.dv = sv->second;
  return rec;
}

// Length of the part of a cell that leaves through its right (dir = +1) or left (dir = -1) face.
double departure_length(const CellReconstruction& r, std::size_t axis, double dx, double dt,
                        int dir) {
  if (r.vacuum && r.state.moments.m0() <= 0.0) {
    return 0.0;
  }
  double u_end = 0.0;
  double du = 0.0;
  if (r.first_order) {
    u_end = r.state.velocity[axis];
  } else {
    du = r.du;
    u_end = r.ubar + dir * 0.5 * dx * du;
  }
  const double speed = dir > 0 ? std::max(u_end, 0.0) : std::max(-u_end, 0.0);
  if (speed == 0.0) {
    return 0.0;
  }
  const double den = 1.0 + dt * du;
  if (den <= 1e-14) {
    // the whole cell collapses onto one point
    const double ubar = r.first_order ? r.state.velocity[axis] : r.ubar;
    return dir * dt * ubar >= 0.5 * dx ? dx : 0.0;
  }
  return std::min(dx, dt * speed / den);
}

// Amount of conserved quantities carried out of the cell through one face.
FluxVector outgoing(const CellReconstruction& r, std::size_t axis, double dx, double dt, int dir) {
  FluxVector out{};
  const double d = departure_length(r, axis, dx, dt, dir);
  if (d <= 0.0) {
    return out;
  }
  if (r.first_order) {
    const FluxVector u = conserved(r.state, axis);
    for (std::size_t c = 0; c < 6; ++c) {
      out[c] = u[c] * d;
    }
    return out;
  }
  const double lo = dir > 0 ? 0.5 * dx - d : -0.5 * dx;
  const UnitRule& q = unit_rule();
  for (std::size_t g = 0; g < 4; ++g) {
    const double xi = lo + d * (q.x[g] + 0.5);
    const FluxVector v = r.density_at(xi);
    for (std::size_t c = 0; c < 6; ++c) {
      out[c] += q.w[g] * d * v[c];
    }
  }
  return out;
}

CellState ghost_cell(const Field1D& field, long idx) {
  const long n = static_cast<long>(field.cells.size());
  if (field.boundary == Boundary::periodic) {
    return field.cells[static_cast<std::size_t>(((idx % n) + n) % n)];
  }
  CellState c = field.cells[static_cast<std::size_t>(std::clamp(idx, 0L, n - 1))];
  if (idx < 0 || idx >= n) {
    // zero-gradient copy that cannot flow back into the domain
    const std::size_t a = field.axis;
    c.velocity[a] = idx < 0 ? std::min(c.velocity[a], 0.0) : std::max(c.velocity[a], 0.0);
    c.momentum[a] = c.moments.unit_order() * c.velocity[a];
  }
  return c;
}

}  // namespace

FluxVector CellReconstruction::density_at(double xi) const {
  if (first_order) {
    return conserved(state, axis);
  }
  const double m = m0 + dm0 * xi;
  const double p1 = std::clamp(pbar[0] + dp[0] * xi, 0.0, 1.0);
  const double p2 = std::clamp(pbar[1] + dp[1] * xi, 0.0, 1.0);
  const double p3 = std::clamp(pbar[2] + dp[2] * xi, 0.0, 1.0);
  const auto prod = canonical_products(p1, p2, p3);
  const double unit = m * prod[state.moments.basis.unit_order_index() - 1];
  return {m, m * prod[0], m * prod[1], m * prod[2], unit * (ubar + du * xi),
          unit * (vbar + dv * xi)};
}

double slope_phi(double a, double b, double c) {
  auto sgn = [](double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); };
  return 0.5 * (sgn(b - a) + sgn(c - b));
}

FluxVector flux_order1(const CellState& left, const CellState& right, std::size_t axis) {
  const FluxVector ul = conserved(left, axis);
  const FluxVector ur = conserved(right, axis);
  const double sl = std::max(left.velocity[axis], 0.0);
  const double sr = std::min(right.velocity[axis], 0.0);
  FluxVector f{};
  for (std::size_t c = 0; c < 6; ++c) {
    f[c] = ul[c] * sl + ur[c] * sr;
  }
  return f;
}

CellReconstruction reconstruct_cell(std::size_t i, const Field1D& field, double dt) {
  const long idx = static_cast<long>(i);
  const CellState left = ghost_cell(field, idx - 1);
  const CellState right = ghost_cell(field, idx + 1);
  return reconstruct(left, field.cells.at(i), right, field.dx, dt, field.axis, field.vacuum_m0);
}

Vec2 recover_velocity(const MomentVector& m, const Vec2& momentum, double vacuum_m0) {
  const double unit = m.unit_order();
  if (m.m0() > vacuum_m0 && unit > vacuum_m0) {
    return {momentum[0] / unit, momentum[1] / unit};
  }
  return {0.0, 0.0};
}

double max_speed(const std::vector<CellState>& cells, std::size_t axis, double vacuum_m0) {
  double s = 0.0;
  for (const CellState& c : cells) {
    if (c.moments.m0() > vacuum_m0) {
      s = std::max(s, std::abs(c.velocity[axis]));
    }
  }
  return s;
}

namespace {

// Reconstructions for cells -1 .. n (index shifted by one).
std::vector<CellReconstruction> reconstruct_all(const Field1D& field, double dt, int order) {
  const long n = static_cast<long>(field.cells.size());
  std::vector<CellState> padded;
  padded.reserve(static_cast<std::size_t>(n + 4));
  for (long k = -2; k < n + 2; ++k) {
    padded.push_back(k >= 0 && k < n ? field.cells[static_cast<std::size_t>(k)] : ghost_cell(field, k));
  }
  std::vector<CellReconstruction> recs;
  recs.reserve(static_cast<std::size_t>(n + 2));
  for (long k = -1; k <= n; ++k) {
    const auto p = static_cast<std::size_t>(k + 2);
    const bool ghost = k < 0 || k >= n;
    if (order == 1 || (ghost && field.boundary == Boundary::outflow)) {
      recs.push_back(first_order_reconstruction(padded[p], field.axis, field.vacuum_m0));
    } else {
      recs.push_back(reconstruct(padded[p - 1], padded[p], padded[p + 1], field.dx, dt, field.axis,
                                 field.vacuum_m0));
    }
  }
  return recs;
}

}  // namespace

FluxVector flux_order2(std::size_t i, const Field1D& field, double dt) {
  if (!(dt > 0.0)) {
    throw ArgumentError("flux_order2: dt must be positive");
  }
  const long idx = static_cast<long>(i);
  const CellReconstruction left = reconstruct(ghost_cell(field, idx - 1), field.cells.at(i),
                                              ghost_cell(field, idx + 1), field.dx, dt, field.axis,
                                              field.vacuum_m0);
  const CellReconstruction right =
      reconstruct(field.cells.at(i), ghost_cell(field, idx + 1), ghost_cell(field, idx + 2),
                  field.dx, dt, field.axis, field.vacuum_m0);
  const FluxVector plus = outgoing(left, field.axis, field.dx, dt, +1);
  const FluxVector minus = outgoing(right, field.axis, field.dx, dt, -1);
  FluxVector f{};
  for (std::size_t c = 0; c < 6; ++c) {
    f[c] = (plus[c] - minus[c]) / dt;
  }
  return f;
}

Field1D advance_1d(const Field1D& field, double dt, int order) {
  if (order != 1 && order != 2) {
    throw ArgumentError(fmt::format("advance_1d: order must be 1 or 2, got {}", order));
  }
  if (!(field.dx > 0.0) || dt < 0.0) {
    throw ArgumentError("advance_1d: dx must be positive and dt non-negative");
  }
  if (field.cells.empty() || dt == 0.0) {
    return field;
  }
  const double speed = max_speed(field.cells, field.axis, field.vacuum_m0);
  if (speed * dt > field.dx * (1.0 + 1e-12)) {
    throw ArgumentError(fmt::format("advance_1d: CFL violated (max speed {}, dt {}, dx {})", speed,
                                    dt, field.dx));
  }

  const std::size_t n = field.cells.size();
  const std::vector<CellReconstruction> recs = reconstruct_all(field, dt, order);
  // net amount crossing face k - 1/2 for k = 0 .. n (face between recs[k] and recs[k + 1])
  std::vector<FluxVector> face(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const FluxVector plus = outgoing(recs[k], field.axis, field.dx, dt, +1);
    const FluxVector minus = outgoing(recs[k + 1], field.axis, field.dx, dt, -1);
    for (std::size_t c = 0; c < 6; ++c) {
      face[k][c] = plus[c] - minus[c];
    }
  }

  Field1D out = field;
  const std::size_t a = field.axis;
  const std::size_t t = tangential(a);
  for (std::size_t i = 0; i < n; ++i) {
    const FluxVector u = conserved(field.cells[i], a);
    FluxVector v{};
    for (std::size_t c = 0; c < 6; ++c) {
      v[c] = u[c] - (face[i + 1][c] - face[i][c]) / field.dx;
    }
    CellState& cell = out.cells[i];
    for (std::size_t k = 0; k < kMomentCount; ++k) {
      cell.moments[k] = v[k];
    }
    cell.momentum[a] = v[4];
    cell.momentum[t] = v[5];
    cell.velocity = recover_velocity(cell.moments, cell.momentum, field.vacuum_m0);
  }
  return out;
}

void sweep_2d(Grid2D& grid, std::size_t axis, double dt, int order, int threads) {
  const std::size_t lines = axis == 0 ? grid.ny : grid.nx;
  const std::size_t len = axis == 0 ? grid.nx : grid.ny;
  auto cell_index = [&](std::size_t line, std::size_t k) {
    return axis == 0 ? line * grid.nx + k : k * grid.nx + line;
  };
  parallel_for(lines, threads, [&](std::size_t line) {
    Field1D f;
    f.dx = axis == 0 ? grid.dx : grid.dy;
    f.boundary = grid.boundary;
    f.basis = grid.basis;
    f.axis = axis;
    f.vacuum_m0 = grid.vacuum_m0;
    f.cells.reserve(len);
    for (std::size_t k = 0; k < len; ++k) {
      f.cells.push_back(grid.cells[cell_index(line, k)]);
    }
    Field1D g = advance_1d(f, dt, order);
    for (std::size_t k = 0; k < len; ++k) {
      grid.cells[cell_index(line, k)] = g.cells[k];
    }
  });
}

void split_step_2d(Grid2D& grid, double dt, int order, SplitKind kind, int threads) {
  switch (kind) {
    case SplitKind::strang:
      sweep_2d(grid, 0, 0.5 * dt, order, threads);
      sweep_2d(grid, 1, dt, order, threads);
      sweep_2d(grid, 0, 0.5 * dt, order, threads);
      break;
    case SplitKind::lie_xy:
      sweep_2d(grid, 0, dt, order, threads);
      sweep_2d(grid, 1, dt, order, threads);
      break;
    case SplitKind::lie_yx:
      sweep_2d(grid, 1, dt, order, threads);
      sweep_2d(grid, 0, dt, order, threads);
      break;
  }
}

}  // namespace spraymom
