#include "spraymom/moment_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "spraymom/errors.hpp"

namespace spraymom {

namespace {

constexpr double kDegenerateDenominator = 1e-14;
constexpr double kClampBand = 1e-12;
// Tolerance on the moments implied by a boundary canonical moment.
constexpr double kBoundaryConsistencyTol = 1e-8;

double clamp_roundoff(double p) {
  if (p < 0.0 && p >= -kClampBand) {
    return 0.0;
  }
  if (p > 1.0 && p <= 1.0 + kClampBand) {
    return 1.0;
  }
  return p;
}

}  // namespace

ExponentBasis parse_basis(std::string_view name) {
  if (name == "fractional") {
    return ExponentBasis::fractional();
  }
  if (name == "integer") {
    return ExponentBasis::integer();
  }
  throw ArgumentError(fmt::format("unknown exponent basis '{}'", name));
}

CanonicalMoments canonical_moments(const MomentVector& m) {
  if (!(m.m0() > 0.0)) {
    throw ArgumentError("canonical_moments: m0 must be positive");
  }
  const double c1 = m[1] / m.m0();
  const double c2 = m[2] / m.m0();
  const double c3 = m[3] / m.m0();

  CanonicalMoments out;
  out.p[0] = clamp_roundoff(c1);
  out.defined = 1;

  const double d2 = c1 * (1.0 - c1);
  if (std::abs(d2) < kDegenerateDenominator) {
    return out;
  }
  const double var = c2 - c1 * c1;
  out.p[1] = clamp_roundoff(var / d2);
  out.defined = 2;

  const double d3 = var * (c1 - c2);
  if (std::abs(d3) < kDegenerateDenominator) {
    return out;
  }
  out.p[2] = clamp_roundoff((1.0 - c1) * (c1 * c3 - c2 * c2) / d3);
  out.defined = 3;
  return out;
}

MomentArray moments_from_canonical(double m0, const std::array<double, 3>& p) {
  const double p1 = p[0];
  const double p2 = p[1];
  const double p3 = p[2];
  const double inner = (1.0 - p1) * p2 + p1;
  return {m0, m0 * p1, m0 * p1 * inner,
          m0 * p1 * ((1.0 - p1) * (1.0 - p2) * p2 * p3 + inner * inner)};
}

Realizability is_realizable(const MomentVector& m, double tol) {
  for (double v : m.values) {
    if (!std::isfinite(v)) {
      return Realizability::outside;
    }
  }
  if (m.m0() < 0.0) {
    return Realizability::outside;
  }
  if (m.m0() == 0.0) {
    const bool all_zero = std::all_of(m.values.begin(), m.values.end(), [](double v) { return v == 0.0; });
    return all_zero ? Realizability::boundary : Realizability::outside;
  }

  const double c1 = m[1] / m.m0();
  const double c2 = m[2] / m.m0();
  const double c3 = m[3] / m.m0();
  auto near = [](double a, double b) { return std::abs(a - b) <= kBoundaryConsistencyTol; };

  // p1
  if (c1 < -tol || c1 > 1.0 + tol) {
    return Realizability::outside;
  }
  if (c1 <= tol || c1 >= 1.0 - tol) {
    // single atom at an endpoint fixes every higher moment
    const double atom = c1 <= tol ? 0.0 : 1.0;
    return near(c2, atom) && near(c3, atom) ? Realizability::boundary : Realizability::outside;
  }

  // p2
  const double var = c2 - c1 * c1;
  const double p2 = var / (c1 * (1.0 - c1));
  if (p2 < -tol || p2 > 1.0 + tol) {
    return Realizability::outside;
  }
  if (p2 <= tol) {
    // one interior atom at c1
    return near(c3, c1 * c1 * c1) ? Realizability::boundary : Realizability::outside;
  }
  if (p2 >= 1.0 - tol) {
    // atoms at both endpoints
    return near(c3, c1) ? Realizability::boundary : Realizability::outside;
  }

  // p3
  const double p3 = (1.0 - c1) * (c1 * c3 - c2 * c2) / (var * (c1 - c2));
  if (!std::isfinite(p3) || p3 < -tol || p3 > 1.0 + tol) {
    return Realizability::outside;
  }
  if (p3 <= tol || p3 >= 1.0 - tol) {
    return Realizability::boundary;
  }
  return Realizability::interior;
}

std::string_view to_string(Realizability r) {
  switch (r) {
    case Realizability::interior:
      return "interior";
    case Realizability::boundary:
      return "boundary";
    case Realizability::outside:
      return "outside";
  }
  return "?";
}

GaussRepresentation pd_inversion(std::span<const double> moments, double lo, double hi) {
  if (moments.size() < 2 || moments.size() % 2 != 0) {
    throw ArgumentError(fmt::format("pd_inversion: need an even, non-zero moment count, got {}",
                                    moments.size()));
  }
  if (!(lo < hi) || lo < 0.0) {
    throw ArgumentError(fmt::format("pd_inversion: invalid interval [{}, {}]", lo, hi));
  }
  const double m0 = moments[0];
  if (!(m0 > 0.0) || !std::isfinite(m0)) {
    throw RealizabilityError("pd_inversion: zeroth moment must be positive");
  }
  const std::size_t count = moments.size();
  const std::size_t n = count / 2;

  // Product-difference table on normalized moments.
  const std::size_t dim = count + 1;
  std::vector<double> table(dim * dim, 0.0);
  auto P = [&](std::size_t i, std::size_t j) -> double& { return table[i * dim + j]; };
  P(0, 0) = 1.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    P(i, 1) = sign * moments[i] / m0;
  }
  for (std::size_t j = 2; j <= count; ++j) {
    for (std::size_t i = 0; i + j <= count; ++i) {
      P(i, j) = P(0, j - 1) * P(i + 1, j - 2) - P(0, j - 2) * P(i + 1, j - 1);
    }
  }

  // zeta[k] for k = 1 .. 2n-1 (continued-fraction coefficients); zeta[0] = 0.
  std::vector<double> zeta(count, 0.0);
  std::size_t usable_nodes = n;
  for (std::size_t k = 1; k < count; ++k) {
    const double denom = P(0, k) * P(0, k - 1);
    const double z = denom != 0.0 ? P(0, k + 1) / denom : 0.0;
    if (!std::isfinite(z) || z <= kPdCoefficientFloor) {
      if (std::isfinite(z) && z < -1e-8 * std::max(1.0, hi)) {
        throw RealizabilityError(
            fmt::format("pd_inversion: negative recurrence coefficient {} at index {}", z, k));
      }
      usable_nodes = k / 2;
      break;
    }
    zeta[k] = z;
  }
  if (usable_nodes == 0) {
    throw RealizabilityError("pd_inversion: measure concentrated at the origin");
  }

  const auto nodes_count = static_cast<Eigen::Index>(usable_nodes);
  Eigen::VectorXd diag(nodes_count);
  Eigen::VectorXd sub(std::max<Eigen::Index>(nodes_count - 1, 0));
  for (std::size_t i = 0; i < usable_nodes; ++i) {
    diag(static_cast<Eigen::Index>(i)) = zeta[2 * i + 1] + (i > 0 ? zeta[2 * i] : 0.0);
    if (i + 1 < usable_nodes) {
      sub(static_cast<Eigen::Index>(i)) = -std::sqrt(zeta[2 * i + 1] * zeta[2 * i + 2]);
    }
  }

  GaussRepresentation out;
  out.reduced = usable_nodes < n;
  out.matched_moments = 2 * usable_nodes;
  out.rule.lo = lo;
  out.rule.hi = hi;
  if (usable_nodes == 1) {
    out.rule.nodes = {diag(0)};
    out.rule.weights = {m0};
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
      throw ConditioningError("pd_inversion: Jacobi eigenproblem failed");
    }
    for (Eigen::Index j = 0; j < nodes_count; ++j) {
      const double v0 = solver.eigenvectors()(0, j);
      out.rule.nodes.push_back(solver.eigenvalues()(j));
      out.rule.weights.push_back(m0 * v0 * v0);
    }
  }

  const double slack = 1e-10 * std::max(1.0, hi);
  for (double& x : out.rule.nodes) {
    if (x < lo - slack || x > hi + slack) {
      throw RealizabilityError(
          fmt::format("pd_inversion: node {} outside support [{}, {}]", x, lo, hi));
    }
    x = std::clamp(x, lo, hi);
  }
  return out;
}

double PrincipalRepresentation::moment(double order) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    sum += weights[j] * std::pow(nodes[j], order);
  }
  return sum;
}

PrincipalRepresentation lower_principal_rep_fractional(std::span<const double> positive,
                                                       std::span<const double> negative,
                                                       int neg_count, double s_min) {
  if (positive.size() != kMomentCount) {
    throw ArgumentError("lower_principal_rep_fractional: expected four positive-order moments");
  }
  if (neg_count < 0 || negative.size() != static_cast<std::size_t>(2 * neg_count)) {
    throw ArgumentError(fmt::format(
        "lower_principal_rep_fractional: expected {} negative-order moments, got {}", 2 * neg_count,
        negative.size()));
  }
  if (neg_count > 0 && !(s_min > 0.0)) {
    throw ArgumentError("lower_principal_rep_fractional: negative orders need s_min > 0");
  }

  // Integer moments of the radius measure, lowest order first.
  std::vector<double> radius_moments(negative.begin(), negative.end());
  radius_moments.insert(radius_moments.end(), positive.begin(), positive.end());

  const GaussRepresentation gauss = pd_inversion(radius_moments, std::sqrt(std::max(s_min, 0.0)), 1.0);

  PrincipalRepresentation rep;
  rep.reduced = gauss.reduced;
  for (std::size_t j = 0; j < gauss.rule.size(); ++j) {
    const double r = gauss.rule.nodes[j];
    rep.nodes.push_back(r * r);
    rep.weights.push_back(gauss.rule.weights[j] * std::pow(r, 2 * neg_count));
  }
  for (std::size_t l = 0; l < gauss.matched_moments; ++l) {
    rep.matched_orders.push_back((static_cast<double>(l) - 2.0 * neg_count) / 2.0);
  }
  return rep;
}

PrincipalRepresentation lower_principal_rep_integer(std::span<const double> positive,
                                                    double s_min) {
  if (positive.size() != kMomentCount) {
    throw ArgumentError("lower_principal_rep_integer: expected four moments");
  }
  const GaussRepresentation gauss = pd_inversion(positive, std::max(s_min, 0.0), 1.0);
  PrincipalRepresentation rep;
  rep.reduced = gauss.reduced;
  rep.nodes = gauss.rule.nodes;
  rep.weights = gauss.rule.weights;
  for (std::size_t l = 0; l < gauss.matched_moments; ++l) {
    rep.matched_orders.push_back(static_cast<double>(l));
  }
  return rep;
}

GeometricOutputs geometric_outputs(const MomentVector& m) {
  if (m.basis.kind != BasisKind::fractional) {
    throw UnsupportedBasisError(
        "geometric_outputs: only the fractional basis carries the interface variables directly");
  }
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  return {4.0 * std::numbers::pi * m[0], 2.0 * sqrt_pi * m[1], m[2], m[3] / (6.0 * sqrt_pi)};
}

}  // namespace spraymom
