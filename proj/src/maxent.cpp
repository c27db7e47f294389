#include "spraymom/maxent.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <fmt/format.h>

namespace spraymom {

namespace {

using Vec = Eigen::Matrix<double, kMomentCount, 1>;
using Mat = Eigen::Matrix<double, kMomentCount, kMomentCount>;

// Exponent of r (= sqrt S) carried by basis function k.
int radius_power(const ExponentBasis& basis, std::size_t k) {
  return basis.kind == BasisKind::fractional ? static_cast<int>(k) : 2 * static_cast<int>(k);
}

double exponent_sum(const MaxEntDensity& d, double r) {
  double e = d.lambdas[0];
  double rk = 1.0;
  const double step = d.basis.kind == BasisKind::fractional ? r : r * r;
  for (std::size_t k = 1; k < kMomentCount; ++k) {
    rk *= step;
    e += d.lambdas[k] * rk;
  }
  return e;
}

struct Evaluation {
  double potential = 0.0;
  Vec moments = Vec::Zero();
  Mat hessian = Mat::Zero();
  bool finite = true;
};

// Moments, Hessian and potential of the normalized density, all in one pass over the nodes.
Evaluation evaluate(const MaxEntDensity& d, const MomentArray& c, bool with_hessian) {
  const QuadratureRule& unit = gauss_legendre_unit(kDefaultQuadratureOrder);
  const int max_power = 2 * radius_power(d.basis, kMomentCount - 1);
  Evaluation ev;
  std::vector<double> acc(static_cast<std::size_t>(max_power) + 1, 0.0);
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const double r = unit.nodes[i];
    const double n = std::exp(-exponent_sum(d, r));
    if (!std::isfinite(n)) {
      ev.finite = false;
      return ev;
    }
    double w = unit.weights[i] * 2.0 * r * n;
    for (double& a : acc) {
      a += w;
      w *= r;
    }
  }
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    ev.moments(static_cast<Eigen::Index>(k)) = acc[static_cast<std::size_t>(radius_power(d.basis, k))];
  }
  ev.potential = ev.moments(0);
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    ev.potential += d.lambdas[k] * c[k];
  }
  if (with_hessian) {
    for (std::size_t i = 0; i < kMomentCount; ++i) {
      for (std::size_t j = 0; j < kMomentCount; ++j) {
        ev.hessian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            acc[static_cast<std::size_t>(radius_power(d.basis, i) + radius_power(d.basis, j))];
      }
    }
  }
  ev.finite = std::isfinite(ev.potential) && ev.moments.allFinite();
  return ev;
}

Vec residual(const Evaluation& ev, const MomentArray& c) {
  Vec r;
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    r(static_cast<Eigen::Index>(k)) = c[k] - ev.moments(static_cast<Eigen::Index>(k));
  }
  return r;
}

}  // namespace

double MaxEntDensity::operator()(double s) const { return evaluate_density(*this, s); }

double evaluate_density(const MaxEntDensity& d, double s) {
  return std::exp(-exponent_sum(d, std::sqrt(std::max(s, 0.0))));
}

double size_moment(const std::function<double(double)>& n, double order, double lo, double hi,
                   int nodes) {
  if (lo < 0.0 || !(lo < hi)) {
    throw ArgumentError(fmt::format("size_moment: invalid interval [{}, {}]", lo, hi));
  }
  if (order < 0.0 && lo == 0.0) {
    throw ArgumentError(
        fmt::format("size_moment: order {} is singular on an interval starting at 0", order));
  }
  const QuadratureRule rule = gauss_legendre(nodes, std::sqrt(lo), std::sqrt(hi));
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double r = rule.nodes[i];
    const double v = 2.0 * std::pow(r, 2.0 * order + 1.0) * n(r * r);
    if (!std::isfinite(v)) {
      throw NumericError(fmt::format("size_moment: non-finite integrand at S={}", r * r), r * r);
    }
    sum += rule.weights[i] * v;
  }
  return sum;
}

std::vector<double> moments_of_density(const MaxEntDensity& d, std::span<const double> orders,
                                       double lo, double hi) {
  std::vector<double> out;
  out.reserve(orders.size());
  for (double q : orders) {
    out.push_back(size_moment([&d](double s) { return evaluate_density(d, s); }, q, lo, hi));
  }
  return out;
}

double maxent_potential(const MaxEntDensity& normalized, const MomentArray& c) {
  return evaluate(normalized, c, false).potential;
}

MaxEntResult maxent_reconstruct(const MomentVector& m, const MaxEntOptions& options,
                                const MaxEntDensity* initial) {
  if (!(options.epsilon > 0.0) || options.max_iter < 1) {
    throw ArgumentError("maxent_reconstruct: epsilon and max_iter must be positive");
  }
  const Realizability status = is_realizable(m);
  if (status != Realizability::interior) {
    throw RealizabilityError(fmt::format(
        "maxent_reconstruct: moment vector ({}, {}, {}, {}) is {}, not interior", m[0], m[1], m[2],
        m[3], to_string(status)));
  }

  const double m0 = m.m0();
  const double log_m0 = std::log(m0);
  MomentArray c{};
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    c[k] = m[k] / m0;
  }

  MaxEntDensity d;
  d.basis = m.basis;
  if (initial != nullptr && initial->basis == m.basis) {
    d.lambdas = initial->lambdas;
    d.lambdas[0] += log_m0;
  }

  Evaluation ev = evaluate(d, c, true);
  if (!ev.finite) {
    // a warm start from a very different state can overflow; restart from the uniform guess
    d.lambdas = {};
    ev = evaluate(d, c, true);
  }

  SolverReport report;
  Vec delta = residual(ev, c);
  report.final_residual = delta.norm();
  while (report.final_residual > options.epsilon) {
    if (report.iterations >= options.max_iter) {
      throw NonConvergenceError(
          fmt::format("maxent_reconstruct: no convergence after {} iterations (residual {:.3e})",
                      report.iterations, report.final_residual),
          report);
    }
    ++report.iterations;

    Eigen::LLT<Mat> llt(ev.hessian);
    if (llt.info() != Eigen::Success) {
      Mat reg = ev.hessian;
      reg.diagonal().array() += 1e-12 * ev.hessian.trace();
      llt.compute(reg);
      if (llt.info() != Eigen::Success) {
        throw ConditioningError("maxent_reconstruct: Hessian is not positive definite");
      }
    }
    // gradient of G is delta, so the Newton direction is -H^{-1} delta
    const Vec step = llt.solve(delta);

    double scale = 1.0;
    bool accepted = false;
    const double slack = 1e-14 * (std::abs(ev.potential) + 1.0);
    for (int h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
      MaxEntDensity trial = d;
      for (std::size_t k = 0; k < kMomentCount; ++k) {
        trial.lambdas[k] -= scale * step(static_cast<Eigen::Index>(k));
      }
      Evaluation trial_ev = evaluate(trial, c, true);
      if (trial_ev.finite && trial_ev.potential <= ev.potential + slack) {
        d = trial;
        ev = trial_ev;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw NonConvergenceError(
          fmt::format("maxent_reconstruct: line search failed at iteration {} (residual {:.3e})",
                      report.iterations, report.final_residual),
          report);
    }
    delta = residual(ev, c);
    report.final_residual = delta.norm();
  }
  report.converged = true;
  d.lambdas[0] -= log_m0;
  return {d, report};
}

}  // namespace spraymom
