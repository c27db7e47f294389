#include "spraymom/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <fmt/format.h>

#include "spraymom/errors.hpp"

namespace spraymom {

namespace {

// Newton iteration on P_n starting from the Tricomi-type initial guess; nodes on [-1,1].
QuadratureRule compute_unit_rule(int n) {
  QuadratureRule rule;
  rule.lo = 0.0;
  rule.hi = 1.0;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));

  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    // recompute the derivative at the converged root
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);

    // map [-1,1] -> [0,1]; x is the larger root of the symmetric pair
    const auto lo_idx = static_cast<std::size_t>(i);
    const auto hi_idx = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo_idx] = 0.5 * (1.0 - x);
    rule.nodes[hi_idx] = 0.5 * (1.0 + x);
    rule.weights[lo_idx] = 0.5 * w;
    rule.weights[hi_idx] = 0.5 * w;
  }
  if (n % 2 == 1) {
    rule.nodes[static_cast<std::size_t>(n / 2)] = 0.5;
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre_unit(int n) {
  if (n < 1) {
    throw ArgumentError(fmt::format("gauss_legendre: order must be positive, got {}", n));
  }
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    slot = std::make_unique<QuadratureRule>(compute_unit_rule(n));
  }
  return *slot;
}

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  if (!(lo < hi)) {
    throw ArgumentError(fmt::format("gauss_legendre: invalid interval [{}, {}]", lo, hi));
  }
  const QuadratureRule& unit = gauss_legendre_unit(n);
  QuadratureRule rule;
  rule.lo = lo;
  rule.hi = hi;
  const double len = hi - lo;
  rule.nodes.reserve(unit.size());
  rule.weights.reserve(unit.size());
  for (std::size_t i = 0; i < unit.size(); ++i) {
    rule.nodes.push_back(lo + len * unit.nodes[i]);
    rule.weights.push_back(len * unit.weights[i]);
  }
  return rule;
}

QuadratureRule composite_gauss_legendre(int n, int panels, double lo, double hi) {
  if (panels < 1) {
    throw ArgumentError("composite_gauss_legendre: need at least one panel");
  }
  if (!(lo < hi)) {
    throw ArgumentError(fmt::format("composite_gauss_legendre: invalid interval [{}, {}]", lo, hi));
  }
  const QuadratureRule& unit = gauss_legendre_unit(n);
  QuadratureRule rule;
  rule.lo = lo;
  rule.hi = hi;
  const double h = (hi - lo) / panels;
  rule.nodes.reserve(unit.size() * static_cast<std::size_t>(panels));
  rule.weights.reserve(rule.nodes.capacity());
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h;
    for (std::size_t i = 0; i < unit.size(); ++i) {
      rule.nodes.push_back(a + h * unit.nodes[i]);
      rule.weights.push_back(h * unit.weights[i]);
    }
  }
  return rule;
}

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = f(rule.nodes[i]);
    if (!std::isfinite(v)) {
      throw NumericError(fmt::format("integrate: non-finite integrand at node {}", rule.nodes[i]),
                         rule.nodes[i]);
    }
    sum += rule.weights[i] * v;
  }
  return sum;
}

}  // namespace spraymom
