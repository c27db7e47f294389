#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace spraymom {

/// Paired abscissas and positive weights on an interval [lo, hi].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double lo = 0.0;
  double hi = 1.0;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Number of Gauss-Legendre nodes used for every size-space integral.
inline constexpr int kDefaultQuadratureOrder = 24;

/// n-point Gauss-Legendre rule on [lo, hi]; exact for polynomials of degree <= 2n-1.
/// Reference rules on [0,1] are computed once per n and cached.
QuadratureRule gauss_legendre(int n, double lo, double hi);

/// Cached reference rule on [0,1].
const QuadratureRule& gauss_legendre_unit(int n);

/// Sum of w_i f(x_i). Throws NumericError naming the node where f is not finite.
double integrate(const QuadratureRule& rule, const std::function<double(double)>& f);

/// Composite rule: `panels` equal sub-intervals of [lo, hi], each with an n-point rule.
QuadratureRule composite_gauss_legendre(int n, int panels, double lo, double hi);

}  // namespace spraymom
