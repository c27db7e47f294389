#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "spraymom/errors.hpp"
#include "spraymom/moment_space.hpp"

namespace spraymom {

/// n(S) = exp(-lambda_0 - sum_i lambda_i S^{beta_i}) on (0, 1].
struct MaxEntDensity {
  ExponentBasis basis{};
  std::array<double, kMomentCount> lambdas{};

  double operator()(double s) const;
};

struct SolverReport {
  int iterations = 0;
  double final_residual = 0.0;  // ||delta||_2 / m0
  bool converged = false;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, SolverReport report)
      : Error(what), report_(report) {}
  const SolverReport& report() const noexcept { return report_; }

 private:
  SolverReport report_;
};

struct MaxEntOptions {
  double epsilon = 1e-10;
  int max_iter = 100;
  int max_halvings = 40;
};

struct MaxEntResult {
  MaxEntDensity density;
  SolverReport report;
};

/// Damped Newton on the dual potential G(lambda) = int exp(-sum lambda_i S^beta_i) + sum lambda_k c_k
/// with normalized moments c = m / m0. `initial` (if given) is used as the warm start.
MaxEntResult maxent_reconstruct(const MomentVector& m, const MaxEntOptions& options = {},
                                const MaxEntDensity* initial = nullptr);

double evaluate_density(const MaxEntDensity& d, double s);

/// int_lo^hi S^q n(S) dS for each order q. The integral is taken in the radius variable
/// r = sqrt(S), where it reads int 2 r^{2q+1} n(r^2) dr, with a 24-node Gauss-Legendre rule.
std::vector<double> moments_of_density(const MaxEntDensity& d, std::span<const double> orders,
                                       double lo, double hi);

/// Same integral for an arbitrary density on [lo, hi], in the radius variable.
double size_moment(const std::function<double(double)>& n, double order, double lo, double hi,
                   int nodes = kDefaultQuadratureOrder);

/// Potential G at lambda for normalized moments c (exposed for the descent property test).
double maxent_potential(const MaxEntDensity& normalized, const MomentArray& c);

}  // namespace spraymom
