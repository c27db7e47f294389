#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spraymom/maxent.hpp"
#include "spraymom/moment_space.hpp"

namespace spraymom {

/// dS/dt = R_S(S) < 0. d2: R_S = -K; linear: R_S = -(a + b S); custom: user callable.
struct EvaporationLaw {
  enum class Kind { d2, linear, custom };

  Kind kind = Kind::d2;
  double K = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::function<double(double)> custom_rate;

  static EvaporationLaw d2(double K);
  static EvaporationLaw linear(double a, double b);
  static EvaporationLaw custom(std::function<double(double)> rate);

  double rate(double s) const;
  /// True when the law moves no droplet (K = 0, or a = b = 0).
  bool is_null() const;
};

/// Size S~(t1; t0, s0) on the characteristic through (t0, s0), floored at 0. t1 < t0 integrates
/// backwards. Closed forms for d2 and linear laws, RK4 otherwise.
double characteristics_solve(const EvaporationLaw& law, double t0, double t1, double s0);

/// Largest initial size that fully evaporates within dt: s* = S~(t; t + dt, 0).
double disappearance_size(const EvaporationLaw& law, double dt);

struct EvaporationStepResult {
  MomentVector updated;
  MomentArray disappearance_flux{};
  std::optional<PrincipalRepresentation> quadrature_used;
  std::optional<MaxEntDensity> density;
  int neg_count_used = 0;
  // Sizes of the representation nodes at the end of the step (aligned with quadrature_used).
  std::vector<double> evolved_nodes;
  std::vector<std::string> warnings;
};

struct NemoOptions {
  int neg_count = 1;
  MaxEntOptions maxent{};
  const MaxEntDensity* warm_start = nullptr;
  // On maximum-entropy failure, continue with the lower principal representation of the full
  // moment vector instead of throwing (the result carries a warning).
  bool discrete_fallback = false;
};

/// Moments at time t of the exact solution started from n0, using a composite rule in the
/// initial-size variable. `breakpoints` marks discontinuities of n0.
MomentVector exact_kinetic_moments(const std::function<double(double)>& n0,
                                   const EvaporationLaw& law, double t, ExponentBasis basis,
                                   const std::vector<double>& breakpoints = {});

/// Maximum-entropy reconstruction followed by exact transport of the reconstructed density.
EvaporationStepResult step_fully_kinetic(const MomentVector& m, const EvaporationLaw& law,
                                         double dt, const NemoOptions& options = {});

/// Quadrature-based update: disappearance flux from the ME density, negative-order moments on the
/// surviving interval, lower principal representation, then evolution of the abscissas.
EvaporationStepResult step_nemo(const MomentVector& m, const EvaporationLaw& law, double dt,
                                const NemoOptions& options = {});

/// Error series of one d2 step: exact-kinetic update of the ME density minus the quadrature update,
/// summed over 50 terms of the binomial expansion of (S - K dt)^{k/2}.
MomentArray nemo_truncation_error(const MomentVector& m, double K, double dt, int neg_count,
                                  const MaxEntOptions& maxent = {});

}  // namespace spraymom
