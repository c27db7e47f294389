#include "spraymom/evaporation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "spraymom/errors.hpp"

namespace spraymom {

namespace {

// Substep count for RK4 along characteristics of a general law.
int rk4_substeps(double dt) {
  return std::max(8, static_cast<int>(std::ceil(std::abs(dt) / 2.5e-4)));
}

double rk4_characteristic(const EvaporationLaw& law, double dt, double s0) {
  const int n = rk4_substeps(dt);
  const double h = dt / n;
  auto R = [&law](double s) { return law.rate(std::max(s, 0.0)); };
  double s = s0;
  for (int i = 0; i < n; ++i) {
    const double k1 = R(s);
    const double k2 = R(s + 0.5 * h * k1);
    const double k3 = R(s + 0.5 * h * k2);
    const double k4 = R(s + h * k3);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (s <= 0.0) {
      return 0.0;
    }
  }
  return s;
}

void check_neg_count(const MomentVector& m, int neg_count) {
  if (neg_count < 0 || neg_count > 2) {
    throw ArgumentError(fmt::format("negative-order count must be 0, 1 or 2, got {}", neg_count));
  }
  if (m.basis.kind == BasisKind::integer && neg_count != 0) {
    throw UnsupportedBasisError("negative-order moments require the fractional basis");
  }
}

// Moments of the density transported over one step, written in the variable u with
// S = s* + u^2 so that the surviving sizes S~ behave like u^2 near the lower end.
MomentArray transported_moments(const std::function<double(double)>& n, const EvaporationLaw& law,
                                double dt, double s_star, ExponentBasis basis,
                                const QuadratureRule& rule_u) {
  MomentArray out{};
  for (std::size_t i = 0; i < rule_u.size(); ++i) {
    const double u = rule_u.nodes[i];
    const double s = s_star + u * u;
    const double s_new = law.kind == EvaporationLaw::Kind::d2 ? u * u
                                                              : characteristics_solve(law, 0.0, dt, s);
    const double w = rule_u.weights[i] * 2.0 * u * n(s);
    for (std::size_t k = 0; k < kMomentCount; ++k) {
      out[k] += w * std::pow(s_new, basis.exponent(k));
    }
  }
  return out;
}

MomentArray flux_moments(const MaxEntDensity& d, double s_star) {
  MomentArray phi{};
  if (s_star <= 0.0) {
    return phi;
  }
  const double hi = std::min(s_star, 1.0);
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    phi[k] = size_moment([&d](double s) { return evaluate_density(d, s); }, d.basis.exponent(k),
                         0.0, hi);
  }
  return phi;
}

EvaporationStepResult vacuum_result(const MomentVector& m) {
  EvaporationStepResult r;
  r.updated = MomentVector::vacuum(m.basis);
  r.updated.s_min = m.s_min;
  r.updated.s_max = m.s_max;
  r.disappearance_flux = m.values;
  return r;
}

EvaporationStepResult identity_result(const MomentVector& m) {
  EvaporationStepResult r;
  r.updated = m;
  return r;
}

PrincipalRepresentation full_representation(const MomentVector& m) {
  if (m.basis.kind == BasisKind::fractional) {
    return lower_principal_rep_fractional(m.values, {}, 0, 0.0);
  }
  return lower_principal_rep_integer(m.values, 0.0);
}

// Translate the lower principal representation of the whole vector. Used for vectors on the
// boundary of the moment space, where it is the exact measure.
EvaporationStepResult discrete_step(const MomentVector& m, const EvaporationLaw& law, double dt,
                                    double s_star) {
  EvaporationStepResult r;
  r.updated = m;
  r.updated.values = {};
  const PrincipalRepresentation rep = full_representation(m);
  for (std::size_t j = 0; j < rep.size(); ++j) {
    const double s = rep.nodes[j];
    const double w = rep.weights[j];
    if (s <= s_star) {
      for (std::size_t k = 0; k < kMomentCount; ++k) {
        r.disappearance_flux[k] += w * std::pow(s, m.basis.exponent(k));
      }
      r.evolved_nodes.push_back(0.0);
      continue;
    }
    const double s_new = characteristics_solve(law, 0.0, dt, s);
    r.evolved_nodes.push_back(s_new);
    for (std::size_t k = 0; k < kMomentCount; ++k) {
      r.updated[k] += w * std::pow(s_new, m.basis.exponent(k));
    }
  }
  r.quadrature_used = rep;
  return r;
}

struct SurvivingRepresentation {
  PrincipalRepresentation rep;
  int neg_count = 0;
  std::map<double, double> moments;  // order -> value on [s*, 1] fed to the inversion
};

// Negative-order moments on [s*, 1] plus the lower principal representation. Returns nullopt when
// the inversion fails or loses moments.
std::optional<SurvivingRepresentation> build_surviving_rep(const MaxEntDensity& d,
                                                           const MomentArray& remaining,
                                                           double s_star, int neg_count) {
  std::vector<double> negative;
  SurvivingRepresentation out;
  out.neg_count = neg_count;
  for (int l = -2 * neg_count; l < 0; ++l) {
    const double order = 0.5 * l;
    const double v = size_moment([&d](double s) { return evaluate_density(d, s); }, order, s_star,
                                 1.0);
    negative.push_back(v);
    out.moments[order] = v;
  }
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    out.moments[d.basis.exponent(k)] = remaining[k];
  }
  try {
    out.rep = d.basis.kind == BasisKind::fractional
                  ? lower_principal_rep_fractional(remaining, negative, neg_count, s_star)
                  : lower_principal_rep_integer(remaining, s_star);
  } catch (const RealizabilityError&) {
    return std::nullopt;
  }
  if (out.rep.reduced) {
    return std::nullopt;
  }
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    const double order = d.basis.exponent(k);
    const double got = out.rep.moment(order);
    if (std::abs(got - remaining[k]) > 1e-8 * std::max(std::abs(remaining[k]), remaining[0])) {
      return std::nullopt;
    }
  }
  return out;
}

}  // namespace

EvaporationLaw EvaporationLaw::d2(double K) {
  if (K < 0.0) {
    throw ArgumentError("d2 evaporation rate must be non-negative");
  }
  EvaporationLaw law;
  law.kind = Kind::d2;
  law.K = K;
  return law;
}

EvaporationLaw EvaporationLaw::linear(double a, double b) {
  if (a < 0.0 || b < 0.0) {
    throw ArgumentError("linear evaporation coefficients must be non-negative");
  }
  EvaporationLaw law;
  law.kind = Kind::linear;
  law.a = a;
  law.b = b;
  return law;
}

EvaporationLaw EvaporationLaw::custom(std::function<double(double)> rate) {
  if (!rate) {
    throw ArgumentError("custom evaporation law needs a rate function");
  }
  EvaporationLaw law;
  law.kind = Kind::custom;
  law.custom_rate = std::move(rate);
  return law;
}

double EvaporationLaw::rate(double s) const {
  switch (kind) {
    case Kind::d2:
      return -K;
    case Kind::linear:
      return -(a + b * s);
    case Kind::custom:
      return custom_rate(s);
  }
  return 0.0;
}

bool EvaporationLaw::is_null() const {
  switch (kind) {
    case Kind::d2:
      return K == 0.0;
    case Kind::linear:
      return a == 0.0 && b == 0.0;
    case Kind::custom:
      return false;
  }
  return true;
}

double characteristics_solve(const EvaporationLaw& law, double t0, double t1, double s0) {
  const double dt = t1 - t0;
  if (dt == 0.0) {
    return s0;
  }
  double s = 0.0;
  switch (law.kind) {
    case EvaporationLaw::Kind::d2:
      s = s0 - law.K * dt;
      break;
    case EvaporationLaw::Kind::linear:
      if (law.b == 0.0) {
        s = s0 - law.a * dt;
      } else {
        const double c = law.a / law.b;
        s = (s0 + c) * std::exp(-law.b * dt) - c;
      }
      break;
    case EvaporationLaw::Kind::custom:
      s = rk4_characteristic(law, dt, s0);
      break;
  }
  return std::max(s, 0.0);
}

double disappearance_size(const EvaporationLaw& law, double dt) {
  if (dt <= 0.0 || law.is_null()) {
    return 0.0;
  }
  return characteristics_solve(law, dt, 0.0, 0.0);
}

MomentVector exact_kinetic_moments(const std::function<double(double)>& n0,
                                   const EvaporationLaw& law, double t, ExponentBasis basis,
                                   const std::vector<double>& breakpoints) {
  MomentVector out;
  out.basis = basis;
  const double s_star = disappearance_size(law, t);
  if (s_star >= 1.0) {
    return out;
  }
  std::vector<double> cuts{0.0};
  for (double b : breakpoints) {
    if (b > s_star && b < 1.0) {
      cuts.push_back(std::sqrt(b - s_star));
    }
  }
  cuts.push_back(std::sqrt(1.0 - s_star));
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    if (!(cuts[c] < cuts[c + 1])) {
      continue;
    }
    const QuadratureRule rule = composite_gauss_legendre(16, 256, cuts[c], cuts[c + 1]);
    const MomentArray part = transported_moments(n0, law, t, s_star, basis, rule);
    for (std::size_t k = 0; k < kMomentCount; ++k) {
      out[k] += part[k];
    }
  }
  return out;
}

EvaporationStepResult step_fully_kinetic(const MomentVector& m, const EvaporationLaw& law,
                                         double dt, const NemoOptions& options) {
  if (m.m0() <= 0.0) {
    return identity_result(MomentVector::vacuum(m.basis));
  }
  if (dt == 0.0 || law.is_null()) {
    return identity_result(m);
  }
  const double s_star = disappearance_size(law, dt);
  if (s_star >= 1.0) {
    return vacuum_result(m);
  }
  const MaxEntResult me = maxent_reconstruct(m, options.maxent, options.warm_start);
  const MaxEntDensity& d = me.density;

  EvaporationStepResult r;
  r.density = d;
  r.disappearance_flux = flux_moments(d, s_star);
  const QuadratureRule rule =
      gauss_legendre(kDefaultQuadratureOrder, 0.0, std::sqrt(1.0 - s_star));
  r.updated = m;
  r.updated.values = transported_moments([&d](double s) { return evaluate_density(d, s); }, law,
                                         dt, s_star, m.basis, rule);
  // same integral as above for k = 0, but exact number balance against the input
  r.updated[0] = std::max(m[0] - r.disappearance_flux[0], 0.0);
  return r;
}

EvaporationStepResult step_nemo(const MomentVector& m, const EvaporationLaw& law, double dt,
                                const NemoOptions& options) {
  check_neg_count(m, options.neg_count);
  if (m.m0() <= 0.0) {
    return identity_result(MomentVector::vacuum(m.basis));
  }
  if (dt == 0.0 || law.is_null()) {
    return identity_result(m);
  }
  const double s_star = disappearance_size(law, dt);
  if (s_star >= 1.0 || m[1] <= 1e-14 * m.m0()) {
    return vacuum_result(m);
  }

  if (is_realizable(m) != Realizability::interior) {
    EvaporationStepResult r = discrete_step(m, law, dt, s_star);
    r.warnings.push_back("moment vector on the moment-space boundary; translated its atoms");
    return r;
  }

  MaxEntResult me;
  try {
    me = maxent_reconstruct(m, options.maxent, options.warm_start);
  } catch (const NonConvergenceError& e) {
    if (!options.discrete_fallback) {
      throw;
    }
    EvaporationStepResult r = discrete_step(m, law, dt, s_star);
    r.warnings.push_back(fmt::format("maximum-entropy fallback: {}", e.what()));
    return r;
  } catch (const ConditioningError& e) {
    if (!options.discrete_fallback) {
      throw;
    }
    EvaporationStepResult r = discrete_step(m, law, dt, s_star);
    r.warnings.push_back(fmt::format("maximum-entropy fallback: {}", e.what()));
    return r;
  }
  const MaxEntDensity& d = me.density;

  EvaporationStepResult r;
  r.density = d;
  r.disappearance_flux = flux_moments(d, s_star);
  MomentArray remaining{};
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    r.disappearance_flux[k] = std::clamp(r.disappearance_flux[k], 0.0, m[k]);
    remaining[k] = m[k] - r.disappearance_flux[k];
  }
  if (remaining[0] <= 1e-14 * m.m0()) {
    return vacuum_result(m);
  }

  if (options.neg_count > 0 && s_star < 1e-8) {
    r.warnings.push_back(fmt::format(
        "disappearance size {:.3e} below 1e-8: negative-order moments are ill-conditioned", s_star));
  }

  std::optional<SurvivingRepresentation> surv;
  for (int nq = options.neg_count; nq >= 0 && !surv; --nq) {
    if (nq > 0 && s_star <= 0.0) {
      continue;
    }
    surv = build_surviving_rep(d, remaining, s_star, nq);
    if (!surv && nq > 0) {
      r.warnings.push_back(
          fmt::format("inversion with {} negative orders failed; retrying with fewer", nq));
    }
  }
  PrincipalRepresentation rep;
  if (surv) {
    rep = surv->rep;
    r.neg_count_used = surv->neg_count;
  } else {
    // keep whatever nodes the inversion can still produce
    rep = d.basis.kind == BasisKind::fractional
              ? lower_principal_rep_fractional(remaining, {}, 0, s_star)
              : lower_principal_rep_integer(remaining, s_star);
    r.warnings.push_back("reduced principal representation on the surviving interval");
  }

  r.updated = m;
  r.updated.values = {};
  for (std::size_t j = 0; j < rep.size(); ++j) {
    const double s_new = characteristics_solve(law, 0.0, dt, rep.nodes[j]);
    r.evolved_nodes.push_back(s_new);
    for (std::size_t k = 0; k < kMomentCount; ++k) {
      r.updated[k] += rep.weights[j] * std::pow(s_new, m.basis.exponent(k));
    }
  }
  r.quadrature_used = std::move(rep);
  return r;
}

MomentArray nemo_truncation_error(const MomentVector& m, double K, double dt, int neg_count,
                                  const MaxEntOptions& maxent) {
  check_neg_count(m, neg_count);
  if (m.basis.kind != BasisKind::fractional) {
    throw UnsupportedBasisError("truncation error series is defined for the fractional basis");
  }
  MomentArray eps{};
  const double s_star = K * dt;
  if (s_star <= 0.0 || m.m0() <= 0.0) {
    return eps;
  }
  if (s_star >= 1.0) {
    throw ArgumentError("truncation error series needs K dt < 1");
  }
  const MaxEntResult me = maxent_reconstruct(m, maxent);
  const MaxEntDensity& d = me.density;
  const MomentArray phi = flux_moments(d, s_star);
  MomentArray remaining{};
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    remaining[k] = m[k] - phi[k];
  }
  const auto surv = build_surviving_rep(d, remaining, s_star, neg_count);
  if (!surv) {
    throw RealizabilityError("truncation error: principal representation could not be built");
  }
  const PrincipalRepresentation& rep = surv->rep;

  // Geometric panels resolve the factor (s*/S)^n near the lower end.
  constexpr int panels = 96;
  QuadratureRule graded;
  for (int p = 0; p < panels; ++p) {
    const double a = s_star * std::pow(1.0 / s_star, static_cast<double>(p) / panels);
    const double b = s_star * std::pow(1.0 / s_star, static_cast<double>(p + 1) / panels);
    const QuadratureRule piece = gauss_legendre(20, a, b);
    graded.nodes.insert(graded.nodes.end(), piece.nodes.begin(), piece.nodes.end());
    graded.weights.insert(graded.weights.end(), piece.weights.begin(), piece.weights.end());
  }
  std::vector<double> density_at(graded.size());
  for (std::size_t i = 0; i < graded.size(); ++i) {
    density_at[i] = evaluate_density(d, graded.nodes[i]);
  }

  constexpr int terms = 50;
  for (std::size_t k = 0; k < kMomentCount; ++k) {
    const double q = 0.5 * static_cast<double>(k);
    double coeff = 1.0;  // a_n of the expansion of (1 - x)^q
    double sum = 0.0;
    for (int n = 0; n < terms && coeff != 0.0; ++n) {
      const double order = q - n;
      double exact = 0.0;
      const auto it = surv->moments.find(order);
      if (it != surv->moments.end()) {
        exact = std::pow(s_star, n) * it->second;
      } else {
        for (std::size_t i = 0; i < graded.size(); ++i) {
          const double s = graded.nodes[i];
          exact += graded.weights[i] * std::pow(s, q) * std::pow(s_star / s, n) * density_at[i];
        }
      }
      double quad = 0.0;
      for (std::size_t j = 0; j < rep.size(); ++j) {
        quad += rep.weights[j] * std::pow(rep.nodes[j], q) * std::pow(s_star / rep.nodes[j], n);
      }
      sum += coeff * (exact - quad);
      coeff *= (n - q) / (n + 1.0);
    }
    eps[k] = sum;
  }
  return eps;
}

}  // namespace spraymom
