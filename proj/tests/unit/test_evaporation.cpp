#include <doctest.h>

#include <cmath>
#include <random>

#include "spraymom/errors.hpp"
#include "spraymom/evaporation.hpp"
#include "spraymom/maxent.hpp"
#include "spraymom/quadrature.hpp"

using namespace spraymom;

namespace {

const ExponentBasis kFrac = ExponentBasis::fractional();

MomentVector uniform_moments() { return {kFrac, {1, 2.0 / 3.0, 0.5, 0.4}}; }

double smooth_ndf(double s) {
  const double r = std::sqrt(s);
  return std::exp(-20.0 * (r - 0.25) * (r - 0.25) * (r + 1.0));
}

// Random interior vector: moments of an exponential-polynomial density in the radius.
MomentVector random_interior(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  const double a = u(rng);
  const double b = u(rng);
  const double c = u(rng);
  const double m0 = scale(rng);
  auto n = [=](double s) {
    const double r = std::sqrt(s);
    return std::exp(a * r + b * s + c * s * r);
  };
  MomentVector m{kFrac, {}};
  const double norm = size_moment(n, 0.0, 0.0, 1.0, 48);
  for (int k = 0; k < 4; ++k) {
    m[k] = m0 * size_moment(n, 0.5 * k, 0.0, 1.0, 48) / norm;
  }
  return m;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("characteristic curves") {
  CHECK(std::abs(characteristics_solve(EvaporationLaw::d2(1.0), 0.0, 0.2, 0.5) - 0.3) < 1e-15);
  CHECK(characteristics_solve(EvaporationLaw::d2(1.0), 0.0, 0.7, 0.5) == 0.0);
  const double lin = (0.6 + 0.5) * std::exp(-0.3) - 0.5;
  CHECK(std::abs(lin - 0.314898) < 1e-5);
  CHECK(std::abs(characteristics_solve(EvaporationLaw::linear(0.5, 1.0), 0.0, 0.3, 0.6) - lin) <
        1e-14);
  const EvaporationLaw custom = EvaporationLaw::custom([](double s) { return -(0.5 + s); });
  CHECK(std::abs(characteristics_solve(custom, 0.0, 0.3, 0.6) - lin) < 1e-10);
}

TEST_CASE("disappearance size is the size that reaches zero at the end of the step") {
  CHECK(std::abs(disappearance_size(EvaporationLaw::d2(2.0), 0.01) - 0.02) < 1e-15);
  const EvaporationLaw lin = EvaporationLaw::linear(0.5, 1.0);
  const double s = disappearance_size(lin, 0.1);
  CHECK(std::abs(characteristics_solve(lin, 0.0, 0.1, s)) < 1e-13);
  CHECK(std::abs(s - 0.5 * (std::exp(0.1) - 1.0)) < 1e-14);
}

TEST_CASE("exact kinetic moments") {
  const auto one = [](double) { return 1.0; };
  const MomentVector m = exact_kinetic_moments(one, EvaporationLaw::d2(1.0), 0.5, kFrac);
  CHECK(std::abs(m[0] - 0.5) < 1e-12);
  CHECK(std::abs(m[1] - (2.0 / 3.0) * std::pow(0.5, 1.5)) < 1e-12);
  CHECK(std::abs(m[2] - 0.125) < 1e-12);
  CHECK(std::abs(m[3] - 0.4 * std::pow(0.5, 2.5)) < 1e-12);
  const MomentVector m0 = exact_kinetic_moments(smooth_ndf, EvaporationLaw::d2(1.0), 0.0, kFrac);
  for (int k = 0; k < 4; ++k) {
    CHECK(rel(m0[k], size_moment(smooth_ndf, 0.5 * k, 0.0, 1.0, 64)) < 1e-10);
  }
}

TEST_CASE("linear law moments agree with a stratified particle cloud") {
  const EvaporationLaw law = EvaporationLaw::linear(0.5, 1.0);
  const double t = 0.3;
  const MomentVector exact = exact_kinetic_moments([](double) { return 1.0; }, law, t, kFrac);
  constexpr int n = 1000000;
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  MomentArray mc{};
  for (int i = 0; i < n; ++i) {
    const double s0 = (i + jitter(rng)) / n;
    const double s = (s0 + 0.5) * std::exp(-t) - 0.5;
    if (s <= 0.0) {
      continue;
    }
    const double r = std::sqrt(s);
    mc[0] += 1.0;
    mc[1] += r;
    mc[2] += s;
    mc[3] += s * r;
  }
  for (int k = 0; k < 4; ++k) {
    CHECK(rel(mc[k] / n, exact[k]) < 1e-3);
  }
}

TEST_CASE("fully-kinetic step") {
  const MomentVector m = uniform_moments();
  const EvaporationStepResult r = step_fully_kinetic(m, EvaporationLaw::d2(1.0), 0.5);
  const MomentVector ex =
      exact_kinetic_moments([](double) { return 1.0; }, EvaporationLaw::d2(1.0), 0.5, kFrac);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(r.updated[k] - ex[k]) < 1e-8);
  }
  CHECK_FALSE(r.quadrature_used.has_value());
  const EvaporationStepResult z = step_fully_kinetic(m, EvaporationLaw::d2(1.0), 0.0);
  const EvaporationStepResult k0 = step_fully_kinetic(m, EvaporationLaw::d2(0.0), 0.1);
  for (int k = 0; k < 4; ++k) {
    CHECK(z.updated[k] == m[k]);
    CHECK(z.disappearance_flux[k] == 0.0);
    CHECK(k0.updated[k] == m[k]);
  }
  const EvaporationStepResult vac = step_fully_kinetic(MomentVector::vacuum(kFrac),
                                                       EvaporationLaw::d2(1.0), 0.1);
  CHECK(vac.updated.m0() == 0.0);
}

TEST_CASE("NEMO identity cases and total evaporation") {
  const MomentVector m = uniform_moments();
  for (const EvaporationStepResult& r : {step_nemo(m, EvaporationLaw::d2(0.0), 0.1),
                                         step_nemo(m, EvaporationLaw::d2(1.0), 0.0)}) {
    for (int k = 0; k < 4; ++k) {
      CHECK(r.updated[k] == m[k]);
      CHECK(r.disappearance_flux[k] == 0.0);
    }
  }
  const EvaporationStepResult all = step_nemo(m, EvaporationLaw::d2(1.0), 1.5);
  for (int k = 0; k < 4; ++k) {
    CHECK(all.updated[k] == 0.0);
    CHECK(all.disappearance_flux[k] == m[k]);
  }
}

TEST_CASE("NEMO rejects unsupported settings and warns on tiny disappearance sizes") {
  CHECK_THROWS_AS(step_nemo(uniform_moments(), EvaporationLaw::d2(1.0), 0.01, {3}), ArgumentError);
  const MomentVector integer{ExponentBasis::integer(), {1, 0.5, 1.0 / 3.0, 0.25}};
  CHECK_THROWS_AS(step_nemo(integer, EvaporationLaw::d2(1.0), 0.01, {1}), UnsupportedBasisError);
  const EvaporationStepResult r = step_nemo(uniform_moments(), EvaporationLaw::d2(1.0), 1e-9);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("smooth distribution: one negative pair is far better than none") {
  const EvaporationLaw law = EvaporationLaw::d2(1.0);
  const MomentVector start = exact_kinetic_moments(smooth_ndf, law, 0.0, kFrac);
  MomentVector fk = start;
  MomentVector n0 = start;
  MomentVector n1 = start;
  double err0 = 0.0;
  double err1 = 0.0;
  for (int step = 0; step < 100; ++step) {
    fk = step_fully_kinetic(fk, law, 0.002).updated;
    n0 = step_nemo(n0, law, 0.002, {0}).updated;
    n1 = step_nemo(n1, law, 0.002, {1}).updated;
    err0 = std::max(err0, std::abs(n0[1] - fk[1]) / start[1]);
    err1 = std::max(err1, std::abs(n1[1] - fk[1]) / start[1]);
  }
  CHECK(err0 >= 5.0 * err1);
}

TEST_CASE("number balance, monotone decay and realizability over random inputs") {
  std::mt19937_64 rng(31);
  const EvaporationLaw law = EvaporationLaw::d2(1.0);
  for (int t = 0; t < 1000; ++t) {
    const MomentVector m = random_interior(rng);
    for (double dt : {1e-4, 1e-3, 1e-2}) {
      for (int nq : {0, 1, 2}) {
        const EvaporationStepResult r = step_nemo(m, law, dt, {nq});
        CHECK(std::abs(r.updated[0] + r.disappearance_flux[0] - m[0]) <= 1e-9 * m[0]);
        for (int k = 0; k < 4; ++k) {
          CHECK(r.updated[k] <= m[k] * (1.0 + 1e-12));
        }
        CHECK(is_realizable(r.updated) != Realizability::outside);
      }
      const EvaporationStepResult f = step_fully_kinetic(m, law, dt);
      CHECK(std::abs(f.updated[0] + f.disappearance_flux[0] - m[0]) <= 1e-9 * m[0]);
      for (int k = 0; k < 4; ++k) {
        CHECK(f.updated[k] <= m[k] * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("NEMO approaches the exact solution as the step shrinks") {
  // horizon of the smooth evaporation case; for much shorter horizons the multi-step deviation
  // bottoms out at the maximum-entropy closure error instead of decreasing further
  const EvaporationLaw law = EvaporationLaw::d2(1.0);
  const double horizon = 0.2;
  const MomentVector start = exact_kinetic_moments(smooth_ndf, law, 0.0, kFrac);
  const MomentVector exact = exact_kinetic_moments(smooth_ndf, law, horizon, kFrac);
  double previous = INFINITY;
  for (double dt : {1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4, 1.5625e-4}) {
    MomentVector m = start;
    const int steps = static_cast<int>(std::lround(horizon / dt));
    for (int s = 0; s < steps; ++s) {
      m = step_nemo(m, law, dt, {1}).updated;
    }
    double dev = 0.0;
    for (int k = 0; k < 4; ++k) {
      dev = std::max(dev, std::abs(m[k] - exact[k]) / start[k]);
    }
    CHECK(dev < previous);
    previous = dev;
  }
}

TEST_CASE("one-step NEMO error shrinks with the step") {
  const EvaporationLaw law = EvaporationLaw::d2(1.0);
  const MomentVector start = exact_kinetic_moments(smooth_ndf, law, 0.0, kFrac);
  for (int nq : {1, 2}) {
    double previous = INFINITY;
    for (double dt : {1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4, 1.5625e-4}) {
      const MomentVector one = step_nemo(start, law, dt, {nq}).updated;
      const MomentVector ex = exact_kinetic_moments(smooth_ndf, law, dt, kFrac);
      double dev = 0.0;
      for (int k = 0; k < 4; ++k) {
        dev = std::max(dev, std::abs(one[k] - ex[k]) / start[k]);
      }
      CHECK(dev < 0.6 * previous);
      previous = dev;
    }
  }
}

TEST_CASE("integer basis without negative orders translates the surviving atoms exactly") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const double kdt = 0.01;
  for (int t = 0; t < 200; ++t) {
    const double a = u(rng);
    const double b = u(rng);
    auto n = [=](double s) { return std::exp(a * s + b * s * s); };
    MomentVector m{ExponentBasis::integer(), {}};
    for (int k = 0; k < 4; ++k) {
      m[k] = size_moment(n, k, 0.0, 1.0, 48);
    }
    const EvaporationStepResult r = step_nemo(m, EvaporationLaw::d2(1.0), kdt, {0});
    MomentArray rem{};
    for (int k = 0; k < 4; ++k) {
      rem[k] = m[k] - r.disappearance_flux[k];
    }
    // binomial expansion of sum w (S - K dt)^k terminates at the transported moments
    const MomentArray want{rem[0], rem[1] - kdt * rem[0],
                           rem[2] - 2 * kdt * rem[1] + kdt * kdt * rem[0],
                           rem[3] - 3 * kdt * rem[2] + 3 * kdt * kdt * rem[1] -
                               kdt * kdt * kdt * rem[0]};
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(r.updated[k] - want[k]) <= 1e-13 * m[0]);
    }
  }
}

TEST_CASE("linear law NEMO against the characteristic solution") {
  const EvaporationLaw law = EvaporationLaw::linear(0.5, 1.0);
  const MomentVector start = exact_kinetic_moments(smooth_ndf, law, 0.0, kFrac);
  MomentVector m = start;
  double worst = 0.0;
  for (int s = 1; s <= 300; ++s) {
    m = step_nemo(m, law, 2e-3).updated;
    const MomentVector ex = exact_kinetic_moments(smooth_ndf, law, 2e-3 * s, kFrac);
    for (int k = 0; k < 4; ++k) {
      worst = std::max(worst, std::abs(m[k] - ex[k]) / start[k]);
    }
  }
  CHECK(worst <= 0.01);
}

TEST_CASE("truncation error vanishes for even orders") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 100; ++t) {
    const MomentVector m = random_interior(rng);
    for (int nq : {0, 1, 2}) {
      const MomentArray e = nemo_truncation_error(m, 1.0, 0.01, nq);
      CHECK(std::abs(e[0]) <= 1e-12 * m[0]);
      CHECK(std::abs(e[2]) <= 1e-12 * m[0]);
    }
  }
}

TEST_CASE("truncation error: negative orders shrink the odd-order error") {
  const MomentVector m = uniform_moments();
  const MomentArray e0 = nemo_truncation_error(m, 1.0, 0.01, 0);
  const MomentArray e1 = nemo_truncation_error(m, 1.0, 0.01, 1);
  CHECK(std::abs(e1[1]) < std::abs(e0[1]));
  const MomentArray z = nemo_truncation_error(m, 1.0, 0.0, 1);
  for (double v : z) {
    CHECK(v == 0.0);
  }
}
