#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "spraymom/errors.hpp"
#include "spraymom/maxent.hpp"
#include "spraymom/moment_space.hpp"

using namespace spraymom;

namespace {

MomentVector frac(double a, double b, double c, double d) {
  return {ExponentBasis::fractional(), {a, b, c, d}};
}

// Fractional moments of a Dirac mixture in S.
MomentArray mixture_moments(const std::vector<double>& s, const std::vector<double>& w) {
  MomentArray m{};
  for (std::size_t j = 0; j < s.size(); ++j) {
    for (std::size_t k = 0; k < kMomentCount; ++k) {
      m[k] += w[j] * std::pow(s[j], 0.5 * static_cast<double>(k));
    }
  }
  return m;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("basis exponents") {
  const ExponentBasis f = ExponentBasis::fractional();
  const ExponentBasis i = ExponentBasis::integer();
  CHECK(f.exponent(0) == 0.0);
  CHECK(f.exponent(3) == 1.5);
  CHECK(i.exponent(3) == 3.0);
  CHECK(f.unit_order_index() == 2);
  CHECK(i.unit_order_index() == 1);
  CHECK(parse_basis("integer") == i);
  CHECK(parse_basis("fractional") == f);
  CHECK_THROWS_AS(parse_basis("cubic"), ArgumentError);
}

TEST_CASE("canonical moments of the uniform density") {
  const CanonicalMoments p = canonical_moments(frac(1, 2.0 / 3.0, 0.5, 0.4));
  REQUIRE(p.defined == 3);
  CHECK(p.p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(p.p[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p.p[2] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK_FALSE(p.on_boundary());
}

TEST_CASE("canonical moments of boundary Diracs") {
  const CanonicalMoments top = canonical_moments(frac(1, 1, 1, 1));
  CHECK(top.p[0] == 1.0);
  CHECK(top.defined == 1);
  CHECK(top.on_boundary());
  const CanonicalMoments bottom = canonical_moments(frac(1, 0, 0, 0));
  CHECK(bottom.p[0] == 0.0);
  CHECK(bottom.on_boundary());
}

TEST_CASE("canonical moments map back to the moments") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int t = 0; t < 200; ++t) {
    const std::array<double, 3> p{u(rng), u(rng), u(rng)};
    const MomentArray m = moments_from_canonical(2.5, p);
    const CanonicalMoments q = canonical_moments(frac(m[0], m[1], m[2], m[3]));
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(q.p[k] - p[k]) < 1e-9);
    }
  }
}

TEST_CASE("realizability classification examples") {
  CHECK(is_realizable(frac(1, 2.0 / 3.0, 0.5, 0.4), 1e-10) == Realizability::interior);
  CHECK(is_realizable(frac(1, 1.01, 1, 1)) == Realizability::outside);
  CHECK(is_realizable(frac(0, 0, 0, 0)) == Realizability::boundary);
  CHECK(is_realizable(frac(-1, 0, 0, 0)) == Realizability::outside);
}

TEST_CASE("random Dirac mixtures are classified by atom count") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(0.02, 0.98);
  std::uniform_real_distribution<double> wt(0.05, 1.0);
  std::uniform_int_distribution<int> count(1, 4);
  int interior = 0;
  int boundary = 0;
  for (int t = 0; t < 10000; ++t) {
    const int n = count(rng);
    std::vector<double> s;
    std::vector<double> w;
    while (static_cast<int>(s.size()) < n) {
      const double x = pos(rng);
      bool far = true;
      for (double y : s) {
        far = far && std::abs(std::sqrt(x) - std::sqrt(y)) > 0.05;
      }
      if (far) {
        s.push_back(x);
        w.push_back(wt(rng));
      }
    }
    const MomentArray m = mixture_moments(s, w);
    const Realizability r = is_realizable({ExponentBasis::fractional(), m});
    if (n >= 2) {
      CHECK(r == Realizability::interior);
      ++interior;
    } else {
      CHECK(r == Realizability::boundary);
      ++boundary;
    }
  }
  CHECK(interior > 0);
  CHECK(boundary > 0);
}

TEST_CASE("every single Dirac takes the degenerate path") {
  for (int i = 1; i < 100; ++i) {
    const double s = i / 100.0;
    const MomentArray m = mixture_moments({s}, {1.3});
    CHECK(canonical_moments({ExponentBasis::fractional(), m}).on_boundary());
  }
}

TEST_CASE("PD inversion examples") {
  SUBCASE("two Diracs") {
    const std::vector<double> c{1, 0.5, 5.0 / 16.0, 7.0 / 32.0};
    const GaussRepresentation g = pd_inversion(c, 0.0, 1.0);
    REQUIRE(g.rule.size() == 2);
    CHECK(std::abs(g.rule.nodes[0] - 0.25) < 1e-12);
    CHECK(std::abs(g.rule.nodes[1] - 0.75) < 1e-12);
    CHECK(std::abs(g.rule.weights[0] - 0.5) < 1e-12);
    CHECK(std::abs(g.rule.weights[1] - 0.5) < 1e-12);
    CHECK_FALSE(g.reduced);
  }
  SUBCASE("single Dirac") {
    const std::vector<double> c{1, 0.25};
    const GaussRepresentation g = pd_inversion(c, 0.0, 1.0);
    REQUIRE(g.rule.size() == 1);
    CHECK(std::abs(g.rule.nodes[0] - 0.25) < 1e-14);
    CHECK(std::abs(g.rule.weights[0] - 1.0) < 1e-14);
  }
  SUBCASE("uniform measure gives the two-point Gauss rule") {
    const std::vector<double> c{1, 0.5, 1.0 / 3.0, 0.25};
    const GaussRepresentation g = pd_inversion(c, 0.0, 1.0);
    REQUIRE(g.rule.size() == 2);
    CHECK(std::abs(g.rule.nodes[0] - (0.5 - std::sqrt(3.0) / 6.0)) < 1e-12);
    CHECK(std::abs(g.rule.nodes[1] - (0.5 + std::sqrt(3.0) / 6.0)) < 1e-12);
    CHECK(std::abs(g.rule.weights[0] - 0.5) < 1e-12);
  }
  SUBCASE("non-realizable input") {
    const std::vector<double> c{1, 0.5, 0.2, 0.1};  // variance < 0
    CHECK_THROWS_AS(pd_inversion(c, 0.0, 1.0), RealizabilityError);
  }
}

TEST_CASE("PD inversion reproduces random realizable moment sequences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  std::uniform_real_distribution<double> wt(0.05, 1.0);
  for (int t = 0; t < 1000; ++t) {
    // three or more atoms keep c0..c3 in the interior
    const int atoms = 3 + t % 4;
    std::vector<double> c(4, 0.0);
    for (int a = 0; a < atoms; ++a) {
      const double x = pos(rng);
      const double w = wt(rng);
      for (int k = 0; k < 4; ++k) {
        c[k] += w * std::pow(x, k);
      }
    }
    const GaussRepresentation g = pd_inversion(c, 0.0, 1.0);
    for (std::size_t k = 0; k < 2 * g.rule.size(); ++k) {
      double v = 0.0;
      for (std::size_t j = 0; j < g.rule.size(); ++j) {
        v += g.rule.weights[j] * std::pow(g.rule.nodes[j], static_cast<double>(k));
      }
      CHECK(rel(v, c[k]) < 1e-9);
    }
    if (!g.reduced) {
      CHECK(g.rule.size() == 2);
    }
  }
}

TEST_CASE("lower principal representation without negative orders") {
  const std::array<double, 4> m{1, 2.0 / 3.0, 0.5, 0.4};
  const PrincipalRepresentation rep = lower_principal_rep_fractional(m, {}, 0, 0.0);
  REQUIRE(rep.size() == 2);
  for (int k = 0; k < 4; ++k) {
    CHECK(rel(rep.moment(0.5 * k), m[k]) < 1e-9);
  }
}

TEST_CASE("lower principal representation with one negative pair on [0.01, 1]") {
  const std::array<double, 4> pos{0.99, (2.0 / 3.0) * (1 - 1e-3), (1 - 1e-4) / 2.0,
                                  0.4 * (1 - 1e-5)};
  const std::array<double, 2> neg{std::log(100.0), 2.0 * (1 - 0.1)};
  const PrincipalRepresentation rep = lower_principal_rep_fractional(pos, neg, 1, 0.01);
  REQUIRE(rep.size() == 3);
  CHECK(rel(rep.moment(-1.0), neg[0]) < 1e-9);
  CHECK(rel(rep.moment(-0.5), neg[1]) < 1e-9);
  for (int k = 0; k < 4; ++k) {
    CHECK(rel(rep.moment(0.5 * k), pos[k]) < 1e-9);
  }
  for (double s : rep.nodes) {
    CHECK(s >= 0.01);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("single Dirac with negative orders falls back to a reduced rule") {
  std::array<double, 4> pos{};
  std::array<double, 2> neg{};
  for (int l = -2; l <= 3; ++l) {
    const double v = std::pow(0.7, l);
    if (l < 0) {
      neg[l + 2] = v;
    } else {
      pos[l] = v;
    }
  }
  const PrincipalRepresentation rep = lower_principal_rep_fractional(pos, neg, 1, 0.01);
  CHECK(rep.reduced);
  REQUIRE(rep.size() >= 1);
  CHECK(std::abs(rep.nodes[0] - 0.49) < 1e-8);
  CHECK(std::abs(rep.weights[0] - 1.0) < 1e-8);
}

TEST_CASE("the node/weight mapping matches every order for smooth densities") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_real_distribution<double> smin(0.005, 0.1);
  for (int t = 0; t < 60; ++t) {
    const double a = coef(rng);
    const double b = coef(rng);
    const double c = coef(rng);
    auto n = [=](double s) { return std::exp(a * std::sqrt(s) + b * s + c * s * s); };
    for (int neg_count : {0, 1, 2}) {
      const double lo = neg_count == 0 ? 0.0 : smin(rng);
      std::array<double, 4> pos{};
      for (int k = 0; k < 4; ++k) {
        pos[k] = size_moment(n, 0.5 * k, lo, 1.0, 48);
      }
      std::vector<double> neg;
      for (int l = -2 * neg_count; l < 0; ++l) {
        neg.push_back(size_moment(n, 0.5 * l, lo, 1.0, 48));
      }
      const PrincipalRepresentation rep = lower_principal_rep_fractional(pos, neg, neg_count, lo);
      REQUIRE(rep.size() == static_cast<std::size_t>(2 + neg_count));
      for (int l = -2 * neg_count; l <= 3; ++l) {
        const double want = l < 0 ? neg[l + 2 * neg_count] : pos[l];
        CHECK(rel(rep.moment(0.5 * l), want) < 1e-9);
      }
    }
  }
}

TEST_CASE("integer lower principal representation") {
  const std::array<double, 4> m{1, 0.5, 1.0 / 3.0, 0.25};
  const PrincipalRepresentation rep = lower_principal_rep_integer(m, 0.0);
  REQUIRE(rep.size() == 2);
  for (int k = 0; k < 4; ++k) {
    CHECK(rel(rep.moment(k), m[k]) < 1e-12);
  }
}

TEST_CASE("geometric outputs") {
  const double pi = std::numbers::pi;
  const double sp = std::sqrt(pi);
  GeometricOutputs g = geometric_outputs(frac(1, 0, 0, 0));
  CHECK(g.gauss_curvature == doctest::Approx(4 * pi));
  CHECK(g.mean_curvature == 0.0);
  g = geometric_outputs(frac(1, 2.0 / 3.0, 0.5, 0.4));
  CHECK(g.gauss_curvature == doctest::Approx(4 * pi).epsilon(1e-15));
  CHECK(g.mean_curvature == doctest::Approx(4 * sp / 3).epsilon(1e-15));
  CHECK(g.interface_area == 0.5);
  CHECK(g.volume_fraction == doctest::Approx(1 / (15 * sp)).epsilon(1e-15));
  g = geometric_outputs(frac(0, 0, 0, 0));
  CHECK(g.volume_fraction == 0.0);
  CHECK(g.gauss_curvature == 0.0);
  CHECK_THROWS_AS(geometric_outputs({ExponentBasis::integer(), {1, 0.5, 0.3, 0.2}}),
                  UnsupportedBasisError);
}
