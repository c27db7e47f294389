#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spraymom/quadrature.hpp"

namespace spraymom {

inline constexpr std::size_t kMomentCount = 4;
using MomentArray = std::array<double, kMomentCount>;

enum class BasisKind { fractional, integer };

/// Exponent set {0, h, 2h, 3h} with h = 1/2 (fractional, surface moments m_0..m_{3/2})
/// or h = 1 (integer, the classical m_0..m_3).
struct ExponentBasis {
  BasisKind kind = BasisKind::fractional;

  static constexpr ExponentBasis fractional() { return {BasisKind::fractional}; }
  static constexpr ExponentBasis integer() { return {BasisKind::integer}; }

  constexpr double step() const { return kind == BasisKind::fractional ? 0.5 : 1.0; }
  constexpr double exponent(std::size_t k) const { return step() * static_cast<double>(k); }
  /// Index of the moment of order one (the interface-area moment carrying momentum).
  constexpr std::size_t unit_order_index() const { return kind == BasisKind::fractional ? 2 : 1; }
  std::string_view name() const { return kind == BasisKind::fractional ? "fractional" : "integer"; }

  friend constexpr bool operator==(ExponentBasis, ExponentBasis) = default;
};

ExponentBasis parse_basis(std::string_view name);

struct MomentVector {
  ExponentBasis basis{};
  MomentArray values{};
  double s_min = 0.0;
  double s_max = 1.0;

  double m0() const noexcept { return values[0]; }
  double unit_order() const noexcept { return values[basis.unit_order_index()]; }
  double operator[](std::size_t k) const noexcept { return values[k]; }
  double& operator[](std::size_t k) noexcept { return values[k]; }
  bool is_vacuum(double threshold = 0.0) const noexcept { return values[0] <= threshold; }

  static MomentVector vacuum(ExponentBasis basis) { return {basis, {0.0, 0.0, 0.0, 0.0}}; }
};

/// Canonical moments p_1..p_3. `defined` counts how many were computed before the vector
/// reached the boundary of the moment space (a denominator vanished).
struct CanonicalMoments {
  std::array<double, 3> p{};
  int defined = 0;

  bool on_boundary() const noexcept {
    if (defined < 3) {
      return true;
    }
    for (double v : p) {
      if (v <= 0.0 || v >= 1.0) {
        return true;
      }
    }
    return false;
  }
};

CanonicalMoments canonical_moments(const MomentVector& m);

/// Inverse map for c_0 = 1: normalized moments from canonical moments. Works for both bases
/// because the fractional moments are integer moments of the radius measure.
MomentArray moments_from_canonical(double m0, const std::array<double, 3>& p);

enum class Realizability { interior, boundary, outside };

inline constexpr double kDefaultRealizabilityTol = 1e-10;

Realizability is_realizable(const MomentVector& m, double tol = kDefaultRealizabilityTol);
std::string_view to_string(Realizability r);

/// Gauss rule recovered from 2n raw moments. When the PD recurrence hits a coefficient below
/// the conditioning floor the rule is truncated and `reduced` is set.
struct GaussRepresentation {
  QuadratureRule rule;
  std::size_t matched_moments = 0;
  bool reduced = false;
};

inline constexpr double kPdCoefficientFloor = 1e-13;

/// Product-difference inversion of the integer moments c_0..c_{2n-1} of a positive measure on
/// [lo, hi] (lo >= 0).
GaussRepresentation pd_inversion(std::span<const double> moments, double lo, double hi);

/// Dirac-sum measure in the size variable matching moments of orders l/2.
struct PrincipalRepresentation {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> matched_orders;
  bool reduced = false;

  std::size_t size() const noexcept { return nodes.size(); }
  double moment(double order) const;
};

/// Lower principal representation matching m_{l/2} for l = -2*neg_count .. 3 on [s_min, 1].
/// `positive` holds m_0..m_{3/2}; `negative` holds m_{-neg_count}, ..., m_{-1/2} ordered from the
/// lowest order upwards. Built by PD inversion of the radius measure r^{-2 neg_count} 2r n(r^2).
PrincipalRepresentation lower_principal_rep_fractional(std::span<const double> positive,
                                                       std::span<const double> negative,
                                                       int neg_count, double s_min);

/// Integer-basis counterpart (EMSM): PD on m_0..m_3 directly in the size variable.
PrincipalRepresentation lower_principal_rep_integer(std::span<const double> positive,
                                                    double s_min);

struct GeometricOutputs {
  double gauss_curvature = 0.0;  // Sigma_d G~_d
  double mean_curvature = 0.0;   // Sigma_d H~_d
  double interface_area = 0.0;   // Sigma_d
  double volume_fraction = 0.0;  // alpha_d
};

/// Averaged interface geometry of a fractional moment vector.
GeometricOutputs geometric_outputs(const MomentVector& m);

}  // namespace spraymom
