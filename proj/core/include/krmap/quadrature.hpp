#pragma once

#include <vector>

#include "krmap/polybasis.hpp"

namespace krmap {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss rule for the probability weight λ of the family (weights sum to 1).
// Exact for polynomials of degree ≤ 2n - 1.
QuadratureRule gauss_rule(BasisFamily family, int n);

// Gauss–Legendre rule for ∫_a^b f(x) dx.
QuadratureRule gauss_legendre(int n, double a, double b);

// Composite Gauss–Legendre: `panels` equal panels with `points` nodes each.
QuadratureRule composite_gauss_legendre(int panels, int points, double a, double b);

}  // namespace krmap
