#include "krmap/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "krmap/errors.hpp"

namespace krmap {
namespace {

// ψ_n and ψ_n' by the orthonormal recurrence.
void psi_and_derivative(BasisFamily family, int n, double x, double& p, double& dp) {
  double pm1 = 0.0, dpm1 = 0.0;
  p = 1.0;
  dp = 0.0;
  for (int j = 0; j < n; ++j) {
    const double a = recurrence_a(family, j);
    const double b = recurrence_b(family, j);
    const double b1 = recurrence_b(family, j + 1);
    const double pn = ((x - a) * p - b * pm1) / b1;
    const double dpn = (p + (x - a) * dp - b * dpm1) / b1;
    pm1 = p;
    dpm1 = dp;
    p = pn;
    dp = dpn;
  }
}

QuadratureRule golub_welsch(BasisFamily family, int n) {
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
  for (int j = 0; j < n; ++j) diag(j) = recurrence_a(family, j);
  for (int j = 1; j < n; ++j) sub(j - 1) = std::abs(recurrence_b(family, j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Golub–Welsch eigensolve failed");
  QuadratureRule rule;
  rule.nodes.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(rule.nodes.begin(), rule.nodes.end());
  std::vector<double> psi(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double& x = rule.nodes[i];
    for (int it = 0; it < 3; ++it) {
      double p, dp;
      psi_and_derivative(family, n, x, p, dp);
      if (dp == 0.0) break;
      const double step = p / dp;
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    // Christoffel weight 1 / Σ_{k<n} ψ_k(x)².
    eval_basis(family, n - 1, x, psi);
    double s = 0.0;
    for (double v : psi) s += v * v;
    rule.weights[i] = 1.0 / s;
  }
  const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  for (auto& w : rule.weights) w /= total;
  return rule;
}

}  // namespace

QuadratureRule gauss_rule(BasisFamily family, int n) {
  if (n < 1) throw ArgumentError("quadrature rule needs at least one node");
  constexpr double pi = std::numbers::pi;
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  switch (family) {
    case BasisFamily::Chebyshev1:
      for (int i = 0; i < n; ++i) {
        rule.nodes[i] = -std::cos((2.0 * i + 1.0) * pi / (2.0 * n));
        rule.weights[i] = 1.0 / n;
      }
      return rule;
    case BasisFamily::Chebyshev2:
      for (int i = 0; i < n; ++i) {
        const double theta = (n - i) * pi / (n + 1.0);
        const double s = std::sin(theta);
        rule.nodes[i] = std::cos(theta);
        rule.weights[i] = 2.0 / (n + 1.0) * s * s;
      }
      return rule;
    default:
      return golub_welsch(family, n);
  }
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  auto rule = gauss_rule(BasisFamily::Legendre, n);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = 0.5 * (a + b) + half * rule.nodes[i];
    rule.weights[i] *= (b - a);
  }
  return rule;
}

QuadratureRule composite_gauss_legendre(int panels, int points, double a, double b) {
  if (panels < 1) throw ArgumentError("composite rule needs at least one panel");
  const auto base = gauss_rule(BasisFamily::Legendre, points);
  QuadratureRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * points);
  rule.weights.reserve(rule.nodes.capacity());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < points; ++i) {
      rule.nodes.push_back(lo + 0.5 * h * (base.nodes[i] + 1.0));
      rule.weights.push_back(base.weights[i] * h);
    }
  }
  return rule;
}

}  // namespace krmap
