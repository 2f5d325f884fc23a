#include "krmap/polybasis.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "krmap/errors.hpp"

namespace krmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
// Closed trigonometric forms are used strictly inside this band.
constexpr double kTrigBand = 1.0 - 1e-12;

void check_point(BasisFamily family, double x) {
  if (!in_support(family, x)) {
    throw DomainError("point " + std::to_string(x) + " outside the support of " +
                      std::string(to_string(family)));
  }
}

void check_degree(int n, std::size_t out_size) {
  if (n < 0) throw ArgumentError("max_degree must be nonnegative");
  if (out_size < static_cast<std::size_t>(n) + 1) throw ArgumentError("output span too small");
}

void eval_recurrence(BasisFamily family, int n, double x, std::span<double> out) {
  out[0] = 1.0;
  if (n == 0) return;
  double prev = 0.0;
  double cur = 1.0;
  for (int j = 0; j < n; ++j) {
    const double next =
        ((x - recurrence_a(family, j)) * cur - recurrence_b(family, j) * prev) /
        recurrence_b(family, j + 1);
    prev = cur;
    cur = next;
    out[j + 1] = cur;
  }
}

}  // namespace

Interval support(BasisFamily family) {
  switch (family) {
    case BasisFamily::Chebyshev1:
    case BasisFamily::Chebyshev2:
    case BasisFamily::Legendre:
      return {-1.0, 1.0};
    case BasisFamily::Hermite:
      return {-kInf, kInf};
    case BasisFamily::Laguerre:
      return {0.0, kInf};
  }
  throw ArgumentError("unknown basis family");
}

bool is_bounded(BasisFamily family) {
  const auto s = support(family);
  return std::isfinite(s.lower) && std::isfinite(s.upper);
}

bool in_support(BasisFamily family, double x) {
  if (std::isnan(x)) return false;
  const auto s = support(family);
  if (!std::isfinite(x)) return false;
  return x >= s.lower && x <= s.upper;
}

std::string_view to_string(BasisFamily family) {
  switch (family) {
    case BasisFamily::Chebyshev1: return "chebyshev1";
    case BasisFamily::Chebyshev2: return "chebyshev2";
    case BasisFamily::Legendre: return "legendre";
    case BasisFamily::Hermite: return "hermite";
    case BasisFamily::Laguerre: return "laguerre";
  }
  return "unknown";
}

BasisFamily basis_family_from_string(std::string_view name) {
  for (auto f : {BasisFamily::Chebyshev1, BasisFamily::Chebyshev2, BasisFamily::Legendre,
                 BasisFamily::Hermite, BasisFamily::Laguerre}) {
    if (to_string(f) == name) return f;
  }
  throw ArgumentError("unknown basis family '" + std::string(name) + "'");
}

double recurrence_a(BasisFamily family, int j) {
  return family == BasisFamily::Laguerre ? 2.0 * j + 1.0 : 0.0;
}

double recurrence_b(BasisFamily family, int j) {
  if (j <= 0) return 0.0;
  switch (family) {
    case BasisFamily::Chebyshev1:
      return j == 1 ? 1.0 / kSqrt2 : 0.5;
    case BasisFamily::Chebyshev2:
      return 0.5;
    case BasisFamily::Legendre: {
      const double jj = j;
      return jj / std::sqrt(4.0 * jj * jj - 1.0);
    }
    case BasisFamily::Hermite:
      return std::sqrt(static_cast<double>(j));
    case BasisFamily::Laguerre:
      return -static_cast<double>(j);
  }
  return 0.0;
}

void eval_basis(BasisFamily family, int max_degree, double x, std::span<double> out) {
  check_degree(max_degree, out.size());
  check_point(family, x);
  const bool trig = std::abs(x) <= kTrigBand;
  if (family == BasisFamily::Chebyshev1 && trig) {
    const double theta = std::acos(x);
    out[0] = 1.0;
    for (int j = 1; j <= max_degree; ++j) out[j] = kSqrt2 * std::cos(j * theta);
    return;
  }
  if (family == BasisFamily::Chebyshev2 && trig) {
    const double theta = std::acos(x);
    const double s = std::sin(theta);
    for (int j = 0; j <= max_degree; ++j) out[j] = std::sin((j + 1) * theta) / s;
    return;
  }
  eval_recurrence(family, max_degree, x, out);
}

std::vector<double> eval_basis(BasisFamily family, int max_degree, double x) {
  if (max_degree < 0) throw ArgumentError("max_degree must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(max_degree) + 1);
  eval_basis(family, max_degree, x, out);
  return out;
}

double weight_density(BasisFamily family, double x) {
  check_point(family, x);
  switch (family) {
    case BasisFamily::Chebyshev1:
      return 1.0 / (kPi * std::sqrt((1.0 - x) * (1.0 + x)));
    case BasisFamily::Chebyshev2:
      return 2.0 * std::sqrt((1.0 - x) * (1.0 + x)) / kPi;
    case BasisFamily::Legendre:
      return 0.5;
    case BasisFamily::Hermite:
      return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
    case BasisFamily::Laguerre:
      return std::exp(-x);
  }
  return 0.0;
}

double log_weight_density(BasisFamily family, double x) {
  check_point(family, x);
  switch (family) {
    case BasisFamily::Chebyshev1:
      return -std::log(kPi) - 0.5 * std::log((1.0 - x) * (1.0 + x));
    case BasisFamily::Chebyshev2:
      return std::log(2.0 / kPi) + 0.5 * std::log((1.0 - x) * (1.0 + x));
    case BasisFamily::Legendre:
      return -std::log(2.0);
    case BasisFamily::Hermite:
      return -0.5 * x * x - 0.5 * std::log(2.0 * kPi);
    case BasisFamily::Laguerre:
      return -x;
  }
  return 0.0;
}

void weighted_integrals(BasisFamily family, int max_degree, double x, std::span<double> out) {
  check_degree(max_degree, out.size());
  check_point(family, x);
  const int n = max_degree;
  switch (family) {
    case BasisFamily::Chebyshev1: {
      const double theta = std::acos(std::clamp(x, -1.0, 1.0));
      out[0] = 1.0 - theta / kPi;
      for (int j = 1; j <= n; ++j) out[j] = -kSqrt2 * std::sin(j * theta) / (j * kPi);
      return;
    }
    case BasisFamily::Chebyshev2: {
      const double theta = std::acos(std::clamp(x, -1.0, 1.0));
      out[0] = (kPi - theta + 0.5 * std::sin(2.0 * theta)) / kPi;
      for (int j = 1; j <= n; ++j) {
        out[j] = (std::sin((j + 2) * theta) / (j + 2) - std::sin(j * theta) / j) / kPi;
      }
      return;
    }
    case BasisFamily::Legendre: {
      // Classical P_k; ∫ψ_k λ = (P_{k+1} - P_{k-1}) / (2√(2k+1)).
      double pm1 = 1.0;  // P_{k-1}
      double p = x;      // P_k
      out[0] = 0.5 * (x + 1.0);
      for (int k = 1; k <= n; ++k) {
        const double pp1 = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
        out[k] = (pp1 - pm1) / (2.0 * std::sqrt(2.0 * k + 1.0));
        pm1 = p;
        p = pp1;
      }
      return;
    }
    case BasisFamily::Hermite: {
      out[0] = 0.5 * std::erfc(-x / kSqrt2);
      if (n == 0) return;
      std::vector<double> psi(static_cast<std::size_t>(n));
      eval_recurrence(family, n - 1, x, psi);
      const double lam = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
      for (int j = 1; j <= n; ++j) out[j] = -psi[j - 1] * lam / std::sqrt(static_cast<double>(j));
      return;
    }
    case BasisFamily::Laguerre: {
      out[0] = -std::expm1(-x);
      if (n == 0) return;
      // Equivalent to (x e^{-x}/j) Σ_{k<j} ψ_k via x L^{(1)}_{j-1} = j (L_{j-1} - L_j).
      std::vector<double> psi(static_cast<std::size_t>(n) + 1);
      eval_recurrence(family, n, x, psi);
      const double e = std::exp(-x);
      for (int j = 1; j <= n; ++j) out[j] = e * (psi[j - 1] - psi[j]);
      return;
    }
  }
}

double weighted_antiderivative_left(BasisFamily family, int k) {
  if (k < 0) throw ArgumentError("degree must be nonnegative");
  if (k > 0) return 0.0;
  switch (family) {
    case BasisFamily::Chebyshev1:
    case BasisFamily::Chebyshev2:
    case BasisFamily::Laguerre:
      return -1.0;
    case BasisFamily::Legendre:
    case BasisFamily::Hermite:
      return -0.5;
  }
  return 0.0;
}

double weighted_antiderivative(BasisFamily family, int k, double x) {
  if (k < 0) throw ArgumentError("degree must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(k) + 1);
  weighted_integrals(family, k, x, out);
  return out[k] + weighted_antiderivative_left(family, k);
}

std::vector<double> chebyshev2_nodes(int n) {
  if (n < 0) throw ArgumentError("n must be nonnegative");
  const int m = 2 * n + 1;
  std::vector<double> nodes(m);
  for (int i = 1; i <= m; ++i) nodes[i - 1] = std::cos(i * kPi / (m + 1));
  return nodes;
}

std::vector<double> collocate_to_chebyshev2(std::span<const double> values, int n) {
  if (n < 0) throw ArgumentError("n must be nonnegative");
  const int m = 2 * n + 1;
  if (values.size() != static_cast<std::size_t>(m)) {
    throw ArgumentError("expected " + std::to_string(m) + " values, got " +
                        std::to_string(values.size()));
  }
  // Discrete sine orthogonality: Σ_i sin(pθ_i) sin(rθ_i) = (m+1)/2 δ_pr.
  std::vector<double> a(m, 0.0);
  const double h = kPi / (m + 1);
  for (int i = 1; i <= m; ++i) {
    const double theta = i * h;
    const double v = values[i - 1] * std::sin(theta);
    for (int j = 0; j < m; ++j) a[j] += v * std::sin((j + 1) * theta);
  }
  for (auto& c : a) c *= 2.0 / (m + 1);
  return a;
}

double reference_cdf(BasisFamily family, double x) {
  std::array<double, 1> out{};
  weighted_integrals(family, 0, x, out);
  return std::clamp(out[0], 0.0, 1.0);
}

double sample_reference(BasisFamily family, double xi) {
  if (!(xi >= 0.0 && xi <= 1.0)) throw ArgumentError("ξ must lie in [0, 1]");
  switch (family) {
    case BasisFamily::Chebyshev1:
      return -std::cos(kPi * xi);
    case BasisFamily::Chebyshev2: {
      // Solve θ - sin(2θ)/2 = π(1 - ξ) on [0, π]; the left side is increasing.
      if (xi == 0.0) return -1.0;
      if (xi == 1.0) return 1.0;
      const double target = kPi * (1.0 - xi);
      double lo = 0.0, hi = kPi, theta = target;
      for (int it = 0; it < 200; ++it) {
        const double g = theta - 0.5 * std::sin(2.0 * theta) - target;
        if (g > 0) hi = theta; else lo = theta;
        const double dg = 2.0 * std::sin(theta) * std::sin(theta);
        double next = dg > 0 ? theta - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - theta) <= 1e-16 * kPi || hi - lo <= 1e-16) {
          theta = next;
          break;
        }
        theta = next;
      }
      return std::cos(theta);
    }
    case BasisFamily::Legendre:
      return 2.0 * xi - 1.0;
    case BasisFamily::Hermite: {
      const double c = std::clamp(xi, 1e-16, 1.0 - 1e-16);
      if (c < 0.5) return -kSqrt2 * boost::math::erfc_inv(2.0 * c);
      return kSqrt2 * boost::math::erfc_inv(2.0 * (1.0 - c));
    }
    case BasisFamily::Laguerre: {
      const double c = std::clamp(xi, 0.0, 1.0 - 1e-16);
      return -std::log1p(-c);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------- DomainMap

DomainMap DomainMap::linear(double a, double b) {
  if (!(std::isfinite(a) && std::isfinite(b) && a < b)) {
    throw ArgumentError("Linear map requires finite a < b");
  }
  return DomainMap(Kind::Linear, a, b);
}

DomainMap DomainMap::logarithmic() { return DomainMap(Kind::Logarithmic, 0.0, 0.0); }
DomainMap DomainMap::algebraic() { return DomainMap(Kind::Algebraic, 0.0, 0.0); }

bool DomainMap::is_identity() const noexcept {
  return kind_ == Kind::Linear && a_ == -1.0 && b_ == 1.0;
}

double DomainMap::to_reference(double x) const {
  switch (kind_) {
    case Kind::Linear:
      return (2.0 * x - a_ - b_) / (b_ - a_);
    case Kind::Logarithmic:
      return std::tanh(x);
    case Kind::Algebraic:
      return x / std::sqrt(1.0 + x * x);
  }
  return 0.0;
}

double DomainMap::from_reference(double z) const {
  switch (kind_) {
    case Kind::Linear:
      return 0.5 * (a_ + b_) + 0.5 * (b_ - a_) * z;
    case Kind::Logarithmic:
      return std::atanh(z);
    case Kind::Algebraic:
      return z / std::sqrt((1.0 - z) * (1.0 + z));
  }
  return 0.0;
}

double DomainMap::to_reference_derivative(double x) const {
  switch (kind_) {
    case Kind::Linear:
      return 2.0 / (b_ - a_);
    case Kind::Logarithmic: {
      const double c = std::cosh(x);
      return 1.0 / (c * c);
    }
    case Kind::Algebraic:
      return std::pow(1.0 + x * x, -1.5);
  }
  return 0.0;
}

double DomainMap::from_reference_derivative(double z) const {
  switch (kind_) {
    case Kind::Linear:
      return 0.5 * (b_ - a_);
    case Kind::Logarithmic:
      return 1.0 / ((1.0 - z) * (1.0 + z));
    case Kind::Algebraic:
      return std::pow((1.0 - z) * (1.0 + z), -1.5);
  }
  return 0.0;
}

double DomainMap::log_to_reference_derivative_at(double z) const {
  switch (kind_) {
    case Kind::Linear:
      return std::log(2.0 / (b_ - a_));
    case Kind::Logarithmic:
      return std::log1p(-z) + std::log1p(z);
    case Kind::Algebraic:
      return 1.5 * (std::log1p(-z) + std::log1p(z));
  }
  return 0.0;
}

Interval DomainMap::domain(BasisFamily family) const {
  if (kind_ != Kind::Linear) return {-kInf, kInf};
  const auto s = support(family);
  return {std::isfinite(s.lower) ? from_reference(s.lower) : -kInf,
          std::isfinite(s.upper) ? from_reference(s.upper) : kInf};
}

bool DomainMap::compatible_with(BasisFamily family) const noexcept {
  if (kind_ == Kind::Linear) return true;
  return family == BasisFamily::Chebyshev1 || family == BasisFamily::Chebyshev2 ||
         family == BasisFamily::Legendre;
}

std::string_view to_string(DomainMap::Kind kind) {
  switch (kind) {
    case DomainMap::Kind::Linear: return "linear";
    case DomainMap::Kind::Logarithmic: return "logarithmic";
    case DomainMap::Kind::Algebraic: return "algebraic";
  }
  return "unknown";
}

}  // namespace krmap
