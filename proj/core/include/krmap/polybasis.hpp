#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace krmap {

// Orthonormal polynomial systems with respect to a probability weight λ.
enum class BasisFamily { Chebyshev1, Chebyshev2, Legendre, Hermite, Laguerre };

struct Interval {
  double lower;
  double upper;
};

// Analytic support of λ; endpoints may be infinite.
Interval support(BasisFamily family);
bool is_bounded(BasisFamily family);
bool in_support(BasisFamily family, double x);

std::string_view to_string(BasisFamily family);
BasisFamily basis_family_from_string(std::string_view name);

// ψ_0(x)..ψ_n(x) written into out, which must hold n + 1 values.
void eval_basis(BasisFamily family, int max_degree, double x, std::span<double> out);
std::vector<double> eval_basis(BasisFamily family, int max_degree, double x);

double weight_density(BasisFamily family, double x);
double log_weight_density(BasisFamily family, double x);

// An antiderivative of ψ_k λ. The additive constant is the closed form used
// by the CDF formulas; use weighted_antiderivative_left for the lower limit.
double weighted_antiderivative(BasisFamily family, int k, double x);
double weighted_antiderivative_left(BasisFamily family, int k);

// All antiderivatives minus their left-endpoint limits, k = 0..n.
void weighted_integrals(BasisFamily family, int max_degree, double x, std::span<double> out);

// Recurrence coefficients of the orthonormal family:
// ψ_{j+1} = ((x - a_j) ψ_j - b_j ψ_{j-1}) / b_{j+1}.
double recurrence_a(BasisFamily family, int j);
double recurrence_b(BasisFamily family, int j);

// Roots of U_{2n+1}: cos(iπ/(2n+2)), i = 1..2n+1.
std::vector<double> chebyshev2_nodes(int n);

// Coefficients a_0..a_{2n} of the U_j expansion interpolating values at chebyshev2_nodes(n).
std::vector<double> collocate_to_chebyshev2(std::span<const double> values_at_nodes, int n);

// λ-CDF and quantile of the reference weight itself.
double reference_cdf(BasisFamily family, double x);
double sample_reference(BasisFamily family, double xi);

// Strictly increasing bijection x ↦ z from a physical domain onto the family's
// support. Linear(a, b) is the affine map z = (2x - a - b)/(b - a).
class DomainMap {
 public:
  enum class Kind { Linear, Logarithmic, Algebraic };

  static DomainMap linear(double a, double b);
  static DomainMap identity() { return linear(-1.0, 1.0); }
  static DomainMap logarithmic();
  static DomainMap algebraic();

  Kind kind() const noexcept { return kind_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  bool is_identity() const noexcept;

  double to_reference(double x) const;
  double from_reference(double z) const;
  double to_reference_derivative(double x) const;
  double from_reference_derivative(double z) const;
  // log z'(x) evaluated at x = x(z); avoids cancellation near |z| = 1.
  double log_to_reference_derivative_at(double z) const;

  // Physical domain for a given reference support.
  Interval domain(BasisFamily family) const;

  // Logarithmic and Algebraic require a family supported on (-1, 1).
  bool compatible_with(BasisFamily family) const noexcept;

  bool operator==(const DomainMap&) const = default;

 private:
  DomainMap(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  Kind kind_;
  double a_;
  double b_;
};

std::string_view to_string(DomainMap::Kind kind);

// pdf(z) = (Σ_j a_j φ_j(z)) λ(z) / ζ on the reference support, where λ belongs
// to weight_family and φ_j are either the orthonormal ψ_j of the same family or,
// for the Legendre weight, the Chebyshev polynomials of the second kind U_j.
class UnivariatePdf {
 public:
  UnivariatePdf(BasisFamily family, std::vector<double> coeffs, double normalizer);
  static UnivariatePdf legendre_chebyshev2(std::vector<double> coeffs, double normalizer);

  BasisFamily weight_family() const noexcept { return weight_family_; }
  bool uses_chebyshev2_coefficients() const noexcept { return cheb2_; }
  const std::vector<double>& coefficients() const noexcept { return coeffs_; }
  double normalizer() const noexcept { return normalizer_; }
  Interval support() const { return krmap::support(weight_family_); }

  double density(double z) const;
  double log_density(double z) const;
  double cdf(double z) const;
  double quantile(double xi) const;

 private:
  UnivariatePdf(BasisFamily family, std::vector<double> coeffs, double normalizer, bool cheb2);
  BasisFamily weight_family_;
  std::vector<double> coeffs_;
  double normalizer_;
  bool cheb2_;
};

// Represents polynomials of degree ≤ 2n by their values at 2n + 1 nodes and
// converts node values of a nonnegative polynomial q into the pdf qλ/ζ.
// Legendre uses Chebyshev-2 collocation; other families project with a
// (2n + 1)-point Gauss rule of the same family.
class SquaredCollocation {
 public:
  SquaredCollocation(BasisFamily family, int n);

  BasisFamily family() const noexcept { return family_; }
  int degree() const noexcept { return n_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  // ψ_j(node_i) for j = 0..n, row-major with stride n + 1.
  const std::vector<double>& node_basis() const noexcept { return node_basis_; }

  std::vector<double> coefficients(std::span<const double> values) const;
  UnivariatePdf make_pdf(std::span<const double> values, double normalizer) const;

 private:
  BasisFamily family_;
  int n_;
  std::vector<double> nodes_;
  std::vector<double> node_basis_;
  std::vector<double> to_coeffs_;  // (2n+1) × (2n+1), row-major
};

double univariate_cdf(const UnivariatePdf& pdf, double x);
double invert_univariate_cdf(const UnivariatePdf& pdf, double xi);

}  // namespace krmap
