#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "krmap/errors.hpp"
#include "krmap/polybasis.hpp"

namespace krmap {
namespace {

constexpr double kTailXi = 1e-13;
constexpr int kMaxRootIterations = 100;

// Σ_j a_j ∫_{-1}^z U_j(t)/2 dt with ∫ U_j = (T_{j+1}(z) + (-1)^j)/(j+1).
double cheb2_integral(const std::vector<double>& a, double z) {
  const double x = std::clamp(z, -1.0, 1.0);
  double tm1 = 1.0;  // T_0
  double t = x;      // T_1
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    sum += a[j] * (t + sign) / (2.0 * (j + 1.0));
    const double tp1 = 2.0 * x * t - tm1;
    tm1 = t;
    t = tp1;
  }
  return sum;
}

double cheb2_value(const std::vector<double>& a, double z) {
  // Clenshaw for Σ a_j U_j(z).
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = a.size(); j-- > 0;) {
    const double b0 = a[j] + 2.0 * z * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return b1;
}

}  // namespace

UnivariatePdf::UnivariatePdf(BasisFamily family, std::vector<double> coeffs, double normalizer,
                             bool cheb2)
    : weight_family_(family), coeffs_(std::move(coeffs)), normalizer_(normalizer), cheb2_(cheb2) {
  if (coeffs_.empty()) throw ArgumentError("UnivariatePdf needs at least one coefficient");
  if (!(normalizer_ > 0.0) || !std::isfinite(normalizer_)) {
    throw InvalidDensityError("UnivariatePdf normalizer must be positive and finite, got " +
                              std::to_string(normalizer_));
  }
}

UnivariatePdf::UnivariatePdf(BasisFamily family, std::vector<double> coeffs, double normalizer)
    : UnivariatePdf(family, std::move(coeffs), normalizer, false) {}

UnivariatePdf UnivariatePdf::legendre_chebyshev2(std::vector<double> coeffs, double normalizer) {
  return UnivariatePdf(BasisFamily::Legendre, std::move(coeffs), normalizer, true);
}

double UnivariatePdf::density(double z) const {
  if (!in_support(weight_family_, z)) throw DomainError("UnivariatePdf::density outside support");
  double s = 0.0;
  if (cheb2_) {
    s = cheb2_value(coeffs_, z);
  } else {
    std::vector<double> psi(coeffs_.size());
    eval_basis(weight_family_, static_cast<int>(coeffs_.size()) - 1, z, psi);
    for (std::size_t j = 0; j < coeffs_.size(); ++j) s += coeffs_[j] * psi[j];
  }
  if (s < 0.0) {
    double scale = 0.0;
    for (double c : coeffs_) scale += std::abs(c);
    if (s < -1e-8 * scale) {
      throw InvalidDensityError("negative univariate density value " + std::to_string(s));
    }
    s = 0.0;
  }
  return s * weight_density(weight_family_, z) / normalizer_;
}

double UnivariatePdf::log_density(double z) const {
  const double v = density(z);
  if (v > 0.0 && std::isfinite(v)) return std::log(v);
  return v == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(v);
}

double UnivariatePdf::cdf(double z) const {
  if (std::isnan(z)) throw DomainError("UnivariatePdf::cdf at NaN");
  const auto s = krmap::support(weight_family_);
  if (z <= s.lower) return 0.0;
  if (z >= s.upper) return 1.0;
  double sum = 0.0;
  if (cheb2_) {
    sum = cheb2_integral(coeffs_, z);
  } else {
    std::vector<double> integrals(coeffs_.size());
    weighted_integrals(weight_family_, static_cast<int>(coeffs_.size()) - 1, z, integrals);
    for (std::size_t j = 0; j < coeffs_.size(); ++j) sum += coeffs_[j] * integrals[j];
  }
  return std::clamp(sum / normalizer_, 0.0, 1.0);
}

double UnivariatePdf::quantile(double xi) const {
  if (!(xi >= 0.0 && xi <= 1.0)) throw ArgumentError("ξ must lie in [0, 1]");
  const auto s = krmap::support(weight_family_);
  const bool lower_finite = std::isfinite(s.lower);
  const bool upper_finite = std::isfinite(s.upper);
  if (lower_finite && xi == 0.0) return s.lower;
  if (upper_finite && xi == 1.0) return s.upper;
  if (!lower_finite || !upper_finite) xi = std::clamp(xi, kTailXi, 1.0 - kTailXi);

  double lo = lower_finite ? s.lower : -1.0;
  double hi = upper_finite ? s.upper : 1.0;
  if (lower_finite && hi <= lo) hi = lo + 1.0;
  double flo = cdf(lo) - xi;
  double fhi = cdf(hi) - xi;
  while (flo > 0.0) {
    if (lower_finite) break;
    hi = lo;
    fhi = flo;
    lo *= 2.0;
    if (lo < -1e8) throw RootFindingError("cannot bracket quantile from below", lo, hi);
    flo = cdf(lo) - xi;
  }
  while (fhi < 0.0) {
    if (upper_finite) break;
    lo = hi;
    flo = fhi;
    hi = hi * 2.0 + 1.0;
    if (hi > 1e8) throw RootFindingError("cannot bracket quantile from above", lo, hi);
    fhi = cdf(hi) - xi;
  }
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;

  // Illinois variant of regula falsi.
  double best = lo, fbest = flo;
  if (std::abs(fhi) < std::abs(flo)) { best = hi; fbest = fhi; }
  int side = 0;
  for (int it = 0; it < kMaxRootIterations; ++it) {
    double x = hi - fhi * (hi - lo) / (fhi - flo);
    if (!(x > lo && x < hi) || it % 8 == 7) x = 0.5 * (lo + hi);
    const double fx = cdf(x) - xi;
    if (std::abs(fx) < std::abs(fbest)) { best = x; fbest = fx; }
    if (std::abs(fx) <= 1e-15) break;
    if (fx < 0.0) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    if (hi - lo <= 1e-15 * scale) break;
  }
  // Newton polish.
  const double d = density(best);
  if (d > 0.0 && std::isfinite(d)) {
    const double xn = best - fbest / d;
    if (xn > lo && xn < hi) {
      const double fn = cdf(xn) - xi;
      if (std::abs(fn) < std::abs(fbest)) { best = xn; fbest = fn; }
    }
  }
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  if (std::abs(fbest) <= 1e-12 || hi - lo <= 1e-14 * scale) return best;
  throw RootFindingError("quantile did not converge; residual " + std::to_string(fbest), lo, hi);
}

double univariate_cdf(const UnivariatePdf& pdf, double x) { return pdf.cdf(x); }
double invert_univariate_cdf(const UnivariatePdf& pdf, double xi) { return pdf.quantile(xi); }

}  // namespace krmap

#include "krmap/quadrature.hpp"

namespace krmap {

SquaredCollocation::SquaredCollocation(BasisFamily family, int n) : family_(family), n_(n) {
  if (n < 0) throw ArgumentError("collocation degree must be nonnegative");
  const int m = 2 * n + 1;
  to_coeffs_.assign(static_cast<std::size_t>(m) * m, 0.0);
  if (family == BasisFamily::Legendre) {
    nodes_ = chebyshev2_nodes(n);
    const double h = std::numbers::pi / (m + 1);
    for (int j = 0; j < m; ++j) {
      for (int i = 1; i <= m; ++i) {
        to_coeffs_[static_cast<std::size_t>(j) * m + (i - 1)] =
            2.0 / (m + 1) * std::sin(i * h) * std::sin((j + 1) * i * h);
      }
    }
  } else {
    const auto rule = gauss_rule(family, m);
    nodes_ = rule.nodes;
    std::vector<double> psi(m);
    for (int i = 0; i < m; ++i) {
      eval_basis(family, m - 1, nodes_[i], psi);
      for (int j = 0; j < m; ++j) to_coeffs_[static_cast<std::size_t>(j) * m + i] = rule.weights[i] * psi[j];
    }
  }
  node_basis_.resize(static_cast<std::size_t>(m) * (n + 1));
  for (int i = 0; i < m; ++i) {
    eval_basis(family, n, nodes_[i],
               std::span<double>(node_basis_.data() + static_cast<std::size_t>(i) * (n + 1), n + 1));
  }
}

std::vector<double> SquaredCollocation::coefficients(std::span<const double> values) const {
  const int m = 2 * n_ + 1;
  if (values.size() != static_cast<std::size_t>(m)) throw ArgumentError("collocation value count mismatch");
  std::vector<double> a(m, 0.0);
  for (int j = 0; j < m; ++j) {
    const double* row = to_coeffs_.data() + static_cast<std::size_t>(j) * m;
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += row[i] * values[i];
    a[j] = s;
  }
  return a;
}

UnivariatePdf SquaredCollocation::make_pdf(std::span<const double> values, double normalizer) const {
  auto a = coefficients(values);
  if (family_ == BasisFamily::Legendre) return UnivariatePdf::legendre_chebyshev2(std::move(a), normalizer);
  return UnivariatePdf(family_, std::move(a), normalizer);
}

}  // namespace krmap
