#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "krmap/density.hpp"
#include "krmap/polybasis.hpp"
#include "krmap/quadrature.hpp"
#include "krmap/sparse.hpp"

namespace krmap::testing {

// Adaptive Gauss–Kronrod; infinite limits are allowed.
inline double adaptive_integral(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol, &err);
}

// On finite intervals x = c - h cos θ absorbs inverse square-root endpoint
// singularities such as the Chebyshev weights; Gauss–Kronrod otherwise.
inline double singular_integral(const std::function<double(double)>& f, double a, double b) {
  if (std::isfinite(a) && std::isfinite(b)) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    return adaptive_integral(
        [&](double t) {
          const double x = c - h * std::cos(t);
          // Nodes that round onto an endpoint carry no mass. The same holds for
          // nodes so close to one that a singular weight evaluates to infinity.
          if (x <= a || x >= b) return 0.0;
          const double v = f(x) * h * std::sin(t);
          if (!std::isfinite(v) && std::min(x - a, b - x) <= 1e-9 * std::max(1.0, std::abs(x))) return 0.0;
          return v;
        },
        0.0, M_PI, 1e-13);
  }
  return adaptive_integral(f, a, b);
}

// Random downward-closed set grown by adding random reduced-margin members.
inline MultiIndexSet random_downward_closed(std::mt19937_64& rng, int dim, std::size_t cardinality, int max_degree) {
  MultiIndexSet set(dim, {MultiIndex(dim, 0)});
  while (set.size() < cardinality) {
    auto margin = reduced_margin(set, max_degree);
    if (margin.candidates.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, margin.candidates.size() - 1);
    set = set.enriched({margin.candidates[pick(rng)]});
  }
  return set;
}

inline std::vector<DomainMap> default_maps(BasisFamily family, int dim) {
  if (is_bounded(family)) return std::vector<DomainMap>(dim, DomainMap::linear(-2.0, 3.0));
  return std::vector<DomainMap>(dim, DomainMap::identity());
}

inline std::shared_ptr<const SquaredPolyDensity> random_density(std::mt19937_64& rng, BasisFamily family, int dim,
                                                                std::size_t cardinality, int max_degree = 6) {
  auto set = random_downward_closed(rng, dim, cardinality, max_degree);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(set.size());
  for (auto& v : c) v = normal(rng);
  c[0] += 2.0;
  std::uniform_real_distribution<double> gamma(0.0, 0.1);
  return std::make_shared<const SquaredPolyDensity>(family, default_maps(family, dim), std::move(set), std::move(c),
                                                    gamma(rng));
}

// Marginal of ρ over the coordinates q by a tensor Gauss rule in the reference
// variables. The rule is exact because g² has degree ≤ 2·max_degree per axis.
inline double tensor_marginal(const SquaredPolyDensity& rho, std::span<const int> q, std::span<const double> x_rest) {
  const int d = rho.dim();
  std::vector<bool> marg(d, false);
  for (int c : q) marg[c] = true;
  std::vector<double> z(d, 0.0);
  double log_w = 0.0;
  std::size_t r = 0;
  for (int c = 0; c < d; ++c) {
    if (marg[c]) continue;
    z[c] = rho.maps()[c].to_reference(x_rest[r++]);
    log_w += log_weight_density(rho.family(), z[c]) + rho.maps()[c].log_to_reference_derivative_at(z[c]);
  }
  const auto rule = gauss_rule(rho.family(), rho.set().max_degree() + 2);
  const std::size_t m = rule.nodes.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < q.size(); ++i) total *= m;
  double sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t f = flat;
    double w = 1.0;
    for (int c : q) {
      z[c] = rule.nodes[f % m];
      w *= rule.weights[f % m];
      f /= m;
    }
    const double g = rho.g_reference(z);
    sum += w * (rho.gamma() + g * g);
  }
  return sum / rho.normalizer() * std::exp(log_w);
}

// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

}  // namespace krmap::testing
