#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <random>

#include "krmap/density.hpp"
#include "krmap/errors.hpp"
#include "krmap/quadrature.hpp"
#include "krmap/random.hpp"
#include "oracles.hpp"

using namespace krmap;
using krmap::testing::random_density;

namespace {

const BasisFamily kFamilies[] = {BasisFamily::Chebyshev1, BasisFamily::Chebyshev2, BasisFamily::Legendre,
                                 BasisFamily::Hermite, BasisFamily::Laguerre};

std::vector<double> random_physical_point(const SquaredPolyDensity& rho, std::mt19937_64& rng, int count) {
  std::vector<double> x(count);
  for (int i = 0; i < count; ++i) {
    double z = 0.0;
    switch (rho.family()) {
      case BasisFamily::Hermite: z = std::normal_distribution<double>(0.0, 1.0)(rng); break;
      case BasisFamily::Laguerre: z = std::exponential_distribution<double>(1.0)(rng); break;
      default: z = std::uniform_real_distribution<double>(-0.95, 0.95)(rng);
    }
    x[i] = rho.maps()[i].from_reference(z);
  }
  return x;
}

std::vector<double> random_reference_point(BasisFamily f, std::mt19937_64& rng, int d) {
  std::vector<double> u(d);
  for (auto& v : u) v = sample_reference(f, std::uniform_real_distribution<double>(0.02, 0.98)(rng));
  return u;
}

class PerFamily : public ::testing::TestWithParam<BasisFamily> {};

}  // namespace

TEST(EvalDensity, ConstantIsBaseWeight) {
  auto rho = SquaredPolyDensity(BasisFamily::Legendre, std::vector<DomainMap>(2, DomainMap::linear(0.0, 4.0)),
                                total_degree_set(2, 0), {1.0}, 0.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> x{std::uniform_real_distribution<double>(0, 4)(rng), std::uniform_real_distribution<double>(0, 4)(rng)};
    EXPECT_NEAR(eval_density(rho, x).value, 1.0 / 16.0, 1e-15);
  }
}

TEST(EvalDensity, LegendreDegreeOne) {
  SquaredPolyDensity rho(BasisFamily::Legendre, {DomainMap::identity()}, total_degree_set(1, 1), {0.0, 1.0}, 0.0);
  const std::vector<double> x{0.5};
  EXPECT_NEAR(eval_density(rho, x).value, 0.375, 1e-14);
}

TEST(EvalDensity, GammaOnlyIsBaseWeight) {
  SquaredPolyDensity rho(BasisFamily::Hermite, {DomainMap::identity()}, total_degree_set(1, 2), {0.0, 0.0, 0.0}, 1.0);
  const std::vector<double> x{0.7};
  EXPECT_NEAR(eval_density(rho, x).value, weight_density(BasisFamily::Hermite, 0.7), 1e-15);
}

TEST(EvalDensity, LogValueSurvivesUnderflow) {
  SquaredPolyDensity rho(BasisFamily::Hermite, {DomainMap::identity()}, total_degree_set(1, 0), {1.0}, 0.0);
  const std::vector<double> x{37.0};
  const auto v = eval_density(rho, x);
  EXPECT_NEAR(v.log_value, -0.5 * 37.0 * 37.0 - 0.5 * std::log(2 * std::numbers::pi), 1e-9);
}

TEST(EvalDensity, RejectsInvalidInput) {
  EXPECT_THROW(SquaredPolyDensity(BasisFamily::Legendre, {DomainMap::identity()}, total_degree_set(1, 1), {1.0}, 0.1),
               ArgumentError);
  SquaredPolyDensity rho(BasisFamily::Legendre, {DomainMap::identity()}, total_degree_set(1, 1), {1.0, 0.5}, 0.1);
  const std::vector<double> x{1.5};
  EXPECT_THROW(eval_density(rho, x), DomainError);
}

TEST_P(PerFamily, DensityIntegratesToOne) {
  std::mt19937_64 rng(31 + static_cast<int>(GetParam()));
  const auto rho = random_density(rng, GetParam(), 1, 6);
  const auto dom = rho->maps()[0].domain(GetParam());
  const double total = krmap::testing::singular_integral(
      [&](double x) {
        const std::vector<double> p{x};
        return in_support(GetParam(), rho->maps()[0].to_reference(x)) ? eval_density(*rho, p).value : 0.0;
      },
      dom.lower, dom.upper);
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST_P(PerFamily, MarginalsAgreeWithTensorQuadrature) {
  std::mt19937_64 rng(97 + static_cast<int>(GetParam()));
  for (int trial = 0; trial < 10; ++trial) {
    const auto rho = random_density(rng, GetParam(), 3, 15, 5);
    for (const std::vector<int>& q : {std::vector<int>{1, 2}, std::vector<int>{0}, std::vector<int>{1}}) {
      const auto x = random_physical_point(*rho, rng, 3 - static_cast<int>(q.size()));
      const double ref = krmap::testing::tensor_marginal(*rho, q, x);
      EXPECT_NEAR(marginal_orth(*rho, q, x), ref, 1e-8 * std::max(1.0, ref));
      EXPECT_NEAR(marginal_general(*rho, q, x), ref, 1e-8 * std::max(1.0, ref));
    }
  }
}

TEST_P(PerFamily, FullMarginalIsOne) {
  std::mt19937_64 rng(5);
  const auto rho = random_density(rng, GetParam(), 2, 8);
  const std::vector<int> q{0, 1};
  EXPECT_NEAR(marginal_orth(*rho, q, {}), 1.0, 1e-12);
  EXPECT_NEAR(marginal_general(*rho, q, {}), 1.0, 1e-10);
}

TEST_P(PerFamily, MassMatrixRankEqualsDistinctRows) {
  // M^(q) assembled by Gauss quadrature, independently of the library's marginals.
  std::mt19937_64 rng(55);
  const auto f = GetParam();
  for (int trial = 0; trial < 10; ++trial) {
    const auto set = krmap::testing::random_downward_closed(rng, 3, 20, 5);
    const auto rule = gauss_rule(f, set.max_degree() + 2);
    const std::vector<int> q{0, 2};
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(set.size(), set.size());
    for (int c : q) {
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(set.size(), set.size());
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const auto v = eval_basis(f, set.max_degree(), rule.nodes[i]);
        for (std::size_t a = 0; a < set.size(); ++a)
          for (std::size_t b = 0; b < set.size(); ++b)
            gram(a, b) += rule.weights[i] * v[set.component(a, c)] * v[set.component(b, c)];
      }
      m = m.cwiseProduct(gram);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(1e-9);
    EXPECT_EQ(static_cast<std::size_t>(lu.rank()), unique_row_projection(set, q).columns());
  }
}

TEST_P(PerFamily, ChangeOfVariablesAndRoundTrip) {
  std::mt19937_64 rng(71 + static_cast<int>(GetParam()));
  const auto rho = random_density(rng, GetParam(), 2, 10);
  for (const auto& ordering : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
    KrMap map(rho, ordering);
    for (int i = 0; i < 100; ++i) {
      const auto u = random_reference_point(GetParam(), rng, 2);
      const auto push = map.pushforward(u);
      const double direct = eval_density(*rho, push.x).log_value;
      EXPECT_NEAR(push.log_density, direct, 1e-8 * std::max(1.0, std::abs(direct)));
      EXPECT_NEAR(push.log_density + push.log_jacobian, map.log_reference_density(u), 1e-8);
      const auto back = map.inverse(push.x);
      for (int c = 0; c < 2; ++c) EXPECT_NEAR(back[c], u[c], 1e-8 * std::max(1.0, std::abs(u[c])));
      const auto pull = map.pullback(push.x);
      EXPECT_NEAR(pull.log_density, direct, 1e-8 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_P(PerFamily, ConditionalsIntegrateToOneAndAreConsistent) {
  std::mt19937_64 rng(13 + static_cast<int>(GetParam()));
  const auto rho = random_density(rng, GetParam(), 2, 9);
  const std::vector<int> ordering{0, 1};
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_physical_point(*rho, rng, 2);
    const std::vector<double> prefix{x[0]};
    const auto pdf = conditional_pdf(*rho, ordering, 1, prefix);
    const auto s = pdf.support();
    const double total =
        krmap::testing::singular_integral([&](double z) { return pdf.density(z); }, s.lower, s.upper);
    EXPECT_NEAR(total, 1.0, 1e-9);
    // marginal(x_0) · conditional(x_1 | x_0) = joint(x_0, x_1) after the map Jacobian.
    const double joint = eval_density(*rho, x).value;
    const double m0 = marginal_orth(*rho, std::vector<int>{1}, prefix);
    const double z1 = rho->maps()[1].to_reference(x[1]);
    const double cond = pdf.density(z1) * rho->maps()[1].to_reference_derivative(x[1]);
    EXPECT_NEAR(m0 * cond, joint, 1e-9 * std::max(1.0, joint));
  }
}

INSTANTIATE_TEST_SUITE_P(Families, PerFamily, ::testing::ValuesIn(kFamilies),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Conditional, VanishingPrefixLeavesGamma) {
  auto set = MultiIndexSet(2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  auto rho = std::make_shared<const SquaredPolyDensity>(BasisFamily::Legendre,
                                                        std::vector<DomainMap>(2, DomainMap::identity()), set,
                                                        std::vector<double>{0, 0, 0, 1}, 0.3);
  const std::vector<int> ordering{0, 1};
  const auto pdf = conditional_pdf(*rho, ordering, 1, std::vector<double>{0.0});
  for (double z : {-0.8, 0.1, 0.6}) EXPECT_NEAR(pdf.density(z), 0.5, 1e-12);
}

TEST(Conditional, MarginalOfSingleTensorTerm) {
  auto set = MultiIndexSet(2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  SquaredPolyDensity rho(BasisFamily::Legendre, std::vector<DomainMap>(2, DomainMap::identity()), set, {0, 0, 0, 1},
                         0.0);
  // p(x_1) = 3 x_1² and λ = 1/2.
  for (double x1 : {-0.7, 0.2, 0.9}) {
    EXPECT_NEAR(marginal_orth(rho, std::vector<int>{1}, std::vector<double>{x1}), 1.5 * x1 * x1, 1e-12);
  }
}

TEST(KrMap, IdentityCases) {
  auto rho = std::make_shared<const SquaredPolyDensity>(
      BasisFamily::Legendre, std::vector<DomainMap>(2, DomainMap::identity()), total_degree_set(2, 2),
      std::vector<double>(6, 0.0), 1.0);
  KrMap map(rho, identity_ordering(2));
  const std::vector<double> u{0.3, -0.55};
  const auto r = map.pushforward(u);
  EXPECT_NEAR(r.x[0], 0.3, 1e-12);
  EXPECT_NEAR(r.x[1], -0.55, 1e-12);
  EXPECT_NEAR(r.log_jacobian, 0.0, 1e-12);
}

TEST(KrMap, SymmetricMedian) {
  auto rho = std::make_shared<const SquaredPolyDensity>(BasisFamily::Legendre, std::vector<DomainMap>{DomainMap::identity()},
                                                        total_degree_set(1, 1), std::vector<double>{0.0, 1.0}, 0.0);
  EXPECT_NEAR(evaluate_kr(*rho, std::vector<int>{0}, std::vector<double>{0.0})[0], 0.0, 1e-12);
  EXPECT_NEAR(evaluate_kr_inverse(*rho, std::vector<int>{0}, std::vector<double>{0.0})[0], 0.0, 1e-12);
}

TEST(KrMap, AffineJacobian) {
  auto rho = std::make_shared<const SquaredPolyDensity>(BasisFamily::Legendre,
                                                        std::vector<DomainMap>{DomainMap::linear(1.0, 7.0)},
                                                        total_degree_set(1, 0), std::vector<double>{1.0}, 0.0);
  const auto r = log_pushforward_density(*rho, std::vector<int>{0}, std::vector<double>{0.25});
  EXPECT_NEAR(r.x[0], 4.75, 1e-12);
  EXPECT_NEAR(r.log_jacobian, std::log(3.0), 1e-12);
}

TEST(KrMap, CachedProjectionsMatchFreshOnes) {
  std::mt19937_64 rng(4);
  const auto rho = random_density(rng, BasisFamily::Legendre, 3, 20);
  KrMap map(rho, {2, 0, 1});
  for (int t = 0; t < 3; ++t) {
    const auto q = map.marginalized(t);
    EXPECT_EQ(map.projection(t).column_of_row, unique_row_projection(rho->set(), q).column_of_row);
  }
  EXPECT_TRUE(map.marginalized(2).empty());
}

TEST(KrMap, SamplesMatchQuadratureMarginal) {
  std::mt19937_64 rng(2);
  const auto rho = random_density(rng, BasisFamily::Legendre, 2, 10);
  KrMap map(rho, identity_ordering(2));
  auto draw = make_rng(99, "ks");
  std::vector<double> x0;
  x0.reserve(100000);
  for (int i = 0; i < 100000; ++i) {
    const std::vector<double> u{sample_reference(BasisFamily::Legendre, uniform_open(draw)),
                                sample_reference(BasisFamily::Legendre, uniform_open(draw))};
    x0.push_back(map.forward(u)[0]);
  }
  const auto dom = rho->maps()[0].domain(BasisFamily::Legendre);
  // The Legendre marginal is a polynomial, so a 20-point Gauss rule is exact.
  const double ks = krmap::testing::ks_distance(x0, [&](double t) {
    return boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double s) { return marginal_orth(*rho, std::vector<int>{1}, std::vector<double>{s}); }, dom.lower, t);
  });
  EXPECT_LT(ks, 0.01);
}
