// Microbenchmarks for the inner loops of map construction and sampling.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "krmap/approx.hpp"
#include "krmap/density.hpp"
#include "krmap/dirt.hpp"
#include "krmap/polybasis.hpp"
#include "krmap/problems.hpp"
#include "krmap/random.hpp"
#include "krmap/sparse.hpp"

using namespace krmap;

namespace {

std::shared_ptr<const SquaredPolyDensity> make_density(int dim, int degree) {
  auto set = total_degree_set(dim, degree);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 0.3);
  std::vector<double> c(set.size());
  for (auto& v : c) v = normal(rng);
  c[0] = 1.0;
  return std::make_shared<const SquaredPolyDensity>(BasisFamily::Legendre,
                                                    std::vector<DomainMap>(dim, DomainMap::identity()),
                                                    std::move(set), std::move(c), 1e-4);
}

void BM_EvalBasis(benchmark::State& state) {
  const auto family = static_cast<BasisFamily>(state.range(0));
  const int degree = static_cast<int>(state.range(1));
  std::vector<double> out(degree + 1);
  double x = 0.3;
  for (auto _ : state) {
    eval_basis(family, degree, x, out);
    benchmark::DoNotOptimize(out.data());
    x = 0.9 - x;
  }
}
BENCHMARK(BM_EvalBasis)->ArgsProduct({{0, 1, 2, 3, 4}, {10, 30}});

void BM_WeightedIntegrals(benchmark::State& state) {
  const auto family = static_cast<BasisFamily>(state.range(0));
  std::vector<double> out(31);
  for (auto _ : state) {
    weighted_integrals(family, 30, 0.4, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_WeightedIntegrals)->DenseRange(0, 4);

void BM_KrForward(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const KrMap map(make_density(dim, static_cast<int>(state.range(1))), identity_ordering(dim));
  auto rng = make_rng(1, "bench");
  std::vector<double> u(dim);
  for (auto _ : state) {
    for (auto& v : u) v = sample_reference(BasisFamily::Legendre, uniform_open(rng));
    benchmark::DoNotOptimize(map.forward(u));
  }
}
BENCHMARK(BM_KrForward)->Args({2, 8})->Args({2, 20})->Args({4, 6});

void BM_KrPullback(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const KrMap map(make_density(dim, static_cast<int>(state.range(1))), identity_ordering(dim));
  std::vector<double> x(dim, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(map.pullback(x));
}
BENCHMARK(BM_KrPullback)->Args({2, 8})->Args({2, 20})->Args({4, 6});

void BM_WeightedLeastSquares(benchmark::State& state) {
  const auto set = total_degree_set(2, static_cast<int>(state.range(0)));
  auto samples = sample_optimal(set, BasisFamily::Legendre, 4 * set.size(), 5);
  for (auto& s : samples) s.y = std::exp(-2.0 * (s.x[0] * s.x[0] + s.x[1] * s.x[1]));
  for (auto _ : state) benchmark::DoNotOptimize(solve_weighted_ls(samples, set, true));
  state.counters["cardinality"] = static_cast<double>(set.size());
}
BENCHMARK(BM_WeightedLeastSquares)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_CsirPotential(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  CsirModel model(k);
  const auto truth = CsirModel::default_truth(k);
  model.set_data(model.simulate_data(truth, 1));
  for (auto _ : state) benchmark::DoNotOptimize(model.potential(truth));
}
BENCHMARK(BM_CsirPotential)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_HellingerStep(benchmark::State& state) {
  std::mt19937_64 rng(9);
  std::vector<double> f(state.range(0)), k(state.range(0));
  for (auto& v : f) v = std::gamma_distribution<double>(2.0, 3.0)(rng);
  for (auto& v : k) v = std::normal_distribution<double>(0.0, 1.0)(rng);
  for (auto _ : state) benchmark::DoNotOptimize(hellinger_step_estimate(f, k, 0.3));
}
BENCHMARK(BM_HellingerStep)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
