// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Every threshold is pinned below.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <spdlog/spdlog.h>

#include "krmap/approx.hpp"
#include "krmap/density.hpp"
#include "krmap/dirt.hpp"
#include "krmap/problems.hpp"
#include "krmap/quadrature.hpp"
#include "krmap/random.hpp"
#include "krmap_cli/commands.hpp"
#include "krmap_cli/config.hpp"
#include "oracles.hpp"

using namespace krmap;

namespace {

// ------------------------------------------------------------ pinned tolerances
constexpr double kOrthTol = 1e-10;
constexpr double kAntiderivTol = 1e-9;
constexpr double kC1Seconds = 10.0;
constexpr double kMarginalTol = 1e-8;
constexpr double kC2Seconds = 60.0;
constexpr double kCovTol = 1e-8;
constexpr double kRoundTripTol = 1e-8;
constexpr double kKsTol = 0.01;
constexpr double kC3Seconds = 120.0;
constexpr double kBoundSlack = 1e-6;
constexpr double kLayeredHellinger = 0.05;
constexpr double kLayeredEvals = 5000.0;
constexpr std::size_t kMinLayers = 2, kMaxLayers = 4;
constexpr double kSingleRatio = 5.0;
constexpr int kLayeredReps = 9;
constexpr int kSingleReps = 3;
constexpr double kBridgeHellinger = 0.05;
constexpr double kK2Hellinger = 0.1;
constexpr std::size_t kK2Samples = 10000;

const std::array<BasisFamily, 5> kFamilies{BasisFamily::Chebyshev1, BasisFamily::Chebyshev2, BasisFamily::Legendre,
                                           BasisFamily::Hermite, BasisFamily::Laguerre};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

template <class... T>
std::string fmt_str(const char* f, T... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

double reference_draw(BasisFamily f, std::mt19937_64& rng) {
  switch (f) {
    case BasisFamily::Hermite: return std::normal_distribution<double>(0.0, 1.5)(rng);
    case BasisFamily::Laguerre: return std::exponential_distribution<double>(0.3)(rng);
    default: return std::uniform_real_distribution<double>(-0.99, 0.99)(rng);
  }
}

std::vector<double> physical_point(const SquaredPolyDensity& rho, std::mt19937_64& rng, int count) {
  std::vector<double> x(count);
  for (int i = 0; i < count; ++i) x[i] = rho.maps()[i].from_reference(reference_draw(rho.family(), rng));
  return x;
}

// ------------------------------------------------------------------ 1
Verdict basis_correctness() {
  const auto t0 = Clock::now();
  double orth = 0.0, anti = 0.0;
  std::mt19937_64 rng(101);
  for (auto f : kFamilies) {
    const auto rule = gauss_rule(f, 40);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(31, 31);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const auto v = eval_basis(f, 30, rule.nodes[i]);
      const Eigen::Map<const Eigen::VectorXd> p(v.data(), 31);
      gram += rule.weights[i] * p * p.transpose();
    }
    orth = std::max(orth, (gram - Eigen::MatrixXd::Identity(31, 31)).cwiseAbs().maxCoeff());
    for (int trial = 0; trial < 20; ++trial) {
      double a = reference_draw(f, rng), b = reference_draw(f, rng);
      if (a > b) std::swap(a, b);
      for (int k = 0; k <= 30; ++k) {
        const double ref = testing::adaptive_integral(
            [&](double x) { return eval_basis(f, k, x)[k] * weight_density(f, x); }, a, b, 1e-12);
        const double got = weighted_antiderivative(f, k, b) - weighted_antiderivative(f, k, a);
        anti = std::max(anti, std::abs(got - ref));
      }
    }
  }
  const double secs = since(t0);
  return {orth < kOrthTol && anti < kAntiderivTol && secs < kC1Seconds,
          fmt_str("max orthonormality defect %.2e (< %.0e), antiderivative error %.2e (< %.0e), %.1f s (< %.0f s)",
                  orth, kOrthTol, anti, kAntiderivTol, secs, kC1Seconds)};
}

// ------------------------------------------------------------------ 2
Verdict marginalization() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  double worst = 0.0;
  int rank_mismatch = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const auto f = kFamilies[inst % 5];
    const int d = 1 + (inst / 5) % 3;
    const std::size_t card = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    const auto rho = testing::random_density(rng, f, d, card, 5);
    std::vector<int> q;
    while (q.empty()) {
      q.clear();
      for (int c = 0; c < d; ++c)
        if (std::bernoulli_distribution(0.5)(rng)) q.push_back(c);
    }
    for (int p = 0; p < 3; ++p) {
      const auto x = physical_point(*rho, rng, d - static_cast<int>(q.size()));
      const double ref = testing::tensor_marginal(*rho, q, x);
      const double scale = std::max(1.0, std::abs(ref));
      worst = std::max({worst, std::abs(marginal_orth(*rho, q, x) - ref) / scale,
                        std::abs(marginal_general(*rho, q, x) - ref) / scale});
    }
    // M^(q) by Gauss quadrature, one Gram factor per marginalized coordinate.
    const auto& set = rho->set();
    const auto rule = gauss_rule(f, set.max_degree() + 2);
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
    if (static_cast<std::size_t>(lu.rank()) != unique_row_projection(set, q).columns()) ++rank_mismatch;
  }
  const double secs = since(t0);
  return {worst < kMarginalTol && rank_mismatch == 0 && secs < kC2Seconds,
          fmt_str("max relative marginal error %.2e (< %.0e), rank mismatches %d of 50, %.1f s (< %.0f s)", worst,
                  kMarginalTol, rank_mismatch, secs, kC2Seconds)};
}

// ------------------------------------------------------------------ 3
double ks_first_coordinate(const std::shared_ptr<const SquaredPolyDensity>& rho, std::uint64_t seed) {
  const KrMap map(rho, identity_ordering(rho->dim()));
  auto draw = make_rng(seed, "ks");
  std::vector<double> x0;
  x0.reserve(100000);
  std::vector<double> u(rho->dim());
  for (int i = 0; i < 100000; ++i) {
    for (auto& v : u) v = sample_reference(rho->family(), uniform_open(draw));
    x0.push_back(map.forward(u)[0]);
  }
  std::sort(x0.begin(), x0.end());
  std::vector<int> q(rho->dim() - 1);
  std::iota(q.begin(), q.end(), 1);
  const auto marginal = [&](double s) { return marginal_orth(*rho, q, std::vector<double>{s}); };
  // Quadrature CDF accumulated over the sorted sample.
  const auto dom = rho->maps()[0].domain(rho->family());
  double cdf = testing::singular_integral(marginal, dom.lower, x0.front());
  const double n = static_cast<double>(x0.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (i > 0 && x0[i] > x0[i - 1]) {
      cdf += boost::math::quadrature::gauss<double, 10>::integrate(marginal, x0[i - 1], x0[i]);
    }
    ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - cdf)});
  }
  return ks;
}

Verdict kr_consistency() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  double cov = 0.0, trip = 0.0, ks = 0.0;
  int instances = 0;
  for (auto f : kFamilies) {
    for (int d : {2, 3}) {
      const auto rho = testing::random_density(rng, f, d, 10, 5);
      std::vector<int> ordering(d);
      std::iota(ordering.begin(), ordering.end(), 0);
      std::shuffle(ordering.begin(), ordering.end(), rng);
      const KrMap map(rho, ordering);
      ++instances;
      for (int i = 0; i < 100; ++i) {
        std::vector<double> u(d);
        for (auto& v : u) v = sample_reference(f, std::uniform_real_distribution<double>(0.01, 0.99)(rng));
        const auto push = map.pushforward(u);
        // f_X̂(T(u)) |∇T(u)| = f_ref(u), compared in ratio form.
        const double lhs = eval_density(*rho, push.x).log_value + push.log_jacobian;
        cov = std::max(cov, std::abs(std::expm1(lhs - map.log_reference_density(u))));
        const auto back = map.inverse(push.x);
        for (int c = 0; c < d; ++c) trip = std::max(trip, std::abs(back[c] - u[c]) / std::max(1.0, std::abs(u[c])));
      }
      if (d == 2) {
        const double v = ks_first_coordinate(rho, 17 + static_cast<int>(f));
        spdlog::warn("criterion 3 {}: KS {:.4f}", to_string(f), v);
        ks = std::max(ks, v);
      }
    }
  }
  const double secs = since(t0);
  return {cov < kCovTol && trip < kRoundTripTol && ks < kKsTol && secs < kC3Seconds,
          fmt_str("%d instances: change-of-variables %.2e (< %.0e), round trip %.2e (< %.0e), max KS %.4f (< %.2f), "
                  "%.1f s (< %.0f s)",
                  instances, cov, kCovTol, trip, kRoundTripTol, ks, kKsTol, secs, kC3Seconds)};
}

// ------------------------------------------------------------------ 4
Verdict hellinger_bound() {
  std::vector<AnalyticTarget> targets{
      gaussian_bump(2, 8.0), gaussian_bump(2, 15.0, {0.2, -0.1}), gaussian_bump(2, 25.0, {-0.3, 0.3}),
      gaussian_bump(2, 40.0, {0.0, 0.25}), banana(0.5), banana(1.0), banana(2.0),
      product_beta(2, 2.0, 2.0), product_beta(2, 3.0, 4.0), product_beta(2, 5.0, 3.0)};
  LsConfig ls;
  ls.tau = 0.03;
  ls.max_cardinality = 400;
  int held = 0, clamped = 0;
  double worst_ratio = 0.0;
  std::ostringstream failures;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    const Potential phi = [&t](std::span<const double> x) { return -t.log_density(x); };
    const auto fit = construct_kr(phi, BasisFamily::Legendre, t.maps(), ls, 400 + i);
    const auto& rho = *fit.density;
    // ε, z and the best scale α of g against h = exp(-Φ/2), all in L²_λ.
    const auto grid = make_tensor_grid(t.box, 200);
    double vol = 1.0;
    for (const auto& b : t.box) vol *= b.upper - b.lower;
    std::vector<double> x(2), z(2);
    double hg = 0.0, gg = 0.0, hh = 0.0;
    std::vector<double> hs(grid.size()), gs(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
      grid.point(p, x);
      const double w = grid.weight(p) / vol;
      for (int c = 0; c < 2; ++c) z[c] = rho.maps()[c].to_reference(x[c]);
      hs[p] = std::exp(0.5 * t.log_density(x));
      gs[p] = rho.g_reference(z);
      hg += w * hs[p] * gs[p];
      gg += w * gs[p] * gs[p];
      hh += w * hs[p] * hs[p];
    }
    const double alpha = hg / gg;
    double eps2 = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const double r = alpha * gs[p] - hs[p];
      eps2 += grid.weight(p) / vol * r * r;
    }
    // f_X̂ is unchanged by (c, γ) → (αc, α²γ); γ is clamped when it exceeds ε².
    std::vector<double> c = rho.coefficients();
    for (auto& v : c) v *= alpha;
    double gamma = alpha * alpha * rho.gamma();
    if (gamma > eps2) {
      gamma = eps2;
      ++clamped;
    }
    const SquaredPolyDensity scaled(rho.family(), rho.maps(), rho.set(), c, gamma);
    const double dh = quadrature_hellinger([&t](std::span<const double> y) { return t.log_density(y); },
                                           [&scaled](std::span<const double> y) {
                                             return eval_density(scaled, y).log_value;
                                           },
                                           t.box, 200);
    const double bound = 2.0 * std::sqrt(eps2) / std::sqrt(hh) + kBoundSlack;
    worst_ratio = std::max(worst_ratio, dh / bound);
    if (dh <= bound) {
      ++held;
    } else {
      failures << " target " << i << " D_H " << dh << " > " << bound << ";";
    }
    spdlog::warn("criterion 4 target {}: |K| {}, eps {:.3e}, D_H {:.3e}, bound {:.3e}", i, rho.set().size(),
                 std::sqrt(eps2), dh, bound);
  }
  return {held == static_cast<int>(targets.size()),
          fmt_str("bound holds on %d of %zu targets, max D_H/bound %.3f, gamma clamped to eps^2 on %d", held,
                  targets.size(), worst_ratio, clamped) +
              failures.str()};
}

// ------------------------------------------------------------------ 5
struct Criterion5Out {
  Verdict verdict;
  std::vector<std::vector<double>> betas;
};

Criterion5Out single_vs_layered() {
  auto cfg = cli::parse_config(cli::suite_defaults("single-vs-layered"));
  const auto inst = cli::make_problem(cfg);
  const auto focus = find_support_box(inst.log_target, inst.box, 200, 40.0);
  Criterion5Out out;
  std::vector<double> dh, evals;
  bool layers_ok = true, completed = true;
  std::vector<std::size_t> layer_counts;
  std::vector<std::uint64_t> seeds;
  for (int rep = 0; rep < kLayeredReps; ++rep) {
    const auto seed = derive_seed(cfg.seed, "benchmark", static_cast<std::uint64_t>(rep));
    seeds.push_back(seed);
    const auto before = inst.problem.evaluations();
    const auto built = cli::build_layered(cfg, inst, seed);
    evals.push_back(static_cast<double>(inst.problem.evaluations() - before));
    dh.push_back(quadrature_hellinger(inst.log_target, built.result.map, focus, 200));
    const auto layers = built.result.map.num_layers();
    layer_counts.push_back(layers);
    layers_ok = layers_ok && layers >= kMinLayers && layers <= kMaxLayers;
    completed = completed && built.result.completed;
    out.betas.push_back(built.result.map.betas());
    spdlog::warn("criterion 5 layered rep {}: {} layers, {} evaluations, D_H {:.4f}", rep, layers, evals.back(),
                 dh.back());
  }
  std::vector<double> single;
  const int d = static_cast<int>(inst.maps.size());
  const auto set = full_tensor_set(d, cfg.benchmark.single_degree);
  for (int rep = 0; rep < kSingleReps; ++rep) {
    LsConfig ls = cfg.ls;
    ls.max_degree = cfg.benchmark.single_degree;
    const auto& problem = inst.problem;
    const Potential phi = [&problem](std::span<const double> x) {
      return problem.likelihood_potential(x) + problem.prior_potential(x);
    };
    const auto fit = construct_on_set(phi, cfg.family, inst.maps, set, ls, derive_seed(seeds[rep], "single"));
    ComposedMap map(cfg.family, inst.maps);
    map.push_layer(Layer{std::make_shared<const KrMap>(fit.density, identity_ordering(d)), 1.0, fit.achieved_error,
                         -1.0, fit.n_evals});
    single.push_back(quadrature_hellinger(inst.log_target, map, focus, 200));
    spdlog::warn("criterion 5 single rep {}: {} evaluations, D_H {:.4f}", rep, fit.n_evals, single.back());
  }
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  const double mdh = mean(dh), mev = mean(evals), msingle = mean(single);
  const auto [lmin, lmax] = std::minmax_element(layer_counts.begin(), layer_counts.end());
  out.verdict = {completed && mdh <= kLayeredHellinger && mev <= kLayeredEvals && layers_ok &&
                     msingle >= kSingleRatio * mdh,
                 fmt_str("layered (%d reps): mean D_H %.4f (<= %.2f), mean evaluations %.0f (<= %.0f), layers %zu-%zu "
                         "(in %zu-%zu); single degree %d (%d reps): mean D_H %.4f = %.1fx layered (>= %.0fx)",
                         kLayeredReps, mdh, kLayeredHellinger, mev, kLayeredEvals, *lmin, *lmax, kMinLayers,
                         kMaxLayers, cfg.benchmark.single_degree, kSingleReps, msingle, msingle / mdh, kSingleRatio)};
  return out;
}

// ------------------------------------------------------------------ 6
Verdict tempering_behaviour(const std::vector<std::vector<double>>& schedules) {
  bool increasing = true;
  for (const auto& b : schedules) {
    increasing = increasing && !b.empty() && b.back() == 1.0;
    for (std::size_t i = 1; i < b.size(); ++i) increasing = increasing && b[i] > b[i - 1];
  }
  std::mt19937_64 rng(606);
  bool zero_exact = true, shift_exact = true, monotone = true;
  double generic_shift = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 200;
    std::vector<double> f(n), k(n), fd(n), kd(n);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = std::gamma_distribution<double>(2.0, 3.0)(rng);
      k[i] = std::normal_distribution<double>(0.0, 2.0)(rng);
      // Multiples of 1/64: shifts by dyadic constants are exact in floating point.
      fd[i] = std::round(f[i] * 64.0) / 64.0;
      kd[i] = std::round(k[i] * 64.0) / 64.0;
    }
    zero_exact = zero_exact && hellinger_step_estimate(f, k, 0.0) == 0.0;
    const double cf = std::round(std::normal_distribution<double>(0.0, 50.0)(rng)) / 8.0;
    const double ck = std::round(std::normal_distribution<double>(0.0, 50.0)(rng)) / 8.0;
    std::vector<double> fs(fd), ks(kd), kg(k);
    for (auto& v : fs) v += cf;
    for (auto& v : ks) v += ck;
    for (auto& v : kg) v += ck + 0.1234567;
    for (double delta : {0.015625, 0.25, 2.0}) {
      shift_exact = shift_exact && hellinger_step_estimate(fs, ks, delta) == hellinger_step_estimate(fd, kd, delta);
      generic_shift = std::max(generic_shift, std::abs(hellinger_step_estimate(f, kg, delta) -
                                                       hellinger_step_estimate(f, k, delta)));
    }
    shift_exact = shift_exact && hellinger_layer_estimate(ks) == hellinger_layer_estimate(kd);
    generic_shift = std::max(generic_shift, std::abs(hellinger_layer_estimate(kg) - hellinger_layer_estimate(k)));
    double prev = 0.0;
    for (double delta = 1e-4; delta <= 20.0; delta *= 1.3) {
      const double v = hellinger_step_estimate(f, k, delta);
      monotone = monotone && v >= prev && v <= 1.0;
      prev = v;
    }
  }
  return {increasing && zero_exact && shift_exact && monotone,
          fmt_str("%zu beta schedules strictly increasing to 1: %s; D+(0) == 0: %s; dyadic shifts bit-identical: %s "
                  "(generic-shift deviation %.1e); monotone on 100 ensembles: %s",
                  schedules.size(), increasing ? "yes" : "no", zero_exact ? "yes" : "no", shift_exact ? "yes" : "no",
                  generic_shift, monotone ? "yes" : "no")};
}

// ------------------------------------------------------------------ 7
Verdict bridging_equivalence(std::vector<std::vector<double>>& schedules) {
  RegressionToy toy(6, 0.3);
  const auto problem = toy.target_problem();
  LayeredConfig cfg;
  cfg.beta_samples = 1000;
  cfg.ls.tau = 0.02;
  const auto batched = layered_construct(problem, DataBatching{toy.observation_batches(), std::nullopt},
                                         BasisFamily::Legendre, toy.prior_maps(), cfg, 7);
  const auto tempered =
      layered_construct(problem, AdaptiveTempering{0.1, 0.5}, BasisFamily::Legendre, toy.prior_maps(), cfg, 7);
  schedules.push_back(tempered.map.betas());
  const auto box = toy.prior_box();
  const double dh = quadrature_hellinger([&](std::span<const double> x) { return batched.map.log_density(x); },
                                         [&](std::span<const double> x) { return tempered.map.log_density(x); }, box,
                                         200);
  const auto lb = batched.map.num_layers(), lt = tempered.map.num_layers();
  return {batched.completed && tempered.completed && dh < kBridgeHellinger && lb >= lt,
          fmt_str("D_H(batching, tempering) %.4f (< %.2f); layers batching %zu >= tempering %zu", dh, kBridgeHellinger,
                  lb, lt)};
}

// ------------------------------------------------------------------ 8
Verdict csir_k2(std::vector<std::vector<double>>& schedules) {
  auto cfg = cli::parse_config(cli::suite_defaults("csir-k2"));
  const auto inst = cli::make_problem(cfg);
  const auto seed = derive_seed(cfg.seed, "benchmark", 0);
  const auto t0 = Clock::now();
  const auto built = cli::build_layered(cfg, inst, seed);
  const auto diag = importance_diagnostics(built.result.map, inst.problem, kK2Samples, derive_seed(seed, "diagnostics"));
  schedules.push_back(built.result.map.betas());
  return {built.result.completed && diag.hellinger < kK2Hellinger,
          fmt_str("completed %s, %zu layers, %zu evaluations, IS D_H %.4f (< %.1f), ESS %.0f of %zu, %.0f s",
                  built.result.completed ? "yes" : "no", built.result.map.num_layers(), built.result.n_evals,
                  diag.hellinger, kK2Hellinger, diag.ess, kK2Samples, since(t0))};
}

}  // namespace

// With arguments, only the listed criteria run; the others are reported as skipped.
int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  std::array<bool, 8> wanted{};
  wanted.fill(argc == 1);
  for (int a = 1; a < argc; ++a) {
    const int c = std::atoi(argv[a]);
    if (c < 1 || c > 8) {
      std::fprintf(stderr, "usage: %s [criterion 1-8 ...]\n", argv[0]);
      return 2;
    }
    wanted[c - 1] = true;
  }
  std::array<std::optional<Verdict>, 8> v;
  auto run = [&](int i, const std::function<Verdict()>& f) {
    if (!wanted[i - 1]) return;
    const auto t0 = Clock::now();
    try {
      v[i - 1] = f();
    } catch (const std::exception& e) {
      v[i - 1] = Verdict{false, std::string("exception: ") + e.what()};
    }
    std::fprintf(stderr, "criterion %d finished in %.1f s\n", i, since(t0));
  };
  std::vector<std::vector<double>> schedules;
  run(1, basis_correctness);
  run(2, marginalization);
  run(3, kr_consistency);
  run(4, hellinger_bound);
  run(5, [&] {
    auto r = single_vs_layered();
    schedules.insert(schedules.end(), r.betas.begin(), r.betas.end());
    return r.verdict;
  });
  run(7, [&] { return bridging_equivalence(schedules); });
  run(8, [&] { return csir_k2(schedules); });
  run(6, [&] { return tempering_behaviour(schedules); });
  bool all = true;
  for (int i = 0; i < 8; ++i) {
    if (!v[i]) {
      std::printf("criterion %d: SKIP\n", i + 1);
      continue;
    }
    std::printf("criterion %d: %s  %s\n", i + 1, v[i]->pass ? "PASS" : "FAIL", v[i]->detail.c_str());
    all = all && v[i]->pass;
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}
