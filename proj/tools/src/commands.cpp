#include "krmap_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include "krmap/errors.hpp"
#include "krmap/random.hpp"
#include "krmap/serialization.hpp"
#include "krmap/sparse.hpp"

namespace krmap::cli {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::filesystem::path prepare_output(const RunConfig& cfg) {
  std::filesystem::path out(cfg.output);
  std::filesystem::create_directories(out);
  return out;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << j.dump(2) << '\n';
}

std::size_t integrator_failures(const ProblemInstance& inst) { return inst.csir ? inst.csir->failures() : 0; }

}  // namespace

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be positive");
    cfg.threads = *o.threads;
    cfg.ls.threads = *o.threads;
    cfg.layered.threads = *o.threads;
    cfg.layered.ls.threads = *o.threads;
  }
  if (o.out) cfg.output = *o.out;
  if (o.map) {
    cfg.sample_map = *o.map;
    cfg.diagnose_map = *o.map;
  }
  if (o.n) {
    if (*o.n < 1) throw ConfigError("--n must be positive");
    cfg.sample_n = *o.n;
    cfg.diagnose_n = *o.n;
  }
  if (o.suite) cfg.benchmark.suite = *o.suite;
  if (o.repetitions) {
    if (*o.repetitions < 1) throw ConfigError("--reps must be positive");
    cfg.benchmark.repetitions = *o.repetitions;
  }
}

BuildOutcome build_layered(const RunConfig& cfg, const ProblemInstance& inst, std::uint64_t seed) {
  LayeredConfig lc = cfg.layered;
  lc.ls = cfg.ls;
  lc.threads = cfg.threads;
  lc.ls.threads = cfg.threads;
  lc.on_layer = [](const LayerProgress& p) {
    spdlog::info("layer {}: beta {:.6g}, tau {:.3g}, fit error {:.3g}, |K| {}, evaluations {}", p.layer, p.beta,
                 p.tau, p.fit_error, p.cardinality, p.n_evals_cumulative);
  };
  lc.ls.progress = [](const ProgressRecord& r) {
    spdlog::debug("  iteration {}: |K| {}, margin {}, error {:.3g}, evaluations {}", r.iter, r.cardinality,
                  r.margin_size, r.est_rel_error, r.n_evals_cumulative);
  };
  const auto t0 = std::chrono::steady_clock::now();
  auto result = layered_construct(inst.problem, inst.schedule, cfg.family, inst.maps, lc, seed);
  return BuildOutcome{std::move(result), seconds_since(t0)};
}

json build_manifest(const RunConfig& cfg, const BuildOutcome& outcome, std::size_t failures) {
  const auto& r = outcome.result;
  json layers = json::array();
  for (const auto& h : r.history) {
    layers.push_back({{"layer", h.layer},
                      {"beta", h.beta},
                      {"tau", h.tau},
                      {"fit_error", h.fit_error},
                      {"epsilon", h.epsilon_previous < 0 ? json(nullptr) : json(h.epsilon_previous)},
                      {"cardinality", h.cardinality},
                      {"n_evals_cumulative", h.n_evals_cumulative}});
  }
  return {{"format", "krmap-manifest/1"},
          {"version", "0.1.0"},
          {"command", "build"},
          {"seed", cfg.seed},
          {"completed", r.completed},
          {"status", r.status},
          {"betas", r.map.betas()},
          {"layers", std::move(layers)},
          {"n_evals", r.n_evals},
          {"integrator_failures", failures},
          {"wall_seconds", outcome.wall_seconds},
          {"config", config_to_json(cfg)}};
}

void write_samples(const ComposedMap& map, std::size_t n, std::uint64_t seed, std::ostream& out) {
  const int d = map.dim();
  for (int i = 0; i < d; ++i) out << 'x' << (i + 1) << ',';
  out << "logq\n";
  auto rng = make_rng(seed, "samples");
  std::vector<double> u(d);
  for (std::size_t s = 0; s < n; ++s) {
    for (auto& v : u) v = sample_reference(map.family(), uniform_open(rng));
    const auto r = map.pushforward(u);
    for (int i = 0; i < d; ++i) fmt::print(out, "{:.17g},", r.x[i]);
    fmt::print(out, "{:.17g}\n", r.log_density);
  }
}

json diagnostics_json(const ImportanceDiagnostics& d, std::uint64_t seed) {
  return {{"ESS", d.ess},        {"D_H", d.hellinger}, {"log_z", d.log_z}, {"log_z_stderr", d.log_z_stderr},
          {"N", d.n},            {"N_evals", d.n_evals}, {"seed", seed}};
}

int cmd_build(const RunConfig& cfg) {
  const auto out = prepare_output(cfg);
  const auto inst = make_problem(cfg);
  spdlog::info("building a {}-dimensional map for problem '{}'", inst.maps.size(), cfg.problem.kind);
  const auto outcome = build_layered(cfg, inst, derive_seed(cfg.seed, "construction"));
  save_map(outcome.result.map, out / "map.json");
  const auto failures = integrator_failures(inst);
  if (failures > 0) spdlog::warn("{} potential evaluations failed in the integrator and were treated as +inf", failures);
  write_json(out / "manifest.json", build_manifest(cfg, outcome, failures));
  if (!outcome.result.completed) {
    spdlog::error("construction stopped early: {}", outcome.result.status);
    return kBudgetAbort;
  }
  spdlog::info("built {} layers with {} evaluations in {:.2f} s", outcome.result.map.num_layers(),
               outcome.result.n_evals, outcome.wall_seconds);
  return kSuccess;
}

int cmd_sample(const RunConfig& cfg) {
  if (cfg.sample_map.empty()) throw ConfigError("sample needs a map file (--map or sample.map)");
  const auto map = load_map(cfg.sample_map);
  const auto out = prepare_output(cfg);
  std::ofstream f(out / "samples.csv");
  if (!f) throw std::runtime_error("cannot write samples.csv");
  write_samples(map, cfg.sample_n, derive_seed(cfg.seed, "sampling"), f);
  spdlog::info("wrote {} samples to {}", cfg.sample_n, (out / "samples.csv").string());
  return kSuccess;
}

int cmd_diagnose(const RunConfig& cfg) {
  if (cfg.diagnose_map.empty()) throw ConfigError("diagnose needs a map file (--map or diagnose.map)");
  const auto map = load_map(cfg.diagnose_map);
  const auto inst = make_problem(cfg);
  if (map.dim() != inst.problem.dim()) throw ConfigError("map and problem dimensions differ");
  const auto d = importance_diagnostics(map, inst.problem, cfg.diagnose_n, derive_seed(cfg.seed, "diagnostics"),
                                        cfg.threads);
  const auto out = prepare_output(cfg);
  write_json(out / "diagnostics.json", diagnostics_json(d, cfg.seed));
  spdlog::info("ESS {:.1f} of {}, D_H {:.4g}, log z {:.6g}", d.ess, d.n, d.hellinger, d.log_z);
  return kSuccess;
}

json suite_defaults(const std::string& suite) {
  json base = {{"family", "legendre"},
               {"schedule", {{"kind", "adaptive"}, {"beta1", 0.01}, {"eta", 0.8}}},
               {"ls", {{"tau", 0.05}, {"sample_factor", 4}, {"max_degree", 30}}},
               {"layered", {{"omega", 0.5}, {"beta_samples", 500}, {"min_tau", 0.05}, {"max_tau", 0.05}}}};
  if (suite == "csir-k1" || suite == "single-vs-layered") {
    base["problem"] = {{"kind", "csir"}, {"K", 1}, {"seed", 2024}, {"sigma_n", 1.0}};
    base["benchmark"] = {{"suite", suite}, {"repetitions", 9}, {"single_degree", 60}};
    return base;
  }
  if (suite == "csir-k2") {
    base["problem"] = {{"kind", "csir"}, {"K", 2}, {"seed", 2024}, {"sigma_n", 1.0}};
    base["schedule"] = {{"kind", "adaptive"}, {"beta1", 0.001}, {"eta", 0.5}};
    base["benchmark"] = {{"suite", suite}, {"repetitions", 9}, {"diagnostic_samples", 10000}};
    return base;
  }
  throw ConfigError("unknown benchmark suite '" + suite + "' (expected csir-k1, csir-k2 or single-vs-layered)");
}

namespace {

struct BenchRow {
  std::string method;
  int rep;
  std::uint64_t seed;
  std::size_t layers;
  std::size_t n_evals;
  double hellinger;
  std::string hellinger_kind;
  double wall_seconds;
  bool completed;
};

std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(s / (n - 1.0)) : 0.0};
}

}  // namespace

int cmd_benchmark(const RunConfig& cfg) {
  const auto& b = cfg.benchmark;
  suite_defaults(b.suite);  // rejects unknown suites
  const auto out = prepare_output(cfg);
  const auto inst = make_problem(cfg);
  const int d = static_cast<int>(inst.maps.size());
  const bool quadrature = d <= 3;
  std::vector<Interval> focus;
  if (quadrature) focus = find_support_box(inst.log_target, inst.box, 200, 40.0, cfg.threads);

  auto assess = [&](const ComposedMap& map, std::uint64_t seed) -> std::pair<double, std::string> {
    if (quadrature) {
      return {quadrature_hellinger(inst.log_target, map, focus, b.quadrature_points, cfg.threads), "quadrature"};
    }
    const auto diag = importance_diagnostics(map, inst.problem, b.diagnostic_samples, seed, cfg.threads);
    return {diag.hellinger, "importance"};
  };

  std::vector<BenchRow> rows;
  bool all_completed = true;
  for (int rep = 0; rep < b.repetitions; ++rep) {
    const auto seed = derive_seed(cfg.seed, "benchmark", static_cast<std::uint64_t>(rep));
    const auto before = inst.problem.evaluations();
    const auto outcome = build_layered(cfg, inst, seed);
    const auto n_evals = inst.problem.evaluations() - before;
    const auto [h, kind] = assess(outcome.result.map, derive_seed(seed, "diagnostics"));
    rows.push_back({"layered", rep, seed, outcome.result.map.num_layers(), n_evals, h, kind, outcome.wall_seconds,
                    outcome.result.completed});
    all_completed = all_completed && outcome.result.completed;
    spdlog::info("{} rep {}: {} layers, {} evaluations, D_H {:.4g} ({})", b.suite, rep,
                 outcome.result.map.num_layers(), n_evals, h, kind);

    if (b.suite == "single-vs-layered") {
      const auto t0 = std::chrono::steady_clock::now();
      LsConfig ls = cfg.ls;
      ls.max_degree = b.single_degree;
      ls.threads = cfg.threads;
      const auto set = full_tensor_set(d, b.single_degree);
      const auto& problem = inst.problem;
      const Potential phi = [&problem](std::span<const double> x) {
        return problem.likelihood_potential(x) + problem.prior_potential(x);
      };
      const auto before_single = inst.problem.evaluations();
      const auto fit = construct_on_set(phi, cfg.family, inst.maps, set, ls, derive_seed(seed, "single"));
      ComposedMap single(cfg.family, inst.maps);
      single.push_layer(Layer{std::make_shared<const KrMap>(fit.density, identity_ordering(d)), 1.0,
                              fit.achieved_error, -1.0, fit.n_evals});
      const auto n_single = inst.problem.evaluations() - before_single;
      const auto [hs, kinds] = assess(single, derive_seed(seed, "single-diagnostics"));
      rows.push_back({"single", rep, seed, 1, n_single, hs, kinds, seconds_since(t0), true});
      spdlog::info("{} rep {}: single layer |K| {}, {} evaluations, D_H {:.4g}", b.suite, rep, set.size(), n_single,
                   hs);
    }
  }

  std::ofstream f(out / "results.csv");
  if (!f) throw std::runtime_error("cannot write results.csv");
  f << "suite,method,rep,seed,layers,n_evals,hellinger,hellinger_kind,wall_seconds,completed\n";
  for (const auto& r : rows) {
    fmt::print(f, "{},{},{},{},{},{},{:.17g},{},{:.6g},{}\n", b.suite, r.method, r.rep, r.seed, r.layers, r.n_evals,
               r.hellinger, r.hellinger_kind, r.wall_seconds, r.completed ? "true" : "false");
  }
  std::ofstream s(out / "summary.csv");
  if (!s) throw std::runtime_error("cannot write summary.csv");
  s << "suite,method,reps,hellinger_mean,hellinger_std,n_evals_mean,n_evals_std,layers_mean,layers_std\n";
  for (const std::string method : {"layered", "single"}) {
    std::vector<double> h, e, l;
    for (const auto& r : rows) {
      if (r.method != method) continue;
      h.push_back(r.hellinger);
      e.push_back(static_cast<double>(r.n_evals));
      l.push_back(static_cast<double>(r.layers));
    }
    if (h.empty()) continue;
    const auto [hm, hs] = mean_std(h);
    const auto [em, es] = mean_std(e);
    const auto [lm, ls] = mean_std(l);
    fmt::print(s, "{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", b.suite, method, h.size(), hm, hs, em,
               es, lm, ls);
    spdlog::info("{} {}: D_H {:.4g} ± {:.2g}, evaluations {:.0f} ± {:.0f}, layers {:.2f}", b.suite, method, hm, hs, em,
                 es, lm);
  }
  return all_completed ? kSuccess : kBudgetAbort;
}

}  // namespace krmap::cli
