#include "krmap/dirt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "krmap/errors.hpp"
#include "krmap/parallel.hpp"

namespace krmap {
namespace {

constexpr double kMinIncrement = 1e-6;
constexpr double kBisectionTolerance = 1e-3;
constexpr int kBisectionIterations = 60;

double log_sum_exp(std::span<const double> a) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : a) m = std::max(m, v);
  if (!std::isfinite(m)) {
    if (m > 0) return m;
    throw DegenerateEnsembleError("all importance weights vanish");
  }
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

// Shifted so that the minimum is zero. For dyadic inputs the shift is exact,
// which makes the estimators bitwise invariant under constant offsets.
std::vector<double> centered(std::span<const double> k) {
  if (k.empty()) throw DegenerateEnsembleError("empty ensemble");
  double mn = std::numeric_limits<double>::infinity();
  for (double v : k) {
    if (std::isnan(v)) throw DegenerateEnsembleError("NaN in ensemble potentials");
    mn = std::min(mn, v);
  }
  if (!std::isfinite(mn)) throw DegenerateEnsembleError("all importance weights vanish");
  std::vector<double> out(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) out[i] = k[i] - mn;
  return out;
}

}  // namespace

// ------------------------------------------------------------ TargetProblem

TargetProblem::TargetProblem(int dim, Potential likelihood, Potential prior)
    : dim_(dim),
      likelihood_(std::move(likelihood)),
      prior_(std::move(prior)),
      counter_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (dim < 1) throw ArgumentError("problem dimension must be positive");
  if (!likelihood_) throw ArgumentError("likelihood potential is required");
}

TargetProblem::TargetProblem(int dim, Misfits misfits, std::size_t observations, Potential prior)
    : dim_(dim),
      prior_(std::move(prior)),
      misfits_(std::move(misfits)),
      observations_(observations),
      counter_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (dim < 1) throw ArgumentError("problem dimension must be positive");
  if (!misfits_) throw ArgumentError("misfit callback is required");
  if (observations_ < 1) throw ArgumentError("at least one observation is required");
}

double TargetProblem::likelihood_potential(std::span<const double> x) const {
  if (likelihood_) {
    counter_->fetch_add(1);
    return likelihood_(x);
  }
  const auto m = observation_misfits(x);
  return std::accumulate(m.begin(), m.end(), 0.0);
}

double TargetProblem::prior_potential(std::span<const double> x) const { return prior_ ? prior_(x) : 0.0; }

std::vector<double> TargetProblem::observation_misfits(std::span<const double> x) const {
  if (!misfits_) throw ArgumentError("problem has no per-observation misfits");
  counter_->fetch_add(1);
  auto m = misfits_(x);
  if (m.size() != observations_) throw NumericalError("misfit callback returned the wrong count");
  return m;
}

double TargetProblem::batch_misfit(std::span<const double> x, std::span<const std::size_t> batch) const {
  const auto m = observation_misfits(x);
  double s = 0.0;
  for (auto i : batch) {
    if (i >= m.size()) throw ArgumentError("observation index out of range");
    s += m[i];
  }
  return s;
}

// -------------------------------------------------------------- ComposedMap

ComposedMap::ComposedMap(BasisFamily family, std::vector<DomainMap> base_maps)
    : family_(family), base_maps_(std::move(base_maps)) {
  if (base_maps_.empty()) throw ArgumentError("composed map needs at least one coordinate");
  for (const auto& m : base_maps_) {
    if (!m.compatible_with(family_)) throw ArgumentError("base map incompatible with basis family");
  }
}

std::vector<double> ComposedMap::betas() const {
  std::vector<double> b;
  for (const auto& l : layers_) b.push_back(l.beta);
  return b;
}

void ComposedMap::push_layer(Layer layer) {
  if (!layer.map) throw ArgumentError("layer needs a map");
  const auto& rho = layer.map->density();
  if (rho.dim() != dim()) throw ArgumentError("layer dimension mismatch");
  if (rho.family() != family_) throw ArgumentError("layer family mismatch");
  if (layers_.empty()) {
    if (rho.maps() != base_maps_) throw ArgumentError("first layer must use the base maps");
  } else {
    for (const auto& m : rho.maps()) {
      if (!m.is_identity()) throw ArgumentError("later layers must use identity maps");
    }
  }
  layers_.push_back(std::move(layer));
}

double ComposedMap::log_reference_density(std::span<const double> u) const {
  double s = 0.0;
  for (double v : u) s += log_weight_density(family_, v);
  return s;
}

double ComposedMap::log_base_weight(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) throw ArgumentError("point dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = base_maps_[i].to_reference(x[i]);
    s += log_weight_density(family_, z) + base_maps_[i].log_to_reference_derivative_at(z);
  }
  return s;
}

PushforwardResult ComposedMap::pushforward(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != dim()) throw ArgumentError("reference point dimension mismatch");
  const double log_ref = log_reference_density(u);
  PushforwardResult out;
  if (layers_.empty()) {
    out.x.resize(u.size());
    double lj = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      out.x[i] = base_maps_[i].from_reference(u[i]);
      lj -= base_maps_[i].log_to_reference_derivative_at(u[i]);
    }
    out.log_jacobian = lj;
    out.log_density = log_ref - lj;
    return out;
  }
  std::vector<double> v(u.begin(), u.end());
  double sum = 0.0;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    if (i + 1 < layers_.size()) sum -= log_reference_density(v);
    auto r = layers_[i].map->pushforward(v);
    sum += r.log_density;
    v = std::move(r.x);
  }
  out.x = std::move(v);
  out.log_density = sum;
  out.log_jacobian = log_ref - sum;
  return out;
}

PullbackResult ComposedMap::pullback(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) throw ArgumentError("point dimension mismatch");
  PullbackResult out;
  if (layers_.empty()) {
    out.u.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      out.u[i] = base_maps_[i].to_reference(x[i]);
      if (!in_support(family_, out.u[i])) throw DomainError("point outside the support");
    }
    out.log_density = log_base_weight(x);
    return out;
  }
  std::vector<double> v(x.begin(), x.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto r = layers_[i].map->pullback(v);
    sum += r.log_density;
    v = std::move(r.u);
    if (i + 1 < layers_.size()) sum -= log_reference_density(v);
  }
  out.u = std::move(v);
  out.log_density = sum;
  return out;
}

std::vector<double> ComposedMap::forward(std::span<const double> u) const { return pushforward(u).x; }
std::vector<double> ComposedMap::inverse(std::span<const double> x) const { return pullback(x).u; }

std::vector<double> composed_forward(const ComposedMap& t, std::span<const double> u) { return t.forward(u); }
std::vector<double> composed_inverse(const ComposedMap& t, std::span<const double> x) { return t.inverse(x); }
PushforwardResult composed_log_pushforward(const ComposedMap& t, std::span<const double> u) {
  return t.pushforward(u);
}

// --------------------------------------------------------------- estimators

double hellinger_step_estimate(std::span<const double> f, std::span<const double> k, double delta) {
  if (f.size() != k.size()) throw ArgumentError("F and K must have equal length");
  if (!(delta >= 0.0)) throw ArgumentError("Δ must be nonnegative");
  const auto kc = centered(k);
  const auto fc = centered(f);
  const std::size_t n = kc.size();
  std::vector<double> a(n), b(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double df = delta == 0.0 ? 0.0 : delta * fc[i];
    a[i] = -0.5 * df - kc[i];
    b[i] = -kc[i];
    c[i] = -df - kc[i];
  }
  const double log_ratio = log_sum_exp(a) - 0.5 * log_sum_exp(b) - 0.5 * log_sum_exp(c);
  return std::clamp(1.0 - std::exp(log_ratio), 0.0, 1.0);
}

double hellinger_layer_estimate(std::span<const double> k) {
  const auto kc = centered(k);
  const std::size_t n = kc.size();
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = -0.5 * kc[i];
    b[i] = -kc[i];
  }
  const double log_ratio = log_sum_exp(a) - 0.5 * log_sum_exp(b) - 0.5 * std::log(static_cast<double>(n));
  return std::clamp(1.0 - std::exp(log_ratio), 0.0, 1.0);
}

double solve_increment(std::span<const double> f, std::span<const double> k, double eta, double delta_max) {
  if (!(eta > 0.0 && eta < 1.0)) throw ArgumentError("η must lie in (0, 1)");
  if (!(delta_max > 0.0)) throw ArgumentError("maximal increment must be positive");
  const double target = eta * eta;
  if (hellinger_step_estimate(f, k, delta_max) <= target) return delta_max;
  double lo = std::log(std::min(kMinIncrement, delta_max));
  double hi = std::log(delta_max);
  if (hellinger_step_estimate(f, k, std::exp(lo)) >= target) return std::exp(lo);
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < kBisectionIterations; ++it) {
    mid = 0.5 * (lo + hi);
    const double d = hellinger_step_estimate(f, k, std::exp(mid));
    if (std::abs(d - target) <= kBisectionTolerance) break;
    if (d < target) lo = mid; else hi = mid;
  }
  return std::exp(mid);
}

// --------------------------------------------------------------- ensembles

Ensemble draw_ensemble(const ComposedMap& t, const TargetProblem& problem, std::size_t n, std::uint64_t seed,
                       int threads, const std::vector<std::vector<std::size_t>>* batches) {
  if (problem.dim() != t.dim()) throw ArgumentError("problem and map dimensions differ");
  if (n < 1) throw ArgumentError("ensemble size must be positive");
  auto rng = make_rng(seed, "ensemble");
  Ensemble e;
  e.u.resize(n);
  for (auto& u : e.u) {
    u.resize(t.dim());
    for (auto& v : u) v = sample_reference(t.family(), uniform_open(rng));
  }
  e.x.resize(n);
  e.log_push.resize(n);
  e.log_weight.resize(n);
  e.prior.resize(n);
  e.likelihood.resize(n);
  if (batches) e.batch.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    auto r = t.pushforward(e.u[i]);
    e.x[i] = std::move(r.x);
    e.log_push[i] = r.log_density;
    e.log_weight[i] = t.log_base_weight(e.x[i]);
    e.prior[i] = problem.prior_potential(e.x[i]);
    if (batches) {
      const auto m = problem.observation_misfits(e.x[i]);
      std::vector<double> per(batches->size(), 0.0);
      for (std::size_t b = 0; b < batches->size(); ++b) {
        for (auto j : (*batches)[b]) per[b] += m[j];
      }
      e.likelihood[i] = std::accumulate(m.begin(), m.end(), 0.0);
      e.batch[i] = std::move(per);
    } else {
      e.likelihood[i] = problem.likelihood_potential(e.x[i]);
    }
    for (double* v : {&e.likelihood[i], &e.prior[i]}) {
      if (std::isnan(*v)) *v = std::numeric_limits<double>::infinity();
    }
  });
  return e;
}

Potential pullback_potential(const ComposedMap& t, double beta, const TargetProblem& problem) {
  return [t, beta, problem](std::span<const double> u) {
    const auto r = t.pushforward(u);
    return beta * problem.likelihood_potential(r.x) + problem.prior_potential(r.x) - t.log_base_weight(r.x) +
           r.log_density;
  };
}

NextBetaResult next_beta(const ComposedMap& t, double beta, const TargetProblem& problem, double eta,
                         std::size_t n, std::uint64_t seed, int threads) {
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("current β must lie in (0, 1)");
  if (n < 100) throw ArgumentError("next_beta needs at least 100 samples");
  NextBetaResult out{beta, 0.0, draw_ensemble(t, problem, n, seed, threads)};
  const auto& e = out.ensemble;
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = beta * e.likelihood[i] + e.prior[i] - e.log_weight[i] + e.log_push[i];
  }
  out.epsilon = std::sqrt(hellinger_layer_estimate(k));
  const double delta = solve_increment(e.likelihood, k, eta, 1.0 - beta);
  out.beta = std::min(beta + delta, 1.0);
  if (1.0 - out.beta < 1e-12) out.beta = 1.0;
  return out;
}

// ------------------------------------------------------ layered construction

void LayeredConfig::validate() const {
  ls.validate();
  if (!(omega > 0.0 && omega < 1.0)) throw ArgumentError("omega must lie in (0, 1)");
  if (beta_samples < 100) throw ArgumentError("beta_samples must be at least 100");
  if (max_layers < 1) throw ArgumentError("max_layers must be positive");
  if (!(min_tau >= 0.0 && min_tau < 1.0)) throw ArgumentError("min_tau must lie in [0, 1)");
  if (!(max_tau > 0.0 && max_tau < 1.0 && max_tau >= min_tau)) throw ArgumentError("max_tau must lie in (min_tau, 1)");
  if (threads < 1) throw ArgumentError("threads must be positive");
}

void validate_schedule(const BridgingSchedule& schedule, const TargetProblem& problem) {
  auto check_adaptive = [](const AdaptiveTempering& a) {
    if (!(a.beta1 > 0.0 && a.beta1 <= 1.0)) throw ArgumentError("beta1 must lie in (0, 1]");
    if (!(a.eta > 0.0 && a.eta < 1.0)) throw ArgumentError("eta must lie in (0, 1)");
  };
  if (const auto* a = std::get_if<AdaptiveTempering>(&schedule)) {
    check_adaptive(*a);
  } else if (const auto* f = std::get_if<FixedTempering>(&schedule)) {
    if (f->betas.empty()) throw ArgumentError("fixed tempering needs at least one β");
    double prev = 0.0;
    for (double b : f->betas) {
      if (!(b > prev && b <= 1.0)) throw ArgumentError("fixed βs must increase strictly within (0, 1]");
      prev = b;
    }
    if (prev != 1.0) throw ArgumentError("fixed tempering must end at β = 1");
  } else {
    const auto& db = std::get<DataBatching>(schedule);
    if (!problem.has_misfits()) throw ArgumentError("data batching needs per-observation misfits");
    if (db.batches.empty()) throw ArgumentError("data batching needs at least one batch");
    std::vector<bool> seen(problem.observations(), false);
    std::size_t covered = 0;
    for (const auto& b : db.batches) {
      if (b.empty()) throw ArgumentError("empty data batch");
      for (auto i : b) {
        if (i >= seen.size()) throw ArgumentError("observation index out of range");
        if (seen[i]) throw ArgumentError("data batches must be disjoint");
        seen[i] = true;
        ++covered;
      }
    }
    if (covered != problem.observations()) throw ArgumentError("data batches must cover every observation");
    if (db.inner) check_adaptive(*db.inner);
  }
}

namespace {

// Bridge π_w ∝ exp(-Σ_b w_b Φ_b - Φ_0) λ; tempering uses a single batch.
struct Bridge {
  const TargetProblem* problem;
  std::vector<std::vector<std::size_t>> batches;  // empty for tempering
  std::vector<double> weights;

  bool batching() const { return !batches.empty(); }
  double progress() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0) / static_cast<double>(weights.size());
  }
  bool final() const {
    return std::all_of(weights.begin(), weights.end(), [](double w) { return w >= 1.0; });
  }
  double potential(std::span<const double> x, const std::vector<double>& w) const {
    double v = problem->prior_potential(x);
    if (!batching()) return v + w[0] * problem->likelihood_potential(x);
    const auto m = problem->observation_misfits(x);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      if (w[b] == 0.0) continue;
      double s = 0.0;
      for (auto j : batches[b]) s += m[j];
      v += w[b] * s;
    }
    return v;
  }
  double ensemble_value(const Ensemble& e, std::size_t i, std::size_t b) const {
    return batching() ? e.batch[i][b] : e.likelihood[i];
  }
};

}  // namespace

LayeredResult layered_construct(const TargetProblem& problem, const BridgingSchedule& schedule, BasisFamily family,
                                std::vector<DomainMap> maps, const LayeredConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  validate_schedule(schedule, problem);
  if (static_cast<int>(maps.size()) != problem.dim()) throw ArgumentError("one domain map per coordinate required");
  const int d = problem.dim();
  const std::size_t evals0 = problem.evaluations();

  Bridge bridge{&problem, {}, {}};
  std::optional<AdaptiveTempering> adaptive;
  const FixedTempering* fixed = nullptr;
  std::size_t fixed_pos = 0;
  double tau1 = cfg.ls.tau;
  if (const auto* a = std::get_if<AdaptiveTempering>(&schedule)) {
    adaptive = *a;
    bridge.weights = {a->beta1};
    tau1 = cfg.omega * a->eta;
  } else if (const auto* f = std::get_if<FixedTempering>(&schedule)) {
    fixed = f;
    bridge.weights = {f->betas[0]};
  } else {
    const auto& db = std::get<DataBatching>(schedule);
    bridge.batches = db.batches;
    bridge.weights.assign(db.batches.size(), 0.0);
    if (db.inner) {
      adaptive = db.inner;
      bridge.weights[0] = db.inner->beta1;
      tau1 = cfg.omega * db.inner->eta;
    } else {
      bridge.weights[0] = 1.0;
    }
  }
  auto clamp_tau = [&](double t) { return std::clamp(t, std::max(cfg.min_tau, 1e-6), cfg.max_tau); };

  LayeredResult result{ComposedMap(family, maps), false, "", 0, {}};
  auto& t = result.map;

  // Layer 1 in physical coordinates.
  {
    LsConfig ls = cfg.ls;
    ls.tau = clamp_tau(tau1);
    ls.threads = cfg.threads;
    const auto w = bridge.weights;
    Potential phi = [&bridge, w](std::span<const double> x) { return bridge.potential(x, w); };
    auto res = construct_kr(phi, family, maps, ls, derive_seed(seed, "layer", 1));
    Layer layer{std::make_shared<const KrMap>(res.density, identity_ordering(d)), bridge.progress(),
                res.achieved_error, -1.0, problem.evaluations() - evals0};
    t.push_layer(std::move(layer));
    LayerProgress lp{1, bridge.progress(), ls.tau, res.achieved_error, -1.0, res.density->set().size(),
                     problem.evaluations() - evals0};
    result.history.push_back(lp);
    if (cfg.on_layer) cfg.on_layer(lp);
  }

  const std::vector<DomainMap> identity(d, DomainMap::identity());
  while (!bridge.final()) {
    if (static_cast<int>(t.num_layers()) >= cfg.max_layers) {
      result.status = "layer cap of " + std::to_string(cfg.max_layers) + " reached at bridge progress " +
                      std::to_string(bridge.progress());
      result.n_evals = problem.evaluations() - evals0;
      return result;
    }
    const std::size_t before = problem.evaluations();
    const std::size_t ell = t.num_layers() + 1;
    const auto ens = draw_ensemble(t, problem, cfg.beta_samples, derive_seed(seed, "ensemble", ell), cfg.threads,
                                   bridge.batching() ? &bridge.batches : nullptr);
    const std::size_t n = ens.u.size();
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = ens.prior[i] - ens.log_weight[i] + ens.log_push[i];
      for (std::size_t b = 0; b < bridge.weights.size(); ++b) {
        if (bridge.weights[b] != 0.0) v += bridge.weights[b] * bridge.ensemble_value(ens, i, b);
      }
      k[i] = v;
    }
    const double eps = std::sqrt(hellinger_layer_estimate(k));
    t.layer(t.num_layers() - 1).hellinger_estimate = eps;

    // Next bridge.
    auto next = bridge.weights;
    std::size_t active = 0;
    while (active < next.size() && next[active] >= 1.0) ++active;
    if (fixed) {
      next[0] = fixed->betas[++fixed_pos];
    } else {
      std::vector<double> f(n);
      for (std::size_t i = 0; i < n; ++i) f[i] = bridge.ensemble_value(ens, i, active);
      const double room = 1.0 - next[active];
      const double delta = adaptive ? solve_increment(f, k, adaptive->eta, room) : room;
      next[active] = (1.0 - (next[active] + delta) < 1e-12) ? 1.0 : std::min(1.0, next[active] + delta);
    }

    std::vector<SeedSample> seeds(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = k[i];
      for (std::size_t b = 0; b < next.size(); ++b) {
        const double dw = next[b] - bridge.weights[b];
        if (dw != 0.0) v += dw * bridge.ensemble_value(ens, i, b);
      }
      seeds[i] = {ens.u[i], v};
    }
    bridge.weights = next;

    LsConfig ls = cfg.ls;
    ls.tau = clamp_tau(cfg.omega * eps);
    ls.threads = cfg.threads;
    const ComposedMap frozen = t;
    const auto w = bridge.weights;
    Potential phi = [&bridge, frozen, w](std::span<const double> u) {
      const auto r = frozen.pushforward(u);
      return bridge.potential(r.x, w) - frozen.log_base_weight(r.x) + r.log_density;
    };
    auto res = construct_kr(phi, family, identity, ls, derive_seed(seed, "layer", ell), seeds);
    Layer layer{std::make_shared<const KrMap>(res.density, identity_ordering(d)), bridge.progress(),
                res.achieved_error, -1.0, problem.evaluations() - before};
    t.push_layer(std::move(layer));
    LayerProgress lp{ell, bridge.progress(), ls.tau, res.achieved_error, eps, res.density->set().size(),
                     problem.evaluations() - evals0};
    result.history.push_back(lp);
    if (cfg.on_layer) cfg.on_layer(lp);
  }
  result.completed = true;
  result.status = "ok";
  result.n_evals = problem.evaluations() - evals0;
  return result;
}

ImportanceDiagnostics importance_diagnostics(const ComposedMap& t, const TargetProblem& problem, std::size_t n,
                                             std::uint64_t seed, int threads) {
  const std::size_t before = problem.evaluations();
  const auto e = draw_ensemble(t, problem, n, seed, threads);
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = e.likelihood[i] + e.prior[i] - e.log_weight[i] + e.log_push[i];
  ImportanceDiagnostics out;
  out.n = n;
  out.n_evals = problem.evaluations() - before;
  out.hellinger = std::sqrt(hellinger_layer_estimate(k));
  const auto kc = centered(k);
  double s = 0.0, s2 = 0.0;
  for (double v : kc) {
    const double w = std::exp(-v);
    s += w;
    s2 += w * w;
  }
  const double kmin = *std::min_element(k.begin(), k.end());
  out.ess = s * s / s2;
  const double mean = s / static_cast<double>(n);
  out.log_z = -kmin + std::log(mean);
  const double var = std::max(s2 / static_cast<double>(n) - mean * mean, 0.0) * static_cast<double>(n) /
                     std::max<double>(static_cast<double>(n) - 1.0, 1.0);
  out.log_z_stderr = std::sqrt(var / static_cast<double>(n)) / mean;
  return out;
}

}  // namespace krmap
