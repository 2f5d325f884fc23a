#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "krmap/approx.hpp"
#include "krmap/density.hpp"

namespace krmap {

// Posterior exp(-Φ^y - Φ_0) λ. Φ^y may be given directly or as a sum of
// per-observation misfits. Calls to the likelihood or the misfits are counted.
class TargetProblem {
 public:
  using Misfits = std::function<std::vector<double>(std::span<const double>)>;

  TargetProblem(int dim, Potential likelihood, Potential prior = {});
  TargetProblem(int dim, Misfits misfits, std::size_t observations, Potential prior = {});

  int dim() const noexcept { return dim_; }
  std::size_t observations() const noexcept { return observations_; }
  bool has_misfits() const noexcept { return static_cast<bool>(misfits_); }

  double likelihood_potential(std::span<const double> x) const;
  double prior_potential(std::span<const double> x) const;
  std::vector<double> observation_misfits(std::span<const double> x) const;
  double batch_misfit(std::span<const double> x, std::span<const std::size_t> batch) const;

  std::size_t evaluations() const noexcept { return counter_->load(); }
  void reset_evaluations() const noexcept { counter_->store(0); }

 private:
  int dim_;
  Potential likelihood_;
  Potential prior_;
  Misfits misfits_;
  std::size_t observations_ = 0;
  std::shared_ptr<std::atomic<std::size_t>> counter_;
};

struct Layer {
  std::shared_ptr<const KrMap> map;
  double beta = 1.0;                // bridge progress after this layer, in (0, 1]
  double fit_error = 0.0;           // least-squares relative error estimate
  double hellinger_estimate = -1.0; // ε of this layer from the next ensemble; -1 when unknown
  std::size_t n_evals = 0;          // potential evaluations spent on this layer
};

// T_L = Q_1 ∘ ⋯ ∘ Q_L. The first layer lives in physical coordinates (given by
// the base maps), later layers on the reference support with identity maps.
// With no layers the map is the base domain map itself.
class ComposedMap {
 public:
  ComposedMap(BasisFamily family, std::vector<DomainMap> base_maps);

  BasisFamily family() const noexcept { return family_; }
  int dim() const noexcept { return static_cast<int>(base_maps_.size()); }
  const std::vector<DomainMap>& base_maps() const noexcept { return base_maps_; }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  Layer& layer(std::size_t i) { return layers_.at(i); }
  std::vector<double> betas() const;

  void push_layer(Layer layer);

  std::vector<double> forward(std::span<const double> u) const;
  std::vector<double> inverse(std::span<const double> x) const;
  PushforwardResult pushforward(std::span<const double> u) const;
  PullbackResult pullback(std::span<const double> x) const;
  double log_density(std::span<const double> x) const { return pullback(x).log_density; }

  double log_reference_density(std::span<const double> u) const;
  // log λ(x) for the base weight in physical coordinates.
  double log_base_weight(std::span<const double> x) const;

 private:
  BasisFamily family_;
  std::vector<DomainMap> base_maps_;
  std::vector<Layer> layers_;
};

std::vector<double> composed_forward(const ComposedMap& t, std::span<const double> u);
std::vector<double> composed_inverse(const ComposedMap& t, std::span<const double> x);
PushforwardResult composed_log_pushforward(const ComposedMap& t, std::span<const double> u);

struct AdaptiveTempering {
  double beta1 = 1e-3;
  double eta = 0.5;
};
struct FixedTempering {
  std::vector<double> betas;
};
struct DataBatching {
  std::vector<std::vector<std::size_t>> batches;
  std::optional<AdaptiveTempering> inner;
};
using BridgingSchedule = std::variant<AdaptiveTempering, FixedTempering, DataBatching>;

void validate_schedule(const BridgingSchedule& schedule, const TargetProblem& problem);

// Estimators on an ensemble drawn from the current approximation.
// D_+(Δ) = 1 - Σe^{-ΔF/2-K} / √(Σe^{-K} Σe^{-ΔF-K});
// D = 1 - (1/√N) Σe^{-K/2} / √(Σe^{-K}).
double hellinger_step_estimate(std::span<const double> f, std::span<const double> k, double delta);
double hellinger_layer_estimate(std::span<const double> k);

// Φ' with exp(-Φ'(u)) λ_ref(u) ∝ (T^♯ π_β)(u) for π_β ∝ exp(-βΦ^y - Φ_0) λ.
Potential pullback_potential(const ComposedMap& t, double beta, const TargetProblem& problem);

struct Ensemble {
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> x;
  std::vector<double> log_push;    // log f_T(x)
  std::vector<double> log_weight;  // log λ(x)
  std::vector<double> prior;       // Φ_0(x)
  std::vector<double> likelihood;  // Φ^y(x)
  std::vector<std::vector<double>> batch;  // per-batch misfits when batching
};

Ensemble draw_ensemble(const ComposedMap& t, const TargetProblem& problem, std::size_t n,
                       std::uint64_t seed, int threads = 1,
                       const std::vector<std::vector<std::size_t>>* batches = nullptr);

struct NextBetaResult {
  double beta;
  double epsilon;
  Ensemble ensemble;
};

NextBetaResult next_beta(const ComposedMap& t, double beta, const TargetProblem& problem, double eta,
                         std::size_t n, std::uint64_t seed, int threads = 1);

// Δ ∈ [1e-6, delta_max] with D_+(Δ) ≈ η² by bisection on log Δ.
double solve_increment(std::span<const double> f, std::span<const double> k, double eta, double delta_max);

struct LayerProgress {
  std::size_t layer;
  double beta;
  double tau;
  double fit_error;
  double epsilon_previous;
  std::size_t cardinality;
  std::size_t n_evals_cumulative;
};

struct LayeredConfig {
  LsConfig ls;
  double omega = 0.5;
  std::size_t beta_samples = 10000;
  int max_layers = 20;
  double min_tau = 0.0;   // τ_ℓ = max(ω ε_{ℓ-1}, min_tau)
  double max_tau = 0.5;
  int threads = 1;
  std::function<void(const LayerProgress&)> on_layer;

  void validate() const;
};

struct LayeredResult {
  ComposedMap map;
  bool completed = false;
  std::string status;
  std::size_t n_evals = 0;
  std::vector<LayerProgress> history;
};

LayeredResult layered_construct(const TargetProblem& problem, const BridgingSchedule& schedule,
                                BasisFamily family, std::vector<DomainMap> maps,
                                const LayeredConfig& cfg, std::uint64_t seed);

struct ImportanceDiagnostics {
  double ess = 0.0;
  double hellinger = 0.0;
  double log_z = 0.0;
  double log_z_stderr = 0.0;
  std::size_t n = 0;
  std::size_t n_evals = 0;
};

ImportanceDiagnostics importance_diagnostics(const ComposedMap& t, const TargetProblem& problem,
                                             std::size_t n, std::uint64_t seed, int threads = 1);

}  // namespace krmap
