#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "krmap/density.hpp"
#include "krmap/polybasis.hpp"
#include "krmap/random.hpp"
#include "krmap/sparse.hpp"

namespace krmap {

// Potential Φ in physical coordinates; the target is exp(-Φ) λ up to a constant.
// Must be safe to call concurrently. Non-finite values are treated as +∞.
using Potential = std::function<double(std::span<const double>)>;

enum class ErrorEstimator { LeaveOneOut, Holdout };
enum class SampleSchedule { Linear, LogLinear };

struct ProgressRecord {
  int iter;
  std::size_t cardinality;
  std::size_t margin_size;
  double est_rel_error;
  std::size_t n_evals_cumulative;
};
using ProgressSink = std::function<void(const ProgressRecord&)>;

struct LsConfig {
  double theta = 0.5;
  // Samples per iteration: ceil(sample_factor·|K|), times log(|K|+1) under LogLinear.
  double sample_factor = 4.0;
  SampleSchedule schedule = SampleSchedule::Linear;
  double tau = 0.05;
  std::size_t max_cardinality = 2000;
  int max_degree = 30;
  ErrorEstimator estimator = ErrorEstimator::LeaveOneOut;
  double holdout_fraction = 0.25;
  int initial_degree = 1;
  int max_iterations = 200;
  std::size_t max_evaluations = 0;  // 0 disables the budget
  int threads = 1;
  ProgressSink progress;

  void validate() const;
  std::size_t sample_count(std::size_t cardinality) const;
};

struct WeightedSample {
  std::vector<double> x;          // reference coordinates
  double w = 1.0;                 // λ(x) / Λ(x)
  std::vector<double> basis_row;  // ψ_k(x) for k in K, σ order
  double y = 0.0;
};

// Draws count samples from Λ_n = |K|⁻¹ Σ_k ψ_k² λ (uniform component, then
// coordinatewise inverse-CDF sampling of ψ_{k_i}² λ). y is left at zero.
std::vector<WeightedSample> sample_optimal(const MultiIndexSet& set, BasisFamily family,
                                           std::size_t count, std::uint64_t seed);

struct LsSolution {
  std::vector<double> coeffs;
  std::vector<double> residuals;  // y - ĝ(x), unweighted
  std::vector<double> leverage;   // diagonal of the weighted hat matrix (if requested)
  double condition_estimate = 1.0;
};

LsSolution solve_weighted_ls(std::span<const WeightedSample> samples, const MultiIndexSet& set,
                             bool want_leverage = false);

std::vector<double> margin_indicators(std::span<const WeightedSample> samples, BasisFamily family,
                                      const ReducedMargin& margin, std::span<const double> residuals);

std::vector<MultiIndex> bulk_chase(const std::vector<MultiIndex>& candidates,
                                   std::span<const double> indicators, double theta);

// Reference draws with known potential values, reused as samples of the ψ_0 component.
struct SeedSample {
  std::vector<double> z;
  double potential;
};

struct ConstructionResult {
  std::shared_ptr<const SquaredPolyDensity> density;
  double achieved_error = 0.0;
  bool converged = false;
  std::size_t n_evals = 0;
  int iterations = 0;
  std::vector<ProgressRecord> history;
};

// Adaptive weighted least squares for exp(-Φ/2).
ConstructionResult construct_kr(const Potential& potential, BasisFamily family,
                                std::vector<DomainMap> maps, const LsConfig& cfg,
                                std::uint64_t seed, std::span<const SeedSample> seeds = {});

// One weighted least-squares fit on a fixed index set.
ConstructionResult construct_on_set(const Potential& potential, BasisFamily family,
                                    std::vector<DomainMap> maps, const MultiIndexSet& set,
                                    const LsConfig& cfg, std::uint64_t seed);

}  // namespace krmap
