#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "krmap/dirt.hpp"
#include "krmap/polybasis.hpp"

namespace krmap {

// ---------------------------------------------------------------- ODE solver

using VectorField = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct RkOptions {
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
  double initial_step = 0.0;  // 0 selects a step automatically
  double min_step = 1e-12;
  std::size_t max_steps = 1000000;
};

struct OdeSolution {
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // one state per requested time
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

// Dormand–Prince 4(5) with PI step control. Steps are shortened to land exactly
// on each requested output time, which must be increasing and ≥ t0.
OdeSolution rk45_integrate(const VectorField& f, std::vector<double> y0, double t0,
                           std::span<const double> output_times, const RkOptions& opts = {});

// Classical RK4 with a fixed step; a reference for testing the adaptive solver.
OdeSolution rk4_fixed(const VectorField& f, std::vector<double> y0, double t0,
                      std::span<const double> output_times, double step);

// ------------------------------------------------------------------ CSIR

// Compartmental SIR model on a periodic ring of K compartments. Parameters are
// x = (θ_1, ν_1, …, θ_K, ν_K); the state is laid out as (S_1..S_K, I_1..I_K, R_1..R_K).
class CsirModel {
 public:
  static constexpr int kTimes = 6;

  explicit CsirModel(int compartments, std::vector<double> data = {}, RkOptions opts = {});

  int compartments() const noexcept { return k_; }
  int dim() const noexcept { return 2 * k_; }
  std::size_t observations() const noexcept { return static_cast<std::size_t>(k_) * kTimes; }
  const RkOptions& options() const noexcept { return opts_; }

  static std::vector<double> observation_times();
  static std::vector<double> default_truth(int compartments);
  std::vector<double> initial_state() const;

  void rhs(std::span<const double> x, std::span<const double> y, std::span<double> dy) const;
  OdeSolution trajectory(std::span<const double> x, std::span<const double> times) const;

  // I_k(5j/6) stored at j·K + k (time-major).
  std::vector<double> infected(std::span<const double> x) const;

  // I(x_true) plus σ·N(0,1) noise; σ = 0 returns the clean trajectory.
  std::vector<double> simulate_data(std::span<const double> x_true, std::uint64_t seed, double sigma = 1.0) const;

  const std::vector<double>& data() const noexcept { return data_; }
  void set_data(std::vector<double> y);

  // ½(I - y)² per observation, time-major. Integrator failure gives +∞ entries.
  std::vector<double> misfits(std::span<const double> x) const;
  double potential(std::span<const double> x) const;

  // One batch per observation time.
  std::vector<std::vector<std::size_t>> time_batches() const;
  // Uniform prior on [0, 2]^{2K}: Linear(0, 2) maps under the Legendre weight.
  std::vector<DomainMap> prior_maps() const;
  std::vector<Interval> prior_box() const;
  TargetProblem target_problem() const;

  std::size_t evaluations() const noexcept { return counter_->load(); }
  void reset_evaluations() const noexcept { counter_->store(0); }
  // Potential calls whose integration failed.
  std::size_t failures() const noexcept { return failures_->load(); }

 private:
  int k_;
  std::vector<double> data_;
  RkOptions opts_;
  std::shared_ptr<std::atomic<std::size_t>> counter_;
  std::shared_ptr<std::atomic<std::size_t>> failures_;
};

// ------------------------------------------------------------ regression toy

// Straight-line fit y_j = a + b t_j + σ η_j at t_j = j/n, j = 1..n, with a uniform
// prior on [-2, 2]². The posterior is a truncated Gaussian, and each observation
// can form its own data batch.
class RegressionToy {
 public:
  explicit RegressionToy(std::size_t observations = 6, double sigma = 0.3, std::vector<double> truth = {0.5, -1.0},
                         std::uint64_t seed = 7);

  int dim() const noexcept { return 2; }
  std::size_t observations() const noexcept { return times_.size(); }
  double sigma() const noexcept { return sigma_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::vector<double> misfits(std::span<const double> x) const;
  double potential(std::span<const double> x) const;
  double log_density(std::span<const double> x) const { return -potential(x); }

  std::vector<std::vector<std::size_t>> observation_batches() const;
  std::vector<DomainMap> prior_maps() const;
  std::vector<Interval> prior_box() const;
  TargetProblem target_problem() const;

 private:
  double sigma_;
  std::vector<double> times_;
  std::vector<double> data_;
};

// ------------------------------------------------------------ analytic targets

enum class AnalyticKind { GaussianBump, Banana, ProductBeta };

std::string_view to_string(AnalyticKind kind);
AnalyticKind analytic_kind_from_string(std::string_view name);

// Unnormalized densities on a box, taken relative to Lebesgue measure.
struct AnalyticTarget {
  AnalyticKind kind = AnalyticKind::GaussianBump;
  int dim = 2;
  double sharpness = 1.0;  // inverse variance for the bump, curvature for the banana
  double alpha = 2.0;      // Beta shape parameters
  double beta = 3.0;
  std::vector<double> center;
  std::vector<Interval> box;

  double log_density(std::span<const double> x) const;
  // Legendre weight under Linear maps is uniform on the box, so Φ^y = -log f.
  std::vector<DomainMap> maps() const;
  TargetProblem target_problem() const;
};

AnalyticTarget gaussian_bump(int dim, double sharpness, std::vector<double> center = {});
AnalyticTarget banana(double curvature, double scale = 1.0);
AnalyticTarget product_beta(int dim, double alpha, double beta);

// -------------------------------------------------------- quadrature Hellinger

using LogDensity = std::function<double(std::span<const double>)>;

struct TensorGrid {
  std::vector<std::vector<double>> nodes;    // per axis
  std::vector<std::vector<double>> weights;  // per axis, Lebesgue
  std::size_t size() const;
  void point(std::size_t flat, std::span<double> x) const;
  double weight(std::size_t flat) const;
};

// Composite Gauss–Legendre rule with `points_per_axis` nodes per axis.
TensorGrid make_tensor_grid(std::span<const Interval> box, int points_per_axis);

// Both densities are normalized by the same rule. d ≤ 3.
double quadrature_hellinger(const LogDensity& log_f, const LogDensity& log_q, std::span<const Interval> box,
                            int points_per_axis = 200, int threads = 1);

// q is the normalized density of a composed map; f is normalized on `box`, which
// may be any region that contains essentially all of f's mass. d ≤ 3.
double quadrature_hellinger(const LogDensity& log_f, const ComposedMap& t, std::span<const Interval> box,
                            int points_per_axis = 200, int threads = 1);

// Sub-box holding every coarse grid point with log f ≥ max - drop, padded by one
// coarse cell and clipped to `box`.
std::vector<Interval> find_support_box(const LogDensity& log_f, std::span<const Interval> box,
                                       int points_per_axis = 100, double drop = 40.0, int threads = 1);

}  // namespace krmap
