#pragma once

#include <memory>
#include <span>
#include <vector>

#include "krmap/polybasis.hpp"
#include "krmap/sparse.hpp"

namespace krmap {

struct DensityValue {
  double value;
  double log_value;
};

// f(x) = (γ + g(z)²) λ(z) Π z_i'(x_i) / ẑ with g = Σ_k c_k ψ_k and z = z(x)
// taken coordinatewise through the domain maps.
class SquaredPolyDensity {
 public:
  SquaredPolyDensity(BasisFamily family, std::vector<DomainMap> maps, MultiIndexSet set,
                     std::vector<double> coeffs, double gamma);

  int dim() const noexcept { return set_.dim(); }
  BasisFamily family() const noexcept { return family_; }
  const std::vector<DomainMap>& maps() const noexcept { return maps_; }
  const MultiIndexSet& set() const noexcept { return set_; }
  const std::vector<double>& coefficients() const noexcept { return coeffs_; }
  double gamma() const noexcept { return gamma_; }
  // ẑ = γ + Σ c_k²
  double normalizer() const noexcept { return normalizer_; }

  std::vector<double> to_reference(std::span<const double> x) const;
  std::vector<double> from_reference(std::span<const double> z) const;
  // Σ_i log z_i'(x_i) expressed at z.
  double log_map_jacobian(std::span<const double> z) const;

  double g_reference(std::span<const double> z) const;
  double log_density_reference(std::span<const double> z) const;
  DensityValue evaluate(std::span<const double> x) const;

  // log λ(x) of the induced product weight in physical coordinates.
  double log_base_weight(std::span<const double> x) const;

 private:
  BasisFamily family_;
  std::vector<DomainMap> maps_;
  MultiIndexSet set_;
  std::vector<double> coeffs_;
  double gamma_;
  double normalizer_;
};

DensityValue eval_density(const SquaredPolyDensity& rho, std::span<const double> x);

// Marginal density of the coordinates not in q at the point x_rest (ordered as
// the increasing complement of q). Both implementations agree for orthonormal
// families; marginal_general goes through mass matrices.
double marginal_orth(const SquaredPolyDensity& rho, std::span<const int> q,
                     std::span<const double> x_rest);
double marginal_general(const SquaredPolyDensity& rho, std::span<const int> q,
                        std::span<const double> x_rest);

struct PushforwardResult {
  std::vector<double> x;
  double log_density;   // log f(x)
  double log_jacobian;  // log |∇T(u)|
};

struct PullbackResult {
  std::vector<double> u;
  double log_density;  // log f(x)
};

// Knothe–Rosenblatt map T = F⁻¹ ∘ F_U for a fixed variable ordering. The
// reference U has the family's own weight λ on its analytic support; u_{p_t}
// drives x_{p_t}. Instances cache the per-step groupings and are read-only
// after construction.
class KrMap {
 public:
  KrMap(std::shared_ptr<const SquaredPolyDensity> density, std::vector<int> ordering);

  const SquaredPolyDensity& density() const noexcept { return *density_; }
  std::shared_ptr<const SquaredPolyDensity> density_ptr() const noexcept { return density_; }
  const std::vector<int>& ordering() const noexcept { return ordering_; }
  int dim() const noexcept { return density_->dim(); }

  std::vector<double> forward(std::span<const double> u) const;
  std::vector<double> inverse(std::span<const double> x) const;
  PushforwardResult pushforward(std::span<const double> u) const;
  PullbackResult pullback(std::span<const double> x) const;

  // Conditional of the reference coordinate z_{p_t} given the physical values
  // of x_{p_0}..x_{p_{t-1}} (t is zero based).
  UnivariatePdf conditional(int t, std::span<const double> prefix) const;

  // q_t = {p_{t+1}, ..., p_{d-1}} and its cached projection.
  std::vector<int> marginalized(int t) const;
  const RowProjection& projection(int t) const;

  double log_reference_density(std::span<const double> u) const;

 private:
  struct Step {
    int coord;
    RowProjection projection;
    std::vector<std::size_t> group_offsets;
    std::vector<std::size_t> members;
    std::vector<int> member_degree;
    SquaredCollocation collocation;
  };
  struct Workspace;

  UnivariatePdf step_pdf(const Step& step, Workspace& ws) const;
  double step_q(const Step& step, Workspace& ws, double z) const;
  void advance(const Step& step, Workspace& ws, double z) const;

  std::shared_ptr<const SquaredPolyDensity> density_;
  std::vector<int> ordering_;
  std::vector<Step> steps_;
};

std::vector<int> identity_ordering(int dim);

std::vector<double> evaluate_kr(const SquaredPolyDensity& rho, std::span<const int> ordering,
                                std::span<const double> u);
std::vector<double> evaluate_kr_inverse(const SquaredPolyDensity& rho,
                                        std::span<const int> ordering, std::span<const double> x);
PushforwardResult log_pushforward_density(const SquaredPolyDensity& rho,
                                          std::span<const int> ordering,
                                          std::span<const double> u);
UnivariatePdf conditional_pdf(const SquaredPolyDensity& rho, std::span<const int> ordering, int t,
                              std::span<const double> prefix);

}  // namespace krmap
