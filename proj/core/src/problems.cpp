#include "krmap/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "krmap/errors.hpp"
#include "krmap/parallel.hpp"
#include "krmap/quadrature.hpp"
#include "krmap/random.hpp"

namespace krmap {
namespace {

// Dormand–Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

void check_output_times(double t0, std::span<const double> times) {
  double prev = t0;
  for (double t : times) {
    if (!std::isfinite(t) || t < prev) throw ArgumentError("output times must be finite, increasing and ≥ t0");
    prev = t;
  }
}

}  // namespace

OdeSolution rk45_integrate(const VectorField& f, std::vector<double> y0, double t0,
                           std::span<const double> output_times, const RkOptions& opts) {
  if (!(opts.abs_tol > 0.0 && opts.rel_tol > 0.0)) throw ArgumentError("tolerances must be positive");
  check_output_times(t0, output_times);
  const std::size_t n = y0.size();
  OdeSolution sol;
  std::vector<double> y = std::move(y0), ynew(n), tmp(n), err(n);
  std::array<std::vector<double>, 7> k;
  for (auto& v : k) v.assign(n, 0.0);

  auto scaled_norm = [&](std::span<const double> v, std::span<const double> ya, std::span<const double> yb) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      s += (v[i] / sc) * (v[i] / sc);
    }
    return n == 0 ? 0.0 : std::sqrt(s / static_cast<double>(n));
  };

  double t = t0;
  f(t, y, k[0]);
  double h = opts.initial_step;
  const double span_total = output_times.empty() ? 0.0 : output_times.back() - t0;
  if (h <= 0.0) {
    const double d0 = scaled_norm(y, y, y);
    const double d1 = scaled_norm(k[0], y, y);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    if (span_total > 0.0) h = std::min(h, span_total);
  }
  double err_prev = 1e-4;
  constexpr double beta_pi = 0.04;
  constexpr double alpha_pi = 0.2 - 0.75 * beta_pi;

  for (double t_out : output_times) {
    while (t < t_out) {
      if (sol.accepted_steps + sol.rejected_steps >= opts.max_steps) {
        throw StiffnessError("step budget exhausted", t);
      }
      bool landing = false;
      double step = h;
      if (t + step >= t_out - 1e-14 * std::max(1.0, std::abs(t_out))) {
        step = t_out - t;
        landing = true;
      }
      if (step < opts.min_step && !landing) throw StiffnessError("step size underflow", t);
      auto stage = [&](std::initializer_list<std::pair<int, double>> terms) {
        for (std::size_t i = 0; i < n; ++i) {
          double s = 0.0;
          for (const auto& [j, a] : terms) s += a * k[j][i];
          tmp[i] = y[i] + step * s;
        }
      };
      stage({{0, a21}});
      f(t + c2 * step, tmp, k[1]);
      stage({{0, a31}, {1, a32}});
      f(t + c3 * step, tmp, k[2]);
      stage({{0, a41}, {1, a42}, {2, a43}});
      f(t + c4 * step, tmp, k[3]);
      stage({{0, a51}, {1, a52}, {2, a53}, {3, a54}});
      f(t + c5 * step, tmp, k[4]);
      stage({{0, a61}, {1, a62}, {2, a63}, {3, a64}, {4, a65}});
      f(t + step, tmp, k[5]);
      for (std::size_t i = 0; i < n; ++i) {
        ynew[i] = y[i] + step * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] + a75 * k[4][i] + a76 * k[5][i]);
      }
      f(t + step, ynew, k[6]);
      for (std::size_t i = 0; i < n; ++i) {
        err[i] = step * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
      }
      double e = scaled_norm(err, y, ynew);
      if (!std::isfinite(e)) e = 1e10;
      if (e <= 1.0) {
        ++sol.accepted_steps;
        t = landing ? t_out : t + step;
        y.swap(ynew);
        k[0].swap(k[6]);
        double fac = 0.9 * std::pow(std::max(e, 1e-10), -alpha_pi) * std::pow(err_prev, beta_pi);
        fac = std::clamp(fac, 0.2, 10.0);
        err_prev = std::max(e, 1e-4);
        h = landing ? std::max(h, step * fac) : step * fac;
      } else {
        ++sol.rejected_steps;
        h = step * std::max(0.2, 0.9 * std::pow(e, -0.2));
        if (h < opts.min_step) throw StiffnessError("step size underflow", t);
      }
    }
    sol.times.push_back(t_out);
    sol.states.push_back(y);
  }
  return sol;
}

OdeSolution rk4_fixed(const VectorField& f, std::vector<double> y0, double t0, std::span<const double> output_times,
                      double step) {
  if (!(step > 0.0)) throw ArgumentError("step must be positive");
  check_output_times(t0, output_times);
  const std::size_t n = y0.size();
  std::vector<double> y = std::move(y0), k1(n), k2(n), k3(n), k4(n), tmp(n);
  OdeSolution sol;
  double t = t0;
  for (double t_out : output_times) {
    while (t < t_out) {
      const double h = std::min(step, t_out - t);
      f(t, y, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      f(t + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      f(t + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
      f(t + h, tmp, k4);
      for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      t = (h == t_out - t) ? t_out : t + h;
      ++sol.accepted_steps;
    }
    sol.times.push_back(t_out);
    sol.states.push_back(y);
  }
  return sol;
}

// ------------------------------------------------------------------ CSIR

CsirModel::CsirModel(int compartments, std::vector<double> data, RkOptions opts)
    : k_(compartments), data_(std::move(data)), opts_(opts),
      counter_(std::make_shared<std::atomic<std::size_t>>(0)),
      failures_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (compartments < 1) throw ArgumentError("at least one compartment is required");
  if (!data_.empty() && data_.size() != observations()) throw ArgumentError("data must hold K×6 observations");
}

std::vector<double> CsirModel::observation_times() {
  std::vector<double> t(kTimes);
  for (int j = 0; j < kTimes; ++j) t[j] = 5.0 * (j + 1) / 6.0;
  return t;
}

std::vector<double> CsirModel::default_truth(int compartments) {
  std::vector<double> x;
  for (int k = 0; k < compartments; ++k) {
    x.push_back(0.1);
    x.push_back(1.0);
  }
  return x;
}

std::vector<double> CsirModel::initial_state() const {
  std::vector<double> y(3 * static_cast<std::size_t>(k_), 0.0);
  for (int k = 1; k <= k_; ++k) {
    y[k - 1] = 99.0 - k_ + k;
    y[k_ + k - 1] = k_ + 1.0 - k;
  }
  return y;
}

void CsirModel::rhs(std::span<const double> x, std::span<const double> y, std::span<double> dy) const {
  const int K = k_;
  for (int k = 0; k < K; ++k) {
    const double theta = x[2 * k], nu = x[2 * k + 1];
    const int left = (k + K - 1) % K, right = (k + 1) % K;
    const double s = y[k], i = y[K + k], r = y[2 * K + k];
    const double ds = 0.5 * (y[left] - s) + 0.5 * (y[right] - s);
    const double di = 0.5 * (y[K + left] - i) + 0.5 * (y[K + right] - i);
    const double dr = 0.5 * (y[2 * K + left] - r) + 0.5 * (y[2 * K + right] - r);
    dy[k] = -theta * s * i + ds;
    dy[K + k] = theta * s * i - nu * i + di;
    dy[2 * K + k] = nu * i + dr;
  }
}

OdeSolution CsirModel::trajectory(std::span<const double> x, std::span<const double> times) const {
  if (static_cast<int>(x.size()) != dim()) throw ArgumentError("CSIR parameter dimension mismatch");
  const std::vector<double> xp(x.begin(), x.end());
  VectorField f = [this, &xp](double, std::span<const double> y, std::span<double> dy) { rhs(xp, y, dy); };
  return rk45_integrate(f, initial_state(), 0.0, times, opts_);
}

std::vector<double> CsirModel::infected(std::span<const double> x) const {
  const auto times = observation_times();
  const auto sol = trajectory(x, times);
  std::vector<double> out(observations());
  for (int j = 0; j < kTimes; ++j) {
    for (int k = 0; k < k_; ++k) out[static_cast<std::size_t>(j) * k_ + k] = sol.states[j][k_ + k];
  }
  return out;
}

std::vector<double> CsirModel::simulate_data(std::span<const double> x_true, std::uint64_t seed, double sigma) const {
  if (!(sigma >= 0.0)) throw ArgumentError("noise level must be nonnegative");
  auto y = infected(x_true);
  if (sigma > 0.0) {
    auto rng = make_rng(seed, "csir-noise");
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : y) v += sigma * normal(rng);
  }
  return y;
}

void CsirModel::set_data(std::vector<double> y) {
  if (y.size() != observations()) throw ArgumentError("data must hold K×6 observations");
  data_ = std::move(y);
}

std::vector<double> CsirModel::misfits(std::span<const double> x) const {
  if (data_.empty()) throw ArgumentError("CSIR model has no data");
  counter_->fetch_add(1);
  std::vector<double> out(observations(), std::numeric_limits<double>::infinity());
  try {
    const auto i = infected(x);
    for (std::size_t n = 0; n < out.size(); ++n) {
      const double r = i[n] - data_[n];
      if (std::isfinite(r)) out[n] = 0.5 * r * r;
    }
  } catch (const StiffnessError&) {
    // Treated as zero likelihood.
    failures_->fetch_add(1);
  }
  return out;
}

double CsirModel::potential(std::span<const double> x) const {
  const auto m = misfits(x);
  return std::accumulate(m.begin(), m.end(), 0.0);
}

std::vector<std::vector<std::size_t>> CsirModel::time_batches() const {
  std::vector<std::vector<std::size_t>> b(kTimes);
  for (int j = 0; j < kTimes; ++j) {
    for (int k = 0; k < k_; ++k) b[j].push_back(static_cast<std::size_t>(j) * k_ + k);
  }
  return b;
}

std::vector<DomainMap> CsirModel::prior_maps() const { return std::vector<DomainMap>(dim(), DomainMap::linear(0.0, 2.0)); }

std::vector<Interval> CsirModel::prior_box() const { return std::vector<Interval>(dim(), Interval{0.0, 2.0}); }

TargetProblem CsirModel::target_problem() const {
  if (data_.empty()) throw ArgumentError("CSIR model has no data");
  CsirModel copy = *this;
  return TargetProblem(dim(), [copy](std::span<const double> x) { return copy.misfits(x); }, observations());
}

// ------------------------------------------------------------ regression toy

RegressionToy::RegressionToy(std::size_t observations, double sigma, std::vector<double> truth, std::uint64_t seed)
    : sigma_(sigma) {
  if (observations < 1) throw ArgumentError("at least one observation is required");
  if (!(sigma > 0.0)) throw ArgumentError("noise level must be positive");
  if (truth.size() != 2) throw ArgumentError("the regression toy has two parameters");
  auto rng = make_rng(seed, "regression-noise");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t j = 1; j <= observations; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(observations);
    times_.push_back(t);
    data_.push_back(truth[0] + truth[1] * t + sigma * normal(rng));
  }
}

std::vector<double> RegressionToy::misfits(std::span<const double> x) const {
  if (x.size() != 2) throw ArgumentError("the regression toy has two parameters");
  std::vector<double> m(times_.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double r = (x[0] + x[1] * times_[j] - data_[j]) / sigma_;
    m[j] = 0.5 * r * r;
  }
  return m;
}

double RegressionToy::potential(std::span<const double> x) const {
  const auto m = misfits(x);
  return std::accumulate(m.begin(), m.end(), 0.0);
}

std::vector<std::vector<std::size_t>> RegressionToy::observation_batches() const {
  std::vector<std::vector<std::size_t>> b;
  for (std::size_t j = 0; j < times_.size(); ++j) b.push_back({j});
  return b;
}

std::vector<DomainMap> RegressionToy::prior_maps() const { return {DomainMap::linear(-2.0, 2.0), DomainMap::linear(-2.0, 2.0)}; }

std::vector<Interval> RegressionToy::prior_box() const { return {Interval{-2.0, 2.0}, Interval{-2.0, 2.0}}; }

TargetProblem RegressionToy::target_problem() const {
  RegressionToy copy = *this;
  return TargetProblem(2, [copy](std::span<const double> x) { return copy.misfits(x); }, observations());
}

// ------------------------------------------------------------ analytic targets

std::string_view to_string(AnalyticKind kind) {
  switch (kind) {
    case AnalyticKind::GaussianBump: return "gaussian_bump";
    case AnalyticKind::Banana: return "banana";
    case AnalyticKind::ProductBeta: return "product_beta";
  }
  return "unknown";
}

AnalyticKind analytic_kind_from_string(std::string_view name) {
  if (name == "gaussian_bump") return AnalyticKind::GaussianBump;
  if (name == "banana") return AnalyticKind::Banana;
  if (name == "product_beta") return AnalyticKind::ProductBeta;
  throw ArgumentError("unknown analytic target: " + std::string(name));
}

double AnalyticTarget::log_density(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim) throw ArgumentError("analytic target dimension mismatch");
  switch (kind) {
    case AnalyticKind::GaussianBump: {
      double s = 0.0;
      for (int i = 0; i < dim; ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
      return -0.5 * sharpness * s;
    }
    case AnalyticKind::Banana: {
      const double s = center.empty() ? 1.0 : center[0];
      const double a = x[0] / s;
      const double b = x[1] / s - sharpness * (a * a - 1.0);
      return -0.5 * a * a - 2.0 * b * b;
    }
    case AnalyticKind::ProductBeta: {
      double s = 0.0;
      for (int i = 0; i < dim; ++i) {
        if (x[i] <= 0.0 || x[i] >= 1.0) return -std::numeric_limits<double>::infinity();
        s += (alpha - 1.0) * std::log(x[i]) + (beta - 1.0) * std::log1p(-x[i]);
      }
      return s;
    }
  }
  return 0.0;
}

std::vector<DomainMap> AnalyticTarget::maps() const {
  std::vector<DomainMap> m;
  for (const auto& b : box) m.push_back(DomainMap::linear(b.lower, b.upper));
  return m;
}

TargetProblem AnalyticTarget::target_problem() const {
  AnalyticTarget copy = *this;
  return TargetProblem(dim, [copy](std::span<const double> x) { return -copy.log_density(x); });
}

AnalyticTarget gaussian_bump(int dim, double sharpness, std::vector<double> center) {
  if (dim < 1) throw ArgumentError("dimension must be positive");
  if (!(sharpness > 0.0)) throw ArgumentError("sharpness must be positive");
  if (center.empty()) center.assign(dim, 0.0);
  if (static_cast<int>(center.size()) != dim) throw ArgumentError("center dimension mismatch");
  AnalyticTarget t;
  t.kind = AnalyticKind::GaussianBump;
  t.dim = dim;
  t.sharpness = sharpness;
  t.center = std::move(center);
  t.box.assign(dim, Interval{-1.0, 1.0});
  return t;
}

AnalyticTarget banana(double curvature, double scale) {
  if (!(curvature >= 0.0)) throw ArgumentError("curvature must be nonnegative");
  if (!(scale > 0.0)) throw ArgumentError("scale must be positive");
  AnalyticTarget t;
  t.kind = AnalyticKind::Banana;
  t.dim = 2;
  t.sharpness = curvature;
  t.center = {scale};
  t.box = {Interval{-4.0 * scale, 4.0 * scale},
           Interval{scale * (-curvature - 2.0), scale * (15.0 * curvature + 2.0)}};
  return t;
}

AnalyticTarget product_beta(int dim, double alpha, double beta) {
  if (dim < 1) throw ArgumentError("dimension must be positive");
  if (!(alpha > 0.0 && beta > 0.0)) throw ArgumentError("Beta shape parameters must be positive");
  AnalyticTarget t;
  t.kind = AnalyticKind::ProductBeta;
  t.dim = dim;
  t.alpha = alpha;
  t.beta = beta;
  t.box.assign(dim, Interval{0.0, 1.0});
  return t;
}

// -------------------------------------------------------- quadrature Hellinger

std::size_t TensorGrid::size() const {
  std::size_t n = 1;
  for (const auto& a : nodes) n *= a.size();
  return n;
}

void TensorGrid::point(std::size_t flat, std::span<double> x) const {
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    x[a] = nodes[a][flat % nodes[a].size()];
    flat /= nodes[a].size();
  }
}

double TensorGrid::weight(std::size_t flat) const {
  double w = 1.0;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    w *= weights[a][flat % nodes[a].size()];
    flat /= nodes[a].size();
  }
  return w;
}

TensorGrid make_tensor_grid(std::span<const Interval> box, int points_per_axis) {
  if (box.empty()) throw ArgumentError("empty box");
  if (box.size() > 3) throw UnsupportedDimensionError("tensor quadrature supports d ≤ 3");
  if (points_per_axis < 2) throw ArgumentError("need at least two points per axis");
  const int per_panel = points_per_axis % 10 == 0 ? 10 : points_per_axis % 8 == 0 ? 8 : points_per_axis;
  const int panels = points_per_axis / per_panel;
  TensorGrid g;
  for (const auto& b : box) {
    if (!(std::isfinite(b.lower) && std::isfinite(b.upper) && b.lower < b.upper)) {
      throw ArgumentError("tensor quadrature needs a finite box");
    }
    auto r = composite_gauss_legendre(panels, per_panel, b.lower, b.upper);
    g.nodes.push_back(std::move(r.nodes));
    g.weights.push_back(std::move(r.weights));
  }
  return g;
}

namespace {

struct GridValues {
  std::vector<double> w, lf, lq;
};

GridValues evaluate_on_grid(const TensorGrid& g, const LogDensity& log_f, const LogDensity* log_q, int threads) {
  const std::size_t n = g.size();
  const std::size_t d = g.nodes.size();
  GridValues v;
  v.w.resize(n);
  v.lf.resize(n);
  if (log_q) v.lq.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> x(d);
    g.point(i, x);
    v.w[i] = g.weight(i);
    v.lf[i] = log_f(x);
    if (log_q) v.lq[i] = (*log_q)(x);
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(v.lf[i]) || (log_q && std::isnan(v.lq[i]))) throw NumericalError("NaN log density on grid");
  }
  return v;
}

double finite_max(const std::vector<double>& a) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : a) m = std::max(m, v);
  if (!std::isfinite(m)) throw InvalidDensityError("density vanishes on the quadrature grid");
  return m;
}

}  // namespace

double quadrature_hellinger(const LogDensity& log_f, const LogDensity& log_q, std::span<const Interval> box,
                            int points_per_axis, int threads) {
  const auto g = make_tensor_grid(box, points_per_axis);
  const auto v = evaluate_on_grid(g, log_f, &log_q, threads);
  const double mf = finite_max(v.lf), mq = finite_max(v.lq);
  double a = 0.0, b = 0.0, c = 0.0;
  for (std::size_t i = 0; i < v.w.size(); ++i) {
    const double sf = v.lf[i] - mf, sq = v.lq[i] - mq;
    a += v.w[i] * std::exp(sf);
    b += v.w[i] * std::exp(sq);
    c += v.w[i] * std::exp(0.5 * (sf + sq));
  }
  const double h2 = std::clamp(1.0 - c / std::sqrt(a * b), 0.0, 1.0);
  return std::sqrt(h2);
}

double quadrature_hellinger(const LogDensity& log_f, const ComposedMap& t, std::span<const Interval> box,
                            int points_per_axis, int threads) {
  if (static_cast<int>(box.size()) != t.dim()) throw ArgumentError("box dimension mismatch");
  const LogDensity log_q = [&t](std::span<const double> x) { return t.log_density(x); };
  const auto g = make_tensor_grid(box, points_per_axis);
  const auto v = evaluate_on_grid(g, log_f, &log_q, threads);
  const double mf = finite_max(v.lf);
  double a = 0.0, c = 0.0;
  for (std::size_t i = 0; i < v.w.size(); ++i) {
    const double sf = v.lf[i] - mf;
    a += v.w[i] * std::exp(sf);
    c += v.w[i] * std::exp(0.5 * (sf + v.lq[i]));
  }
  const double h2 = std::clamp(1.0 - c / std::sqrt(a), 0.0, 1.0);
  return std::sqrt(h2);
}

std::vector<Interval> find_support_box(const LogDensity& log_f, std::span<const Interval> box, int points_per_axis,
                                       double drop, int threads) {
  if (box.empty()) throw ArgumentError("empty box");
  if (box.size() > 3) throw UnsupportedDimensionError("support search supports d ≤ 3");
  if (points_per_axis < 2) throw ArgumentError("need at least two points per axis");
  const std::size_t d = box.size();
  const std::size_t m = static_cast<std::size_t>(points_per_axis);
  std::size_t n = 1;
  for (std::size_t a = 0; a < d; ++a) n *= m;
  auto coord = [&](std::size_t a, std::size_t i) {
    return box[a].lower + (static_cast<double>(i) + 0.5) * (box[a].upper - box[a].lower) / static_cast<double>(m);
  };
  std::vector<double> lf(n);
  parallel_for(n, threads, [&](std::size_t flat) {
    std::vector<double> x(d);
    std::size_t r = flat;
    for (std::size_t a = 0; a < d; ++a) {
      x[a] = coord(a, r % m);
      r /= m;
    }
    lf[flat] = log_f(x);
  });
  const double mx = finite_max(lf);
  std::vector<std::size_t> lo(d, m), hi(d, 0);
  for (std::size_t flat = 0; flat < n; ++flat) {
    if (!(lf[flat] >= mx - drop)) continue;
    std::size_t r = flat;
    for (std::size_t a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], r % m);
      hi[a] = std::max(hi[a], r % m);
      r /= m;
    }
  }
  std::vector<Interval> out(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double cell = (box[a].upper - box[a].lower) / static_cast<double>(m);
    out[a].lower = std::max(box[a].lower, coord(a, lo[a]) - 1.5 * cell);
    out[a].upper = std::min(box[a].upper, coord(a, hi[a]) + 1.5 * cell);
  }
  return out;
}

}  // namespace krmap
