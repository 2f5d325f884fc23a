#include "krmap/approx.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "krmap/errors.hpp"
#include "krmap/parallel.hpp"

namespace krmap {
namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kGammaFloor = 1e-12;

// Inverse-CDF sampler for the univariate densities ψ_j² λ.
class ComponentSampler {
 public:
  explicit ComponentSampler(BasisFamily family) : family_(family) {}

  double draw(int degree, Rng& rng) {
    const double xi = uniform_open(rng);
    if (degree == 0) return sample_reference(family_, xi);
    return pdf(degree).quantile(xi);
  }

  const UnivariatePdf& pdf(int degree) {
    while (static_cast<int>(pdfs_.size()) <= degree) {
      const int j = static_cast<int>(pdfs_.size());
      SquaredCollocation col(family_, j);
      std::vector<double> values(col.nodes().size());
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = col.node_basis()[i * static_cast<std::size_t>(j + 1) + j];
        values[i] = v * v;
      }
      pdfs_.push_back(col.make_pdf(values, 1.0));
    }
    return pdfs_[degree];
  }

 private:
  BasisFamily family_;
  std::vector<UnivariatePdf> pdfs_;
};

// Samples in reference coordinates with cached per-coordinate basis values.
struct Pool {
  int dim = 0;
  int degree = 0;  // basis tables hold ψ_0..ψ_degree
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> table;
  std::vector<double> phi;
  std::vector<std::size_t> component;

  std::size_t size() const { return z.size(); }

  void add(BasisFamily family, std::vector<double> point, double potential, std::size_t comp) {
    std::vector<double> t(static_cast<std::size_t>(dim) * (degree + 1));
    for (int c = 0; c < dim; ++c) {
      eval_basis(family, degree, point[c],
                 std::span<double>(t.data() + static_cast<std::size_t>(c) * (degree + 1), degree + 1));
    }
    z.push_back(std::move(point));
    table.push_back(std::move(t));
    phi.push_back(potential);
    component.push_back(comp);
  }

  double basis(std::size_t i, int coord, int j) const {
    return table[i][static_cast<std::size_t>(coord) * (degree + 1) + j];
  }
};

Eigen::MatrixXd design_matrix(const Pool& pool, const MultiIndexSet& set, std::size_t first = 0,
                              std::size_t count = std::numeric_limits<std::size_t>::max()) {
  const std::size_t n = std::min(count, pool.size() - first);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(set.size()));
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto idx = set[k];
    for (std::size_t i = 0; i < n; ++i) {
      double v = 1.0;
      for (int c = 0; c < set.dim(); ++c) v *= pool.basis(first + i, c, idx[c]);
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }
  }
  return a;
}

// Mixture weights λ/Λ with Λ = Σ_k (n_k/N) ψ_k² λ.
Eigen::VectorXd mixture_weights(const Eigen::MatrixXd& design, const std::vector<std::size_t>& counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  Eigen::VectorXd nk(design.cols());
  for (Eigen::Index k = 0; k < design.cols(); ++k) nk(k) = static_cast<double>(counts[k]);
  Eigen::VectorXd w = (design.array().square().matrix() * nk).cwiseInverse() * total;
  return w;
}

LsSolution solve_dense(const Eigen::MatrixXd& design, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& y, bool want_leverage) {
  const auto n = design.rows();
  const auto m = design.cols();
  if (n < m) {
    throw ArgumentError("weighted least squares needs at least |K| samples (" + std::to_string(n) +
                        " < " + std::to_string(m) + ")");
  }
  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd aw = sw.asDiagonal() * design;
  const Eigen::VectorXd bw = sw.cwiseProduct(y);
  Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> qr(aw);
  const auto rdiag = qr.matrixQR().diagonal().head(m).cwiseAbs();
  const double rmin = rdiag.minCoeff();
  const double cond = rmin > 0.0 ? rdiag.maxCoeff() / rmin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition)) {
    throw IllConditionedError("weighted design is ill-conditioned (estimate " + std::to_string(cond) +
                                  "); increase the sample factor",
                              cond);
  }
  const Eigen::VectorXd c = qr.solve(bw);
  LsSolution sol;
  sol.coeffs.assign(c.data(), c.data() + m);
  const Eigen::VectorXd r = y - design * c;
  sol.residuals.assign(r.data(), r.data() + n);
  sol.condition_estimate = cond;
  if (want_leverage) {
    // Rows of A_w R⁻¹ span the same space as the thin Q.
    Eigen::MatrixXd q = sw.asDiagonal() * design;
    qr.matrixQR().topRows(m).triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(q);
    sol.leverage.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) sol.leverage[i] = q.row(i).squaredNorm();
  }
  return sol;
}

// Evaluates Φ at x(z) for the given samples, in parallel.
std::vector<double> evaluate_potential(const Potential& potential, const std::vector<DomainMap>& maps,
                                       const std::vector<std::vector<double>>& points, int threads) {
  std::vector<double> out(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    std::vector<double> x(points[i].size());
    for (std::size_t c = 0; c < x.size(); ++c) x[c] = maps[c].from_reference(points[i][c]);
    const double v = potential(x);
    out[i] = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  });
  return out;
}

struct FitOutcome {
  LsSolution solution;
  double rel_error;
  double norm2;  // (1/N) Σ w y²
};

class Fitter {
 public:
  Fitter(const Potential& potential, BasisFamily family, std::vector<DomainMap> maps,
         const LsConfig& cfg, std::uint64_t seed, int table_degree)
      : potential_(potential),
        family_(family),
        maps_(std::move(maps)),
        cfg_(cfg),
        rng_(make_rng(seed, "construction")),
        holdout_rng_(make_rng(seed, "holdout")),
        sampler_(family) {
    pool_.degree = table_degree;
    pool_.dim = static_cast<int>(maps_.size());
  }

  void add_seeds(std::span<const SeedSample> seeds) {
    for (const auto& s : seeds) {
      if (static_cast<int>(s.z.size()) != pool_.dim) throw ArgumentError("seed sample dimension mismatch");
      pool_.add(family_, s.z, std::isnan(s.potential) ? std::numeric_limits<double>::infinity() : s.potential, 0);
      if (counts_.empty()) counts_.push_back(0);
      ++counts_[0];
    }
  }

  std::size_t evals() const { return evals_; }

  // New draws needed to give every component its share of the target count.
  std::size_t pending_draws(const MultiIndexSet& set) const {
    const std::size_t target = cfg_.sample_count(set.size());
    std::size_t need = 0;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const std::size_t want = share(target, set.size(), k);
      const std::size_t have = k < counts_.size() ? counts_[k] : 0;
      if (want > have) need += want - have;
    }
    return need;
  }

  void top_up(const MultiIndexSet& set, double multiplier = 1.0) {
    counts_.resize(set.size(), 0);
    const auto target = static_cast<std::size_t>(std::ceil(multiplier * cfg_.sample_count(set.size())));
    std::vector<std::vector<double>> fresh;
    std::vector<std::size_t> comps;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const std::size_t want = share(target, set.size(), k);
      for (std::size_t have = counts_[k]; have < want; ++have) {
        fresh.push_back(draw_component(set[k], rng_));
        comps.push_back(k);
      }
    }
    absorb(fresh, comps);
  }

  FitOutcome fit(const MultiIndexSet& set) {
    const Eigen::MatrixXd a = design_matrix(pool_, set);
    const Eigen::VectorXd w = mixture_weights(a, counts_);
    const Eigen::VectorXd y = targets();
    const bool loo = cfg_.estimator == ErrorEstimator::LeaveOneOut;
    FitOutcome out{solve_dense(a, w, y, loo), 0.0, 0.0};
    const double wy2 = w.dot(y.cwiseAbs2());
    if (!(wy2 > 0.0)) throw NumericalError("exp(-Φ/2) vanishes at every sample");
    out.norm2 = wy2 / static_cast<double>(y.size());
    if (loo) {
      double num = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double h = out.solution.leverage[i];
        if (h >= 1.0 - 1e-10) {
          num = std::numeric_limits<double>::infinity();
          break;
        }
        const double e = out.solution.residuals[i] / (1.0 - h);
        num += w(i) * e * e;
      }
      out.rel_error = std::sqrt(num / wy2);
    } else {
      out.rel_error = holdout_error(set, out.solution.coeffs);
    }
    return out;
  }

  std::vector<WeightedSample> weighted_samples(const MultiIndexSet& set) const {
    const Eigen::MatrixXd a = design_matrix(pool_, set);
    const Eigen::VectorXd w = mixture_weights(a, counts_);
    const Eigen::VectorXd y = targets();
    std::vector<WeightedSample> out(pool_.size());
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      out[i].x = pool_.z[i];
      out[i].w = w(static_cast<Eigen::Index>(i));
      out[i].y = y(static_cast<Eigen::Index>(i));
      out[i].basis_row.resize(set.size());
      for (std::size_t k = 0; k < set.size(); ++k) out[i].basis_row[k] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
    return out;
  }

  std::vector<double> indicators(const MultiIndexSet& set, const ReducedMargin& margin,
                                 const std::vector<double>& residuals) const {
    const Eigen::MatrixXd a = design_matrix(pool_, set);
    const Eigen::VectorXd w = mixture_weights(a, counts_);
    std::vector<double> out(margin.candidates.size(), 0.0);
    const double n = static_cast<double>(pool_.size());
    for (std::size_t m = 0; m < margin.candidates.size(); ++m) {
      const auto& k = margin.candidates[m];
      double s = 0.0;
      for (std::size_t i = 0; i < pool_.size(); ++i) {
        double v = residuals[i] * w(static_cast<Eigen::Index>(i));
        for (int c = 0; c < pool_.dim; ++c) v *= pool_.basis(i, c, k[c]);
        s += v;
      }
      s /= n;
      out[m] = s * s;
    }
    return out;
  }

  const std::vector<DomainMap>& maps() const { return maps_; }
  double shift() const { return shift_; }

 private:
  static std::size_t share(std::size_t total, std::size_t parts, std::size_t k) {
    return total / parts + (k < total % parts ? 1 : 0);
  }

  std::vector<double> draw_component(std::span<const int> k, Rng& rng) {
    std::vector<double> z(k.size());
    for (std::size_t c = 0; c < k.size(); ++c) z[c] = sampler_.draw(k[c], rng);
    return z;
  }

  void absorb(const std::vector<std::vector<double>>& fresh, const std::vector<std::size_t>& comps) {
    const auto phi = evaluate_potential(potential_, maps_, fresh, cfg_.threads);
    evals_ += fresh.size();
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      pool_.add(family_, fresh[i], phi[i], comps[i]);
      if (counts_.size() <= comps[i]) counts_.resize(comps[i] + 1, 0);
      ++counts_[comps[i]];
    }
  }

  Eigen::VectorXd targets() {
    if (!std::isfinite(shift_)) {
      double mn = std::numeric_limits<double>::infinity();
      for (double p : pool_.phi) mn = std::min(mn, p);
      if (!std::isfinite(mn)) throw NumericalError("potential is infinite at every sample");
      shift_ = mn;
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(pool_.size()));
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      y(static_cast<Eigen::Index>(i)) = std::isfinite(pool_.phi[i]) ? std::exp(-0.5 * (pool_.phi[i] - shift_)) : 0.0;
    }
    return y;
  }

  Eigen::VectorXd targets() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(pool_.size()));
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      y(static_cast<Eigen::Index>(i)) = std::isfinite(pool_.phi[i]) ? std::exp(-0.5 * (pool_.phi[i] - shift_)) : 0.0;
    }
    return y;
  }

  double holdout_error(const MultiIndexSet& set, const std::vector<double>& coeffs) {
    const auto count = static_cast<std::size_t>(
        std::ceil(cfg_.holdout_fraction * static_cast<double>(cfg_.sample_count(set.size()))));
    std::vector<std::vector<double>> fresh;
    std::vector<std::size_t> comps;
    std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
    for (std::size_t i = 0; i < count; ++i) {
      const auto k = pick(holdout_rng_);
      fresh.push_back(draw_component(set[k], holdout_rng_));
      comps.push_back(k);
    }
    const std::size_t first = pool_.size();
    absorb(fresh, comps);
    const Eigen::MatrixXd a = design_matrix(pool_, set, first, count);
    // Holdout points are i.i.d. from the uniform mixture Λ_n.
    Eigen::VectorXd w = (a.array().square().rowwise().sum()).inverse().matrix() * static_cast<double>(set.size());
    Eigen::Map<const Eigen::VectorXd> c(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
      const double p = pool_.phi[first + i];
      y(static_cast<Eigen::Index>(i)) = std::isfinite(p) ? std::exp(-0.5 * (p - shift_)) : 0.0;
    }
    const Eigen::VectorXd r = y - a * c;
    const double den = w.dot(y.cwiseAbs2());
    if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(w.dot(r.cwiseAbs2()) / den);
  }

  const Potential& potential_;
  BasisFamily family_;
  std::vector<DomainMap> maps_;
  const LsConfig& cfg_;
  Rng rng_;
  Rng holdout_rng_;
  ComponentSampler sampler_;
  Pool pool_;
  std::vector<std::size_t> counts_;
  std::size_t evals_ = 0;
  double shift_ = std::numeric_limits<double>::quiet_NaN();
};

std::shared_ptr<const SquaredPolyDensity> make_density(BasisFamily family, const std::vector<DomainMap>& maps,
                                                       const MultiIndexSet& set, const FitOutcome& fit) {
  const double err2 = std::max(fit.rel_error * fit.rel_error, kGammaFloor);
  const double gamma = std::isfinite(err2) ? err2 * fit.norm2 : fit.norm2;
  return std::make_shared<const SquaredPolyDensity>(family, maps, set, fit.solution.coeffs, gamma);
}

void check_maps(BasisFamily family, const std::vector<DomainMap>& maps) {
  if (maps.empty()) throw ArgumentError("at least one coordinate is required");
  for (const auto& m : maps) {
    if (!m.compatible_with(family)) throw ArgumentError("domain map incompatible with basis family");
  }
}

}  // namespace

void LsConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw ArgumentError("theta must lie in (0, 1]");
  if (!(sample_factor > 0.0) || !std::isfinite(sample_factor)) throw ArgumentError("sample_factor must be positive");
  if (!(tau > 0.0 && tau < 1.0)) throw ArgumentError("tau must lie in (0, 1)");
  if (max_cardinality < 1) throw ArgumentError("max_cardinality must be positive");
  if (max_degree < 1) throw ArgumentError("max_degree must be positive");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) throw ArgumentError("holdout_fraction must lie in (0, 1)");
  if (initial_degree < 0) throw ArgumentError("initial_degree must be nonnegative");
  if (max_iterations < 1) throw ArgumentError("max_iterations must be positive");
  if (threads < 1) throw ArgumentError("threads must be positive");
}

std::size_t LsConfig::sample_count(std::size_t cardinality) const {
  double n = sample_factor * static_cast<double>(cardinality);
  if (schedule == SampleSchedule::LogLinear) n *= std::log(static_cast<double>(cardinality) + 1.0);
  return std::max<std::size_t>(cardinality, static_cast<std::size_t>(std::ceil(n)));
}

std::vector<WeightedSample> sample_optimal(const MultiIndexSet& set, BasisFamily family,
                                           std::size_t count, std::uint64_t seed) {
  if (set.empty()) throw ArgumentError("sample_optimal needs a nonempty set");
  if (count < 1) throw ArgumentError("count must be positive");
  ComponentSampler sampler(family);
  auto rng = make_rng(seed, "optimal-sampling");
  std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
  const int deg = set.max_degree();
  std::vector<double> psi(deg + 1);
  std::vector<WeightedSample> out(count);
  for (auto& s : out) {
    const auto k = set[pick(rng)];
    s.x.resize(set.dim());
    for (int c = 0; c < set.dim(); ++c) {
      const double xi = uniform_open(rng);
      s.x[c] = k[c] == 0 ? sample_reference(family, xi) : sampler.pdf(k[c]).quantile(xi);
    }
    std::vector<double> table(static_cast<std::size_t>(set.dim()) * (deg + 1));
    for (int c = 0; c < set.dim(); ++c) {
      eval_basis(family, deg, s.x[c], std::span<double>(table.data() + static_cast<std::size_t>(c) * (deg + 1), deg + 1));
    }
    s.basis_row.resize(set.size());
    double christoffel = 0.0;
    for (std::size_t j = 0; j < set.size(); ++j) {
      double v = 1.0;
      for (int c = 0; c < set.dim(); ++c) v *= table[static_cast<std::size_t>(c) * (deg + 1) + set.component(j, c)];
      s.basis_row[j] = v;
      christoffel += v * v;
    }
    s.w = static_cast<double>(set.size()) / christoffel;
  }
  return out;
}

LsSolution solve_weighted_ls(std::span<const WeightedSample> samples, const MultiIndexSet& set,
                             bool want_leverage) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto m = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd a(n, m);
  Eigen::VectorXd w(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[i];
    if (static_cast<Eigen::Index>(s.basis_row.size()) != m) throw ArgumentError("basis row length must equal |K|");
    if (!(s.w > 0.0)) throw ArgumentError("sample weights must be positive");
    for (Eigen::Index k = 0; k < m; ++k) a(i, k) = s.basis_row[k];
    w(i) = s.w;
    y(i) = s.y;
  }
  return solve_dense(a, w, y, want_leverage);
}

std::vector<double> margin_indicators(std::span<const WeightedSample> samples, BasisFamily family,
                                      const ReducedMargin& margin, std::span<const double> residuals) {
  if (residuals.size() != samples.size()) throw ArgumentError("one residual per sample required");
  std::vector<double> out(margin.candidates.size(), 0.0);
  if (samples.empty()) return out;
  int deg = 0;
  for (const auto& k : margin.candidates) deg = std::max(deg, *std::max_element(k.begin(), k.end()));
  const double n = static_cast<double>(samples.size());
  std::vector<double> sums(out.size(), 0.0);
  std::vector<double> table;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x = samples[i].x;
    table.assign(x.size() * static_cast<std::size_t>(deg + 1), 0.0);
    for (std::size_t c = 0; c < x.size(); ++c) {
      eval_basis(family, deg, x[c], std::span<double>(table.data() + c * (deg + 1), deg + 1));
    }
    const double rw = residuals[i] * samples[i].w;
    for (std::size_t m = 0; m < out.size(); ++m) {
      double v = rw;
      const auto& k = margin.candidates[m];
      for (std::size_t c = 0; c < x.size(); ++c) v *= table[c * (deg + 1) + k[c]];
      sums[m] += v;
    }
  }
  for (std::size_t m = 0; m < out.size(); ++m) {
    const double s = sums[m] / n;
    out[m] = s * s;
  }
  return out;
}

std::vector<MultiIndex> bulk_chase(const std::vector<MultiIndex>& candidates,
                                   std::span<const double> indicators, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ArgumentError("theta must lie in (0, 1]");
  if (candidates.size() != indicators.size()) throw ArgumentError("one indicator per candidate required");
  if (candidates.empty()) return {};
  if (theta == 1.0) {
    auto all = candidates;
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (indicators[a] != indicators[b]) return indicators[a] > indicators[b];
      return candidates[a] < candidates[b];
    });
    for (std::size_t i = 0; i < order.size(); ++i) all[i] = candidates[order[i]];
    return all;
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (indicators[a] != indicators[b]) return indicators[a] > indicators[b];
    return candidates[a] < candidates[b];
  });
  double total = 0.0;
  for (double v : indicators) {
    if (v < 0.0 || std::isnan(v)) throw ArgumentError("indicators must be nonnegative");
    total += v;
  }
  std::vector<MultiIndex> out;
  if (!(total > 0.0)) return out;
  double acc = 0.0;
  for (auto i : order) {
    out.push_back(candidates[i]);
    acc += indicators[i];
    if (acc >= theta * total) break;
  }
  return out;
}

ConstructionResult construct_kr(const Potential& potential, BasisFamily family, std::vector<DomainMap> maps,
                                const LsConfig& cfg, std::uint64_t seed, std::span<const SeedSample> seeds) {
  cfg.validate();
  check_maps(family, maps);
  const int d = static_cast<int>(maps.size());
  Fitter fitter(potential, family, maps, cfg, seed, cfg.max_degree);
  fitter.add_seeds(seeds);

  auto initial = total_degree_set(d, cfg.initial_degree);
  if (initial.max_degree() > cfg.max_degree) initial = total_degree_set(d, 0);
  MultiIndexSet set = initial;

  ConstructionResult result;
  double best_error = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    if (cfg.max_evaluations > 0 && iter > 1 &&
        fitter.evals() + fitter.pending_draws(set) > cfg.max_evaluations) {
      break;
    }
    fitter.top_up(set);
    FitOutcome fit;
    for (int attempt = 0;; ++attempt) {
      try {
        fit = fitter.fit(set);
        break;
      } catch (const IllConditionedError&) {
        if (attempt >= 3) throw;
        fitter.top_up(set, std::pow(2.0, attempt + 1));
      }
    }
    const auto margin = reduced_margin(set, cfg.max_degree);
    ProgressRecord rec{iter, set.size(), margin.candidates.size(), fit.rel_error, fitter.evals()};
    result.history.push_back(rec);
    if (cfg.progress) cfg.progress(rec);
    result.iterations = iter;
    if (fit.rel_error < best_error || !result.density) {
      best_error = fit.rel_error;
      result.density = make_density(family, maps, set, fit);
      result.achieved_error = fit.rel_error;
    }
    if (fit.rel_error <= cfg.tau) {
      result.converged = true;
      result.density = make_density(family, maps, set, fit);
      result.achieved_error = fit.rel_error;
      break;
    }
    if (margin.candidates.empty() || set.size() >= cfg.max_cardinality) break;
    const auto ind = fitter.indicators(set, margin, fit.solution.residuals);
    auto chosen = bulk_chase(margin.candidates, ind, cfg.theta);
    if (chosen.empty()) break;
    const std::size_t room = cfg.max_cardinality - set.size();
    if (chosen.size() > room) chosen.resize(room);
    set = set.enriched(std::move(chosen));
  }
  result.n_evals = fitter.evals();
  return result;
}

ConstructionResult construct_on_set(const Potential& potential, BasisFamily family, std::vector<DomainMap> maps,
                                    const MultiIndexSet& set, const LsConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  check_maps(family, maps);
  if (static_cast<int>(maps.size()) != set.dim()) throw ArgumentError("one map per coordinate required");
  Fitter fitter(potential, family, maps, cfg, seed, set.max_degree());
  fitter.top_up(set);
  const auto fit = fitter.fit(set);
  ConstructionResult result;
  result.density = make_density(family, maps, set, fit);
  result.achieved_error = fit.rel_error;
  result.converged = fit.rel_error <= cfg.tau;
  result.n_evals = fitter.evals();
  result.iterations = 1;
  result.history.push_back({1, set.size(), 0, fit.rel_error, fitter.evals()});
  if (cfg.progress) cfg.progress(result.history.back());
  return result;
}

}  // namespace krmap
