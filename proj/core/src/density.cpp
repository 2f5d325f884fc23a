#include "krmap/density.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "krmap/errors.hpp"
#include "krmap/quadrature.hpp"

namespace krmap {
namespace {

// ψ_j(z_i) for every coordinate, row i with stride n_max + 1.
struct BasisTable {
  int stride;
  std::vector<double> values;
  double operator()(int coord, int j) const { return values[static_cast<std::size_t>(coord) * stride + j]; }
};

BasisTable basis_table(BasisFamily family, std::span<const int> coords, std::span<const double> z,
                       int n_max) {
  BasisTable t{n_max + 1, std::vector<double>(coords.size() * static_cast<std::size_t>(n_max + 1))};
  for (std::size_t i = 0; i < coords.size(); ++i) {
    eval_basis(family, n_max, z[i],
               std::span<double>(t.values.data() + i * static_cast<std::size_t>(t.stride), t.stride));
  }
  return t;
}

std::vector<int> complement(int dim, std::span<const int> q) {
  std::vector<bool> in_q(dim, false);
  for (int c : q) {
    if (c < 0 || c >= dim) throw ArgumentError("marginalized coordinate out of range");
    if (in_q[c]) throw ArgumentError("duplicate marginalized coordinate");
    in_q[c] = true;
  }
  std::vector<int> rest;
  for (int c = 0; c < dim; ++c) {
    if (!in_q[c]) rest.push_back(c);
  }
  return rest;
}

double log_sum_squares(double gamma, double p) { return std::log(gamma + p); }

}  // namespace

// -------------------------------------------------------- SquaredPolyDensity

SquaredPolyDensity::SquaredPolyDensity(BasisFamily family, std::vector<DomainMap> maps,
                                       MultiIndexSet set, std::vector<double> coeffs, double gamma)
    : family_(family),
      maps_(std::move(maps)),
      set_(std::move(set)),
      coeffs_(std::move(coeffs)),
      gamma_(gamma) {
  if (static_cast<int>(maps_.size()) != set_.dim()) {
    throw ArgumentError("expected one domain map per coordinate");
  }
  for (const auto& m : maps_) {
    if (!m.compatible_with(family_)) {
      throw ArgumentError(std::string(to_string(m.kind())) + " map requires a basis on (-1, 1)");
    }
  }
  if (coeffs_.size() != set_.size()) throw ArgumentError("coefficient count must equal |K|");
  if (!(gamma_ >= 0.0) || !std::isfinite(gamma_)) throw ArgumentError("γ must be finite and nonnegative");
  double s = gamma_;
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw ArgumentError("coefficients must be finite");
    s += c * c;
  }
  if (!(s > 0.0)) throw InvalidDensityError("normalizer γ + Σc² must be positive");
  normalizer_ = s;
}

std::vector<double> SquaredPolyDensity::to_reference(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) throw ArgumentError("point dimension mismatch");
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[i] = maps_[i].to_reference(x[i]);
    if (!in_support(family_, z[i])) {
      throw DomainError("coordinate " + std::to_string(i) + " outside the support");
    }
  }
  return z;
}

std::vector<double> SquaredPolyDensity::from_reference(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim()) throw ArgumentError("point dimension mismatch");
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = maps_[i].from_reference(z[i]);
  return x;
}

double SquaredPolyDensity::log_map_jacobian(std::span<const double> z) const {
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += maps_[i].log_to_reference_derivative_at(z[i]);
  return s;
}

double SquaredPolyDensity::g_reference(std::span<const double> z) const {
  const int d = dim();
  std::vector<int> coords(d);
  std::iota(coords.begin(), coords.end(), 0);
  const auto table = basis_table(family_, coords, z, set_.max_degree());
  double g = 0.0;
  for (std::size_t k = 0; k < set_.size(); ++k) {
    double prod = coeffs_[k];
    for (int i = 0; i < d; ++i) prod *= table(i, set_.component(k, i));
    g += prod;
  }
  return g;
}

double SquaredPolyDensity::log_density_reference(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim()) throw ArgumentError("point dimension mismatch");
  double lw = 0.0;
  for (double zi : z) lw += log_weight_density(family_, zi);
  const double g = g_reference(z);
  return log_sum_squares(gamma_, g * g) + lw - std::log(normalizer_);
}

DensityValue SquaredPolyDensity::evaluate(std::span<const double> x) const {
  const auto z = to_reference(x);
  const double lv = log_density_reference(z) + log_map_jacobian(z);
  return {std::exp(lv), lv};
}

double SquaredPolyDensity::log_base_weight(std::span<const double> x) const {
  const auto z = to_reference(x);
  double s = log_map_jacobian(z);
  for (double zi : z) s += log_weight_density(family_, zi);
  return s;
}

DensityValue eval_density(const SquaredPolyDensity& rho, std::span<const double> x) {
  return rho.evaluate(x);
}

// ---------------------------------------------------------------- marginals

double marginal_orth(const SquaredPolyDensity& rho, std::span<const int> q,
                     std::span<const double> x_rest) {
  const auto rest = complement(rho.dim(), q);
  if (x_rest.size() != rest.size()) throw ArgumentError("expected one value per retained coordinate");
  const auto& set = rho.set();
  std::vector<double> z(rest.size());
  double log_w = 0.0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const auto& m = rho.maps()[rest[i]];
    z[i] = m.to_reference(x_rest[i]);
    if (!in_support(rho.family(), z[i])) throw DomainError("marginal point outside the support");
    log_w += log_weight_density(rho.family(), z[i]) + m.log_to_reference_derivative_at(z[i]);
  }
  const auto table = basis_table(rho.family(), rest, z, set.max_degree());
  const auto proj = unique_row_projection(set, q);
  std::vector<double> sums(proj.columns(), 0.0);
  for (std::size_t k = 0; k < set.size(); ++k) {
    double v = rho.coefficients()[k];
    for (std::size_t i = 0; i < rest.size(); ++i) v *= table(static_cast<int>(i), set.component(k, rest[i]));
    sums[proj.column_of_row[k]] += v;
  }
  double p = 0.0;
  for (double s : sums) p += s * s;
  return (rho.gamma() + p) * std::exp(log_w) / rho.normalizer();
}

double marginal_general(const SquaredPolyDensity& rho, std::span<const int> q,
                        std::span<const double> x_rest) {
  const auto rest = complement(rho.dim(), q);
  if (x_rest.size() != rest.size()) throw ArgumentError("expected one value per retained coordinate");
  const auto& set = rho.set();
  const auto n = static_cast<Eigen::Index>(set.size());

  // Per-coordinate mass matrices M^(i)_{jk} = ⟨ψ_{K_j,i}, ψ_{K_k,i}⟩_λ by quadrature.
  auto mass_product = [&](std::span<const int> coords) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(n, n);
    for (int c : coords) {
      const int deg = set.max_degree(c);
      const auto rule = gauss_rule(rho.family(), deg + 1);
      Eigen::MatrixXd vals(deg + 1, static_cast<Eigen::Index>(rule.nodes.size()));
      std::vector<double> psi(deg + 1);
      for (std::size_t r = 0; r < rule.nodes.size(); ++r) {
        eval_basis(rho.family(), deg, rule.nodes[r], psi);
        for (int j = 0; j <= deg; ++j) vals(j, static_cast<Eigen::Index>(r)) = psi[j] * std::sqrt(rule.weights[r]);
      }
      const Eigen::MatrixXd gram = vals * vals.transpose();
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
          m(a, b) *= gram(set.component(a, c), set.component(b, c));
        }
      }
    }
    return m;
  };

  auto factor = [&](const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw NumericalError("mass-matrix eigendecomposition failed");
    const double trace = std::max(m.trace(), std::numeric_limits<double>::min());
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-10 * trace) {
      throw NumericalError("accumulated mass matrix is indefinite (eigenvalue " +
                           std::to_string(ev.minCoeff()) + ")");
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev(i) > 1e-12 * trace) keep.push_back(i);
    }
    Eigen::MatrixXd l(m.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
      l.col(static_cast<Eigen::Index>(r)) = es.eigenvectors().col(keep[r]) * std::sqrt(ev(keep[r]));
    }
    return l;
  };

  std::vector<int> all(rho.dim());
  std::iota(all.begin(), all.end(), 0);
  Eigen::Map<const Eigen::VectorXd> c(rho.coefficients().data(), n);
  const Eigen::MatrixXd l_all = factor(mass_product(all));
  const double zhat = rho.gamma() + (l_all.transpose() * c).squaredNorm();

  std::vector<double> z(rest.size());
  double log_w = 0.0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const auto& m = rho.maps()[rest[i]];
    z[i] = m.to_reference(x_rest[i]);
    if (!in_support(rho.family(), z[i])) throw DomainError("marginal point outside the support");
    log_w += log_weight_density(rho.family(), z[i]) + m.log_to_reference_derivative_at(z[i]);
  }
  const auto table = basis_table(rho.family(), rest, z, set.max_degree());
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double val = c(k);
    for (std::size_t i = 0; i < rest.size(); ++i) val *= table(static_cast<int>(i), set.component(k, rest[i]));
    v(k) = val;
  }
  const Eigen::MatrixXd l = factor(mass_product(q));
  const double p = (l.transpose() * v).squaredNorm();
  return (rho.gamma() + p) * std::exp(log_w) / zhat;
}

// -------------------------------------------------------------------- KrMap

struct KrMap::Workspace {
  std::vector<double> prefix;  // Π over processed coordinates of ψ_{k_i}(z_i)
  std::vector<double> b;       // per-group coefficients in the current coordinate
  std::vector<double> h;       // group polynomial at nodes
  std::vector<double> q;       // q at nodes
  std::vector<double> psi;
  double zeta = 0.0;
};

std::vector<int> identity_ordering(int dim) {
  std::vector<int> p(dim);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

KrMap::KrMap(std::shared_ptr<const SquaredPolyDensity> density, std::vector<int> ordering)
    : density_(std::move(density)), ordering_(std::move(ordering)) {
  if (!density_) throw ArgumentError("KrMap needs a density");
  const int d = density_->dim();
  if (static_cast<int>(ordering_.size()) != d) throw ArgumentError("ordering must be a permutation of [d]");
  {
    auto sorted = ordering_;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < d; ++i) {
      if (sorted[i] != i) throw ArgumentError("ordering must be a permutation of [d]");
    }
  }
  const auto& set = density_->set();
  steps_.reserve(d);
  for (int t = 0; t < d; ++t) {
    const int coord = ordering_[t];
    std::vector<int> q(ordering_.begin() + t + 1, ordering_.end());
    auto proj = unique_row_projection(set, q);
    std::vector<std::size_t> counts(proj.columns() + 1, 0);
    for (auto col : proj.column_of_row) ++counts[col + 1];
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    std::vector<std::size_t> members(set.size());
    std::vector<int> degree(set.size());
    auto fill = counts;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const auto slot = fill[proj.column_of_row[k]]++;
      members[slot] = k;
      degree[slot] = set.component(k, coord);
    }
    steps_.push_back(Step{coord, std::move(proj), std::move(counts), std::move(members),
                          std::move(degree), SquaredCollocation(density_->family(), set.max_degree(coord))});
  }
}

std::vector<int> KrMap::marginalized(int t) const {
  if (t < 0 || t >= dim()) throw ArgumentError("step index out of range");
  return std::vector<int>(ordering_.begin() + t + 1, ordering_.end());
}

const RowProjection& KrMap::projection(int t) const {
  if (t < 0 || t >= dim()) throw ArgumentError("step index out of range");
  return steps_[t].projection;
}

UnivariatePdf KrMap::step_pdf(const Step& step, Workspace& ws) const {
  const auto& coeffs = density_->coefficients();
  const int n = step.collocation.degree();
  const auto m = step.collocation.nodes().size();
  const auto& nb = step.collocation.node_basis();
  ws.b.assign(n + 1, 0.0);
  ws.h.assign(m, 0.0);
  ws.q.assign(m, density_->gamma());
  double zeta = density_->gamma();
  for (std::size_t g = 0; g + 1 < step.group_offsets.size(); ++g) {
    std::fill(ws.b.begin(), ws.b.end(), 0.0);
    for (auto s = step.group_offsets[g]; s < step.group_offsets[g + 1]; ++s) {
      const auto k = step.members[s];
      ws.b[step.member_degree[s]] += coeffs[k] * ws.prefix[k];
    }
    double bn = 0.0;
    for (double v : ws.b) bn += v * v;
    if (bn == 0.0) continue;
    zeta += bn;
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = nb.data() + i * static_cast<std::size_t>(n + 1);
      double h = 0.0;
      for (int j = 0; j <= n; ++j) h += ws.b[j] * row[j];
      ws.q[i] += h * h;
    }
  }
  ws.zeta = zeta;
  if (!(zeta > 0.0)) throw InvalidDensityError("degenerate conditional: zero marginal mass");
  return step.collocation.make_pdf(ws.q, zeta);
}

double KrMap::step_q(const Step& step, Workspace& ws, double z) const {
  const auto& coeffs = density_->coefficients();
  const int n = step.collocation.degree();
  ws.psi.resize(n + 1);
  eval_basis(density_->family(), n, z, ws.psi);
  double q = density_->gamma();
  for (std::size_t g = 0; g + 1 < step.group_offsets.size(); ++g) {
    double h = 0.0;
    for (auto s = step.group_offsets[g]; s < step.group_offsets[g + 1]; ++s) {
      const auto k = step.members[s];
      h += coeffs[k] * ws.prefix[k] * ws.psi[step.member_degree[s]];
    }
    q += h * h;
  }
  return q;
}

void KrMap::advance(const Step& step, Workspace& ws, double z) const {
  const auto& set = density_->set();
  const int n = step.collocation.degree();
  ws.psi.resize(n + 1);
  eval_basis(density_->family(), n, z, ws.psi);
  for (std::size_t k = 0; k < set.size(); ++k) ws.prefix[k] *= ws.psi[set.component(k, step.coord)];
}

PushforwardResult KrMap::pushforward(std::span<const double> u) const {
  const int d = dim();
  if (static_cast<int>(u.size()) != d) throw ArgumentError("reference point dimension mismatch");
  const auto family = density_->family();
  Workspace ws;
  ws.prefix.assign(density_->set().size(), 1.0);
  std::vector<double> z(d);
  double log_cond = 0.0;
  double log_ref = 0.0;
  for (int t = 0; t < d; ++t) {
    const auto& step = steps_[t];
    const double uc = u[step.coord];
    if (!in_support(family, uc)) throw DomainError("reference coordinate outside the support");
    const auto pdf = step_pdf(step, ws);
    double zc;
    try {
      zc = pdf.quantile(reference_cdf(family, uc));
    } catch (const RootFindingError& e) {
      throw RootFindingError("KR inversion failed at coordinate " + std::to_string(step.coord) + ": " +
                                 e.what(),
                             e.lower(), e.upper());
    }
    z[step.coord] = zc;
    const double q = step_q(step, ws, zc);
    log_cond += std::log(q) + log_weight_density(family, zc) - std::log(ws.zeta);
    log_ref += log_weight_density(family, uc);
    advance(step, ws, zc);
  }
  PushforwardResult out;
  out.x = density_->from_reference(z);
  const double log_map = density_->log_map_jacobian(z);
  out.log_density = log_cond + log_map;
  out.log_jacobian = log_ref - out.log_density;
  return out;
}

std::vector<double> KrMap::forward(std::span<const double> u) const { return pushforward(u).x; }

PullbackResult KrMap::pullback(std::span<const double> x) const {
  const int d = dim();
  if (static_cast<int>(x.size()) != d) throw ArgumentError("point dimension mismatch");
  const auto family = density_->family();
  const auto z = density_->to_reference(x);
  Workspace ws;
  ws.prefix.assign(density_->set().size(), 1.0);
  PullbackResult out;
  out.u.resize(d);
  double log_cond = 0.0;
  for (int t = 0; t < d; ++t) {
    const auto& step = steps_[t];
    const double zc = z[step.coord];
    const auto pdf = step_pdf(step, ws);
    out.u[step.coord] = sample_reference(family, pdf.cdf(zc));
    const double q = step_q(step, ws, zc);
    log_cond += std::log(q) + log_weight_density(family, zc) - std::log(ws.zeta);
    advance(step, ws, zc);
  }
  out.log_density = log_cond + density_->log_map_jacobian(z);
  return out;
}

std::vector<double> KrMap::inverse(std::span<const double> x) const { return pullback(x).u; }

UnivariatePdf KrMap::conditional(int t, std::span<const double> prefix) const {
  if (t < 0 || t >= dim()) throw ArgumentError("step index out of range");
  if (static_cast<int>(prefix.size()) != t) throw ArgumentError("prefix must hold t values");
  Workspace ws;
  ws.prefix.assign(density_->set().size(), 1.0);
  for (int s = 0; s < t; ++s) {
    const auto& step = steps_[s];
    const double zc = density_->maps()[step.coord].to_reference(prefix[s]);
    if (!in_support(density_->family(), zc)) throw DomainError("prefix value outside the support");
    advance(step, ws, zc);
  }
  return step_pdf(steps_[t], ws);
}

double KrMap::log_reference_density(std::span<const double> u) const {
  double s = 0.0;
  for (double v : u) s += log_weight_density(density_->family(), v);
  return s;
}

namespace {
std::shared_ptr<const SquaredPolyDensity> share(const SquaredPolyDensity& rho) {
  return std::make_shared<const SquaredPolyDensity>(rho);
}
}  // namespace

std::vector<double> evaluate_kr(const SquaredPolyDensity& rho, std::span<const int> ordering,
                                std::span<const double> u) {
  return KrMap(share(rho), std::vector<int>(ordering.begin(), ordering.end())).forward(u);
}

std::vector<double> evaluate_kr_inverse(const SquaredPolyDensity& rho, std::span<const int> ordering,
                                        std::span<const double> x) {
  return KrMap(share(rho), std::vector<int>(ordering.begin(), ordering.end())).inverse(x);
}

PushforwardResult log_pushforward_density(const SquaredPolyDensity& rho, std::span<const int> ordering,
                                          std::span<const double> u) {
  return KrMap(share(rho), std::vector<int>(ordering.begin(), ordering.end())).pushforward(u);
}

UnivariatePdf conditional_pdf(const SquaredPolyDensity& rho, std::span<const int> ordering, int t,
                              std::span<const double> prefix) {
  return KrMap(share(rho), std::vector<int>(ordering.begin(), ordering.end())).conditional(t, prefix);
}

}  // namespace krmap
