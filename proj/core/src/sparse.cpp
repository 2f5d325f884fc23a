#include "krmap/sparse.hpp"

#include <algorithm>
#include <functional>
#include <string>

#include "krmap/errors.hpp"

namespace krmap {

std::size_t MultiIndexHash::operator()(const MultiIndex& k) const noexcept {
  std::size_t h = 0xcbf29ce484222325ull;
  for (int v : k) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

MultiIndexSet::MultiIndexSet(int dim) : dim_(dim) {
  if (dim < 1) throw ArgumentError("multi-index dimension must be positive");
}

MultiIndexSet::MultiIndexSet(int dim, const std::vector<MultiIndex>& indices) : MultiIndexSet(dim) {
  flat_.reserve(indices.size() * static_cast<std::size_t>(dim));
  for (const auto& k : indices) append(k);
}

void MultiIndexSet::append(const MultiIndex& k) {
  if (static_cast<int>(k.size()) != dim_) {
    throw ArgumentError("multi-index has dimension " + std::to_string(k.size()) + ", expected " +
                        std::to_string(dim_));
  }
  for (int v : k) {
    if (v < 0) throw ArgumentError("multi-index components must be nonnegative");
  }
  if (!lookup_.emplace(k, count_).second) throw ArgumentError("duplicate multi-index");
  flat_.insert(flat_.end(), k.begin(), k.end());
  ++count_;
}

MultiIndex MultiIndexSet::index(std::size_t pos) const {
  auto s = (*this)[pos];
  return MultiIndex(s.begin(), s.end());
}

std::vector<MultiIndex> MultiIndexSet::indices() const {
  std::vector<MultiIndex> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i) out.push_back(index(i));
  return out;
}

std::optional<std::size_t> MultiIndexSet::position(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != dim_) return std::nullopt;
  auto it = lookup_.find(MultiIndex(k.begin(), k.end()));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

int MultiIndexSet::max_degree(int coord) const {
  if (coord < 0 || coord >= dim_) throw ArgumentError("coordinate out of range");
  int m = 0;
  for (std::size_t i = 0; i < count_; ++i) m = std::max(m, component(i, coord));
  return m;
}

int MultiIndexSet::max_degree() const {
  return count_ == 0 ? 0 : *std::max_element(flat_.begin(), flat_.end());
}

MultiIndexSet MultiIndexSet::enriched(std::vector<MultiIndex> additions) const {
  std::sort(additions.begin(), additions.end());
  MultiIndexSet out = *this;
  for (const auto& k : additions) out.append(k);
  return out;
}

bool is_downward_closed(const MultiIndexSet& set) {
  MultiIndex k(set.dim());
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto row = set[i];
    std::copy(row.begin(), row.end(), k.begin());
    for (int c = 0; c < set.dim(); ++c) {
      if (k[c] == 0) continue;
      --k[c];
      const bool present = set.contains(k);
      ++k[c];
      if (!present) return false;
    }
  }
  return true;
}

ReducedMargin reduced_margin(const MultiIndexSet& set, int max_degree) {
  if (!is_downward_closed(set)) throw ContractError("reduced_margin requires a downward-closed set");
  ReducedMargin margin;
  if (set.empty()) {
    margin.candidates.emplace_back(set.dim(), 0);
    return margin;
  }
  std::vector<MultiIndex> cands;
  MultiIndex k(set.dim());
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto row = set[i];
    for (int c = 0; c < set.dim(); ++c) {
      std::copy(row.begin(), row.end(), k.begin());
      ++k[c];
      if (max_degree >= 0 && k[c] > max_degree) continue;
      if (set.contains(k)) continue;
      bool ok = true;
      for (int e = 0; e < set.dim() && ok; ++e) {
        if (k[e] == 0) continue;
        --k[e];
        ok = set.contains(k);
        ++k[e];
      }
      if (ok) cands.push_back(k);
    }
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  margin.candidates = std::move(cands);
  return margin;
}

namespace {

void enumerate(int dim, int coord, int remaining, bool total, int degree, MultiIndex& cur,
               std::vector<MultiIndex>& out) {
  if (coord == dim) {
    out.push_back(cur);
    return;
  }
  const int hi = total ? remaining : degree;
  for (int v = 0; v <= hi; ++v) {
    cur[coord] = v;
    enumerate(dim, coord + 1, remaining - v, total, degree, cur, out);
  }
  cur[coord] = 0;
}

int l1(const MultiIndex& k) {
  int s = 0;
  for (int v : k) s += v;
  return s;
}

}  // namespace

MultiIndexSet total_degree_set(int dim, int degree) {
  if (dim < 1) throw ArgumentError("dimension must be positive");
  if (degree < 0) throw ArgumentError("degree must be nonnegative");
  std::vector<MultiIndex> all;
  MultiIndex cur(dim, 0);
  enumerate(dim, 0, degree, true, degree, cur, all);
  std::stable_sort(all.begin(), all.end(), [](const MultiIndex& a, const MultiIndex& b) {
    const int la = l1(a), lb = l1(b);
    if (la != lb) return la < lb;
    return a < b;
  });
  return MultiIndexSet(dim, all);
}

MultiIndexSet full_tensor_set(int dim, int degree) {
  if (dim < 1) throw ArgumentError("dimension must be positive");
  if (degree < 0) throw ArgumentError("degree must be nonnegative");
  std::vector<MultiIndex> all;
  MultiIndex cur(dim, 0);
  enumerate(dim, 0, 0, false, degree, cur, all);
  return MultiIndexSet(dim, all);
}

Eigen::MatrixXd RowProjection::dense() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(column_of_row.size()),
                                            static_cast<Eigen::Index>(columns()));
  for (std::size_t r = 0; r < column_of_row.size(); ++r) {
    p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(column_of_row[r])) = 1.0;
  }
  return p;
}

RowProjection unique_row_projection(const MultiIndexSet& set, std::span<const int> q) {
  std::vector<bool> seen(set.dim(), false);
  for (int c : q) {
    if (c < 0 || c >= set.dim()) throw ArgumentError("coordinate " + std::to_string(c) + " out of range");
    if (seen[c]) throw ArgumentError("duplicate coordinate in subset");
    seen[c] = true;
  }
  RowProjection proj;
  proj.column_of_row.resize(set.size());
  std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> groups;
  MultiIndex key(q.size());
  for (std::size_t r = 0; r < set.size(); ++r) {
    for (std::size_t j = 0; j < q.size(); ++j) key[j] = set.component(r, q[j]);
    auto [it, inserted] = groups.emplace(key, proj.representatives.size());
    if (inserted) proj.representatives.push_back(r);
    proj.column_of_row[r] = it->second;
  }
  return proj;
}

}  // namespace krmap
