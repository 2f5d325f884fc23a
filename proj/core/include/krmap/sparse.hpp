#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace krmap {

using MultiIndex = std::vector<int>;

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& k) const noexcept;
};

// Ordered set of d-dimensional multi-indices. Position i is σ⁻¹(i); positions
// are stable under enrichment, which appends.
class MultiIndexSet {
 public:
  explicit MultiIndexSet(int dim);
  MultiIndexSet(int dim, const std::vector<MultiIndex>& indices);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  std::span<const int> operator[](std::size_t pos) const {
    return {flat_.data() + pos * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  int component(std::size_t pos, int coord) const {
    return flat_[pos * static_cast<std::size_t>(dim_) + coord];
  }
  MultiIndex index(std::size_t pos) const;
  std::vector<MultiIndex> indices() const;

  // σ(k), or nullopt when k is not in the set.
  std::optional<std::size_t> position(std::span<const int> k) const;
  bool contains(std::span<const int> k) const { return position(k).has_value(); }

  int max_degree(int coord) const;
  int max_degree() const;

  // Appends additions sorted lexicographically; duplicates of existing members are errors.
  MultiIndexSet enriched(std::vector<MultiIndex> additions) const;

  bool operator==(const MultiIndexSet& other) const {
    return dim_ == other.dim_ && flat_ == other.flat_;
  }

 private:
  void append(const MultiIndex& k);
  int dim_;
  std::size_t count_ = 0;
  std::vector<int> flat_;
  std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> lookup_;
};

bool is_downward_closed(const MultiIndexSet& set);

// {k ∉ K : k - e_i ∈ K for every i with k_i > 0}, in lexicographic order,
// excluding candidates with a component above max_degree.
struct ReducedMargin {
  std::vector<MultiIndex> candidates;
};
ReducedMargin reduced_margin(const MultiIndexSet& set, int max_degree = -1);

MultiIndexSet total_degree_set(int dim, int degree);
MultiIndexSet full_tensor_set(int dim, int degree);

// Grouping of rows of K by their restriction to the coordinates q.
struct RowProjection {
  std::vector<std::size_t> representatives;  // u(q): first row of each group
  std::vector<std::size_t> column_of_row;    // column of P holding the single 1 of each row

  std::size_t columns() const noexcept { return representatives.size(); }
  Eigen::MatrixXd dense() const;  // P^(q), |K| × |u(q)|
};
RowProjection unique_row_projection(const MultiIndexSet& set, std::span<const int> q);

}  // namespace krmap
