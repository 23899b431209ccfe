#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ambigseq {

using FeatureId = std::uint32_t;

// Sorted (index, value) pairs with no stored zeros.
class SparseVector {
 public:
  using Entry = std::pair<FeatureId, double>;

  SparseVector() = default;

  // Sums duplicate indices, sorts, and drops zeros.
  static SparseVector from_entries(std::vector<Entry> entries);

  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const Entry> entries() const noexcept { return entries_; }
  double get(FeatureId index) const;

  double dot(std::span<const double> dense) const;
  double dot(const SparseVector& other) const;
  double squared_norm() const;
  // dense += scale * this
  void add_to(std::span<double> dense, double scale) const;

  // a*x + b*y
  static SparseVector combine(double a, const SparseVector& x, double b, const SparseVector& y);
  SparseVector scaled(double factor) const;

  bool all_finite() const;
  FeatureId max_index() const { return entries_.empty() ? 0 : entries_.back().first; }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<Entry> entries_;
};

double cosine_similarity(const SparseVector& a, const SparseVector& b);

}  // namespace ambigseq
