#include "ambigseq/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace ambigseq {

SparseVector SparseVector::from_entries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  SparseVector out;
  out.entries_.reserve(entries.size());
  for (const auto& e : entries) {
    if (!out.entries_.empty() && out.entries_.back().first == e.first) {
      out.entries_.back().second += e.second;
    } else {
      out.entries_.push_back(e);
    }
  }
  std::erase_if(out.entries_, [](const Entry& e) { return e.second == 0.0; });
  return out;
}

double SparseVector::get(FeatureId index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const Entry& e, FeatureId i) { return e.first < i; });
  return (it != entries_.end() && it->first == index) ? it->second : 0.0;
}

double SparseVector::dot(std::span<const double> dense) const {
  double sum = 0.0;
  for (const auto& [i, v] : entries_) sum += v * dense[i];
  return sum;
}

double SparseVector::dot(const SparseVector& other) const {
  double sum = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      sum += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return sum;
}

double SparseVector::squared_norm() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.second * e.second;
  return sum;
}

void SparseVector::add_to(std::span<double> dense, double scale) const {
  for (const auto& [i, v] : entries_) dense[i] += scale * v;
}

SparseVector SparseVector::combine(double a, const SparseVector& x, double b,
                                   const SparseVector& y) {
  SparseVector out;
  out.entries_.reserve(x.nnz() + y.nnz());
  auto p = x.entries_.begin();
  auto q = y.entries_.begin();
  auto push = [&](FeatureId i, double v) {
    if (v != 0.0) out.entries_.emplace_back(i, v);
  };
  while (p != x.entries_.end() || q != y.entries_.end()) {
    if (q == y.entries_.end() || (p != x.entries_.end() && p->first < q->first)) {
      push(p->first, a * p->second);
      ++p;
    } else if (p == x.entries_.end() || q->first < p->first) {
      push(q->first, b * q->second);
      ++q;
    } else {
      push(p->first, a * p->second + b * q->second);
      ++p;
      ++q;
    }
  }
  return out;
}

SparseVector SparseVector::scaled(double factor) const {
  SparseVector out;
  if (factor == 0.0) return out;
  out.entries_ = entries_;
  for (auto& e : out.entries_) e.second *= factor;
  return out;
}

bool SparseVector::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const Entry& e) { return std::isfinite(e.second); });
}

double cosine_similarity(const SparseVector& a, const SparseVector& b) {
  const double na = a.squared_norm();
  const double nb = b.squared_norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / std::sqrt(na * nb);
}

}  // namespace ambigseq
