#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <vector>

#include "ambigseq/sequence.hpp"

namespace ambigseq {

using LabelTuple = std::vector<LabelId>;

// A window of width+1 consecutive positions (width transition factors)
// carrying its candidate label tuples.
struct Piece {
  std::size_t seq_id = 0;
  std::size_t start = 0;
  std::size_t width = 1;
  std::vector<LabelTuple> candidates;
  LabelTuple gold;  // hidden from trainers; used by corruption and evaluation

  std::size_t num_nodes() const noexcept { return width + 1; }
  bool is_exact() const noexcept { return candidates.size() == 1; }
  bool has_candidate(const LabelTuple& tuple) const;

  friend bool operator==(const Piece&, const Piece&) = default;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// Returns the L-w overlapping pieces of `sequence`. Sequences shorter than
// w+1 yield no pieces and increment `*skipped` when given.
std::vector<Piece> decompose(const Sequence& sequence, std::size_t seq_id,
                             std::size_t width, std::size_t* skipped = nullptr);

// The space alphabet^(width+1) with a lexicographic integer code per tuple.
class TupleSpace {
 public:
  TupleSpace(std::size_t num_labels, std::size_t width,
             std::uint64_t cap = kDefaultEnumerationCap);

  std::size_t num_labels() const noexcept { return num_labels_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t tuple_length() const noexcept { return width_ + 1; }
  std::uint64_t size() const noexcept { return size_; }

  std::uint64_t encode(const LabelTuple& tuple) const;
  LabelTuple decode(std::uint64_t code) const;
  void decode_into(std::uint64_t code, LabelTuple& out) const;

 private:
  std::size_t num_labels_;
  std::size_t width_;
  std::uint64_t size_;
};

// Forward range over every tuple of a TupleSpace in lexicographic order.
class TupleRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = LabelTuple;
    using difference_type = std::ptrdiff_t;
    using pointer = const LabelTuple*;
    using reference = const LabelTuple&;

    iterator() = default;
    iterator(std::size_t num_labels, std::size_t length, bool end);

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    iterator operator++(int) {
      iterator copy = *this;
      ++*this;
      return copy;
    }
    friend bool operator==(const iterator& a, const iterator& b) {
      return a.done_ == b.done_ && (a.done_ || a.current_ == b.current_);
    }

   private:
    std::size_t num_labels_ = 0;
    LabelTuple current_;
    bool done_ = true;
  };

  explicit TupleRange(const TupleSpace& space)
      : num_labels_(space.num_labels()), length_(space.tuple_length()) {}

  iterator begin() const { return iterator(num_labels_, length_, false); }
  iterator end() const { return iterator(num_labels_, length_, true); }

 private:
  std::size_t num_labels_;
  std::size_t length_;
};

// Throws ConfigError when q^(w+1) exceeds `cap`.
TupleRange enumerate_tuples(std::size_t num_labels, std::size_t width,
                            std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace ambigseq
