#include "ambigseq/pieces.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "ambigseq/errors.hpp"

namespace ambigseq {

bool Piece::has_candidate(const LabelTuple& tuple) const {
  return std::find(candidates.begin(), candidates.end(), tuple) !=
         candidates.end();
}

std::vector<Piece> decompose(const Sequence& sequence, std::size_t seq_id,
                             std::size_t width, std::size_t* skipped) {
  if (width < 1) throw ConfigError("piece width must be >= 1");
  std::vector<Piece> pieces;
  const std::size_t length = sequence.length();
  if (length < width + 1) {
    if (skipped) ++*skipped;
    return pieces;
  }
  pieces.reserve(length - width);
  for (std::size_t t = 0; t + width < length; ++t) {
    Piece piece;
    piece.seq_id = seq_id;
    piece.start = t;
    piece.width = width;
    if (sequence.has_gold()) {
      piece.gold.assign(sequence.gold.begin() + t,
                        sequence.gold.begin() + t + width + 1);
    }
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

TupleSpace::TupleSpace(std::size_t num_labels, std::size_t width,
                       std::uint64_t cap)
    : num_labels_(num_labels), width_(width), size_(1) {
  if (num_labels < 1) throw ConfigError("tuple space needs at least one label");
  for (std::size_t k = 0; k <= width; ++k) {
    if (size_ > cap / num_labels) {
      throw ConfigError("tuple space " + std::to_string(num_labels) + "^" +
                        std::to_string(width + 1) +
                        " exceeds the enumeration cap " + std::to_string(cap) +
                        "; reduce the piece width");
    }
    size_ *= num_labels;
  }
}

std::uint64_t TupleSpace::encode(const LabelTuple& tuple) const {
  std::uint64_t code = 0;
  for (LabelId label : tuple) code = code * num_labels_ + label;
  return code;
}

LabelTuple TupleSpace::decode(std::uint64_t code) const {
  LabelTuple tuple;
  decode_into(code, tuple);
  return tuple;
}

void TupleSpace::decode_into(std::uint64_t code, LabelTuple& out) const {
  out.resize(width_ + 1);
  for (std::size_t k = width_ + 1; k-- > 0;) {
    out[k] = static_cast<LabelId>(code % num_labels_);
    code /= num_labels_;
  }
}

TupleRange::iterator::iterator(std::size_t num_labels, std::size_t length,
                               bool end)
    : num_labels_(num_labels), current_(length, 0), done_(end) {}

TupleRange::iterator& TupleRange::iterator::operator++() {
  for (std::size_t k = current_.size(); k-- > 0;) {
    if (++current_[k] < num_labels_) return *this;
    current_[k] = 0;
  }
  done_ = true;
  return *this;
}

TupleRange enumerate_tuples(std::size_t num_labels, std::size_t width,
                            std::uint64_t cap) {
  return TupleRange(TupleSpace(num_labels, width, cap));
}

}  // namespace ambigseq
