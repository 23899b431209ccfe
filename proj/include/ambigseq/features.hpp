#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ambigseq/corpus.hpp"
#include "ambigseq/sparse.hpp"

namespace ambigseq {

using PatternId = std::uint32_t;

struct FeatureTemplate {
  bool word = true;
  bool lower = true;
  std::size_t prefix = 3;  // prefixes of length 1..prefix
  std::size_t suffix = 3;
  bool shape = true;
  bool context = true;     // previous and next word identity
  bool transition = true;
  bool bias = true;

  static FeatureTemplate transition_only();
  std::size_t num_state_templates() const;

  // Comma-separated names, e.g. "word,lower,prefix3,suffix3,shape,context,transition,bias".
  std::string to_string() const;
  static FeatureTemplate parse(std::string_view text_form);

  friend bool operator==(const FeatureTemplate&, const FeatureTemplate&) = default;
};

// State patterns ("w=He", "sh=Xx", ...) for one position of a sequence.
std::vector<std::string> extract_patterns(const Sequence& sequence, std::size_t position,
                                          const FeatureTemplate& templates);

// Word shape: upper -> X, lower -> x, digit -> d, anything else -> '.', with
// runs collapsed ("McDonald's" -> "XxXx.x").
std::string word_shape(std::string_view word);

// Known pattern ids per node, in position order.
struct Observation {
  std::vector<std::vector<PatternId>> nodes;
};

// Dictionary from (pattern, label), label pairs and labels to dense feature
// indices. Layout: state block [0, P*q), transition block [P*q, P*q + q^2)
// and bias block of q entries, each present only when its template is on.
class FeatureIndex {
 public:
  FeatureIndex() = default;

  // hash_buckets = 0 builds an exact dictionary; otherwise patterns are
  // hashed into that many buckets.
  static FeatureIndex build(const std::vector<Sequence>& sequences,
                            const LabelAlphabet& alphabet,
                            const FeatureTemplate& templates,
                            std::size_t hash_buckets = 0);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t num_labels() const noexcept { return alphabet_.size(); }
  std::size_t num_patterns() const noexcept { return num_patterns_; }
  const LabelAlphabet& alphabet() const noexcept { return alphabet_; }
  const FeatureTemplate& templates() const noexcept { return templates_; }
  std::size_t hash_buckets() const noexcept { return hash_buckets_; }

  std::size_t transition_offset() const noexcept { return transition_offset_; }
  std::size_t bias_offset() const noexcept { return bias_offset_; }
  std::size_t transition_block_size() const;
  std::size_t bias_block_size() const;

  FeatureId state_index(PatternId pattern, LabelId label) const;
  FeatureId transition_index(LabelId from, LabelId to) const;
  FeatureId bias_index(LabelId label) const;

  std::optional<PatternId> find_pattern(std::string_view pattern) const;
  const std::string& pattern_name(PatternId id) const;

  std::vector<PatternId> node_patterns(const Sequence& sequence, std::size_t position) const;
  Observation observe(const Sequence& sequence) const;
  // Window of width+1 nodes starting at piece.start.
  Observation observe(const Sequence& sequence, const Piece& piece) const;

  // One `index\tdescription` line per feature, after a `#` header.
  void write(std::ostream& out) const;
  static FeatureIndex read(std::string_view text);

 private:
  void finalize_layout();

  LabelAlphabet alphabet_;
  FeatureTemplate templates_;
  std::size_t hash_buckets_ = 0;
  std::vector<std::string> patterns_;
  std::unordered_map<std::string, PatternId> pattern_ids_;
  std::size_t num_patterns_ = 0;
  std::size_t transition_offset_ = 0;
  std::size_t bias_offset_ = 0;
  std::size_t dimension_ = 0;
};

FeatureIndex index_features(const AmbiguousCorpus& corpus, const FeatureTemplate& templates,
                            std::size_t hash_buckets = 0);

// f(x, y) for a piece: state and bias indicators per node plus transition
// indicators per edge, all with value 1 accumulated additively.
SparseVector joint_features(const FeatureIndex& index, const Observation& piece,
                            const LabelTuple& tuple);

// Label-free representation of a piece for neighbour search: one indicator
// per (node offset, pattern).
SparseVector input_features(const FeatureIndex& index, const Observation& piece);

}  // namespace ambigseq
