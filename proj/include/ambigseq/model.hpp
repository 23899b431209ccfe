#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ambigseq/corpus.hpp"
#include "ambigseq/features.hpp"
#include "ambigseq/pieces.hpp"

namespace ambigseq {

// How the candidate-set energy aggregates its members.
enum class SetEnergy { kSum, kMean };

// Pieces of a corpus with their observations cached against one feature index.
struct TrainingSet {
  std::shared_ptr<const FeatureIndex> index;
  std::vector<Piece> pieces;
  std::vector<Observation> observations;
  std::size_t width = 1;

  static TrainingSet build(const AmbiguousCorpus& corpus,
                           std::shared_ptr<const FeatureIndex> index);

  std::size_t size() const noexcept { return pieces.size(); }
  std::size_t num_labels() const { return index->num_labels(); }
  TupleSpace tuple_space() const { return TupleSpace(num_labels(), width); }
};

class WeightModel {
 public:
  WeightModel(std::shared_ptr<const FeatureIndex> index, std::size_t width);
  WeightModel(std::shared_ptr<const FeatureIndex> index, std::size_t width,
              std::vector<double> weights);

  const FeatureIndex& index() const noexcept { return *index_; }
  std::shared_ptr<const FeatureIndex> shared_index() const noexcept { return index_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t dimension() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  std::vector<double>& mutable_weights() noexcept { return weights_; }
  double squared_norm() const;

  // Header (d, q, w, templates, labels) then one `index value` line per
  // non-zero weight.
  void save(std::ostream& out) const;
  static WeightModel load(std::string_view text, std::shared_ptr<const FeatureIndex> index);

 private:
  std::shared_ptr<const FeatureIndex> index_;
  std::size_t width_;
  std::vector<double> weights_;
};

// w . f(piece, tuple)
double score(const WeightModel& model, const Observation& piece, const LabelTuple& tuple);

// Sum (or mean) of the candidate scores of `piece`.
double set_score(const WeightModel& model, const Observation& observation, const Piece& piece,
                 SetEnergy mode = SetEnergy::kSum);

// 0 when `tuple` is a candidate, otherwise the number of candidates.
double delta_loss(std::span<const LabelTuple> candidates, const LabelTuple& tuple);

// Exact max-sum decoding of a whole sequence; ties go to the lowest label id.
std::vector<LabelId> decode(const WeightModel& model, const Sequence& sequence);
std::vector<LabelId> decode(const WeightModel& model, const Observation& observation);

// Scores all q^(w+1) tuples of a piece at once. Entries are indexed by the
// lexicographic TupleSpace code.
class PieceScorer {
 public:
  explicit PieceScorer(const WeightModel& model);
  PieceScorer(const FeatureIndex& index, std::size_t width, std::span<const double> weights);

  void score_all(const Observation& piece, std::vector<double>& out) const;
  double score(const Observation& piece, const LabelTuple& tuple) const;

 private:
  void unary_scores(const Observation& piece, std::vector<double>& unary) const;

  const FeatureIndex* index_;
  std::size_t width_;
  std::span<const double> weights_;
  std::vector<double> transition_;  // q*q
};

}  // namespace ambigseq
