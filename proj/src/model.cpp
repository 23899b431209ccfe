#include "ambigseq/model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ambigseq/errors.hpp"
#include "ambigseq/text.hpp"

namespace ambigseq {

TrainingSet TrainingSet::build(const AmbiguousCorpus& corpus,
                               std::shared_ptr<const FeatureIndex> index) {
  if (!(corpus.alphabet == index->alphabet()))
    throw DataError("corpus and feature index use different label alphabets");
  TrainingSet set;
  set.index = std::move(index);
  set.width = corpus.width();
  set.pieces = corpus.pieces;
  set.observations.reserve(set.pieces.size());
  for (const auto& piece : set.pieces) {
    if (piece.candidates.empty()) throw DataError("piece with an empty candidate set");
    set.observations.push_back(set.index->observe(corpus.sequences.at(piece.seq_id), piece));
  }
  return set;
}

WeightModel::WeightModel(std::shared_ptr<const FeatureIndex> index, std::size_t width)
    : index_(std::move(index)), width_(width), weights_(index_->dimension(), 0.0) {}

WeightModel::WeightModel(std::shared_ptr<const FeatureIndex> index, std::size_t width,
                         std::vector<double> weights)
    : index_(std::move(index)), width_(width), weights_(std::move(weights)) {
  if (weights_.size() != index_->dimension())
    throw DataError("weight vector dimension " + std::to_string(weights_.size()) +
                    " does not match feature dimension " +
                    std::to_string(index_->dimension()));
  for (double v : weights_)
    if (!std::isfinite(v)) throw DataError("non-finite model weight");
}

double WeightModel::squared_norm() const {
  double s = 0.0;
  for (double v : weights_) s += v * v;
  return s;
}

void WeightModel::save(std::ostream& out) const {
  const auto& alphabet = index_->alphabet();
  out << "# ambigseq-model 1\n";
  out << "d=" << weights_.size() << '\n';
  out << "q=" << alphabet.size() << '\n';
  out << "w=" << width_ << '\n';
  out << "templates=" << index_->templates().to_string() << '\n';
  out << "hash_buckets=" << index_->hash_buckets() << '\n';
  out << "labels=";
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (i) out << ',';
    out << escape_label(alphabet.name(static_cast<LabelId>(i)));
  }
  out << '\n';
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (weights_[i] != 0.0) out << i << ' ' << text::format_double(weights_[i]) << '\n';
}

WeightModel WeightModel::load(std::string_view body, std::shared_ptr<const FeatureIndex> index) {
  std::uint64_t d = 0, q = 0, w = 0;
  bool header_done = false;
  std::vector<double> weights;
  text::for_each_line(body, [&](std::string_view line, std::size_t number) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') return;
    const auto eq = line.find('=');
    if (!header_done && eq != std::string_view::npos) {
      const auto key = line.substr(0, eq);
      const auto value = line.substr(eq + 1);
      if (key == "d") {
        if (!text::parse_uint(value, d)) throw ParseError(number, "bad d");
      } else if (key == "q") {
        if (!text::parse_uint(value, q)) throw ParseError(number, "bad q");
      } else if (key == "w") {
        if (!text::parse_uint(value, w)) throw ParseError(number, "bad w");
      } else if (key == "templates") {
        if (!(FeatureTemplate::parse(value) == index->templates()))
          throw DataError("model templates differ from the feature index");
      } else if (key == "labels") {
        std::vector<std::string> names;
        if (!value.empty())
          for (auto part : text::split(value, ',')) names.push_back(unescape_label(part));
        if (names != index->alphabet().labels())
          throw DataError("model labels differ from the feature index");
      }
      return;
    }
    if (!header_done) {
      if (d != index->dimension())
        throw DataError("model dimension " + std::to_string(d) +
                        " does not match feature index dimension " +
                        std::to_string(index->dimension()));
      if (q != index->num_labels()) throw DataError("model label count mismatch");
      weights.assign(d, 0.0);
      header_done = true;
    }
    const auto fields = text::split_ws(line);
    std::uint64_t i = 0;
    double v = 0;
    if (fields.size() != 2 || !text::parse_uint(fields[0], i) || !text::parse_double(fields[1], v))
      throw ParseError(number, "expected 'index value'");
    if (i >= d) throw ParseError(number, "weight index out of range");
    weights[i] = v;
  });
  if (!header_done) {
    if (d != index->dimension()) throw DataError("model dimension mismatch");
    weights.assign(d, 0.0);
  }
  if (w < 1) throw DataError("model file lacks a valid w");
  return WeightModel(std::move(index), w, std::move(weights));
}

double score(const WeightModel& model, const Observation& piece, const LabelTuple& tuple) {
  if (tuple.size() != model.width() + 1)
    throw DataError("tuple length " + std::to_string(tuple.size()) + " != w+1");
  return joint_features(model.index(), piece, tuple).dot(model.weights());
}

double set_score(const WeightModel& model, const Observation& observation, const Piece& piece,
                 SetEnergy mode) {
  if (piece.candidates.empty()) throw DataError("empty candidate set");
  double total = 0.0;
  for (const auto& y : piece.candidates) total += score(model, observation, y);
  if (mode == SetEnergy::kMean) total /= static_cast<double>(piece.candidates.size());
  return total;
}

double delta_loss(std::span<const LabelTuple> candidates, const LabelTuple& tuple) {
  const bool member = std::find(candidates.begin(), candidates.end(), tuple) != candidates.end();
  return member ? 0.0 : static_cast<double>(candidates.size());
}

PieceScorer::PieceScorer(const WeightModel& model)
    : PieceScorer(model.index(), model.width(), model.weights()) {}

PieceScorer::PieceScorer(const FeatureIndex& index, std::size_t width,
                         std::span<const double> weights)
    : index_(&index), width_(width), weights_(weights) {
  if (weights.size() != index.dimension()) throw DataError("weight dimension mismatch");
  const std::size_t q = index.num_labels();
  transition_.assign(q * q, 0.0);
  if (index.templates().transition) {
    for (std::size_t a = 0; a < q; ++a)
      for (std::size_t b = 0; b < q; ++b)
        transition_[a * q + b] =
            weights[index.transition_index(static_cast<LabelId>(a), static_cast<LabelId>(b))];
  }
}

void PieceScorer::unary_scores(const Observation& piece, std::vector<double>& unary) const {
  const std::size_t q = index_->num_labels();
  const std::size_t nodes = piece.nodes.size();
  unary.assign(nodes * q, 0.0);
  const bool bias = index_->templates().bias;
  for (std::size_t k = 0; k < nodes; ++k) {
    for (std::size_t y = 0; y < q; ++y) {
      const auto label = static_cast<LabelId>(y);
      double s = 0.0;
      for (PatternId p : piece.nodes[k]) s += weights_[index_->state_index(p, label)];
      if (bias) s += weights_[index_->bias_index(label)];
      unary[k * q + y] = s;
    }
  }
}

void PieceScorer::score_all(const Observation& piece, std::vector<double>& out) const {
  const std::size_t q = index_->num_labels();
  const std::size_t nodes = width_ + 1;
  if (piece.nodes.size() != nodes) throw DataError("observation width mismatch");
  std::vector<double> unary;
  unary_scores(piece, unary);
  const TupleSpace space(q, width_);
  out.resize(space.size());
  std::vector<std::size_t> digits(nodes, 0);
  for (std::uint64_t code = 0; code < space.size(); ++code) {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) s += unary[k * q + digits[k]];
    for (std::size_t k = 0; k + 1 < nodes; ++k) s += transition_[digits[k] * q + digits[k + 1]];
    out[code] = s;
    for (std::size_t k = nodes; k-- > 0;) {
      if (++digits[k] < q) break;
      digits[k] = 0;
    }
  }
}

double PieceScorer::score(const Observation& piece, const LabelTuple& tuple) const {
  const std::size_t q = index_->num_labels();
  std::vector<double> unary;
  unary_scores(piece, unary);
  double s = 0.0;
  for (std::size_t k = 0; k < tuple.size(); ++k) s += unary[k * q + tuple[k]];
  for (std::size_t k = 0; k + 1 < tuple.size(); ++k) s += transition_[tuple[k] * q + tuple[k + 1]];
  return s;
}

std::vector<LabelId> decode(const WeightModel& model, const Sequence& sequence) {
  return decode(model, model.index().observe(sequence));
}

std::vector<LabelId> decode(const WeightModel& model, const Observation& observation) {
  const FeatureIndex& index = model.index();
  const std::size_t q = index.num_labels();
  const std::size_t length = observation.nodes.size();
  if (length == 0) return {};
  const auto w = model.weights();
  const bool bias = index.templates().bias;
  const bool trans = index.templates().transition;

  auto unary = [&](std::size_t t, std::size_t y) {
    const auto label = static_cast<LabelId>(y);
    double s = bias ? w[index.bias_index(label)] : 0.0;
    for (PatternId p : observation.nodes[t]) s += w[index.state_index(p, label)];
    return s;
  };
  auto edge = [&](std::size_t a, std::size_t b) {
    return trans ? w[index.transition_index(static_cast<LabelId>(a), static_cast<LabelId>(b))]
                 : 0.0;
  };

  std::vector<double> best(q), next(q);
  std::vector<std::vector<LabelId>> back(length, std::vector<LabelId>(q, 0));
  for (std::size_t y = 0; y < q; ++y) best[y] = unary(0, y);
  for (std::size_t t = 1; t < length; ++t) {
    for (std::size_t y = 0; y < q; ++y) {
      std::size_t arg = 0;
      double top = best[0] + edge(0, y);
      for (std::size_t a = 1; a < q; ++a) {
        const double v = best[a] + edge(a, y);
        if (v > top) {
          top = v;
          arg = a;
        }
      }
      next[y] = top + unary(t, y);
      back[t][y] = static_cast<LabelId>(arg);
    }
    std::swap(best, next);
  }
  std::size_t last = 0;
  for (std::size_t y = 1; y < q; ++y)
    if (best[y] > best[last]) last = y;
  std::vector<LabelId> labels(length);
  labels[length - 1] = static_cast<LabelId>(last);
  for (std::size_t t = length - 1; t > 0; --t) labels[t - 1] = back[t][labels[t]];
  return labels;
}

}  // namespace ambigseq
