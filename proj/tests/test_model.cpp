#include <gtest/gtest.h>

#include <sstream>

#include "ambigseq/errors.hpp"
#include "ambigseq/model.hpp"
#include "oracles.hpp"

using namespace ambigseq;

namespace {

WeightModel random_model(std::shared_ptr<const FeatureIndex> index, std::size_t width, Rng& rng,
                         double scale = 1.0) {
  std::vector<double> w(index->dimension());
  for (double& x : w) x = scale * (2.0 * uniform_unit(rng) - 1.0);
  return WeightModel(std::move(index), width, std::move(w));
}

}  // namespace

TEST(DeltaLoss, IsZeroOnCandidatesAndSetSizeElsewhere) {
  const std::vector<LabelTuple> cands = {{0, 1}, {1, 1}, {2, 0}};
  EXPECT_EQ(delta_loss(cands, {1, 1}), 0.0);
  EXPECT_EQ(delta_loss(cands, {0, 0}), 3.0);
  const std::vector<LabelTuple> single = {{2, 2}};
  EXPECT_EQ(delta_loss(single, {2, 1}), 1.0);
}

TEST(PieceScorer, ScoreAllMatchesSparseDotProducts) {
  const auto inst = oracle::tiny_instance(3);
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const WeightModel m = random_model(inst.index, 1, rng);
    const PieceScorer scorer(m);
    const TupleSpace space = inst.data.tuple_space();
    std::vector<double> all;
    for (std::size_t i = 0; i < inst.data.size(); ++i) {
      scorer.score_all(inst.data.observations[i], all);
      for (const auto& y : TupleRange(space)) {
        const double direct = score(m, inst.data.observations[i], y);
        EXPECT_NEAR(all[space.encode(y)], direct, 1e-12);
        EXPECT_NEAR(scorer.score(inst.data.observations[i], y), direct, 1e-12);
      }
    }
  }
}

TEST(SetScore, SumAndMeanModes) {
  const auto inst = oracle::tiny_instance(5, 6, 3, 3);
  Rng rng(1);
  const WeightModel m = random_model(inst.index, 1, rng);
  for (std::size_t i = 0; i < inst.data.size(); ++i) {
    const Piece& p = inst.data.pieces[i];
    double sum = 0.0;
    for (const auto& y : p.candidates) sum += score(m, inst.data.observations[i], y);
    EXPECT_NEAR(set_score(m, inst.data.observations[i], p, SetEnergy::kSum), sum, 1e-12);
    EXPECT_NEAR(set_score(m, inst.data.observations[i], p, SetEnergy::kMean),
                sum / static_cast<double>(p.candidates.size()), 1e-12);
  }
}

TEST(Decode, MatchesExhaustiveSearch) {
  Rng rng(21);
  const auto alphabet = oracle::letters(4);
  const auto seqs = oracle::random_sequences(rng, 12, 1, 6, 4, 6);
  const auto corpus = exact_corpus(seqs, alphabet, 1);
  const auto index = std::make_shared<const FeatureIndex>(index_features(corpus, FeatureTemplate{}));
  for (int trial = 0; trial < 30; ++trial) {
    const WeightModel m = random_model(index, 1, rng);
    for (const auto& s : seqs) EXPECT_EQ(decode(m, s), oracle::brute_force_decode(m, s));
  }
}

TEST(Decode, ZeroModelPicksLowestLabels) {
  Rng rng(2);
  const auto alphabet = oracle::letters(3);
  const auto seqs = oracle::random_sequences(rng, 1, 4, 4, 3, 3);
  const auto index = std::make_shared<const FeatureIndex>(
      index_features(exact_corpus(seqs, alphabet, 1), FeatureTemplate{}));
  const WeightModel zero(index, 1);
  EXPECT_EQ(decode(zero, seqs[0]), (std::vector<LabelId>(4, 0)));
}

TEST(WeightModel, SaveLoadKeepsWeightsExactly) {
  const auto inst = oracle::tiny_instance(9);
  Rng rng(4);
  const WeightModel m = random_model(inst.index, 1, rng, 1e-3);
  std::ostringstream out;
  m.save(out);
  const WeightModel back = WeightModel::load(out.str(), inst.index);
  ASSERT_EQ(back.weights().size(), m.weights().size());
  for (std::size_t k = 0; k < m.weights().size(); ++k) EXPECT_EQ(back.weights()[k], m.weights()[k]);
  EXPECT_EQ(back.width(), 1u);
}

TEST(WeightModel, RejectsMismatchedDimension) {
  const auto inst = oracle::tiny_instance(9);
  EXPECT_THROW(WeightModel(inst.index, 1, std::vector<double>(3, 0.0)), DataError);
  EXPECT_THROW(WeightModel::load("# ambigseq-model 1\nd=3\nq=3\nw=1\n", inst.index), DataError);
}
