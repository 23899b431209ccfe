#include <gtest/gtest.h>

#include <sstream>

#include "ambigseq/errors.hpp"
#include "ambigseq/features.hpp"
#include "oracles.hpp"

using namespace ambigseq;

namespace {

Sequence make(std::vector<std::string> tokens, std::vector<LabelId> gold) {
  Sequence s;
  s.tokens = std::move(tokens);
  s.gold = std::move(gold);
  return s;
}

}  // namespace

TEST(WordShape, CollapsesCharacterClasses) {
  EXPECT_EQ(word_shape("McDonald's"), "XxXx.x");
  EXPECT_EQ(word_shape("1990s"), "dx");
  EXPECT_EQ(word_shape("U.S."), "X.X.");
  EXPECT_EQ(word_shape(""), "");
}

TEST(ExtractPatterns, EmitsConfiguredTemplates) {
  const Sequence s = make({"The", "cats"}, {0, 1});
  const auto p = extract_patterns(s, 0, FeatureTemplate{});
  const std::vector<std::string> expected = {"w=The", "lw=the", "p1=T",    "p2=Th",  "p3=The",
                                             "s1=e",  "s2=he",  "s3=The",  "sh=Xx",  "w-1=<s>",
                                             "w+1=cats"};
  EXPECT_EQ(p, expected);
  EXPECT_EQ(extract_patterns(s, 1, oracle::small_templates()), (std::vector<std::string>{"w=cats"}));
}

TEST(FeatureTemplate, TextFormRoundTrips) {
  const FeatureTemplate t = FeatureTemplate::parse("word,suffix2,transition");
  EXPECT_TRUE(t.word);
  EXPECT_EQ(t.suffix, 2u);
  EXPECT_FALSE(t.bias);
  EXPECT_EQ(FeatureTemplate::parse(t.to_string()), t);
  EXPECT_THROW(FeatureTemplate::parse("wrod"), ConfigError);
}

TEST(FeatureIndex, LayoutPutsStateThenTransitionThenBias) {
  const auto alphabet = oracle::letters(2);
  const std::vector<Sequence> seqs = {make({"a", "b", "a"}, {0, 1, 0})};
  const auto index = FeatureIndex::build(seqs, alphabet, oracle::small_templates());
  EXPECT_EQ(index.num_patterns(), 2u);
  EXPECT_EQ(index.dimension(), 2u * 2u + 4u + 2u);
  EXPECT_EQ(index.transition_offset(), 4u);
  EXPECT_EQ(index.bias_offset(), 8u);
  EXPECT_EQ(index.transition_index(1, 0), 6u);
  EXPECT_EQ(index.bias_index(1), 9u);
}

TEST(JointFeatures, CountsNodeEdgeAndBiasIndicators) {
  const auto alphabet = oracle::letters(2);
  const std::vector<Sequence> seqs = {make({"a", "a", "b"}, {0, 0, 1})};
  const auto index = FeatureIndex::build(seqs, alphabet, oracle::small_templates());
  Piece piece;
  piece.start = 0;
  const auto obs = index.observe(seqs[0], piece);
  const auto f = joint_features(index, obs, {1, 1});
  const auto pa = *index.find_pattern("w=a");
  EXPECT_EQ(f.get(index.state_index(pa, 1)), 2.0);
  EXPECT_EQ(f.get(index.transition_index(1, 1)), 1.0);
  EXPECT_EQ(f.get(index.bias_index(1)), 2.0);
  EXPECT_EQ(f.nnz(), 3u);
  EXPECT_THROW(joint_features(index, obs, {0}), DataError);
  EXPECT_THROW(joint_features(index, obs, {0, 7}), DataError);
}

TEST(FeatureIndex, UnknownTestPatternsAreDropped) {
  const auto alphabet = oracle::letters(2);
  const std::vector<Sequence> seqs = {make({"a", "b"}, {0, 1})};
  const auto index = FeatureIndex::build(seqs, alphabet, oracle::small_templates());
  const auto obs = index.observe(make({"zzz", "a"}, {}));
  EXPECT_TRUE(obs.nodes[0].empty());
  EXPECT_EQ(obs.nodes[1].size(), 1u);
}

TEST(FeatureIndex, HashedModeBoundsPatternCount) {
  Rng rng(2);
  const auto alphabet = oracle::letters(3);
  const auto seqs = oracle::random_sequences(rng, 30, 3, 8, 3, 50);
  const auto index = FeatureIndex::build(seqs, alphabet, FeatureTemplate{}, 16);
  EXPECT_EQ(index.num_patterns(), 16u);
  std::ostringstream out;
  index.write(out);
  const auto back = FeatureIndex::read(out.str());
  EXPECT_EQ(back.dimension(), index.dimension());
  const auto a = index.observe(seqs[3]);
  const auto b = back.observe(seqs[3]);
  EXPECT_EQ(a.nodes, b.nodes);
}

TEST(FeatureIndex, WrittenIndexReadsBackIdentically) {
  Rng rng(4);
  const auto alphabet = oracle::letters(3);
  const auto seqs = oracle::random_sequences(rng, 10, 3, 6, 3, 12);
  const auto index = FeatureIndex::build(seqs, alphabet, FeatureTemplate{});
  std::ostringstream out;
  index.write(out);
  const auto back = FeatureIndex::read(out.str());
  EXPECT_EQ(back.dimension(), index.dimension());
  EXPECT_EQ(back.templates(), index.templates());
  for (const auto& s : seqs) EXPECT_EQ(back.observe(s).nodes, index.observe(s).nodes);
}

TEST(InputFeatures, SeparatesNodeOffsets) {
  const auto alphabet = oracle::letters(2);
  const std::vector<Sequence> seqs = {make({"a", "a"}, {0, 1})};
  const auto index = FeatureIndex::build(seqs, alphabet, oracle::small_templates());
  Piece piece;
  const auto v = input_features(index, index.observe(seqs[0], piece));
  EXPECT_EQ(v.nnz(), 2u);
  EXPECT_DOUBLE_EQ(cosine_similarity(v, v), 1.0);
}
