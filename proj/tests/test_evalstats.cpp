#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <sstream>

#include "ambigseq/errors.hpp"
#include "ambigseq/evalstats.hpp"

using namespace ambigseq;

TEST(TokenF1, IsTokenAccuracy) {
  const std::vector<TagSequence> gold = {{"B-NP", "I-NP", "O"}, {"B-VP"}};
  const std::vector<TagSequence> pred = {{"B-NP", "B-NP", "O"}, {"B-VP"}};
  const auto r = token_f1(gold, pred);
  EXPECT_DOUBLE_EQ(r.f1, 0.75);
  EXPECT_DOUBLE_EQ(r.precision, r.recall);
  EXPECT_EQ(r.true_positives, 3u);
  const std::vector<TagSequence> short_pred = {{"B-NP"}, {"B-VP"}};
  EXPECT_THROW(token_f1(gold, short_pred), DataError);
}

TEST(ExtractChunks, FollowsConllConventions) {
  const TagSequence tags = {"B-NP", "I-NP", "O", "I-VP", "I-NP", "B-NP", "B-NP"};
  const std::vector<Chunk> expected = {
      {"NP", 0, 2}, {"VP", 3, 4}, {"NP", 4, 5}, {"NP", 5, 6}, {"NP", 6, 7}};
  EXPECT_EQ(extract_chunks(tags), expected);
  EXPECT_THROW(extract_chunks({"X-NP"}), DataError);
}

TEST(ChunkF1, SplitPredictionScoresZeroOfOne) {
  const std::vector<TagSequence> gold = {{"B-NP", "I-NP", "I-NP"}};
  const std::vector<TagSequence> pred = {{"B-NP", "B-NP", "I-NP"}};
  const auto r = chunk_f1(gold, pred);
  EXPECT_EQ(r.true_positives, 0u);
  EXPECT_EQ(r.predicted, 2u);
  EXPECT_EQ(r.expected, 1u);
  EXPECT_EQ(r.f1, 0.0);
  EXPECT_FALSE(r.no_chunks);
}

TEST(ChunkF1, PartialOverlapCountsOnlyExactMatches) {
  const std::vector<TagSequence> gold = {{"B-NP", "I-NP", "B-VP", "O", "B-PP"}};
  const std::vector<TagSequence> pred = {{"B-NP", "I-NP", "B-NP", "O", "B-PP"}};
  const auto r = chunk_f1(gold, pred);
  EXPECT_EQ(r.true_positives, 2u);
  EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-12);
}

TEST(ChunkF1, FlagsInputsWithoutChunks) {
  const std::vector<TagSequence> gold = {{"O", "O"}};
  const auto r = chunk_f1(gold, gold);
  EXPECT_TRUE(r.no_chunks);
  EXPECT_EQ(r.f1, 0.0);
}

TEST(MeanStd, UsesSampleDeviation) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const auto m = mean_std(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.std, std::sqrt(5.0 / 3.0), 1e-12);
  const std::vector<double> one = {7.0};
  EXPECT_EQ(mean_std(one).std, 0.0);
}

TEST(TCritical, TableAgreesWithStudentsT) {
  for (double alpha : {0.10, 0.05, 0.025, 0.01})
    for (std::size_t df = 1; df <= 40; ++df) {
      const boost::math::students_t dist(static_cast<double>(df));
      const double exact = boost::math::quantile(boost::math::complement(dist, alpha));
      EXPECT_NEAR(t_critical_one_tailed(df, alpha), exact, 5e-4 * exact)
          << "df " << df << " alpha " << alpha;
    }
  EXPECT_NEAR(t_critical_one_tailed(14, 0.05), 1.7613, 1e-4);
  EXPECT_THROW(t_critical_one_tailed(0, 0.05), ConfigError);
}

TEST(PairedTTest, DetectsConsistentImprovement) {
  const std::vector<double> a = {0.81, 0.83, 0.80, 0.84, 0.82};
  const std::vector<double> b = {0.78, 0.80, 0.79, 0.80, 0.79};
  EXPECT_EQ(paired_ttest_one_tailed(a, b), TestOutcome::kSuperior);
  EXPECT_EQ(paired_ttest_one_tailed(b, a), TestOutcome::kInferior);
  EXPECT_EQ(paired_ttest_one_tailed(a, a), TestOutcome::kTie);
  EXPECT_EQ(paired_t_statistic(a, a), 0.0);
}

TEST(PairedTTest, IsAntisymmetric) {
  const std::vector<double> a = {0.5, 0.7, 0.2, 0.9, 0.4, 0.6};
  const std::vector<double> b = {0.45, 0.71, 0.1, 0.95, 0.3, 0.5};
  EXPECT_DOUBLE_EQ(paired_t_statistic(a, b), -paired_t_statistic(b, a));
  const auto ab = paired_ttest_one_tailed(a, b), ba = paired_ttest_one_tailed(b, a);
  if (ab == TestOutcome::kSuperior) {
    EXPECT_EQ(ba, TestOutcome::kInferior);
  }
  if (ab == TestOutcome::kTie) {
    EXPECT_EQ(ba, TestOutcome::kTie);
  }
}

TEST(PairedTTest, ConstantNonzeroDifferenceIsSignificant) {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {0.5, 1.5, 2.5};
  EXPECT_TRUE(std::isinf(paired_t_statistic(a, b)));
  EXPECT_EQ(paired_ttest_one_tailed(a, b), TestOutcome::kSuperior);
  const std::vector<double> single = {1.0};
  EXPECT_THROW(paired_ttest_one_tailed(single, single), DataError);
}

TEST(ReadPredictions, TakesTheLastTwoColumns) {
  const auto cols = read_predictions("He PRP B-NP B-NP\nran VBD B-VP O\n\nOk B-NP B-NP\n");
  ASSERT_EQ(cols.gold.size(), 2u);
  EXPECT_EQ(cols.gold[0], (TagSequence{"B-NP", "B-VP"}));
  EXPECT_EQ(cols.predicted[0], (TagSequence{"B-NP", "O"}));
  EXPECT_THROW(read_predictions("only two\n"), ParseError);
}

TEST(ReportRow, WritesAllFields) {
  EvalReport r;
  r.precision = r.recall = r.f1 = 0.5;
  r.true_positives = 1;
  r.predicted = r.expected = 2;
  std::ostringstream out;
  write_report_header(out);
  write_report_row(out, "chunk", r);
  EXPECT_EQ(out.str(), "metric,precision,recall,f1,tp,predicted,expected,no_chunks\n"
                       "chunk,0.5,0.5,0.5,1,2,2,0\n");
}
