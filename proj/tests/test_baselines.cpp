#include <gtest/gtest.h>

#include <algorithm>

#include "ambigseq/baselines.hpp"
#include "ambigseq/errors.hpp"
#include "oracles.hpp"

using namespace ambigseq;

namespace {

// Each word has a fixed label: "a" -> A, "b" -> B, "c" -> C.
std::vector<Sequence> word_determined(Rng& rng, std::size_t count, std::size_t q) {
  std::vector<Sequence> out;
  for (std::size_t i = 0; i < count; ++i) {
    Sequence s;
    const std::size_t len = 2 + uniform_below(rng, 4);
    for (std::size_t t = 0; t < len; ++t) {
      const auto y = static_cast<LabelId>(uniform_below(rng, q));
      s.tokens.push_back(std::string(1, static_cast<char>('a' + y)));
      s.gold.push_back(y);
    }
    out.push_back(std::move(s));
  }
  return out;
}

WeightModel random_model(const oracle::Instance& inst, Rng& rng, double scale = 1.0) {
  std::vector<double> w(inst.index->dimension());
  for (double& x : w) x = scale * (2.0 * uniform_unit(rng) - 1.0);
  return WeightModel(inst.index, 1, std::move(w));
}

double training_accuracy(const WeightModel& m, const std::vector<Sequence>& seqs) {
  std::size_t right = 0, total = 0;
  for (const auto& s : seqs) {
    const auto y = decode(m, s);
    for (std::size_t t = 0; t < y.size(); ++t) right += y[t] == s.gold[t];
    total += y.size();
  }
  return static_cast<double>(right) / static_cast<double>(total);
}

CuttingPlaneOptions tight() {
  CuttingPlaneOptions o;
  o.eps1 = 1e-6;
  o.qp.tol = 1e-9;
  return o;
}

}  // namespace

TEST(ConstraintCounts, MatchesClosedForms) {
  const auto a = constraint_counts(1, 3, 2, 3);
  EXPECT_EQ(a.average, 20);
  EXPECT_EQ(a.sequence, 26);
  EXPECT_EQ(a.piecewise, 18);
  const auto b = constraint_counts(1, 2, 1, 1);
  EXPECT_EQ(b.average, 1);
  EXPECT_EQ(b.sequence, 0);
  EXPECT_EQ(b.piecewise, 1);
  const auto big = constraint_counts(8936, 40, 3, 22);
  EXPECT_GT(big.sequence, big.piecewise);
  EXPECT_THROW(constraint_counts(1, 3, 4, 3), ConfigError);
  EXPECT_THROW(constraint_counts(0, 3, 1, 3), ConfigError);
}

TEST(Ssvm, FitsSeparableData) {
  Rng rng(4);
  const auto seqs = word_determined(rng, 20, 3);
  const auto inst = oracle::make_instance(exact_corpus(seqs, oracle::letters(3), 1));
  const auto r = train_ssvm(inst.data, 10.0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(training_accuracy(r.model, seqs), 1.0);
  ASSERT_EQ(r.trace.size(), 1u);
}

TEST(Ssvm, MatchesFullConstraintOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto seqs = oracle::random_sequences(rng, 3, 2, 3, 3, 4);
    const auto inst = oracle::make_instance(exact_corpus(seqs, oracle::letters(3), 1));
    const double c = 2.0;
    const auto r = train_ssvm(inst.data, c, tight());
    const auto P = init_uniform(inst.data.pieces);
    const auto groups = oracle::enumerate_constraints(inst.data, P, c, 0.0);
    const auto ref = oracle::solve_full_qp(groups, inst.index->dimension());
    const std::vector<double> w(r.model.weights().begin(), r.model.weights().end());
    EXPECT_NEAR(oracle::dense_primal(groups, w), ref.primal, 1e-4 * ref.primal);
    EXPECT_NEAR(objective_j0(r.model, inst.data, c), ref.primal, 1e-4 * ref.primal);
  }
}

TEST(Ssvm, RejectsAmbiguousPieces) {
  const auto inst = oracle::tiny_instance(3, 6, 3, 1);
  auto ambiguous = inst.data;
  ambiguous.pieces[0].candidates.push_back(
      ambiguous.pieces[0].candidates[0] == LabelTuple{0, 0} ? LabelTuple{1, 1} : LabelTuple{0, 0});
  EXPECT_THROW(train_ssvm(ambiguous, 1.0), DataError);
}

TEST(Naive, PicksTheGoldAboutOneTimeInCl) {
  Rng rng(8);
  const auto seqs = oracle::random_sequences(rng, 5000, 3, 3, 3, 5);
  CorruptionSettings cs;
  cs.candidates = 3;
  cs.exact_fraction = 0.0;
  cs.seed = 1;
  const auto inst = oracle::make_instance(corrupt(seqs, oracle::letters(3), cs));
  ASSERT_EQ(inst.data.size(), 10000u);
  const auto pseudo = naive_pseudo_gold(inst.data, 77);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pseudo.size(); ++i) {
    ASSERT_TRUE(pseudo.pieces[i].is_exact());
    EXPECT_TRUE(inst.data.pieces[i].has_candidate(pseudo.pieces[i].candidates[0]));
    hits += pseudo.pieces[i].candidates[0] == inst.data.pieces[i].gold;
  }
  EXPECT_NEAR(static_cast<double>(hits) / 10000.0, 1.0 / 3.0, 0.03);
  EXPECT_EQ(naive_pseudo_gold(inst.data, 77).pieces, pseudo.pieces);
}

TEST(Clpl, ZeroModelObjective) {
  Rng rng(2);
  const auto seqs = oracle::random_sequences(rng, 4, 2, 4, 2, 4);
  CorruptionSettings cs;
  cs.candidates = 2;
  cs.exact_fraction = 0.0;
  const auto inst = oracle::make_instance(corrupt(seqs, oracle::letters(2), cs));
  const WeightModel zero(inst.index, 1);
  for (auto sign : {NonCandidateSign::kPenalizePositive, NonCandidateSign::kLiteral})
    EXPECT_DOUBLE_EQ(clpl_objective(zero, inst.data, 1.5, 0.5, sign), 1.5 + 2.0 * 0.5);
}

TEST(Clpl, ObjectiveIsConvex) {
  const auto inst = oracle::tiny_instance(14);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_model(inst, rng, 2.0), b = random_model(inst, rng, 2.0);
    std::vector<double> mid(a.dimension());
    for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * (a.weights()[k] + b.weights()[k]);
    const WeightModel m(inst.index, 1, mid);
    for (auto sign : {NonCandidateSign::kPenalizePositive, NonCandidateSign::kLiteral})
      EXPECT_LE(clpl_objective(m, inst.data, 1.0, 1.0, sign),
                0.5 * (clpl_objective(a, inst.data, 1.0, 1.0, sign) +
                       clpl_objective(b, inst.data, 1.0, 1.0, sign)) +
                    1e-12);
  }
}

TEST(Clpl, TrainedModelIsALocalMinimum) {
  for (std::uint64_t seed = 20; seed < 24; ++seed) {
    const auto inst = oracle::tiny_instance(seed);
    for (auto sign : {NonCandidateSign::kPenalizePositive, NonCandidateSign::kLiteral}) {
      const auto r = train_clpl(inst.data, 1.0, 1.0, tight(), sign);
      const double best = clpl_objective(r.model, inst.data, 1.0, 1.0, sign);
      EXPECT_NEAR(r.trace[0].objective, best, 1e-12);
      Rng rng(seed);
      for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> w(r.model.weights().begin(), r.model.weights().end());
        for (double& x : w) x += 0.05 * (2.0 * uniform_unit(rng) - 1.0);
        const WeightModel nearby(inst.index, 1, w);
        EXPECT_GE(clpl_objective(nearby, inst.data, 1.0, 1.0, sign), best - 1e-5);
      }
    }
  }
}

TEST(Plsvm, RejectsPiecesWithoutNonCandidates) {
  Rng rng(1);
  const auto seqs = oracle::random_sequences(rng, 3, 2, 3, 2, 3);
  CorruptionSettings cs;
  cs.candidates = 4;
  cs.exact_fraction = 0.0;
  const auto inst = oracle::make_instance(corrupt(seqs, oracle::letters(2), cs));
  EXPECT_THROW(train_plsvm(inst.data, 1.0), ConfigError);
}

TEST(Plsvm, SeededRunsAreIdentical) {
  const auto inst = oracle::tiny_instance(33);
  PlsvmOptions o;
  o.seed = 9;
  const auto a = train_plsvm(inst.data, 1.0, o);
  const auto b = train_plsvm(inst.data, 1.0, o);
  EXPECT_TRUE(std::equal(a.model.weights().begin(), a.model.weights().end(),
                         b.model.weights().begin()));
  EXPECT_EQ(a.trace.size(), o.epochs);
}

TEST(Plsvm, SeparableDataReachesZeroTrainingError) {
  Rng rng(12);
  const auto seqs = word_determined(rng, 20, 3);
  const auto inst = oracle::make_instance(exact_corpus(seqs, oracle::letters(3), 1));
  PlsvmOptions o;
  o.epochs = 50;
  const auto r = train_plsvm(inst.data, 10.0, o);
  EXPECT_EQ(training_accuracy(r.model, seqs), 1.0);
  const WeightModel zero(inst.index, 1);
  EXPECT_LT(plsvm_objective(r.model, inst.data, 10.0), plsvm_objective(zero, inst.data, 10.0));
  const double radius = std::sqrt(10.0);
  EXPECT_LE(std::sqrt(r.model.squared_norm()), radius + 1e-9);
}

TEST(Cllp, ZeroModelIdentifiesLowestCandidate) {
  const auto inst = oracle::tiny_instance(41);
  const WeightModel zero(inst.index, 1);
  const auto ids = identify_candidates(zero, inst.data);
  for (std::size_t i = 0; i < inst.data.size(); ++i)
    EXPECT_EQ(ids[i], *std::min_element(inst.data.pieces[i].candidates.begin(),
                                        inst.data.pieces[i].candidates.end()));
}

TEST(Cllp, IdentificationIsTheCandidateArgmax) {
  const auto inst = oracle::tiny_instance(42);
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_model(inst, rng);
    const auto ids = identify_candidates(m, inst.data);
    for (std::size_t i = 0; i < inst.data.size(); ++i) {
      const auto& obs = inst.data.observations[i];
      for (const auto& y : inst.data.pieces[i].candidates)
        EXPECT_GE(score(m, obs, ids[i]), score(m, obs, y));
    }
  }
}

TEST(Cllp, StopsOnceIdentificationIsStable) {
  const auto inst = oracle::tiny_instance(43);
  const auto r = train_cllp(inst.data, 1.0, 1.0, 10);
  ASSERT_FALSE(r.trace.empty());
  EXPECT_LE(r.trace.size(), 10u);
  if (r.trace.size() < 10) {
    EXPECT_EQ(r.trace.back().stop_reason, "identification_stable");
  }
}

TEST(ObjectiveJ0, HandEvaluatedAtZeroWeights) {
  AmbiguousCorpus c;
  c.alphabet = oracle::letters(2);
  Sequence s;
  s.tokens = {"x", "y", "z"};
  s.gold = {0, 0, 1};
  c.sequences = {s};
  Piece p0, p1;
  p0.seq_id = p1.seq_id = 0;
  p1.start = 1;
  p0.candidates = {{0, 0}, {0, 1}, {1, 0}};
  p1.candidates = {{0, 1}, {0, 0}, {1, 0}, {1, 1}};
  p0.gold = {0, 0};
  p1.gold = {0, 1};
  c.pieces = {p0, p1};
  const auto inst = oracle::make_instance(c);
  const WeightModel zero(inst.index, 1);
  // piece 0 gives s = 3; piece 1 has no non-candidates and gives 0
  EXPECT_DOUBLE_EQ(objective_j0(zero, inst.data, 2.0), 2.0 / 2.0 * 3.0);
}

TEST(BaselineNames, ParseRoundTrip) {
  for (auto k : {BaselineKind::kSsvm, BaselineKind::kNaive, BaselineKind::kClpl,
                 BaselineKind::kPlsvm, BaselineKind::kCllp})
    EXPECT_EQ(parse_baseline(baseline_name(k)), k);
  EXPECT_THROW(parse_baseline("svm"), ConfigError);
}
