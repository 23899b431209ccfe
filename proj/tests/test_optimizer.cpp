#include <gtest/gtest.h>

#include "ambigseq/errors.hpp"
#include "ambigseq/optimizer.hpp"
#include "ambigseq/wdpsl.hpp"
#include "oracles.hpp"

using namespace ambigseq;

namespace {

SparseVector unit(FeatureId i, double v = 1.0) { return SparseVector::from_entries({{i, v}}); }

}  // namespace

TEST(WorkingQp, OneDimensionalHingeHasClosedForm) {
  for (double c : {0.25, 0.5, 2.0}) {
    WorkingQp qp(1);
    const auto g = qp.add_group(c);
    qp.add_row(g, 0, unit(0), 1.0);
    EXPECT_TRUE(qp.solve({}).converged);
    EXPECT_NEAR(qp.weights()[0], std::min(1.0, c), 1e-9);
    EXPECT_NEAR(qp.primal_objective(), qp.dual_objective(), 1e-9);
  }
}

TEST(WorkingQp, SharedSlackTakesTheWorstRow) {
  // min 1/2 |w|^2 + 10 max(0, 1 - w0, 2 - w1)
  WorkingQp qp(2);
  const auto g = qp.add_group(10.0);
  qp.add_row(g, 0, unit(0), 1.0);
  qp.add_row(g, 1, unit(1), 2.0);
  qp.solve({1e-10, 100000});
  EXPECT_NEAR(qp.weights()[0], 1.0, 1e-7);
  EXPECT_NEAR(qp.weights()[1], 2.0, 1e-7);
  EXPECT_NEAR(qp.slack(g), 0.0, 1e-7);
}

TEST(WorkingQp, MatchesDenseDualOracleOnRandomGroups) {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 4;
    WorkingQp qp(d);
    std::vector<oracle::DenseGroup> groups;
    for (int g = 0; g < 3; ++g) {
      oracle::DenseGroup dg;
      dg.capacity = 0.2 + uniform_unit(rng);
      const auto id = qp.add_group(dg.capacity);
      for (int r = 0; r < 3; ++r) {
        std::vector<double> a(d);
        std::vector<SparseVector::Entry> e;
        for (std::size_t k = 0; k < d; ++k) {
          a[k] = 2.0 * uniform_unit(rng) - 1.0;
          e.emplace_back(static_cast<FeatureId>(k), a[k]);
        }
        const double b = uniform_unit(rng) * 2.0;
        dg.a.push_back(a);
        dg.b.push_back(b);
        qp.add_row(id, static_cast<std::uint64_t>(r), SparseVector::from_entries(e), b);
      }
      groups.push_back(dg);
    }
    qp.solve({1e-10, 1000000});
    const auto ref = oracle::solve_full_qp(groups, d);
    EXPECT_NEAR(qp.primal_objective(), ref.primal, 1e-6 * std::max(1.0, ref.primal));
    const std::vector<double> w(qp.weights().begin(), qp.weights().end());
    EXPECT_NEAR(oracle::dense_primal(groups, w), ref.primal, 1e-6 * std::max(1.0, ref.primal));
  }
}

TEST(WorkingQp, LoweringCapacityKeepsDualsFeasible) {
  WorkingQp qp(1);
  const auto g = qp.add_group(5.0);
  qp.add_row(g, 0, unit(0), 3.0);
  qp.solve({});
  EXPECT_NEAR(qp.group_dual_sum(g), 3.0, 1e-9);
  qp.set_capacity(g, 1.0);
  EXPECT_LE(qp.group_dual_sum(g), 1.0 + 1e-12);
  qp.solve({});
  EXPECT_NEAR(qp.weights()[0], 1.0, 1e-9);
  qp.set_capacity(g, 0.0);
  qp.solve({});
  EXPECT_EQ(qp.weights()[0], 0.0);
}

TEST(WorkingQp, RejectsNonFiniteRows) {
  WorkingQp qp(1);
  const auto g = qp.add_group(1.0);
  EXPECT_THROW(qp.add_row(g, 0, unit(0, std::nan("")), 1.0), DataError);
}

TEST(MostViolated, ZeroModelPicksLowestNonCandidate) {
  const auto inst = oracle::tiny_instance(12, 6, 3, 3);
  const WeightModel zero(inst.index, 1);
  const TupleSpace space = inst.data.tuple_space();
  for (std::size_t i = 0; i < inst.data.size(); ++i) {
    const Piece& p = inst.data.pieces[i];
    const auto v = most_violated(zero, inst.data.observations[i], p, 0.0);
    ASSERT_TRUE(v.has_value());
    EXPECT_DOUBLE_EQ(v->value, static_cast<double>(p.candidates.size()));
    std::uint64_t lowest = 0;
    while (p.has_candidate(space.decode(lowest))) ++lowest;
    EXPECT_EQ(v->code, lowest);
    EXPECT_FALSE(most_violated(zero, inst.data.observations[i], p, v->value).has_value());
  }
}

TEST(CuttingPlane, MatchesFullConstraintOracle) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto inst = oracle::tiny_instance(seed);
    const auto P = init_uniform(inst.data.pieces);
    CuttingPlaneOptions opts;
    opts.eps1 = 1e-6;
    opts.qp.tol = 1e-9;
    const QPSolution sol = cutting_plane(inst.data, P, 1.0, 1.0, opts);
    EXPECT_TRUE(sol.converged);
    const auto groups = oracle::enumerate_constraints(inst.data, P, 1.0, 1.0);
    const auto ref = oracle::solve_full_qp(groups, inst.index->dimension());
    const double full = oracle::dense_primal(groups, sol.weights);
    EXPECT_NEAR(full, ref.primal, 1e-4 * ref.primal) << "seed " << seed;
    const WeightModel m(inst.index, 1, sol.weights);
    EXPECT_NEAR(objective_value(m, inst.data, P, 1.0, 1.0), full, 1e-9 * std::max(1.0, full));
  }
}

TEST(CuttingPlane, DualObjectiveNeverDecreases) {
  const auto inst = oracle::tiny_instance(31, 6, 3, 3);
  const auto P = init_uniform(inst.data.pieces);
  std::vector<SweepRecord> trace;
  cutting_plane(inst.data, P, 10.0, 1.0, {}, &trace);
  ASSERT_GE(trace.size(), 2u);
  for (std::size_t k = 1; k < trace.size(); ++k)
    EXPECT_GE(trace[k].dual_objective, trace[k - 1].dual_objective - 1e-9);
  EXPECT_EQ(trace.back().added, 0u);
}

TEST(CuttingPlane, FinalSolutionIsEpsFeasible) {
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    const auto inst = oracle::tiny_instance(seed);
    const auto P = init_uniform(inst.data.pieces);
    CuttingPlaneOptions opts;
    const QPSolution sol = cutting_plane(inst.data, P, 1.0, 1.0, opts);
    const WeightModel m(inst.index, 1, sol.weights);
    const PieceScorer scorer(m);
    const TupleSpace space = inst.data.tuple_space();
    for (std::size_t i = 0; i < inst.data.size(); ++i) {
      std::vector<double> scratch;
      const auto v = max_margin_value(scorer, space, inst.data.observations[i], inst.data.pieces[i],
                                      SetEnergy::kSum, scratch);
      EXPECT_LE(v.value, sol.xi[i] + opts.eps1 + 1e-12);
    }
  }
}

TEST(CuttingPlane, ThreadCountDoesNotChangeResult) {
  const auto inst = oracle::tiny_instance(50, 6, 3, 3);
  const auto P = init_uniform(inst.data.pieces);
  CuttingPlaneOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const auto a = cutting_plane(inst.data, P, 1.0, 1.0, one);
  const auto b = cutting_plane(inst.data, P, 1.0, 1.0, four);
  EXPECT_EQ(a.weights, b.weights);
}

TEST(SolveWorkingQp, ReproducesCuttingPlaneFromItsWorkingSet) {
  const auto inst = oracle::tiny_instance(61);
  const auto P = init_uniform(inst.data.pieces);
  TwoMarginProblem problem(inst.data, 1.0, 1.0);
  problem.set_confidence(P);
  problem.solve({});
  const auto ws = problem.working_set();
  const auto again = solve_working_qp(inst.data, ws, P, 1.0, 1.0, {});
  EXPECT_NEAR(again.objective, problem.solution().objective, 1e-6);
  EXPECT_EQ(ws.candidate_set_rows() + ws.confidence_rows, problem.constraints().size());
}
