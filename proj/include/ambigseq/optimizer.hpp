#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "ambigseq/confidence.hpp"
#include "ambigseq/model.hpp"
#include "ambigseq/sparse.hpp"

namespace ambigseq {

struct SolveOptions {
  double tol = 1e-6;             // KKT violation target
  std::size_t max_sweeps = 100000;
};

struct QpStatus {
  bool converged = false;
  std::size_t sweeps = 0;
  double kkt_violation = 0.0;
};

// Working-set quadratic program
//
//   min_w,xi  1/2 |w|^2 + sum_g c_g xi_g
//   s.t.      w . a_r >= b_r - xi_g   for every row r of group g,  xi_g >= 0
//
// solved in the dual. Each group owns one slack, so its duals satisfy
// alpha_r >= 0 and sum_r alpha_r <= c_g. The solver runs SMO-style pair
// updates inside each group, treating the unused capacity as a zero row.
class WorkingQp {
 public:
  using GroupId = std::size_t;

  explicit WorkingQp(std::size_t dimension);

  GroupId add_group(double capacity);
  // Lowering a capacity rescales the group's duals to stay feasible.
  void set_capacity(GroupId group, double capacity);
  double capacity(GroupId group) const { return groups_.at(group).capacity; }

  bool has_row(GroupId group, std::uint64_t key) const;
  // New rows start with a zero dual. Throws DataError for non-finite rows.
  void add_row(GroupId group, std::uint64_t key, SparseVector a, double b);

  QpStatus solve(const SolveOptions& options);

  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t dimension() const noexcept { return weights_.size(); }
  std::size_t num_groups() const noexcept { return groups_.size(); }
  std::size_t num_rows() const noexcept { return num_rows_; }
  std::size_t group_size(GroupId group) const { return groups_.at(group).rows.size(); }
  std::uint64_t row_key(GroupId group, std::size_t row) const {
    return groups_.at(group).rows.at(row).key;
  }
  double row_dual(GroupId group, std::size_t row) const {
    return groups_.at(group).rows.at(row).alpha;
  }
  double group_dual_sum(GroupId group) const;

  // max(0, max_r b_r - w . a_r) at the current weights.
  double slack(GroupId group) const;
  double primal_objective() const;
  double dual_objective() const;
  double max_kkt_violation() const;

 private:
  struct Row {
    std::uint64_t key;
    SparseVector a;
    double b;
    double norm2;
    double alpha = 0.0;
  };
  struct Group {
    double capacity;
    std::vector<Row> rows;
    std::unordered_set<std::uint64_t> keys;
  };

  double optimize_group(Group& group, double tol);
  double group_violation(const Group& group) const;
  void rebuild_weights();

  std::vector<double> weights_;
  std::vector<Group> groups_;
  std::size_t num_rows_ = 0;
};

// A candidate constraint row proposed by a separation oracle.
struct Cut {
  std::uint64_t key = 0;
  SparseVector a;
  double b = 0.0;
  double violation = 0.0;
};

// Problem-specific constraint generation. separate() runs concurrently over
// blocks with read-only access; add_cut() runs sequentially in block order.
class Separator {
 public:
  virtual ~Separator() = default;
  virtual std::size_t num_blocks() const = 0;
  // Appends cuts violated by more than eps; returns the block's largest
  // violation (possibly <= eps).
  virtual double separate(std::size_t block, const WorkingQp& qp, double eps,
                          std::vector<Cut>& out) const = 0;
  virtual void add_cut(WorkingQp& qp, std::size_t block, Cut cut) = 0;
};

struct CuttingPlaneOptions {
  double eps1 = 1e-3;
  SolveOptions qp;
  std::size_t max_sweeps = 10000;
  std::size_t threads = 0;
};

struct SweepRecord {
  std::size_t sweep = 0;
  std::size_t added = 0;
  double objective = 0.0;       // working-set primal after the re-solve
  double dual_objective = 0.0;
  double max_violation = 0.0;   // largest violation seen during separation
};

struct CuttingPlaneResult {
  bool converged = false;        // a full sweep added nothing and every QP solve converged
  bool qp_converged = true;
  std::vector<SweepRecord> trace;
};

// Repeats: separate every block, add all violated cuts, re-solve once.
// Stops after a sweep that adds nothing.
CuttingPlaneResult run_cutting_plane(WorkingQp& qp, Separator& separator,
                                     const CuttingPlaneOptions& options);

// `sweep,added,objective,max_violation` CSV.
void write_sweep_trace(std::ostream& out, const std::vector<SweepRecord>& trace);

// ---------------------------------------------------------------------------
// Two-margin piecewise objective with confidence-weighted candidate margins.

struct Violator {
  LabelTuple tuple;
  std::uint64_t code = 0;
  double value = 0.0;      // delta + score(y) - set_score
  double violation = 0.0;  // value - current slack
};

// Exact separation for one piece: argmax over all tuples of
// delta(candidates, y) + score(y) - set_score, ties to the lowest tuple code.
// Returns the maximizer when its violation exceeds eps1.
std::optional<Violator> most_violated(const WeightModel& model, const Observation& observation,
                                      const Piece& piece, double current_slack,
                                      double eps1 = 1e-3, SetEnergy mode = SetEnergy::kSum);

// Same, but never filters; used by objective evaluation and post-checks.
Violator max_margin_value(const PieceScorer& scorer, const TupleSpace& space,
                          const Observation& observation, const Piece& piece, SetEnergy mode,
                          std::vector<double>& scratch);

enum class ConstraintKind { kCandidateSet, kCandidateConfidence };

struct MarginConstraint {
  ConstraintKind kind = ConstraintKind::kCandidateSet;
  std::size_t piece = 0;
  LabelTuple violator;       // candidate-set rows
  double delta = 0.0;
  std::size_t candidate = 0; // confidence rows
  double confidence = 0.0;
  SparseVector features;     // f(y'') - E(candidates) or f(y_j)
};

struct WorkingSet {
  std::vector<std::vector<LabelTuple>> violators;  // per piece
  std::size_t confidence_rows = 0;

  std::size_t candidate_set_rows() const;
};

struct QPSolution {
  std::vector<double> weights;
  std::vector<double> xi;               // per piece
  std::vector<std::vector<double>> nu;  // per piece, per candidate
  double objective = 0.0;
  double dual_objective = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
};

// Holds the working QP for one training set so that repeated solves (e.g.
// across confidence updates) warm-start from the previous duals and
// working sets.
class TwoMarginProblem final : public Separator {
 public:
  TwoMarginProblem(const TrainingSet& data, double c1, double c2,
                   SetEnergy mode = SetEnergy::kSum);

  void set_confidence(const ConfidenceTable& confidence);
  CuttingPlaneResult solve(const CuttingPlaneOptions& options);
  // Re-solves the current working set without generating constraints.
  QpStatus solve_qp(const SolveOptions& options) { return qp_.solve(options); }
  void add_violator(std::size_t piece, const LabelTuple& tuple);

  QPSolution solution() const;
  WorkingSet working_set() const;
  std::vector<MarginConstraint> constraints() const;
  WeightModel model() const;
  const WorkingQp& qp() const noexcept { return qp_; }

  std::size_t num_blocks() const override { return data_->size(); }
  double separate(std::size_t block, const WorkingQp& qp, double eps,
                  std::vector<Cut>& out) const override;
  void add_cut(WorkingQp& qp, std::size_t block, Cut cut) override;

 private:
  const TrainingSet* data_;
  double c1_;
  double c2_;
  SetEnergy mode_;
  TupleSpace space_;
  WorkingQp qp_;
  std::vector<SparseVector> set_features_;                  // E(candidates) per piece
  std::vector<std::vector<SparseVector>> candidate_features_;
  std::vector<std::size_t> confidence_group_offset_;
};

// Builds a TwoMarginProblem from scratch and runs the cutting plane loop.
QPSolution cutting_plane(const TrainingSet& data, const ConfidenceTable& confidence, double c1,
                         double c2, const CuttingPlaneOptions& options = {},
                         std::vector<SweepRecord>* trace = nullptr,
                         SetEnergy mode = SetEnergy::kSum);

// Solves the QP restricted to `working_set` plus every confidence row.
QPSolution solve_working_qp(const TrainingSet& data, const WorkingSet& working_set,
                            const ConfidenceTable& confidence, double c1, double c2,
                            const SolveOptions& options = {}, SetEnergy mode = SetEnergy::kSum);

}  // namespace ambigseq
