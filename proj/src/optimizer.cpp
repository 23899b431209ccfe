#include "ambigseq/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ambigseq/errors.hpp"
#include "ambigseq/parallel.hpp"
#include "ambigseq/text.hpp"

namespace ambigseq {

// ---------------------------------------------------------------------------
// WorkingQp

WorkingQp::WorkingQp(std::size_t dimension) : weights_(dimension, 0.0) {}

WorkingQp::GroupId WorkingQp::add_group(double capacity) {
  if (!(capacity >= 0.0) || !std::isfinite(capacity))
    throw ConfigError("group capacity must be finite and >= 0");
  groups_.push_back(Group{capacity, {}, {}});
  return groups_.size() - 1;
}

void WorkingQp::set_capacity(GroupId id, double capacity) {
  if (!(capacity >= 0.0) || !std::isfinite(capacity))
    throw ConfigError("group capacity must be finite and >= 0");
  Group& g = groups_.at(id);
  g.capacity = capacity;
  double sum = 0.0;
  for (const auto& r : g.rows) sum += r.alpha;
  if (sum <= capacity) return;
  const double factor = sum > 0.0 ? capacity / sum : 0.0;
  for (auto& r : g.rows) {
    const double next = r.alpha * factor;
    if (next != r.alpha) r.a.add_to(weights_, next - r.alpha);
    r.alpha = next;
  }
}

bool WorkingQp::has_row(GroupId group, std::uint64_t key) const {
  return groups_.at(group).keys.count(key) > 0;
}

void WorkingQp::add_row(GroupId id, std::uint64_t key, SparseVector a, double b) {
  if (!a.all_finite() || !std::isfinite(b)) throw DataError("non-finite constraint row");
  if (!a.empty() && a.max_index() >= weights_.size())
    throw DataError("constraint row exceeds the feature dimension");
  Group& g = groups_.at(id);
  if (!g.keys.insert(key).second) return;
  const double norm2 = a.squared_norm();
  g.rows.push_back(Row{key, std::move(a), b, norm2, 0.0});
  ++num_rows_;
}

double WorkingQp::group_dual_sum(GroupId group) const {
  double sum = 0.0;
  for (const auto& r : groups_.at(group).rows) sum += r.alpha;
  return sum;
}

void WorkingQp::rebuild_weights() {
  std::fill(weights_.begin(), weights_.end(), 0.0);
  for (const auto& g : groups_)
    for (const auto& r : g.rows)
      if (r.alpha != 0.0) r.a.add_to(weights_, r.alpha);
}

double WorkingQp::group_violation(const Group& g) const {
  if (g.capacity <= 0.0 || g.rows.empty()) return 0.0;
  double sum = 0.0;
  double top = 0.0;  // the implicit slack row has gradient 0
  double bottom = std::numeric_limits<double>::infinity();
  for (const auto& r : g.rows) {
    const double grad = r.b - r.a.dot(weights_);
    sum += r.alpha;
    top = std::max(top, grad);
    if (r.alpha > 0.0) bottom = std::min(bottom, grad);
  }
  if (g.capacity - sum > 0.0) bottom = std::min(bottom, 0.0);
  return std::isinf(bottom) ? 0.0 : std::max(0.0, top - bottom);
}

// Pairwise ascent steps on one group. Returns the group's KKT violation
// before the first step.
double WorkingQp::optimize_group(Group& g, double tol) {
  if (g.capacity <= 0.0 || g.rows.empty()) return 0.0;
  const std::size_t m = g.rows.size();
  std::vector<double> grad(m);
  for (std::size_t r = 0; r < m; ++r) grad[r] = g.rows[r].b - g.rows[r].a.dot(weights_);

  constexpr std::ptrdiff_t kSlack = -1;
  double first = 0.0;
  const std::size_t max_steps = 2 * m + 2;
  for (std::size_t step = 0; step < max_steps; ++step) {
    double sum = 0.0;
    for (const auto& r : g.rows) sum += r.alpha;
    const double free_capacity = std::max(0.0, g.capacity - sum);

    std::ptrdiff_t up = kSlack, down = kSlack;
    double g_up = 0.0;
    double g_down = free_capacity > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      if (grad[r] > g_up) {
        g_up = grad[r];
        up = static_cast<std::ptrdiff_t>(r);
      }
      if (g.rows[r].alpha > 0.0 && grad[r] < g_down) {
        g_down = grad[r];
        down = static_cast<std::ptrdiff_t>(r);
      }
    }
    const double violation = std::isinf(g_down) ? 0.0 : g_up - g_down;
    if (step == 0) first = std::max(0.0, violation);
    if (violation <= tol || up == down) break;

    double curvature;
    double available;
    if (up == kSlack) {
      curvature = g.rows[down].norm2;
    } else if (down == kSlack) {
      curvature = g.rows[up].norm2;
    } else {
      curvature = g.rows[up].norm2 + g.rows[down].norm2 -
                  2.0 * g.rows[up].a.dot(g.rows[down].a);
    }
    available = down == kSlack ? free_capacity : g.rows[down].alpha;
    double t = curvature > 1e-300 ? std::min(available, violation / curvature) : available;
    if (!(t > 0.0)) break;

    if (up != kSlack) {
      g.rows[up].alpha += t;
      g.rows[up].a.add_to(weights_, t);
    }
    if (down != kSlack) {
      Row& r = g.rows[down];
      if (t >= r.alpha) {
        t = r.alpha;
        r.a.add_to(weights_, -t);
        r.alpha = 0.0;
      } else {
        r.alpha -= t;
        r.a.add_to(weights_, -t);
      }
    }
    for (std::size_t r = 0; r < m; ++r) grad[r] = g.rows[r].b - g.rows[r].a.dot(weights_);
  }
  return first;
}

QpStatus WorkingQp::solve(const SolveOptions& options) {
  rebuild_weights();
  QpStatus status;
  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double worst = 0.0;
    for (auto& g : groups_) worst = std::max(worst, optimize_group(g, options.tol));
    status.sweeps = sweep;
    status.kkt_violation = worst;
    if (worst <= options.tol) {
      status.converged = true;
      break;
    }
  }
  rebuild_weights();
  return status;
}

double WorkingQp::slack(GroupId id) const {
  const Group& g = groups_.at(id);
  double worst = 0.0;
  for (const auto& r : g.rows) worst = std::max(worst, r.b - r.a.dot(weights_));
  return worst;
}

double WorkingQp::primal_objective() const {
  double norm2 = 0.0;
  for (double v : weights_) norm2 += v * v;
  double loss = 0.0;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].capacity > 0.0) loss += groups_[g].capacity * slack(g);
  }
  return 0.5 * norm2 + loss;
}

double WorkingQp::dual_objective() const {
  double norm2 = 0.0;
  for (double v : weights_) norm2 += v * v;
  double linear = 0.0;
  for (const auto& g : groups_)
    for (const auto& r : g.rows) linear += r.alpha * r.b;
  return linear - 0.5 * norm2;
}

double WorkingQp::max_kkt_violation() const {
  double worst = 0.0;
  for (const auto& g : groups_) worst = std::max(worst, group_violation(g));
  return worst;
}

// ---------------------------------------------------------------------------
// Cutting plane loop

CuttingPlaneResult run_cutting_plane(WorkingQp& qp, Separator& separator,
                                     const CuttingPlaneOptions& options) {
  CuttingPlaneResult result;
  if (qp.num_rows() > 0) result.qp_converged = qp.solve(options.qp).converged;
  const std::size_t n = separator.num_blocks();
  std::vector<std::vector<Cut>> cuts(n);
  std::vector<double> violations(n);
  bool exhausted = false;
  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    for (auto& c : cuts) c.clear();
    parallel_for(
        n, [&](std::size_t i) { violations[i] = separator.separate(i, qp, options.eps1, cuts[i]); },
        options.threads);
    SweepRecord record;
    record.sweep = sweep;
    record.max_violation = n ? *std::max_element(violations.begin(), violations.end()) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& cut : cuts[i]) {
        separator.add_cut(qp, i, std::move(cut));
        ++record.added;
      }
    }
    if (record.added > 0) {
      const QpStatus status = qp.solve(options.qp);
      result.qp_converged = result.qp_converged && status.converged;
    }
    record.objective = qp.primal_objective();
    record.dual_objective = qp.dual_objective();
    result.trace.push_back(record);
    if (record.added == 0) {
      exhausted = true;
      break;
    }
  }
  result.converged = exhausted && result.qp_converged;
  return result;
}

void write_sweep_trace(std::ostream& out, const std::vector<SweepRecord>& trace) {
  out << "sweep,added,objective,max_violation\n";
  for (const auto& r : trace)
    out << r.sweep << ',' << r.added << ',' << text::format_double(r.objective) << ','
        << text::format_double(r.max_violation) << '\n';
}

// ---------------------------------------------------------------------------
// Separation for the two-margin objective

Violator max_margin_value(const PieceScorer& scorer, const TupleSpace& space,
                          const Observation& observation, const Piece& piece, SetEnergy mode,
                          std::vector<double>& scores) {
  scorer.score_all(observation, scores);
  std::vector<std::uint64_t> members;
  members.reserve(piece.candidates.size());
  double energy = 0.0;
  for (const auto& y : piece.candidates) {
    const auto code = space.encode(y);
    members.push_back(code);
    energy += scores[code];
  }
  const auto s = static_cast<double>(piece.candidates.size());
  if (mode == SetEnergy::kMean) energy /= s;

  Violator best;
  best.value = -std::numeric_limits<double>::infinity();
  for (std::uint64_t code = 0; code < space.size(); ++code) {
    const bool member = std::find(members.begin(), members.end(), code) != members.end();
    const double value = (member ? 0.0 : s) + scores[code] - energy;
    if (value > best.value) {
      best.value = value;
      best.code = code;
    }
  }
  best.tuple = space.decode(best.code);
  best.violation = best.value;
  return best;
}

std::optional<Violator> most_violated(const WeightModel& model, const Observation& observation,
                                      const Piece& piece, double current_slack, double eps1,
                                      SetEnergy mode) {
  const PieceScorer scorer(model);
  const TupleSpace space(model.index().num_labels(), model.width());
  std::vector<double> scratch;
  Violator v = max_margin_value(scorer, space, observation, piece, mode, scratch);
  v.violation = v.value - current_slack;
  if (v.violation > eps1) return v;
  return std::nullopt;
}

std::size_t WorkingSet::candidate_set_rows() const {
  std::size_t total = 0;
  for (const auto& v : violators) total += v.size();
  return total;
}

TwoMarginProblem::TwoMarginProblem(const TrainingSet& data, double c1, double c2,
                                   SetEnergy mode)
    : data_(&data),
      c1_(c1),
      c2_(c2),
      mode_(mode),
      space_(data.num_labels(), data.width),
      qp_(data.index->dimension()) {
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw ConfigError("C1 and C2 must be >= 0");
  const std::size_t n = data.size();
  if (n == 0) throw DataError("training set has no pieces");
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) qp_.add_group(c1 * inv_n);

  set_features_.resize(n);
  candidate_features_.resize(n);
  confidence_group_offset_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Piece& piece = data.pieces[i];
    const double s = static_cast<double>(piece.candidates.size());
    SparseVector total;
    for (const auto& y : piece.candidates) {
      candidate_features_[i].push_back(joint_features(*data.index, data.observations[i], y));
      total = SparseVector::combine(1.0, total, 1.0, candidate_features_[i].back());
    }
    set_features_[i] = mode == SetEnergy::kMean ? total.scaled(1.0 / s) : total;
    confidence_group_offset_[i] = qp_.num_groups();
    for (std::size_t j = 0; j < piece.candidates.size(); ++j) {
      const auto g = qp_.add_group(c2 * inv_n / s);
      qp_.add_row(g, j, candidate_features_[i][j], 1.0);
    }
  }
}

void TwoMarginProblem::set_confidence(const ConfidenceTable& confidence) {
  const std::size_t n = data_->size();
  if (confidence.num_pieces() != n) throw DataError("confidence table size mismatch");
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = confidence[i];
    if (row.size() != data_->pieces[i].candidates.size())
      throw DataError("confidence row does not match the candidate count");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!(row[j] >= 0.0 && row[j] <= 1.0)) throw DataError("confidence outside [0, 1]");
      qp_.set_capacity(confidence_group_offset_[i] + j, c2_ * row[j] * inv_n);
    }
  }
}

CuttingPlaneResult TwoMarginProblem::solve(const CuttingPlaneOptions& options) {
  return run_cutting_plane(qp_, *this, options);
}

double TwoMarginProblem::separate(std::size_t block, const WorkingQp& qp, double eps,
                                  std::vector<Cut>& out) const {
  const PieceScorer scorer(*data_->index, data_->width, qp.weights());
  std::vector<double> scratch;
  const Piece& piece = data_->pieces[block];
  const Violator v =
      max_margin_value(scorer, space_, data_->observations[block], piece, mode_, scratch);
  const double violation = v.value - qp.slack(block);
  if (violation > eps && !qp.has_row(block, v.code)) {
    Cut cut;
    cut.key = v.code;
    cut.b = delta_loss(piece.candidates, v.tuple);
    cut.a = SparseVector::combine(1.0, set_features_[block], -1.0,
                                  joint_features(*data_->index, data_->observations[block], v.tuple));
    cut.violation = violation;
    out.push_back(std::move(cut));
  }
  return violation;
}

void TwoMarginProblem::add_cut(WorkingQp& qp, std::size_t block, Cut cut) {
  qp.add_row(block, cut.key, std::move(cut.a), cut.b);
}

void TwoMarginProblem::add_violator(std::size_t piece, const LabelTuple& tuple) {
  const Piece& p = data_->pieces.at(piece);
  qp_.add_row(piece, space_.encode(tuple),
              SparseVector::combine(1.0, set_features_[piece], -1.0,
                                    joint_features(*data_->index, data_->observations[piece], tuple)),
              delta_loss(p.candidates, tuple));
}

QPSolution TwoMarginProblem::solution() const {
  QPSolution sol;
  const auto w = qp_.weights();
  sol.weights.assign(w.begin(), w.end());
  const std::size_t n = data_->size();
  sol.xi.resize(n);
  sol.nu.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.xi[i] = qp_.slack(i);
    for (const auto& f : candidate_features_[i])
      sol.nu[i].push_back(std::max(0.0, 1.0 - f.dot(w)));
  }
  sol.objective = qp_.primal_objective();
  sol.dual_objective = qp_.dual_objective();
  sol.kkt_residual = qp_.max_kkt_violation();
  return sol;
}

WorkingSet TwoMarginProblem::working_set() const {
  WorkingSet ws;
  const std::size_t n = data_->size();
  ws.violators.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < qp_.group_size(i); ++r)
      ws.violators[i].push_back(space_.decode(qp_.row_key(i, r)));
  for (std::size_t i = 0; i < n; ++i) ws.confidence_rows += data_->pieces[i].candidates.size();
  return ws;
}

std::vector<MarginConstraint> TwoMarginProblem::constraints() const {
  std::vector<MarginConstraint> out;
  const std::size_t n = data_->size();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Piece& piece = data_->pieces[i];
    for (std::size_t r = 0; r < qp_.group_size(i); ++r) {
      MarginConstraint c;
      c.kind = ConstraintKind::kCandidateSet;
      c.piece = i;
      c.violator = space_.decode(qp_.row_key(i, r));
      c.delta = delta_loss(piece.candidates, c.violator);
      c.features = SparseVector::combine(
          1.0, joint_features(*data_->index, data_->observations[i], c.violator), -1.0,
          set_features_[i]);
      out.push_back(std::move(c));
    }
    for (std::size_t j = 0; j < piece.candidates.size(); ++j) {
      MarginConstraint c;
      c.kind = ConstraintKind::kCandidateConfidence;
      c.piece = i;
      c.candidate = j;
      const double cap = qp_.capacity(confidence_group_offset_[i] + j);
      c.confidence = c2_ > 0.0 ? cap / (c2_ * inv_n) : 0.0;
      c.features = candidate_features_[i][j];
      out.push_back(std::move(c));
    }
  }
  return out;
}

WeightModel TwoMarginProblem::model() const {
  const auto w = qp_.weights();
  return WeightModel(data_->index, data_->width, std::vector<double>(w.begin(), w.end()));
}

QPSolution cutting_plane(const TrainingSet& data, const ConfidenceTable& confidence, double c1,
                         double c2, const CuttingPlaneOptions& options,
                         std::vector<SweepRecord>* trace, SetEnergy mode) {
  TwoMarginProblem problem(data, c1, c2, mode);
  problem.set_confidence(confidence);
  auto result = problem.solve(options);
  if (trace) *trace = result.trace;
  QPSolution sol = problem.solution();
  sol.converged = result.converged;
  return sol;
}

QPSolution solve_working_qp(const TrainingSet& data, const WorkingSet& working_set,
                            const ConfidenceTable& confidence, double c1, double c2,
                            const SolveOptions& options, SetEnergy mode) {
  TwoMarginProblem problem(data, c1, c2, mode);
  problem.set_confidence(confidence);
  if (working_set.violators.size() != data.size())
    throw DataError("working set does not match the training set");
  for (std::size_t i = 0; i < data.size(); ++i)
    for (const auto& y : working_set.violators[i]) problem.add_violator(i, y);
  const QpStatus status = problem.solve_qp(options);
  QPSolution sol = problem.solution();
  sol.converged = status.converged;
  return sol;
}

}  // namespace ambigseq
