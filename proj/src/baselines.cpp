#include "ambigseq/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "ambigseq/errors.hpp"
#include "ambigseq/parallel.hpp"
#include "ambigseq/random.hpp"

namespace ambigseq {

namespace {

std::vector<std::uint64_t> candidate_codes(const TupleSpace& space, const Piece& piece) {
  std::vector<std::uint64_t> codes;
  codes.reserve(piece.candidates.size());
  for (const auto& y : piece.candidates) codes.push_back(space.encode(y));
  std::sort(codes.begin(), codes.end());
  return codes;
}

bool contains(const std::vector<std::uint64_t>& sorted, std::uint64_t code) {
  return std::binary_search(sorted.begin(), sorted.end(), code);
}

AlternationRecord single_round(std::size_t round, double objective, std::size_t rows,
                               const CuttingPlaneResult& cp, std::string reason) {
  AlternationRecord r;
  r.alternation = round;
  r.objective = objective;
  r.constraints_total = rows;
  r.sweeps = cp.trace.size();
  r.qp_converged = cp.converged;
  r.stop_reason = std::move(reason);
  return r;
}

// Lazily generated non-candidate hinges, each with its own slack, on top of
// one averaged-candidate row per piece.
class ClplSeparator final : public Separator {
 public:
  ClplSeparator(const TrainingSet& data, double c1, double c2, NonCandidateSign sign,
                WorkingQp& qp)
      : data_(data), space_(data.tuple_space()), c2_n_(c2 / static_cast<double>(data.size())),
        sign_(sign), codes_(data.size()), groups_(data.size()) {
    const double c1_n = c1 / static_cast<double>(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Piece& piece = data.pieces[i];
      SparseVector mean;
      for (const auto& y : piece.candidates)
        mean = SparseVector::combine(1.0, mean, 1.0,
                                     joint_features(*data.index, data.observations[i], y));
      mean = mean.scaled(1.0 / static_cast<double>(piece.candidates.size()));
      const auto g = qp.add_group(c1_n);
      qp.add_row(g, 0, std::move(mean), 1.0);
      codes_[i] = candidate_codes(space_, piece);
    }
  }

  std::size_t num_blocks() const override { return data_.size(); }

  double separate(std::size_t block, const WorkingQp& qp, double eps,
                  std::vector<Cut>& out) const override {
    const PieceScorer scorer(*data_.index, data_.width, qp.weights());
    std::vector<double> scores;
    scorer.score_all(data_.observations[block], scores);
    const double orient = sign_ == NonCandidateSign::kPenalizePositive ? -1.0 : 1.0;
    double worst = 0.0;
    for (std::uint64_t code = 0; code < space_.size(); ++code) {
      if (contains(codes_[block], code)) continue;
      const auto it = groups_[block].find(code);
      const double slack = it == groups_[block].end() ? 0.0 : qp.slack(it->second);
      const double violation = 1.0 - orient * scores[code] - slack;
      worst = std::max(worst, violation);
      if (violation > eps && it == groups_[block].end()) {
        Cut cut;
        cut.key = code;
        cut.a = joint_features(*data_.index, data_.observations[block], space_.decode(code))
                    .scaled(orient);
        cut.b = 1.0;
        cut.violation = violation;
        out.push_back(std::move(cut));
      }
    }
    return worst;
  }

  void add_cut(WorkingQp& qp, std::size_t block, Cut cut) override {
    const auto g = qp.add_group(c2_n_);
    groups_[block].emplace(cut.key, g);
    qp.add_row(g, cut.key, std::move(cut.a), cut.b);
  }

 private:
  const TrainingSet& data_;
  TupleSpace space_;
  double c2_n_;
  NonCandidateSign sign_;
  std::vector<std::vector<std::uint64_t>> codes_;
  std::vector<std::unordered_map<std::uint64_t, WorkingQp::GroupId>> groups_;
};

// Two slacks per piece: group 2i for candidate competitors of y*, group
// 2i+1 for non-candidates.
class CllpSeparator final : public Separator {
 public:
  CllpSeparator(const TrainingSet& data, const std::vector<LabelTuple>& identified, double c1,
                double c2, WorkingQp& qp)
      : data_(data), space_(data.tuple_space()), codes_(data.size()), star_(data.size()),
        star_features_(data.size()) {
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      qp.add_group(c1 * inv_n);
      qp.add_group(c2 * inv_n);
      codes_[i] = candidate_codes(space_, data.pieces[i]);
      star_[i] = space_.encode(identified[i]);
      star_features_[i] = joint_features(*data.index, data.observations[i], identified[i]);
    }
  }

  std::size_t num_blocks() const override { return data_.size(); }

  double separate(std::size_t block, const WorkingQp& qp, double eps,
                  std::vector<Cut>& out) const override {
    const PieceScorer scorer(*data_.index, data_.width, qp.weights());
    std::vector<double> scores;
    scorer.score_all(data_.observations[block], scores);
    const double base = scores[star_[block]];
    constexpr double kNone = -std::numeric_limits<double>::infinity();
    double best[2] = {kNone, kNone};
    std::uint64_t arg[2] = {0, 0};
    for (std::uint64_t code = 0; code < space_.size(); ++code) {
      if (code == star_[block]) continue;
      const int side = contains(codes_[block], code) ? 0 : 1;
      const double value = 1.0 + scores[code] - base;
      if (value > best[side]) {
        best[side] = value;
        arg[side] = code;
      }
    }
    double worst = 0.0;
    for (int side = 0; side < 2; ++side) {
      if (best[side] == kNone) continue;
      const auto group = 2 * block + static_cast<std::size_t>(side);
      const double violation = best[side] - qp.slack(group);
      worst = std::max(worst, violation);
      if (violation > eps && !qp.has_row(group, arg[side])) {
        Cut cut;
        cut.key = arg[side] * 2 + static_cast<std::uint64_t>(side);
        cut.a = SparseVector::combine(
            1.0, star_features_[block], -1.0,
            joint_features(*data_.index, data_.observations[block], space_.decode(arg[side])));
        cut.b = 1.0;
        cut.violation = violation;
        out.push_back(std::move(cut));
      }
    }
    return worst;
  }

  void add_cut(WorkingQp& qp, std::size_t block, Cut cut) override {
    const auto side = static_cast<std::size_t>(cut.key % 2);
    qp.add_row(2 * block + side, cut.key / 2, std::move(cut.a), cut.b);
  }

 private:
  const TrainingSet& data_;
  TupleSpace space_;
  std::vector<std::vector<std::uint64_t>> codes_;
  std::vector<std::uint64_t> star_;
  std::vector<SparseVector> star_features_;
};

void require_pieces(const TrainingSet& data) {
  if (data.size() == 0) throw DataError("training set has no pieces");
}

}  // namespace

BaselineResult train_ssvm(const TrainingSet& data, double c, const CuttingPlaneOptions& options) {
  require_pieces(data);
  if (!(c > 0.0)) throw ConfigError("C must be > 0");
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!data.pieces[i].is_exact())
      throw DataError("S-SVM needs exact pieces; piece " + std::to_string(i) + " has " +
                      std::to_string(data.pieces[i].candidates.size()) + " candidates");
  TwoMarginProblem problem(data, c, 0.0);
  const CuttingPlaneResult cp = problem.solve(options);
  BaselineResult result{problem.model(), {}, cp.converged};
  const double objective = objective_j0(result.model, data, c);
  result.trace.push_back(single_round(1, objective, problem.qp().num_rows(), cp,
                                      cp.converged ? "converged" : "max_sweeps"));
  return result;
}

TrainingSet naive_pseudo_gold(const TrainingSet& data, std::uint64_t seed) {
  TrainingSet pseudo = data;
  Rng rng(mix_seed(seed, 0x4e41495645ULL));
  for (auto& piece : pseudo.pieces) {
    const auto pick = uniform_below(rng, piece.candidates.size());
    LabelTuple chosen = piece.candidates[pick];
    piece.candidates.assign(1, std::move(chosen));
  }
  return pseudo;
}

BaselineResult train_naive(const TrainingSet& data, double c, std::uint64_t seed,
                           const CuttingPlaneOptions& options) {
  require_pieces(data);
  const TrainingSet pseudo = naive_pseudo_gold(data, seed);
  BaselineResult result = train_ssvm(pseudo, c, options);
  return result;
}

BaselineResult train_clpl(const TrainingSet& data, double c1, double c2,
                          const CuttingPlaneOptions& options, NonCandidateSign sign) {
  require_pieces(data);
  if (!(c1 > 0.0) || !(c2 >= 0.0)) throw ConfigError("CLPL needs C1 > 0 and C2 >= 0");
  WorkingQp qp(data.index->dimension());
  ClplSeparator separator(data, c1, c2, sign, qp);
  const CuttingPlaneResult cp = run_cutting_plane(qp, separator, options);
  const auto w = qp.weights();
  BaselineResult result{WeightModel(data.index, data.width, std::vector<double>(w.begin(), w.end())),
                        {},
                        cp.converged};
  result.trace.push_back(single_round(1, clpl_objective(result.model, data, c1, c2, sign),
                                      qp.num_rows(), cp, cp.converged ? "converged" : "max_sweeps"));
  return result;
}

double clpl_objective(const WeightModel& model, const TrainingSet& data, double c1, double c2,
                      NonCandidateSign sign) {
  require_pieces(data);
  const TupleSpace space = data.tuple_space();
  const double orient = sign == NonCandidateSign::kPenalizePositive ? -1.0 : 1.0;
  const std::size_t n = data.size();
  std::vector<double> first(n), second(n);
  parallel_for(n, [&](std::size_t i) {
    const PieceScorer scorer(model);
    std::vector<double> scores;
    scorer.score_all(data.observations[i], scores);
    const auto codes = candidate_codes(space, data.pieces[i]);
    double mean = 0.0;
    for (auto code : codes) mean += scores[code];
    mean /= static_cast<double>(codes.size());
    first[i] = std::max(0.0, 1.0 - mean);
    double sum = 0.0;
    for (std::uint64_t code = 0; code < space.size(); ++code)
      if (!contains(codes, code)) sum += std::max(0.0, 1.0 - orient * scores[code]);
    second[i] = sum;
  });
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a += first[i];
    b += second[i];
  }
  return 0.5 * model.squared_norm() + c1 / static_cast<double>(n) * a +
         c2 / static_cast<double>(n) * b;
}

namespace {

struct PlMargin {
  double margin = 0.0;  // max candidate score - max non-candidate score
  std::uint64_t candidate = 0;
  std::uint64_t rival = 0;
};

PlMargin pl_margin(const std::vector<double>& scores, const std::vector<std::uint64_t>& codes,
                   double scale) {
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  double best_c = kNone, best_n = kNone;
  PlMargin m;
  for (std::uint64_t code = 0; code < scores.size(); ++code) {
    const double s = scale * scores[code];
    if (contains(codes, code)) {
      if (s > best_c) {
        best_c = s;
        m.candidate = code;
      }
    } else if (s > best_n) {
      best_n = s;
      m.rival = code;
    }
  }
  m.margin = best_c - best_n;
  return m;
}

}  // namespace

BaselineResult train_plsvm(const TrainingSet& data, double c, const PlsvmOptions& options) {
  require_pieces(data);
  if (!(c > 0.0)) throw ConfigError("C must be > 0");
  if (options.epochs < 1) throw ConfigError("PL-SVM needs at least one epoch");
  const TupleSpace space = data.tuple_space();
  const std::size_t n = data.size();
  std::vector<std::vector<std::uint64_t>> codes(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (data.pieces[i].candidates.size() >= space.size())
      throw ConfigError("PL-SVM margin is undefined: piece " + std::to_string(i) +
                        " has no non-candidate tuples");
    codes[i] = candidate_codes(space, data.pieces[i]);
  }

  // w = scale * v keeps the shrink step O(1).
  const double lambda = 1.0 / c;
  const double radius2 = 1.0 / lambda;
  std::vector<double> v(data.index->dimension(), 0.0);
  double scale = 1.0;
  double norm2_v = 0.0;
  std::vector<std::size_t> order(n);
  Rng rng(mix_seed(options.seed, 0x504c53564dULL));
  std::vector<double> scores;
  std::uint64_t t = 0;
  BaselineResult result{WeightModel(data.index, data.width), {}, true};
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle_in_place(std::span<std::size_t>(order), rng);
    for (const std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const PieceScorer scorer(*data.index, data.width, v);
      scorer.score_all(data.observations[i], scores);
      const PlMargin m = pl_margin(scores, codes[i], scale);
      const double shrink = 1.0 - eta * lambda;
      if (shrink <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
        norm2_v = 0.0;
      } else {
        scale *= shrink;
      }
      if (1.0 - m.margin > 0.0) {
        const SparseVector step = SparseVector::combine(
            1.0, joint_features(*data.index, data.observations[i], space.decode(m.candidate)), -1.0,
            joint_features(*data.index, data.observations[i], space.decode(m.rival)));
        const double factor = eta / scale;
        norm2_v += 2.0 * factor * step.dot(v) + factor * factor * step.squared_norm();
        step.add_to(v, factor);
      }
      const double norm2_w = scale * scale * norm2_v;
      if (norm2_w > radius2) scale *= std::sqrt(radius2 / norm2_w);
      if (scale < 1e-9) {
        for (double& x : v) x *= scale;
        norm2_v *= scale * scale;
        scale = 1.0;
      }
    }
    std::vector<double> w(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) w[k] = scale * v[k];
    result.model = WeightModel(data.index, data.width, std::move(w));
    AlternationRecord record;
    record.alternation = epoch;
    record.objective = plsvm_objective(result.model, data, c);
    record.stop_reason = epoch == options.epochs ? "max_epochs" : "continue";
    result.trace.push_back(record);
  }
  return result;
}

double plsvm_objective(const WeightModel& model, const TrainingSet& data, double c) {
  require_pieces(data);
  const TupleSpace space = data.tuple_space();
  const std::size_t n = data.size();
  std::vector<double> hinge(n);
  parallel_for(n, [&](std::size_t i) {
    const auto codes = candidate_codes(space, data.pieces[i]);
    if (codes.size() >= space.size()) throw ConfigError("PL-SVM margin is undefined");
    const PieceScorer scorer(model);
    std::vector<double> scores;
    scorer.score_all(data.observations[i], scores);
    hinge[i] = std::max(0.0, 1.0 - pl_margin(scores, codes, 1.0).margin);
  });
  double total = 0.0;
  for (double h : hinge) total += h;
  return 0.5 * model.squared_norm() + c / static_cast<double>(n) * total;
}

std::vector<LabelTuple> identify_candidates(const WeightModel& model, const TrainingSet& data) {
  const TupleSpace space = data.tuple_space();
  std::vector<LabelTuple> out(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    const PieceScorer scorer(model);
    const Piece& piece = data.pieces[i];
    std::size_t best = 0;
    double best_score = scorer.score(data.observations[i], piece.candidates[0]);
    for (std::size_t j = 1; j < piece.candidates.size(); ++j) {
      const double s = scorer.score(data.observations[i], piece.candidates[j]);
      if (s > best_score ||
          (s == best_score && space.encode(piece.candidates[j]) < space.encode(piece.candidates[best]))) {
        best_score = s;
        best = j;
      }
    }
    out[i] = piece.candidates[best];
  });
  return out;
}

BaselineResult train_cllp(const TrainingSet& data, double c1, double c2, std::size_t rounds,
                          const CuttingPlaneOptions& options) {
  require_pieces(data);
  if (!(c1 > 0.0) || !(c2 >= 0.0)) throw ConfigError("CLLP needs C1 > 0 and C2 >= 0");
  if (rounds < 1) throw ConfigError("CLLP needs at least one round");
  BaselineResult result{WeightModel(data.index, data.width), {}, true};
  std::vector<LabelTuple> previous;
  for (std::size_t round = 1; round <= rounds; ++round) {
    const std::vector<LabelTuple> identified = identify_candidates(result.model, data);
    WorkingQp qp(data.index->dimension());
    CllpSeparator separator(data, identified, c1, c2, qp);
    const CuttingPlaneResult cp = run_cutting_plane(qp, separator, options);
    const auto w = qp.weights();
    result.model = WeightModel(data.index, data.width, std::vector<double>(w.begin(), w.end()));
    result.converged = result.converged && cp.converged;
    const bool stable = identified == previous;
    std::string reason = stable ? "identification_stable"
                                : (round == rounds ? "max_rounds" : "continue");
    result.trace.push_back(single_round(round, cllp_objective(result.model, data, identified, c1, c2),
                                        qp.num_rows(), cp, reason));
    if (stable) break;
    previous = identified;
  }
  return result;
}

double cllp_objective(const WeightModel& model, const TrainingSet& data,
                      const std::vector<LabelTuple>& identified, double c1, double c2) {
  require_pieces(data);
  if (identified.size() != data.size()) throw DataError("identified tuples do not match pieces");
  const TupleSpace space = data.tuple_space();
  const std::size_t n = data.size();
  std::vector<double> first(n), second(n);
  parallel_for(n, [&](std::size_t i) {
    const PieceScorer scorer(model);
    std::vector<double> scores;
    scorer.score_all(data.observations[i], scores);
    const auto codes = candidate_codes(space, data.pieces[i]);
    const auto star = space.encode(identified[i]);
    double best_c = 0.0, best_n = 0.0;  // star itself gives 0; empty domains give 0
    for (std::uint64_t code = 0; code < space.size(); ++code) {
      if (code == star) continue;
      const double v = 1.0 + scores[code] - scores[star];
      if (contains(codes, code))
        best_c = std::max(best_c, v);
      else
        best_n = std::max(best_n, v);
    }
    first[i] = best_c;
    second[i] = best_n;
  });
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a += first[i];
    b += second[i];
  }
  return 0.5 * model.squared_norm() + c1 / static_cast<double>(n) * a +
         c2 / static_cast<double>(n) * b;
}

double objective_j0(const WeightModel& model, const TrainingSet& data, double c, SetEnergy mode) {
  require_pieces(data);
  const TupleSpace space = data.tuple_space();
  const std::size_t n = data.size();
  std::vector<double> term(n);
  parallel_for(n, [&](std::size_t i) {
    const PieceScorer scorer(model);
    std::vector<double> scores;
    scorer.score_all(data.observations[i], scores);
    const auto codes = candidate_codes(space, data.pieces[i]);
    const auto s = static_cast<double>(codes.size());
    double energy = 0.0;
    for (auto code : codes) energy += scores[code];
    if (mode == SetEnergy::kMean) energy /= s;
    double best = 0.0;
    for (std::uint64_t code = 0; code < space.size(); ++code)
      if (!contains(codes, code)) best = std::max(best, s + scores[code] - energy);
    term[i] = best;
  });
  double total = 0.0;
  for (double x : term) total += x;
  return 0.5 * model.squared_norm() + c / static_cast<double>(n) * total;
}

ConstraintCounts constraint_counts(std::uint64_t n, std::uint64_t length, std::uint64_t k,
                                   std::uint64_t q) {
  if (n == 0 || length == 0 || k == 0 || q == 0) throw ConfigError("counts need positive N, L, k, q");
  if (k > q) throw ConfigError("k must not exceed q");
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::pow;
  const auto l = static_cast<unsigned>(length);
  const cpp_int big_n = n;
  const cpp_int ql = pow(cpp_int(q), l);
  const cpp_int kl = pow(cpp_int(k), l);
  ConstraintCounts counts;
  counts.average = big_n * (ql - kl + 1);
  counts.sequence = big_n * (ql - 1);
  counts.piecewise = big_n * cpp_int(length - 1) * cpp_int(q) * cpp_int(q);
  return counts;
}

BaselineKind parse_baseline(std::string_view name) {
  if (name == "ssvm") return BaselineKind::kSsvm;
  if (name == "naive") return BaselineKind::kNaive;
  if (name == "clpl") return BaselineKind::kClpl;
  if (name == "plsvm") return BaselineKind::kPlsvm;
  if (name == "cllp") return BaselineKind::kCllp;
  throw ConfigError("unknown baseline '" + std::string(name) + "'");
}

std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kSsvm: return "ssvm";
    case BaselineKind::kNaive: return "naive";
    case BaselineKind::kClpl: return "clpl";
    case BaselineKind::kPlsvm: return "plsvm";
    case BaselineKind::kCllp: return "cllp";
  }
  return "?";
}

}  // namespace ambigseq
