#include "ambigseq/wdpsl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "ambigseq/errors.hpp"
#include "ambigseq/parallel.hpp"
#include "ambigseq/text.hpp"

namespace ambigseq {

void TrainConfig::validate() const {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ConfigError("C1 and C2 must be > 0");
  if (!(eps > 0.0) || !(eps1 > 0.0) || !(tol > 0.0))
    throw ConfigError("eps, eps1 and tol must be > 0");
  if (knn < 1) throw ConfigError("K must be >= 1");
  if (max_alternations < 1) throw ConfigError("max_alternations must be >= 1");
  if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0))
    throw ConfigError("confidence floor must lie in [0, 1]");
}

ConfidenceTable init_uniform(std::span<const Piece> pieces) {
  ConfidenceTable table;
  table.values.reserve(pieces.size());
  for (const auto& piece : pieces) {
    const auto s = piece.candidates.size();
    table.values.emplace_back(s, 1.0 / static_cast<double>(s));
  }
  return table;
}

ConfidenceTable init_knn(const TrainingSet& data, std::size_t k, std::size_t threads) {
  const std::size_t n = data.size();
  if (k < 1 || n < 2 || k > n - 1)
    throw ConfigError("K=" + std::to_string(k) + " must lie in [1, #pieces-1] (#pieces=" +
                      std::to_string(n) + ")");

  // Unit-normalized input features and an inverted index over them.
  std::vector<SparseVector> vectors(n);
  std::unordered_map<FeatureId, std::vector<std::pair<std::size_t, double>>> postings;
  for (std::size_t i = 0; i < n; ++i) {
    SparseVector v = input_features(*data.index, data.observations[i]);
    const double norm = std::sqrt(v.squared_norm());
    vectors[i] = norm > 0.0 ? v.scaled(1.0 / norm) : v;
    for (const auto& [f, x] : vectors[i].entries()) postings[f].emplace_back(i, x);
  }

  const TupleSpace space = data.tuple_space();
  std::vector<std::vector<std::uint64_t>> codes(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& y : data.pieces[i].candidates) codes[i].push_back(space.encode(y));
    std::sort(codes[i].begin(), codes[i].end());
  }

  ConfidenceTable table;
  table.values.resize(n);
  if (threads == 0) threads = default_thread_count();
  const std::size_t chunks = std::min(threads, n);
  parallel_for(
      chunks,
      [&](std::size_t chunk) {
        std::vector<double> acc(n, 0.0);
        std::vector<bool> touched(n, false);
        std::vector<std::size_t> touched_list;
        for (std::size_t i = chunk; i < n; i += chunks) {
          touched_list.clear();
          for (const auto& [f, x] : vectors[i].entries()) {
            for (const auto& [j, y] : postings.at(f)) {
              if (j == i) continue;
              if (!touched[j]) {
                touched[j] = true;
                touched_list.push_back(j);
              }
              acc[j] += x * y;
            }
          }
          auto closer = [&](std::size_t a, std::size_t b) {
            return acc[a] != acc[b] ? acc[a] > acc[b] : a < b;
          };
          std::vector<std::size_t> neighbours;
          for (auto j : touched_list)
            if (acc[j] > 0.0) neighbours.push_back(j);
          if (neighbours.size() > k) {
            std::partial_sort(neighbours.begin(), neighbours.begin() + static_cast<std::ptrdiff_t>(k),
                              neighbours.end(), closer);
            neighbours.resize(k);
          } else {
            std::sort(neighbours.begin(), neighbours.end(), closer);
            // the rest have similarity 0 and are taken by id
            for (std::size_t j = 0; j < n && neighbours.size() < k; ++j)
              if (j != i && !(touched[j] && acc[j] > 0.0)) neighbours.push_back(j);
          }

          const auto& mine = codes[i];
          std::vector<double> counts(mine.size(), 0.0);
          for (auto j : neighbours)
            for (std::size_t c = 0; c < mine.size(); ++c)
              if (std::binary_search(codes[j].begin(), codes[j].end(), mine[c])) counts[c] += 1.0;
          const bool any = std::any_of(counts.begin(), counts.end(), [](double c) { return c > 0; });
          auto& row = table.values[i];
          row.resize(mine.size());
          // map back from sorted codes to candidate order
          for (std::size_t c = 0; c < data.pieces[i].candidates.size(); ++c) {
            const auto code = space.encode(data.pieces[i].candidates[c]);
            const auto pos = static_cast<std::size_t>(
                std::lower_bound(mine.begin(), mine.end(), code) - mine.begin());
            row[c] = any ? counts[pos] / static_cast<double>(k)
                         : 1.0 / static_cast<double>(mine.size());
          }

          for (auto j : touched_list) {
            acc[j] = 0.0;
            touched[j] = false;
          }
        }
      },
      chunks);
  return table;
}

std::vector<double> update_confidence(std::span<const double> energies, double floor) {
  const std::size_t s = energies.size();
  if (s == 0) throw DataError("confidence update needs at least one candidate");
  for (double e : energies)
    if (!std::isfinite(e)) throw DataError("non-finite candidate energy");
  const auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
  std::vector<double> out(s);
  const double range = *hi - *lo;
  if (!(range > 0.0)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(s));
  } else {
    for (std::size_t j = 0; j < s; ++j) out[j] = (energies[j] - *lo) / range;
  }
  if (floor > 0.0)
    for (double& p : out) p = std::max(p, floor);
  return out;
}

std::vector<double> update_confidence(const WeightModel& model, const Observation& observation,
                                      const Piece& piece, double floor) {
  std::vector<double> energies;
  energies.reserve(piece.candidates.size());
  for (const auto& y : piece.candidates) energies.push_back(score(model, observation, y));
  return update_confidence(energies, floor);
}

double objective_value(const WeightModel& model, const TrainingSet& data,
                       const ConfidenceTable& confidence, double c1, double c2, SetEnergy mode,
                       std::size_t threads) {
  const std::size_t n = data.size();
  if (confidence.num_pieces() != n) throw DataError("confidence table size mismatch");
  double value = 0.5 * model.squared_norm();
  if (n == 0) return value;
  const TupleSpace space = data.tuple_space();
  std::vector<double> margin(n), weighted(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const PieceScorer scorer(model);
        std::vector<double> scratch;
        const Piece& piece = data.pieces[i];
        if (confidence[i].size() != piece.candidates.size())
          throw DataError("confidence row does not match the candidate count");
        const Violator v = max_margin_value(scorer, space, data.observations[i], piece, mode, scratch);
        margin[i] = std::max(0.0, v.value);
        double sum = 0.0;
        for (std::size_t j = 0; j < piece.candidates.size(); ++j)
          sum += confidence[i][j] *
                 std::max(0.0, 1.0 - scratch[space.encode(piece.candidates[j])]);
        weighted[i] = sum;
      },
      threads);
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a += margin[i];
    b += weighted[i];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (c1 != 0.0) value += c1 * inv_n * a;
  if (c2 != 0.0) value += c2 * inv_n * b;
  return value;
}

namespace {

ConfidenceTable updated_table(const WeightModel& model, const TrainingSet& data, double floor,
                              std::size_t threads) {
  ConfidenceTable table;
  table.values.resize(data.size());
  parallel_for(
      data.size(),
      [&](std::size_t i) {
        const PieceScorer scorer(model);
        std::vector<double> energies;
        for (const auto& y : data.pieces[i].candidates)
          energies.push_back(scorer.score(data.observations[i], y));
        table.values[i] = update_confidence(energies, floor);
      },
      threads);
  return table;
}

}  // namespace

TrainResult train(const TrainingSet& data, const TrainConfig& config) {
  config.validate();
  ConfidenceTable confidence = config.init == InitMode::kKnn
                                   ? init_knn(data, config.knn, config.threads)
                                   : init_uniform(data.pieces);

  TwoMarginProblem problem(data, config.c1, config.c2, config.set_energy);
  problem.set_confidence(confidence);

  CuttingPlaneOptions options;
  options.eps1 = config.eps1;
  options.qp.tol = config.tol;
  options.qp.max_sweeps = config.max_qp_sweeps;
  options.threads = config.threads;

  TrainResult result{WeightModel(data.index, data.width), confidence, {}, {}, "", true};
  if (config.keep_confidence_history) result.history.push_back(confidence);

  WeightModel previous(data.index, data.width);
  double stored_objective = 0.0;
  bool have_stored = false;
  for (std::size_t t = 1; t <= config.max_alternations; ++t) {
    const CuttingPlaneResult cp = problem.solve(options);
    WeightModel current = problem.model();
    if (config.update_confidence)
      confidence = updated_table(current, data, config.confidence_floor, config.threads);

    const double objective = objective_value(current, data, confidence, config.c1, config.c2,
                                             config.set_energy, config.threads);
    double prior;
    if (config.stop_rule_uses_stored_objective && have_stored) {
      prior = stored_objective;
    } else {
      prior = objective_value(previous, data, confidence, config.c1, config.c2, config.set_energy,
                              config.threads);
    }

    AlternationRecord record;
    record.alternation = t;
    record.objective = objective;
    record.constraints_total = problem.qp().num_rows();
    record.sweeps = cp.trace.size();
    record.qp_converged = cp.converged;
    result.converged = result.converged && cp.converged;

    std::string reason;
    if (objective == 0.0) {
      reason = "zero_objective";
    } else if (std::abs((objective - prior) / objective) < config.eps) {
      reason = "converged";
    } else if (t == config.max_alternations) {
      reason = "max_alternations";
    }
    record.stop_reason = reason.empty() ? "continue" : reason;
    result.trace.push_back(record);

    if (config.keep_confidence_history) result.history.push_back(confidence);
    if (config.update_confidence) problem.set_confidence(confidence);
    stored_objective = objective;
    have_stored = true;
    previous = std::move(current);
    if (!reason.empty()) {
      result.stop_reason = reason;
      break;
    }
  }
  result.model = std::move(previous);
  result.confidence = std::move(confidence);
  return result;
}

void write_training_trace(std::ostream& out, const std::vector<AlternationRecord>& trace) {
  out << "alternation,J,constraints_total,stop_reason\n";
  for (const auto& r : trace)
    out << r.alternation << ',' << text::format_double(r.objective) << ',' << r.constraints_total
        << ',' << r.stop_reason << '\n';
}

void write_confidence_dump(std::ostream& out, const ConfidenceTable& confidence) {
  out << "piece_id,candidate_idx,P\n";
  for (std::size_t i = 0; i < confidence.num_pieces(); ++i)
    for (std::size_t j = 0; j < confidence[i].size(); ++j)
      out << i << ',' << j << ',' << text::format_double(confidence[i][j]) << '\n';
}

}  // namespace ambigseq
