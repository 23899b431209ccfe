#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ambigseq/confidence.hpp"
#include "ambigseq/model.hpp"
#include "ambigseq/optimizer.hpp"

namespace ambigseq {

enum class InitMode { kUniform, kKnn };

struct TrainConfig {
  double c1 = 1.0;
  double c2 = 1.0;
  double eps = 1e-3;   // relative objective change that ends the alternation
  double eps1 = 1e-3;  // cutting-plane violation tolerance
  double tol = 1e-6;   // dual KKT tolerance
  std::size_t max_qp_sweeps = 100000;
  std::size_t knn = 10;
  std::size_t max_alternations = 50;
  InitMode init = InitMode::kKnn;
  // false freezes the initial confidences (the equal-confidence ablation
  // when combined with InitMode::kUniform).
  bool update_confidence = true;
  double confidence_floor = 0.0;
  SetEnergy set_energy = SetEnergy::kSum;
  // true: J(w_{t-1}) is the value stored at the previous alternation;
  // false: it is re-evaluated with the freshly updated confidences.
  bool stop_rule_uses_stored_objective = false;
  bool keep_confidence_history = false;
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  void validate() const;  // throws ConfigError
};

struct AlternationRecord {
  std::size_t alternation = 0;
  double objective = 0.0;
  std::size_t constraints_total = 0;
  std::size_t sweeps = 0;
  bool qp_converged = true;
  std::string stop_reason;  // "continue" except on the final row
};

struct TrainResult {
  WeightModel model;
  ConfidenceTable confidence;
  std::vector<AlternationRecord> trace;
  std::vector<ConfidenceTable> history;  // P_0, P_1, ... when requested
  std::string stop_reason;
  bool converged = true;  // false when any inner solve hit its iteration cap
};

// P_ij = 1 / s_i.
ConfidenceTable init_uniform(std::span<const Piece> pieces);

// P_ij = k_ij / K where k_ij counts the K most cosine-similar pieces (by
// input features, ties to the lower piece id) whose candidate set contains
// candidate j. Pieces with all k_ij = 0 fall back to uniform.
ConfidenceTable init_knn(const TrainingSet& data, std::size_t k, std::size_t threads = 0);

// Min-max normalization of candidate energies; all-equal energies give
// 1/s. Values below `floor` are raised to it.
std::vector<double> update_confidence(std::span<const double> energies, double floor = 0.0);
std::vector<double> update_confidence(const WeightModel& model, const Observation& observation,
                                      const Piece& piece, double floor = 0.0);

// 1/2|w|^2 + C1/n sum_i max(0, max_y delta + score(y) - set_score_i)
//          + C2/n sum_ij P_ij max(0, 1 - score(candidate_ij))
double objective_value(const WeightModel& model, const TrainingSet& data,
                       const ConfidenceTable& confidence, double c1, double c2,
                       SetEnergy mode = SetEnergy::kSum, std::size_t threads = 0);

// Alternates cutting-plane solves for w with confidence updates.
TrainResult train(const TrainingSet& data, const TrainConfig& config);

// `alternation,J,constraints_total,stop_reason`
void write_training_trace(std::ostream& out, const std::vector<AlternationRecord>& trace);
// `piece_id,candidate_idx,P`
void write_confidence_dump(std::ostream& out, const ConfidenceTable& confidence);

}  // namespace ambigseq
