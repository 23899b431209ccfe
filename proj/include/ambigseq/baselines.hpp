#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ambigseq/model.hpp"
#include "ambigseq/optimizer.hpp"
#include "ambigseq/wdpsl.hpp"

namespace ambigseq {

enum class BaselineKind { kSsvm, kNaive, kClpl, kPlsvm, kCllp };

// Every trainer, including WD-PSL, reports through this shape so the sweep
// runner and the CLI can treat them alike. Trace rows reuse the alternation
// record: one row per outer round (SSVM has one, PL-SVM one per epoch).
struct BaselineResult {
  WeightModel model;
  std::vector<AlternationRecord> trace;
  bool converged = true;
};

// Margin-rescaled piecewise structured SVM on exact pieces; throws
// DataError if any piece has more than one candidate.
BaselineResult train_ssvm(const TrainingSet& data, double c, const CuttingPlaneOptions& options = {});

// One candidate per piece drawn uniformly as pseudo-gold, then train_ssvm.
TrainingSet naive_pseudo_gold(const TrainingSet& data, std::uint64_t seed);
BaselineResult train_naive(const TrainingSet& data, double c, std::uint64_t seed,
                           const CuttingPlaneOptions& options = {});

// Sign of the non-candidate hinge. kPenalizePositive uses max(0, 1 + score);
// kLiteral uses max(0, 1 - score).
enum class NonCandidateSign { kPenalizePositive, kLiteral };

// 1/2|w|^2 + C1/n sum_i hinge(1 - mean candidate score)
//          + C2/n sum_i sum_{y not a candidate} hinge(1 -/+ score(y))
BaselineResult train_clpl(const TrainingSet& data, double c1, double c2,
                          const CuttingPlaneOptions& options = {},
                          NonCandidateSign sign = NonCandidateSign::kPenalizePositive);
double clpl_objective(const WeightModel& model, const TrainingSet& data, double c1, double c2,
                      NonCandidateSign sign = NonCandidateSign::kPenalizePositive);

struct PlsvmOptions {
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

// 1/2|w|^2 + C/n sum_i hinge(1 - (max candidate score - max non-candidate
// score)) by Pegasos-style subgradient steps with lambda = 1/C. Throws
// ConfigError when a piece has no non-candidates.
BaselineResult train_plsvm(const TrainingSet& data, double c, const PlsvmOptions& options = {});
double plsvm_objective(const WeightModel& model, const TrainingSet& data, double c);

// Highest-scoring candidate per piece, ties to the lowest tuple.
std::vector<LabelTuple> identify_candidates(const WeightModel& model, const TrainingSet& data);

// Self-training: identify y* under the current model, then solve
//   1/2|w|^2 + C1/n sum_i max_{y' candidate} [d(y*,y') + score(y') - score(y*)]
//            + C2/n sum_i max_{y'' not candidate} [d(y*,y'') + score(y'') - score(y*)]
// with 0/1 tuple loss d, for `rounds` rounds.
BaselineResult train_cllp(const TrainingSet& data, double c1, double c2, std::size_t rounds = 5,
                          const CuttingPlaneOptions& options = {});
double cllp_objective(const WeightModel& model, const TrainingSet& data,
                      const std::vector<LabelTuple>& identified, double c1, double c2);

// 1/2|w|^2 + C/n sum_i max(0, max_{y not a candidate} s + score(y) - set_score).
// Pieces without non-candidates contribute 0.
double objective_j0(const WeightModel& model, const TrainingSet& data, double c,
                    SetEnergy mode = SetEnergy::kSum);

struct ConstraintCounts {
  boost::multiprecision::cpp_int average;   // N (q^L - k^L + 1)
  boost::multiprecision::cpp_int sequence;  // N (q^L - 1)
  boost::multiprecision::cpp_int piecewise; // N (L-1) q^2
};

// Throws ConfigError unless all arguments are positive and k <= q.
ConstraintCounts constraint_counts(std::uint64_t n, std::uint64_t length, std::uint64_t k,
                                   std::uint64_t q);

BaselineKind parse_baseline(std::string_view name);
std::string_view baseline_name(BaselineKind kind);

}  // namespace ambigseq
