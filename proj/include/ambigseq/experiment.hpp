#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ambigseq/baselines.hpp"
#include "ambigseq/corpus.hpp"
#include "ambigseq/evalstats.hpp"
#include "ambigseq/features.hpp"
#include "ambigseq/wdpsl.hpp"

namespace ambigseq {

// wdpsl, avg (wdpsl with uniform, frozen confidences), ssvm, naive, clpl,
// plsvm, cllp.
enum class Method { kWdpsl, kAvg, kSsvm, kNaive, kClpl, kPlsvm, kCllp };
Method parse_method(std::string_view name);
std::string_view method_name(Method method);

enum class Metric { kToken, kChunk };
Metric parse_metric(std::string_view name);

struct MethodConfig {
  Method method = Method::kWdpsl;
  double c1 = 1.0;  // C for the single-C methods
  double c2 = 1.0;
  TrainConfig wdpsl;             // eps, eps1, tol, K, alternations, init, floor ...
  std::size_t cllp_rounds = 5;
  std::size_t plsvm_epochs = 20;
  NonCandidateSign clpl_sign = NonCandidateSign::kPenalizePositive;
  FeatureTemplate templates;
  std::size_t hash_buckets = 0;
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  CuttingPlaneOptions cutting_plane() const;
};

struct TrainedModel {
  std::shared_ptr<const FeatureIndex> index;
  WeightModel model;
  std::vector<AlternationRecord> trace;
  ConfidenceTable confidence;  // WD-PSL and AVG only
  std::string stop_reason;
  bool converged = true;
};

// Indexes features over `corpus` and runs the configured trainer.
TrainedModel train_method(const AmbiguousCorpus& corpus, const MethodConfig& config);
// Same, over an existing index.
TrainedModel train_method(const AmbiguousCorpus& corpus,
                          std::shared_ptr<const FeatureIndex> index, const MethodConfig& config);

std::vector<std::vector<LabelId>> predict(const WeightModel& model,
                                          const std::vector<Sequence>& sequences);
EvalReport evaluate(const WeightModel& model, const std::vector<Sequence>& sequences,
                    Metric metric);

inline const std::vector<double> kDefaultGrid = {0.01, 0.1, 1.0, 10.0, 100.0};

struct GridPoint {
  double c = 0.0;
  double heldout_f1 = 0.0;
};
struct GridReport {
  std::vector<GridPoint> points;
  double selected = 0.0;  // first C with the best held-out F1
};

// Holds out `heldout_fraction` of the corpus sequences (seeded), trains on
// the pieces of the rest with C1 = C2 = C per grid value, and scores on the
// held-out gold labels.
GridReport grid_search(const AmbiguousCorpus& corpus, const MethodConfig& config,
                       const std::vector<double>& grid, double heldout_fraction, Metric metric);
MethodConfig with_c(MethodConfig config, double c);

// Restricts a corpus to the pieces of the given sequences.
AmbiguousCorpus subset_pieces(const AmbiguousCorpus& corpus,
                              const std::vector<std::size_t>& sequence_ids);

// Deterministic k-fold split of [0, n) for one repeat: returns per fold the
// test indices (sorted).
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t folds,
                                                  std::uint64_t seed, std::size_t repeat);

struct SweepSettings {
  std::vector<Method> methods = {Method::kWdpsl, Method::kNaive};
  std::vector<std::size_t> candidate_counts = {3};
  std::vector<double> exact_fractions = {0.5};
  std::size_t folds = 5;
  std::size_t repeats = 3;
  std::size_t width = 1;
  std::size_t max_train_sequences = 0;  // 0 = all
  bool grid = false;
  double heldout_fraction = 0.5;
  Metric metric = Metric::kToken;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
};

struct SweepRow {
  Method method;
  std::size_t cl;
  double p;
  std::size_t fold;
  std::size_t repeat;
  double f1;
  bool converged;
};

// For each (cl, p, repeat, fold) cell the training sequences of the fold are
// corrupted once (seeded by the cell, not the method) and every method is
// trained on the same corpus; ssvm trains on their gold labels instead.
std::vector<SweepRow> run_sweep(const ConllData& data, const SweepSettings& settings,
                                const MethodConfig& base);

// `method,cl,p,fold,repeat,f1`
void write_sweep_rows(std::ostream& out, const std::vector<SweepRow>& rows);

struct SummaryRow {
  std::size_t cl;
  double p;
  Method method;
  MeanStd f1;
  std::string mark;  // "•": the first method is significantly better than this one; "◦": worse
};
struct PairwiseRow {
  std::size_t cl;
  double p;
  Method a;
  Method b;
  TestOutcome outcome;  // a against b
};
struct SweepSummary {
  std::vector<SummaryRow> rows;
  std::vector<PairwiseRow> pairwise;
};
SweepSummary summarize(const std::vector<SweepRow>& rows, const std::vector<Method>& methods,
                       double alpha = 0.05);
void write_summary(std::ostream& out, const SweepSummary& summary);

}  // namespace ambigseq
