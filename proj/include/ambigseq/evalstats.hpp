#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ambigseq/sequence.hpp"

namespace ambigseq {

using TagSequence = std::vector<std::string>;

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t expected = 0;
  bool no_chunks = false;  // chunk F1 only: neither side had any chunk
};

// Micro-averaged over tokens. Throws DataError on shape mismatch.
EvalReport token_f1(std::span<const TagSequence> gold, std::span<const TagSequence> predicted);

struct Chunk {
  std::string type;
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

// CoNLL-2000 chunk semantics over B-X / I-X / O tags. An I-X that follows O
// or a different type opens a new chunk. Throws DataError on other tags.
std::vector<Chunk> extract_chunks(const TagSequence& tags);

// F1 over exact (type, begin, end) matches. With no chunks on either side,
// f1 = 0 and no_chunks is set.
EvalReport chunk_f1(std::span<const TagSequence> gold, std::span<const TagSequence> predicted);

std::vector<TagSequence> to_tags(const LabelAlphabet& alphabet,
                                 std::span<const std::vector<LabelId>> sequences);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n-1); 0 for n < 2
};
MeanStd mean_std(std::span<const double> values);

enum class TestOutcome { kSuperior, kInferior, kTie };
std::string_view outcome_name(TestOutcome outcome);

// Upper one-tailed critical value of Student's t. Values for df <= 30 and
// alpha in {0.10, 0.05, 0.025, 0.01} come from a fixed table; anything else
// is computed.
double t_critical_one_tailed(std::size_t df, double alpha);

// Paired one-tailed test on a - b with |a|-1 degrees of freedom. Throws
// DataError unless |a| = |b| >= 2.
TestOutcome paired_ttest_one_tailed(std::span<const double> a, std::span<const double> b,
                                    double alpha = 0.05);
double paired_t_statistic(std::span<const double> a, std::span<const double> b);

// Three columns per token (token gold predicted), blank lines between
// sequences.
struct PredictionColumns {
  std::vector<TagSequence> gold;
  std::vector<TagSequence> predicted;
};
PredictionColumns read_predictions(std::string_view text);

// `metric,precision,recall,f1,tp,predicted,expected,no_chunks`
void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, std::string_view metric, const EvalReport& report);

}  // namespace ambigseq
