#include "ambigseq/evalstats.hpp"

#include <algorithm>
#include <array>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <tuple>

#include "ambigseq/errors.hpp"
#include "ambigseq/text.hpp"

namespace ambigseq {

namespace {

void check_shapes(std::span<const TagSequence> gold, std::span<const TagSequence> predicted) {
  if (gold.size() != predicted.size())
    throw DataError("gold has " + std::to_string(gold.size()) + " sequences, prediction has " +
                    std::to_string(predicted.size()));
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (gold[i].size() != predicted[i].size())
      throw DataError("sequence " + std::to_string(i) + ": gold length " +
                      std::to_string(gold[i].size()) + " != predicted length " +
                      std::to_string(predicted[i].size()));
}

EvalReport from_counts(std::size_t tp, std::size_t predicted, std::size_t expected) {
  EvalReport r;
  r.true_positives = tp;
  r.predicted = predicted;
  r.expected = expected;
  r.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
  r.recall = expected ? static_cast<double>(tp) / static_cast<double>(expected) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

}  // namespace

EvalReport token_f1(std::span<const TagSequence> gold, std::span<const TagSequence> predicted) {
  check_shapes(gold, predicted);
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t t = 0; t < gold[i].size(); ++t)
      if (gold[i][t] == predicted[i][t]) ++correct;
    total += gold[i].size();
  }
  return from_counts(correct, total, total);
}

std::vector<Chunk> extract_chunks(const TagSequence& tags) {
  std::vector<Chunk> chunks;
  bool open = false;
  Chunk current;
  auto close = [&](std::size_t at) {
    if (open) {
      current.end = at;
      chunks.push_back(current);
      open = false;
    }
  };
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const std::string& tag = tags[t];
    if (tag == "O") {
      close(t);
      continue;
    }
    if (tag.size() < 2 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I'))
      throw DataError("tag '" + tag + "' is not O, B-X or I-X");
    const std::string type = tag.substr(2);
    if (tag[0] == 'I' && open && current.type == type) continue;
    close(t);
    current.type = type;
    current.begin = t;
    open = true;
  }
  close(tags.size());
  return chunks;
}

EvalReport chunk_f1(std::span<const TagSequence> gold, std::span<const TagSequence> predicted) {
  check_shapes(gold, predicted);
  std::size_t tp = 0, n_pred = 0, n_gold = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = extract_chunks(gold[i]);
    const auto p = extract_chunks(predicted[i]);
    n_gold += g.size();
    n_pred += p.size();
    std::set<std::tuple<std::size_t, std::size_t, std::string>> expected;
    for (const auto& c : g) expected.emplace(c.begin, c.end, c.type);
    for (const auto& c : p)
      if (expected.count({c.begin, c.end, c.type})) ++tp;
  }
  EvalReport r = from_counts(tp, n_pred, n_gold);
  r.no_chunks = n_pred == 0 && n_gold == 0;
  return r;
}

std::vector<TagSequence> to_tags(const LabelAlphabet& alphabet,
                                 std::span<const std::vector<LabelId>> sequences) {
  std::vector<TagSequence> out;
  out.reserve(sequences.size());
  for (const auto& seq : sequences) {
    TagSequence tags;
    tags.reserve(seq.size());
    for (LabelId y : seq) tags.push_back(alphabet.name(y));
    out.push_back(std::move(tags));
  }
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return r;
}

std::string_view outcome_name(TestOutcome outcome) {
  switch (outcome) {
    case TestOutcome::kSuperior: return "superior";
    case TestOutcome::kInferior: return "inferior";
    case TestOutcome::kTie: return "tie";
  }
  return "?";
}

namespace {

// One-tailed upper critical values, df = 1..30.
constexpr std::array<double, 4> kAlphas = {0.10, 0.05, 0.025, 0.01};
constexpr std::array<std::array<double, 30>, 4> kCritical = {{
    {3.0777, 1.8856, 1.6377, 1.5332, 1.4759, 1.4398, 1.4149, 1.3968, 1.3830, 1.3722,
     1.3634, 1.3562, 1.3502, 1.3450, 1.3406, 1.3368, 1.3334, 1.3304, 1.3277, 1.3253,
     1.3232, 1.3212, 1.3195, 1.3178, 1.3163, 1.3150, 1.3137, 1.3125, 1.3114, 1.3104},
    {6.3138, 2.9200, 2.3534, 2.1318, 2.0150, 1.9432, 1.8946, 1.8595, 1.8331, 1.8125,
     1.7959, 1.7823, 1.7709, 1.7613, 1.7531, 1.7459, 1.7396, 1.7341, 1.7291, 1.7247,
     1.7207, 1.7171, 1.7139, 1.7109, 1.7081, 1.7056, 1.7033, 1.7011, 1.6991, 1.6973},
    {12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646, 2.3060, 2.2622, 2.2281,
     2.2010, 2.1788, 2.1604, 2.1448, 2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860,
     2.0796, 2.0739, 2.0687, 2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423},
    {31.8205, 6.9646, 4.5407, 3.7469, 3.3649, 3.1427, 2.9980, 2.8965, 2.8214, 2.7638,
     2.7181, 2.6810, 2.6503, 2.6245, 2.6025, 2.5835, 2.5669, 2.5524, 2.5395, 2.5280,
     2.5176, 2.5083, 2.4999, 2.4922, 2.4851, 2.4786, 2.4727, 2.4671, 2.4620, 2.4573},
}};

}  // namespace

double t_critical_one_tailed(std::size_t df, double alpha) {
  if (df < 1) throw ConfigError("t-test needs at least one degree of freedom");
  if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha must lie in (0, 0.5)");
  if (df <= 30)
    for (std::size_t a = 0; a < kAlphas.size(); ++a)
      if (std::abs(alpha - kAlphas[a]) < 1e-12) return kCritical[a][df - 1];
  const boost::math::students_t dist(static_cast<double>(df));
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

double paired_t_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw DataError("paired t-test needs two equal-length score lists of size >= 2");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const MeanStd ms = mean_std(diff);
  if (ms.std == 0.0) {
    if (ms.mean == 0.0) return 0.0;
    return ms.mean > 0.0 ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
  }
  return ms.mean / (ms.std / std::sqrt(static_cast<double>(diff.size())));
}

TestOutcome paired_ttest_one_tailed(std::span<const double> a, std::span<const double> b,
                                    double alpha) {
  const double t = paired_t_statistic(a, b);
  const double critical = t_critical_one_tailed(a.size() - 1, alpha);
  if (t > critical) return TestOutcome::kSuperior;
  if (t < -critical) return TestOutcome::kInferior;
  return TestOutcome::kTie;
}

PredictionColumns read_predictions(std::string_view text_body) {
  PredictionColumns out;
  TagSequence gold, pred;
  auto flush = [&] {
    if (!gold.empty()) {
      out.gold.push_back(std::move(gold));
      out.predicted.push_back(std::move(pred));
      gold.clear();
      pred.clear();
    }
  };
  text::for_each_line(text_body, [&](std::string_view line, std::size_t number) {
    const auto fields = text::split_ws(line);
    if (fields.empty()) {
      flush();
      return;
    }
    if (fields.size() < 3) throw ParseError(number, "expected 'token gold predicted'");
    gold.emplace_back(fields[fields.size() - 2]);
    pred.emplace_back(fields[fields.size() - 1]);
  });
  flush();
  return out;
}

void write_report_header(std::ostream& out) {
  out << "metric,precision,recall,f1,tp,predicted,expected,no_chunks\n";
}

void write_report_row(std::ostream& out, std::string_view metric, const EvalReport& r) {
  out << metric << ',' << text::format_double(r.precision) << ',' << text::format_double(r.recall)
      << ',' << text::format_double(r.f1) << ',' << r.true_positives << ',' << r.predicted << ','
      << r.expected << ',' << (r.no_chunks ? 1 : 0) << '\n';
}

}  // namespace ambigseq
