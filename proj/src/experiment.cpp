#include "ambigseq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "ambigseq/errors.hpp"
#include "ambigseq/parallel.hpp"
#include "ambigseq/random.hpp"
#include "ambigseq/text.hpp"

namespace ambigseq {

Method parse_method(std::string_view name) {
  if (name == "wdpsl") return Method::kWdpsl;
  if (name == "avg") return Method::kAvg;
  if (name == "ssvm") return Method::kSsvm;
  if (name == "naive") return Method::kNaive;
  if (name == "clpl") return Method::kClpl;
  if (name == "plsvm") return Method::kPlsvm;
  if (name == "cllp") return Method::kCllp;
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected wdpsl, avg, ssvm, naive, clpl, plsvm or cllp)");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kWdpsl: return "wdpsl";
    case Method::kAvg: return "avg";
    case Method::kSsvm: return "ssvm";
    case Method::kNaive: return "naive";
    case Method::kClpl: return "clpl";
    case Method::kPlsvm: return "plsvm";
    case Method::kCllp: return "cllp";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  if (name == "token") return Metric::kToken;
  if (name == "chunk") return Metric::kChunk;
  throw ConfigError("unknown metric '" + std::string(name) + "' (expected token or chunk)");
}

CuttingPlaneOptions MethodConfig::cutting_plane() const {
  CuttingPlaneOptions o;
  o.eps1 = wdpsl.eps1;
  o.qp.tol = wdpsl.tol;
  o.qp.max_sweeps = wdpsl.max_qp_sweeps;
  o.threads = threads;
  return o;
}

TrainedModel train_method(const AmbiguousCorpus& corpus, const MethodConfig& config) {
  auto index = std::make_shared<const FeatureIndex>(
      index_features(corpus, config.templates, config.hash_buckets));
  return train_method(corpus, std::move(index), config);
}

TrainedModel train_method(const AmbiguousCorpus& corpus,
                          std::shared_ptr<const FeatureIndex> index, const MethodConfig& config) {
  const TrainingSet data = TrainingSet::build(corpus, index);
  if (data.size() == 0) throw DataError("corpus yields no training pieces");
  TrainedModel out{index, WeightModel(index, data.width), {}, {}, "", true};
  auto take = [&](BaselineResult r) {
    out.model = std::move(r.model);
    out.trace = std::move(r.trace);
    out.converged = r.converged;
    out.stop_reason = out.trace.empty() ? "" : out.trace.back().stop_reason;
  };
  const CuttingPlaneOptions cp = config.cutting_plane();
  switch (config.method) {
    case Method::kWdpsl:
    case Method::kAvg: {
      TrainConfig tc = config.wdpsl;
      tc.c1 = config.c1;
      tc.c2 = config.c2;
      tc.seed = config.seed;
      tc.threads = config.threads;
      if (config.method == Method::kAvg) {
        tc.init = InitMode::kUniform;
        tc.update_confidence = false;
      }
      TrainResult r = train(data, tc);
      out.model = std::move(r.model);
      out.trace = std::move(r.trace);
      out.confidence = std::move(r.confidence);
      out.stop_reason = r.stop_reason;
      out.converged = r.converged;
      break;
    }
    case Method::kSsvm: take(train_ssvm(data, config.c1, cp)); break;
    case Method::kNaive: take(train_naive(data, config.c1, config.seed, cp)); break;
    case Method::kClpl: take(train_clpl(data, config.c1, config.c2, cp, config.clpl_sign)); break;
    case Method::kPlsvm:
      take(train_plsvm(data, config.c1, PlsvmOptions{config.plsvm_epochs, config.seed}));
      break;
    case Method::kCllp: take(train_cllp(data, config.c1, config.c2, config.cllp_rounds, cp)); break;
  }
  return out;
}

std::vector<std::vector<LabelId>> predict(const WeightModel& model,
                                          const std::vector<Sequence>& sequences) {
  std::vector<std::vector<LabelId>> out(sequences.size());
  parallel_for(sequences.size(), [&](std::size_t i) { out[i] = decode(model, sequences[i]); });
  return out;
}

EvalReport evaluate(const WeightModel& model, const std::vector<Sequence>& sequences,
                    Metric metric) {
  const auto& alphabet = model.index().alphabet();
  std::vector<std::vector<LabelId>> gold;
  gold.reserve(sequences.size());
  for (const auto& s : sequences) {
    if (!s.has_gold()) throw DataError("evaluation needs gold labels");
    gold.push_back(s.gold);
  }
  const auto pred = predict(model, sequences);
  const auto g = to_tags(alphabet, gold);
  const auto p = to_tags(alphabet, pred);
  return metric == Metric::kChunk ? chunk_f1(g, p) : token_f1(g, p);
}

MethodConfig with_c(MethodConfig config, double c) {
  config.c1 = c;
  config.c2 = c;
  return config;
}

AmbiguousCorpus subset_pieces(const AmbiguousCorpus& corpus,
                              const std::vector<std::size_t>& sequence_ids) {
  const std::set<std::size_t> keep(sequence_ids.begin(), sequence_ids.end());
  AmbiguousCorpus out;
  out.alphabet = corpus.alphabet;
  out.sequences = corpus.sequences;
  out.settings = corpus.settings;
  for (const auto& piece : corpus.pieces)
    if (keep.count(piece.seq_id)) out.pieces.push_back(piece);
  return out;
}

GridReport grid_search(const AmbiguousCorpus& corpus, const MethodConfig& config,
                       const std::vector<double>& grid, double heldout_fraction, Metric metric) {
  if (grid.empty()) throw ConfigError("empty C grid");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0))
    throw ConfigError("held-out fraction must lie in (0, 1)");
  const std::size_t n = corpus.sequences.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(config.seed, 0x47524944ULL));
  shuffle_in_place(std::span<std::size_t>(order), rng);
  const auto held = static_cast<std::size_t>(std::floor(heldout_fraction * static_cast<double>(n)));
  if (held == 0 || held == n) throw DataError("too few sequences to hold out a validation split");
  std::vector<std::size_t> heldout(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(heldout.begin(), heldout.end());
  const AmbiguousCorpus train_part = subset_pieces(corpus, rest);
  std::vector<Sequence> validation;
  for (auto i : heldout) validation.push_back(corpus.sequences[i]);

  auto index = std::make_shared<const FeatureIndex>(
      index_features(train_part, config.templates, config.hash_buckets));
  GridReport report;
  for (double c : grid) {
    const TrainedModel m = train_method(train_part, index, with_c(config, c));
    report.points.push_back({c, evaluate(m.model, validation, metric).f1});
  }
  double best = -1.0;
  for (const auto& p : report.points)
    if (p.heldout_f1 > best) {
      best = p.heldout_f1;
      report.selected = p.c;
    }
  return report;
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t folds,
                                                  std::uint64_t seed, std::size_t repeat) {
  if (folds < 2 || folds > n)
    throw ConfigError("need 2 <= folds <= #sequences (folds=" + std::to_string(folds) +
                      ", sequences=" + std::to_string(n) + ")");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x464f4c44ULL + repeat));
  shuffle_in_place(std::span<std::size_t>(order), rng);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * n / folds, hi = (f + 1) * n / folds;
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(lo),
                  order.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(out[f].begin(), out[f].end());
  }
  return out;
}

namespace {

struct Cell {
  std::size_t cl;
  double p;
  std::size_t repeat;
  std::size_t fold;
};

std::uint64_t cell_seed(std::uint64_t seed, const Cell& c) {
  std::uint64_t s = mix_seed(seed, c.cl);
  s = mix_seed(s, static_cast<std::uint64_t>(std::llround(c.p * 1e6)));
  s = mix_seed(s, c.repeat);
  return mix_seed(s, c.fold);
}

}  // namespace

std::vector<SweepRow> run_sweep(const ConllData& data, const SweepSettings& settings,
                                const MethodConfig& base) {
  if (settings.methods.empty()) throw ConfigError("sweep needs at least one method");
  if (settings.repeats < 1) throw ConfigError("sweep needs at least one repeat");
  for (const auto& s : data.sequences)
    if (!s.has_gold()) throw DataError("sweep needs gold-labeled sequences");

  std::vector<Sequence> pool = data.sequences;
  if (settings.max_train_sequences > 0 && pool.size() > settings.max_train_sequences)
    pool.resize(settings.max_train_sequences);

  std::vector<Cell> cells;
  for (auto cl : settings.candidate_counts)
    for (double p : settings.exact_fractions)
      for (std::size_t r = 0; r < settings.repeats; ++r)
        for (std::size_t f = 0; f < settings.folds; ++f) cells.push_back({cl, p, r, f});

  std::vector<std::vector<std::vector<std::size_t>>> splits;
  for (std::size_t r = 0; r < settings.repeats; ++r)
    splits.push_back(kfold_split(pool.size(), settings.folds, settings.seed, r));

  const std::size_t jobs = std::max<std::size_t>(1, settings.jobs);
  const std::size_t inner = std::max<std::size_t>(1, default_thread_count() / jobs);
  std::vector<std::vector<SweepRow>> results(cells.size());
  parallel_for(
      cells.size(),
      [&](std::size_t k) {
        const Cell& cell = cells[k];
        const auto& test_ids = splits[cell.repeat][cell.fold];
        const std::set<std::size_t> test_set(test_ids.begin(), test_ids.end());
        std::vector<Sequence> train_seqs, test_seqs;
        for (std::size_t i = 0; i < pool.size(); ++i)
          (test_set.count(i) ? test_seqs : train_seqs).push_back(pool[i]);

        const std::uint64_t seed = cell_seed(settings.seed, cell);
        CorruptionSettings cs;
        cs.width = settings.width;
        cs.candidates = cell.cl;
        cs.exact_fraction = cell.p;
        cs.seed = seed;
        const AmbiguousCorpus ambiguous = corrupt(train_seqs, data.alphabet, cs);
        const AmbiguousCorpus exact = exact_corpus(train_seqs, data.alphabet, settings.width);
        auto index = std::make_shared<const FeatureIndex>(
            index_features(ambiguous, base.templates, base.hash_buckets));

        for (Method method : settings.methods) {
          MethodConfig config = base;
          config.method = method;
          config.seed = seed;
          config.threads = inner;
          const AmbiguousCorpus& corpus = method == Method::kSsvm ? exact : ambiguous;
          if (settings.grid) {
            const GridReport g =
                grid_search(corpus, config, kDefaultGrid, settings.heldout_fraction, settings.metric);
            config = with_c(config, g.selected);
          }
          const TrainedModel m = train_method(corpus, index, config);
          results[k].push_back({method, cell.cl, cell.p, cell.fold, cell.repeat,
                                evaluate(m.model, test_seqs, settings.metric).f1, m.converged});
        }
      },
      jobs);

  std::vector<SweepRow> rows;
  for (auto& r : results)
    for (auto& row : r) rows.push_back(row);
  return rows;
}

void write_sweep_rows(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "method,cl,p,fold,repeat,f1\n";
  for (const auto& r : rows)
    out << method_name(r.method) << ',' << r.cl << ',' << text::format_double(r.p) << ',' << r.fold
        << ',' << r.repeat << ',' << text::format_double(r.f1) << '\n';
}

SweepSummary summarize(const std::vector<SweepRow>& rows, const std::vector<Method>& methods,
                       double alpha) {
  // (cl, p) -> method -> scores ordered by (repeat, fold)
  std::map<std::pair<std::size_t, double>,
           std::map<Method, std::map<std::pair<std::size_t, std::size_t>, double>>>
      table;
  for (const auto& r : rows) table[{r.cl, r.p}][r.method][{r.repeat, r.fold}] = r.f1;

  auto scores_of = [](const std::map<std::pair<std::size_t, std::size_t>, double>& m) {
    std::vector<double> v;
    for (const auto& [key, f1] : m) v.push_back(f1);
    return v;
  };

  SweepSummary summary;
  for (const auto& [setting, by_method] : table) {
    std::vector<Method> present;
    for (Method m : methods)
      if (by_method.count(m)) present.push_back(m);
    for (Method a : present)
      for (Method b : present) {
        if (a == b) continue;
        const auto sa = scores_of(by_method.at(a)), sb = scores_of(by_method.at(b));
        const TestOutcome o = sa.size() == sb.size() && sa.size() >= 2
                                  ? paired_ttest_one_tailed(sa, sb, alpha)
                                  : TestOutcome::kTie;
        summary.pairwise.push_back({setting.first, setting.second, a, b, o});
      }
    for (Method m : present) {
      const auto s = scores_of(by_method.at(m));
      SummaryRow row{setting.first, setting.second, m, mean_std(s), ""};
      if (m != present.front()) {
        for (const auto& pw : summary.pairwise)
          if (pw.cl == setting.first && pw.p == setting.second && pw.a == present.front() &&
              pw.b == m) {
            if (pw.outcome == TestOutcome::kSuperior) row.mark = "•";
            if (pw.outcome == TestOutcome::kInferior) row.mark = "◦";
          }
      }
      summary.rows.push_back(row);
    }
  }
  return summary;
}

void write_summary(std::ostream& out, const SweepSummary& summary) {
  out << "cl,p,method,mean_f1,std_f1,mark\n";
  for (const auto& r : summary.rows)
    out << r.cl << ',' << text::format_double(r.p) << ',' << method_name(r.method) << ','
        << text::format_double(r.f1.mean) << ',' << text::format_double(r.f1.std) << ',' << r.mark
        << '\n';
  out << "\ncl,p,method_a,method_b,outcome\n";
  for (const auto& r : summary.pairwise)
    out << r.cl << ',' << text::format_double(r.p) << ',' << method_name(r.a) << ','
        << method_name(r.b) << ',' << outcome_name(r.outcome) << '\n';
}

}  // namespace ambigseq
