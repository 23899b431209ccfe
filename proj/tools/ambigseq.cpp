// ambigseq: corrupt, train, predict, eval, sweep and counts over CoNLL-style
// column files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ambigseq/baselines.hpp"
#include "ambigseq/config.hpp"
#include "ambigseq/corpus.hpp"
#include "ambigseq/errors.hpp"
#include "ambigseq/evalstats.hpp"
#include "ambigseq/experiment.hpp"
#include "ambigseq/features.hpp"
#include "ambigseq/text.hpp"

namespace fs = std::filesystem;
using namespace ambigseq;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kNotConverged = 4;

const char* kUsage =
    "usage: ambigseq <command> [--config FILE] [--key value ...]\n"
    "commands:\n"
    "  corrupt  --input DATA --cl N --p F --w N --seed N --out DIR\n"
    "  train    --input DATA --corpus FILE --method M [--grid] --out DIR\n"
    "  predict  --model_dir DIR --test DATA --out DIR\n"
    "  eval     --predictions FILE [--metric token|chunk|both] --out DIR\n"
    "  sweep    --input DATA --methods a,b --cl_values 2,3 --p_values 0.5 --out DIR\n"
    "  counts   --N n --L n --k n --q n\n";

fs::path output_dir(const RunConfig& config) {
  fs::path dir = config.get("out");
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << body;
  if (!out) throw DataError("failed writing " + path.string());
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream body;
  fn(body);
  write_text(path, body.str());
}

void write_resolved(const fs::path& dir, const std::string& command, const RunConfig& config) {
  write_with(dir / (command + ".cfg"), [&](std::ostream& o) { config.write(o); });
}

const std::string& require(const RunConfig& config, std::string_view key) {
  const auto& v = config.get(key);
  if (v.empty()) throw ConfigError("missing required --" + std::string(key));
  return v;
}

int label_column(const RunConfig& config, std::string_view body) {
  const auto& v = config.get("label_column");
  if (v != "last") return static_cast<int>(config.get_int("label_column"));
  int columns = 0;
  text::for_each_line(body, [&](std::string_view line, std::size_t) {
    if (columns == 0) {
      const auto fields = text::split_ws(line);
      if (!fields.empty()) columns = static_cast<int>(fields.size());
    }
  });
  if (columns < 2) throw DataError("cannot find a label column in the input");
  return columns - 1;
}

ConllData load_labeled(const RunConfig& config) {
  const std::string body = read_file(require(config, "input"));
  return parse_conll(body, static_cast<int>(config.get_int("token_column")),
                     label_column(config, body));
}

int cmd_corrupt(const RunConfig& config) {
  const CorruptionSettings settings = corruption_settings(config);
  const ConllData data = load_labeled(config);
  const AmbiguousCorpus corpus = corrupt(data.sequences, data.alphabet, settings);
  const fs::path dir = output_dir(config);
  write_with(dir / "corpus.txt", [&](std::ostream& o) { write_corpus(o, corpus); });
  write_resolved(dir, "corrupt", config);
  std::cout << "pieces=" << corpus.pieces.size() << " skipped_sequences=" << corpus.skipped_sequences
            << '\n';
  return kOk;
}

int cmd_train(const RunConfig& config) {
  MethodConfig method = method_config(config);
  const ConllData data = load_labeled(config);
  const AmbiguousCorpus corpus =
      read_corpus(read_file(require(config, "corpus")), data.sequences, data.alphabet);
  const fs::path dir = output_dir(config);

  if (config.get_bool("grid")) {
    const Metric metric = parse_metric(config.get("metric"));
    const GridReport report =
        grid_search(corpus, method, kDefaultGrid, config.get_double("heldout"), metric);
    write_with(dir / "grid.csv", [&](std::ostream& o) {
      o << "C,heldout_f1,selected\n";
      for (const auto& p : report.points)
        o << text::format_double(p.c) << ',' << text::format_double(p.heldout_f1) << ','
          << (p.c == report.selected ? 1 : 0) << '\n';
    });
    for (const auto& p : report.points)
      std::cout << "C=" << text::format_double(p.c) << " heldout_f1=" << text::format_double(p.heldout_f1)
                << '\n';
    std::cout << "selected C=" << text::format_double(report.selected) << '\n';
    method = with_c(method, report.selected);
  }

  const TrainedModel trained = train_method(corpus, method);
  write_with(dir / "features.txt", [&](std::ostream& o) { trained.index->write(o); });
  write_with(dir / "model.txt", [&](std::ostream& o) { trained.model.save(o); });
  write_with(dir / "trace.csv", [&](std::ostream& o) { write_training_trace(o, trained.trace); });
  if ((method.method == Method::kWdpsl || method.method == Method::kAvg) &&
      config.get_bool("confidence_dump"))
    write_with(dir / "confidence.csv",
               [&](std::ostream& o) { write_confidence_dump(o, trained.confidence); });
  write_resolved(dir, "train", config);
  std::cout << "method=" << method_name(method.method) << " rounds=" << trained.trace.size()
            << " stop=" << trained.stop_reason << '\n';
  if (!trained.converged) {
    std::cerr << "warning: an inner solve hit its iteration cap\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_predict(const RunConfig& config) {
  const fs::path model_dir = require(config, "model_dir");
  auto index = std::make_shared<const FeatureIndex>(
      FeatureIndex::read(read_file((model_dir / "features.txt").string())));
  const WeightModel model = WeightModel::load(read_file((model_dir / "model.txt").string()), index);
  const std::string body = read_file(require(config, "test"));
  const auto& lc = config.get("label_column");
  int label = -1;
  if (lc != "last") {
    label = static_cast<int>(config.get_int("label_column"));
  } else {
    int columns = 0;
    text::for_each_line(body, [&](std::string_view line, std::size_t) {
      const auto f = text::split_ws(line);
      if (columns == 0 && !f.empty()) columns = static_cast<int>(f.size());
    });
    if (columns >= 2) label = columns - 1;
  }
  const auto sequences =
      parse_conll(body, static_cast<int>(config.get_int("token_column")), label, index->alphabet());
  const auto predicted = predict(model, sequences);
  const fs::path dir = output_dir(config);
  write_with(dir / "predictions.txt", [&](std::ostream& o) {
    const auto& alphabet = index->alphabet();
    for (std::size_t i = 0; i < sequences.size(); ++i) {
      for (std::size_t t = 0; t < sequences[i].length(); ++t) {
        o << sequences[i].tokens[t] << ' ';
        if (sequences[i].has_gold()) o << alphabet.name(sequences[i].gold[t]) << ' ';
        o << alphabet.name(predicted[i][t]) << '\n';
      }
      o << '\n';
    }
  });
  write_resolved(dir, "predict", config);
  return kOk;
}

int cmd_eval(const RunConfig& config) {
  const PredictionColumns columns = read_predictions(read_file(require(config, "predictions")));
  const std::string metric = config.get("metric");
  if (metric != "token" && metric != "chunk" && metric != "both")
    throw ConfigError("metric must be token, chunk or both");
  const fs::path dir = output_dir(config);
  std::ostringstream body;
  write_report_header(body);
  if (metric != "chunk") write_report_row(body, "token", token_f1(columns.gold, columns.predicted));
  if (metric != "token") write_report_row(body, "chunk", chunk_f1(columns.gold, columns.predicted));
  write_text(dir / "report.csv", body.str());
  write_resolved(dir, "eval", config);
  std::cout << body.str();
  return kOk;
}

int cmd_sweep(const RunConfig& config) {
  const SweepSettings settings = sweep_settings(config);
  const MethodConfig base = method_config(config);
  const ConllData data = load_labeled(config);
  const auto rows = run_sweep(data, settings, base);
  const fs::path dir = output_dir(config);
  write_with(dir / "results.csv", [&](std::ostream& o) { write_sweep_rows(o, rows); });
  const SweepSummary summary = summarize(rows, settings.methods, config.get_double("alpha"));
  write_with(dir / "summary.csv", [&](std::ostream& o) { write_summary(o, summary); });
  write_resolved(dir, "sweep", config);
  for (const auto& r : summary.rows)
    std::cout << "cl=" << r.cl << " p=" << text::format_double(r.p) << ' ' << method_name(r.method)
              << ' ' << text::format_double(100.0 * r.f1.mean) << "+-"
              << text::format_double(100.0 * r.f1.std) << ' ' << r.mark << '\n';
  for (const auto& r : rows)
    if (!r.converged) {
      std::cerr << "warning: some runs hit an iteration cap\n";
      return kNotConverged;
    }
  return kOk;
}

int cmd_counts(const RunConfig& config) {
  const ConstraintCounts c = constraint_counts(config.get_uint("N"), config.get_uint("L"),
                                               config.get_uint("k"), config.get_uint("q"));
  std::ostringstream body;
  body << "N,L,k,q,average,sequence,piecewise\n"
       << config.get("N") << ',' << config.get("L") << ',' << config.get("k") << ','
       << config.get("q") << ',' << c.average << ',' << c.sequence << ',' << c.piecewise << '\n';
  std::cout << body.str();
  if (config.is_set("out")) {
    const fs::path dir = output_dir(config);
    write_text(dir / "counts.csv", body.str());
    write_resolved(dir, "counts", config);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    std::cout << kUsage;
    return args.empty() ? kConfigError : kOk;
  }
  try {
    const CommandLine cl = parse_command_line(args);
    if (cl.command == "corrupt") return cmd_corrupt(cl.config);
    if (cl.command == "train") return cmd_train(cl.config);
    if (cl.command == "predict") return cmd_predict(cl.config);
    if (cl.command == "eval") return cmd_eval(cl.config);
    if (cl.command == "sweep") return cmd_sweep(cl.config);
    if (cl.command == "counts") return cmd_counts(cl.config);
    std::cerr << "unknown command '" << cl.command << "'\n" << kUsage;
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
