#include "ambigseq/config.hpp"

#include <ostream>

#include "ambigseq/errors.hpp"
#include "ambigseq/text.hpp"

namespace ambigseq {

namespace {

const std::vector<std::pair<std::string, std::string>>& default_values() {
  static const std::vector<std::pair<std::string, std::string>> values = {
      // paths
      {"input", ""},
      {"corpus", ""},
      {"model_dir", ""},
      {"test", ""},
      {"predictions", ""},
      {"out", "."},
      {"token_column", "0"},
      {"label_column", "last"},
      // corruption
      {"cl", "3"},
      {"p", "0.5"},
      {"w", "1"},
      {"seed", "0"},
      // training
      {"method", "wdpsl"},
      {"C", ""},
      {"C1", "1"},
      {"C2", "1"},
      {"eps", "1e-3"},
      {"eps1", "1e-3"},
      {"tol", "1e-6"},
      {"max_qp_sweeps", "100000"},
      {"K", "10"},
      {"max_alternations", "50"},
      {"init", "knn"},
      {"update_confidence", "true"},
      {"confidence_floor", "0"},
      {"set_energy", "sum"},
      {"stop_rule", "fresh"},
      {"confidence_dump", "true"},
      {"rounds", "5"},
      {"epochs", "20"},
      {"clpl_sign", "penalize_positive"},
      {"templates", FeatureTemplate{}.to_string()},
      {"hash_buckets", "0"},
      {"threads", "0"},
      {"grid", "false"},
      {"heldout", "0.5"},
      // evaluation and sweeps
      {"metric", "token"},
      {"alpha", "0.05"},
      {"methods", "wdpsl,naive"},
      {"cl_values", "3"},
      {"p_values", "0.5"},
      {"folds", "5"},
      {"repeats", "3"},
      {"max_sequences", "0"},
      {"jobs", "1"},
      // constraint counts
      {"N", "1"},
      {"L", "3"},
      {"k", "2"},
      {"q", "3"},
  };
  return values;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value) +
                    "' is not " + std::string(want));
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& [k, v] : default_values()) values_[k] = v;
}

void RunConfig::load(std::string_view body) {
  text::for_each_line(body, [&](std::string_view line, std::size_t number) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected key=value");
    set(text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)));
  });
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto it = values_.find(std::string(key));
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second = std::string(value);
  explicit_.insert(it->first);
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(std::string(key));
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

double RunConfig::get_double(std::string_view key) const {
  double v = 0;
  if (!text::parse_double(get(key), v)) bad_value(key, get(key), "a number");
  return v;
}

std::uint64_t RunConfig::get_uint(std::string_view key) const {
  std::uint64_t v = 0;
  if (!text::parse_uint(get(key), v)) bad_value(key, get(key), "a non-negative integer");
  return v;
}

long long RunConfig::get_int(std::string_view key) const {
  long long v = 0;
  if (!text::parse_int(get(key), v)) bad_value(key, get(key), "an integer");
  return v;
}

bool RunConfig::get_bool(std::string_view key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> RunConfig::get_list(std::string_view key) const {
  std::vector<std::string> out;
  const auto& v = get(key);
  if (text::trim(v).empty()) return out;
  for (auto part : text::split(v, ',')) {
    part = text::trim(part);
    if (part.empty()) bad_value(key, v, "a comma-separated list");
    out.emplace_back(part);
  }
  return out;
}

void RunConfig::write(std::ostream& out) const {
  for (const auto& [k, v] : values_) out << k << '=' << v << '\n';
}

CommandLine parse_command_line(const std::vector<std::string>& args) {
  if (args.empty()) throw ConfigError("missing command");
  CommandLine cl;
  cl.command = args[0];
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string config_file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.size() < 3 || a.rfind("--", 0) != 0)
      throw ConfigError("unexpected argument '" + a + "'");
    std::string key = a.substr(2), value;
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else if (i + 1 < args.size() && args[i + 1].rfind("--", 0) != 0) {
      value = args[++i];
    } else {
      value = "true";
    }
    if (key == "config")
      config_file = value;
    else
      overrides.emplace_back(key, value);
  }
  if (!config_file.empty()) cl.config.load(read_file(config_file));
  for (const auto& [k, v] : overrides) cl.config.set(k, v);
  return cl;
}

MethodConfig method_config(const RunConfig& c) {
  MethodConfig m;
  m.method = parse_method(c.get("method"));
  m.c1 = c.get_double("C1");
  m.c2 = c.get_double("C2");
  if (!c.get("C").empty()) m.c1 = m.c2 = c.get_double("C");
  TrainConfig& t = m.wdpsl;
  t.eps = c.get_double("eps");
  t.eps1 = c.get_double("eps1");
  t.tol = c.get_double("tol");
  t.max_qp_sweeps = c.get_uint("max_qp_sweeps");
  t.knn = c.get_uint("K");
  t.max_alternations = c.get_uint("max_alternations");
  const auto& init = c.get("init");
  if (init == "knn")
    t.init = InitMode::kKnn;
  else if (init == "uniform")
    t.init = InitMode::kUniform;
  else
    bad_value("init", init, "knn or uniform");
  t.update_confidence = c.get_bool("update_confidence");
  t.confidence_floor = c.get_double("confidence_floor");
  const auto& energy = c.get("set_energy");
  if (energy == "sum")
    t.set_energy = SetEnergy::kSum;
  else if (energy == "mean")
    t.set_energy = SetEnergy::kMean;
  else
    bad_value("set_energy", energy, "sum or mean");
  const auto& rule = c.get("stop_rule");
  if (rule == "fresh")
    t.stop_rule_uses_stored_objective = false;
  else if (rule == "stored")
    t.stop_rule_uses_stored_objective = true;
  else
    bad_value("stop_rule", rule, "fresh or stored");
  m.cllp_rounds = c.get_uint("rounds");
  m.plsvm_epochs = c.get_uint("epochs");
  const auto& sign = c.get("clpl_sign");
  if (sign == "penalize_positive")
    m.clpl_sign = NonCandidateSign::kPenalizePositive;
  else if (sign == "literal")
    m.clpl_sign = NonCandidateSign::kLiteral;
  else
    bad_value("clpl_sign", sign, "penalize_positive or literal");
  m.templates = FeatureTemplate::parse(c.get("templates"));
  m.hash_buckets = c.get_uint("hash_buckets");
  m.seed = c.get_uint("seed");
  m.threads = c.get_uint("threads");
  if (!(m.c1 > 0.0) || !(m.c2 > 0.0)) throw ConfigError("C1 and C2 must be > 0");
  return m;
}

CorruptionSettings corruption_settings(const RunConfig& c) {
  CorruptionSettings s;
  s.width = c.get_uint("w");
  s.candidates = c.get_uint("cl");
  s.exact_fraction = c.get_double("p");
  s.seed = c.get_uint("seed");
  if (s.width < 1) throw ConfigError("w must be >= 1");
  if (s.candidates < 1) throw ConfigError("cl must be >= 1");
  if (!(s.exact_fraction >= 0.0 && s.exact_fraction <= 1.0))
    throw ConfigError("p must lie in [0, 1]");
  return s;
}

SweepSettings sweep_settings(const RunConfig& c) {
  SweepSettings s;
  s.methods.clear();
  for (const auto& m : c.get_list("methods")) s.methods.push_back(parse_method(m));
  s.candidate_counts.clear();
  for (const auto& v : c.get_list("cl_values")) {
    std::uint64_t u = 0;
    if (!text::parse_uint(v, u) || u < 1) bad_value("cl_values", v, "a positive integer");
    s.candidate_counts.push_back(u);
  }
  s.exact_fractions.clear();
  for (const auto& v : c.get_list("p_values")) {
    double d = 0;
    if (!text::parse_double(v, d) || d < 0.0 || d > 1.0) bad_value("p_values", v, "in [0, 1]");
    s.exact_fractions.push_back(d);
  }
  if (s.methods.empty() || s.candidate_counts.empty() || s.exact_fractions.empty())
    throw ConfigError("sweep needs methods, cl_values and p_values");
  s.folds = c.get_uint("folds");
  s.repeats = c.get_uint("repeats");
  s.width = c.get_uint("w");
  s.max_train_sequences = c.get_uint("max_sequences");
  s.grid = c.get_bool("grid");
  s.heldout_fraction = c.get_double("heldout");
  s.metric = parse_metric(c.get("metric"));
  s.jobs = c.get_uint("jobs");
  s.seed = c.get_uint("seed");
  return s;
}

}  // namespace ambigseq
