#include "ambigseq/features.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>

#include "ambigseq/errors.hpp"
#include "ambigseq/text.hpp"

namespace ambigseq {

FeatureTemplate FeatureTemplate::transition_only() {
  FeatureTemplate t;
  t.word = t.lower = t.shape = t.context = t.bias = false;
  t.prefix = t.suffix = 0;
  t.transition = true;
  return t;
}

std::size_t FeatureTemplate::num_state_templates() const {
  return (word ? 1 : 0) + (lower ? 1 : 0) + prefix + suffix + (shape ? 1 : 0) +
         (context ? 2 : 0);
}

std::string FeatureTemplate::to_string() const {
  std::vector<std::string> parts;
  if (word) parts.emplace_back("word");
  if (lower) parts.emplace_back("lower");
  if (prefix) parts.push_back("prefix" + std::to_string(prefix));
  if (suffix) parts.push_back("suffix" + std::to_string(suffix));
  if (shape) parts.emplace_back("shape");
  if (context) parts.emplace_back("context");
  if (transition) parts.emplace_back("transition");
  if (bias) parts.emplace_back("bias");
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out.empty() ? "none" : out;
}

FeatureTemplate FeatureTemplate::parse(std::string_view text_form) {
  FeatureTemplate t;
  t.word = t.lower = t.shape = t.context = t.transition = t.bias = false;
  t.prefix = t.suffix = 0;
  text_form = text::trim(text_form);
  if (text_form == "none" || text_form.empty()) return t;
  auto affix_len = [](std::string_view rest, std::string_view name) -> std::size_t {
    if (rest.empty()) return 3;
    std::uint64_t n = 0;
    if (!text::parse_uint(rest, n) || n > 8)
      throw ConfigError("bad template '" + std::string(name) + std::string(rest) + "'");
    return n;
  };
  for (auto part : text::split(text_form, ',')) {
    part = text::trim(part);
    if (part == "word") t.word = true;
    else if (part == "lower") t.lower = true;
    else if (part == "shape") t.shape = true;
    else if (part == "context") t.context = true;
    else if (part == "transition") t.transition = true;
    else if (part == "bias") t.bias = true;
    else if (part.starts_with("prefix")) t.prefix = affix_len(part.substr(6), "prefix");
    else if (part.starts_with("suffix")) t.suffix = affix_len(part.substr(6), "suffix");
    else throw ConfigError("unknown feature template '" + std::string(part) + "'");
  }
  return t;
}

std::string word_shape(std::string_view word) {
  std::string out;
  for (char ch : word) {
    const auto c = static_cast<unsigned char>(ch);
    char cls = '.';
    if (std::isupper(c)) cls = 'X';
    else if (std::islower(c)) cls = 'x';
    else if (std::isdigit(c)) cls = 'd';
    if (out.empty() || out.back() != cls) out += cls;
  }
  return out;
}

std::vector<std::string> extract_patterns(const Sequence& sequence, std::size_t position,
                                          const FeatureTemplate& t) {
  std::vector<std::string> out;
  const std::string& w = sequence.tokens.at(position);
  if (t.word) out.push_back("w=" + w);
  if (t.lower) {
    std::string lw = w;
    std::transform(lw.begin(), lw.end(), lw.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.push_back("lw=" + lw);
  }
  for (std::size_t n = 1; n <= t.prefix && n <= w.size(); ++n)
    out.push_back("p" + std::to_string(n) + "=" + w.substr(0, n));
  for (std::size_t n = 1; n <= t.suffix && n <= w.size(); ++n)
    out.push_back("s" + std::to_string(n) + "=" + w.substr(w.size() - n));
  if (t.shape) out.push_back("sh=" + word_shape(w));
  if (t.context) {
    out.push_back("w-1=" + (position > 0 ? sequence.tokens[position - 1] : std::string("<s>")));
    out.push_back("w+1=" + (position + 1 < sequence.length() ? sequence.tokens[position + 1]
                                                            : std::string("</s>")));
  }
  return out;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

void FeatureIndex::finalize_layout() {
  const std::size_t q = alphabet_.size();
  num_patterns_ = hash_buckets_ ? hash_buckets_ : patterns_.size();
  transition_offset_ = num_patterns_ * q;
  bias_offset_ = transition_offset_ + transition_block_size();
  dimension_ = bias_offset_ + bias_block_size();
  if (dimension_ > 0xFFFFFFFFULL) throw ConfigError("feature space too large for 32-bit indices");
}

std::size_t FeatureIndex::transition_block_size() const {
  return templates_.transition ? alphabet_.size() * alphabet_.size() : 0;
}

std::size_t FeatureIndex::bias_block_size() const {
  return templates_.bias ? alphabet_.size() : 0;
}

FeatureIndex FeatureIndex::build(const std::vector<Sequence>& sequences,
                                 const LabelAlphabet& alphabet,
                                 const FeatureTemplate& templates,
                                 std::size_t hash_buckets) {
  FeatureIndex index;
  index.alphabet_ = alphabet;
  index.templates_ = templates;
  index.hash_buckets_ = hash_buckets;
  if (!hash_buckets) {
    for (const auto& seq : sequences) {
      for (std::size_t t = 0; t < seq.length(); ++t) {
        for (auto& p : extract_patterns(seq, t, templates)) {
          if (index.pattern_ids_.count(p)) continue;
          const auto id = static_cast<PatternId>(index.patterns_.size());
          index.pattern_ids_.emplace(p, id);
          index.patterns_.push_back(std::move(p));
        }
      }
    }
  }
  index.finalize_layout();
  return index;
}

FeatureIndex index_features(const AmbiguousCorpus& corpus, const FeatureTemplate& templates,
                            std::size_t hash_buckets) {
  return FeatureIndex::build(corpus.sequences, corpus.alphabet, templates, hash_buckets);
}

FeatureId FeatureIndex::state_index(PatternId pattern, LabelId label) const {
  return static_cast<FeatureId>(static_cast<std::size_t>(pattern) * alphabet_.size() + label);
}

FeatureId FeatureIndex::transition_index(LabelId from, LabelId to) const {
  return static_cast<FeatureId>(transition_offset_ +
                                static_cast<std::size_t>(from) * alphabet_.size() + to);
}

FeatureId FeatureIndex::bias_index(LabelId label) const {
  return static_cast<FeatureId>(bias_offset_ + label);
}

std::optional<PatternId> FeatureIndex::find_pattern(std::string_view pattern) const {
  if (hash_buckets_) return static_cast<PatternId>(fnv1a(pattern) % hash_buckets_);
  auto it = pattern_ids_.find(std::string(pattern));
  if (it == pattern_ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& FeatureIndex::pattern_name(PatternId id) const {
  static const std::string kHashed = "<hashed>";
  if (hash_buckets_) return kHashed;
  return patterns_.at(id);
}

std::vector<PatternId> FeatureIndex::node_patterns(const Sequence& sequence,
                                                   std::size_t position) const {
  std::vector<PatternId> ids;
  for (const auto& p : extract_patterns(sequence, position, templates_)) {
    if (auto id = find_pattern(p)) ids.push_back(*id);
  }
  return ids;
}

Observation FeatureIndex::observe(const Sequence& sequence) const {
  Observation obs;
  obs.nodes.reserve(sequence.length());
  for (std::size_t t = 0; t < sequence.length(); ++t)
    obs.nodes.push_back(node_patterns(sequence, t));
  return obs;
}

Observation FeatureIndex::observe(const Sequence& sequence, const Piece& piece) const {
  if (piece.start + piece.width >= sequence.length())
    throw DataError("piece extends past the end of its sequence");
  Observation obs;
  for (std::size_t k = 0; k <= piece.width; ++k)
    obs.nodes.push_back(node_patterns(sequence, piece.start + k));
  return obs;
}

void FeatureIndex::write(std::ostream& out) const {
  const std::size_t q = alphabet_.size();
  out << "# ambigseq-features 1\n";
  out << "# templates=" << templates_.to_string() << '\n';
  out << "# labels=";
  for (std::size_t i = 0; i < q; ++i) {
    if (i) out << ',';
    out << escape_label(alphabet_.name(static_cast<LabelId>(i)));
  }
  out << '\n';
  out << "# hash_buckets=" << hash_buckets_ << '\n';
  out << "# patterns=" << num_patterns_ << '\n';
  out << "# dimension=" << dimension_ << '\n';
  for (std::size_t p = 0; p < num_patterns_; ++p) {
    for (std::size_t y = 0; y < q; ++y) {
      out << state_index(static_cast<PatternId>(p), static_cast<LabelId>(y)) << '\t';
      if (hash_buckets_) out << "H " << p;
      else out << "S " << patterns_[p];
      out << ' ' << escape_label(alphabet_.name(static_cast<LabelId>(y))) << '\n';
    }
  }
  if (templates_.transition) {
    for (std::size_t a = 0; a < q; ++a)
      for (std::size_t b = 0; b < q; ++b)
        out << transition_index(static_cast<LabelId>(a), static_cast<LabelId>(b)) << "\tT "
            << escape_label(alphabet_.name(static_cast<LabelId>(a))) << ' '
            << escape_label(alphabet_.name(static_cast<LabelId>(b))) << '\n';
  }
  if (templates_.bias) {
    for (std::size_t y = 0; y < q; ++y)
      out << bias_index(static_cast<LabelId>(y)) << "\tB "
          << escape_label(alphabet_.name(static_cast<LabelId>(y))) << '\n';
  }
}

FeatureIndex FeatureIndex::read(std::string_view body) {
  FeatureIndex index;
  std::uint64_t declared_dim = 0, declared_patterns = 0;
  bool have_labels = false;
  text::for_each_line(body, [&](std::string_view line, std::size_t number) {
    if (line.empty()) return;
    if (line.front() == '#') {
      auto kv = text::trim(line.substr(1));
      const auto eq = kv.find('=');
      if (eq == std::string_view::npos) return;
      const auto key = kv.substr(0, eq);
      const auto value = kv.substr(eq + 1);
      std::uint64_t u = 0;
      if (key == "templates") {
        index.templates_ = FeatureTemplate::parse(value);
      } else if (key == "labels") {
        std::vector<std::string> names;
        if (!value.empty())
          for (auto part : text::split(value, ',')) names.push_back(unescape_label(part));
        index.alphabet_ = LabelAlphabet(names);
        have_labels = true;
      } else if (key == "hash_buckets") {
        if (!text::parse_uint(value, u)) throw ParseError(number, "bad hash_buckets");
        index.hash_buckets_ = u;
      } else if (key == "patterns") {
        if (!text::parse_uint(value, declared_patterns)) throw ParseError(number, "bad patterns");
      } else if (key == "dimension") {
        if (!text::parse_uint(value, declared_dim)) throw ParseError(number, "bad dimension");
      }
      return;
    }
    if (!have_labels) throw ParseError(number, "feature line before '# labels=' header");
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError(number, "expected 'index<TAB>description'");
    std::uint64_t idx = 0;
    if (!text::parse_uint(line.substr(0, tab), idx)) throw ParseError(number, "bad feature index");
    const auto fields = text::split_ws(line.substr(tab + 1));
    if (fields.empty()) throw ParseError(number, "empty description");
    if (fields[0] == "S") {
      if (fields.size() != 3) throw ParseError(number, "malformed state feature");
      const std::size_t q = index.alphabet_.size();
      const std::size_t pattern = idx / q;
      if (idx % q == 0) {
        if (pattern != index.patterns_.size()) throw ParseError(number, "state features out of order");
        std::string name(fields[1]);
        index.pattern_ids_.emplace(name, static_cast<PatternId>(pattern));
        index.patterns_.push_back(std::move(name));
      }
    }
  });
  index.finalize_layout();
  if (declared_dim && declared_dim != index.dimension_)
    throw DataError("feature index dimension mismatch");
  if (declared_patterns && declared_patterns != index.num_patterns_)
    throw DataError("feature index pattern count mismatch");
  return index;
}

SparseVector joint_features(const FeatureIndex& index, const Observation& piece,
                            const LabelTuple& tuple) {
  if (tuple.size() != piece.nodes.size())
    throw DataError("tuple length does not match the piece width");
  const std::size_t q = index.num_labels();
  for (LabelId y : tuple)
    if (y >= q) throw DataError("label id " + std::to_string(y) + " outside the alphabet");
  std::vector<SparseVector::Entry> entries;
  for (std::size_t k = 0; k < tuple.size(); ++k) {
    for (PatternId p : piece.nodes[k]) entries.emplace_back(index.state_index(p, tuple[k]), 1.0);
    if (index.templates().bias) entries.emplace_back(index.bias_index(tuple[k]), 1.0);
  }
  if (index.templates().transition) {
    for (std::size_t k = 0; k + 1 < tuple.size(); ++k)
      entries.emplace_back(index.transition_index(tuple[k], tuple[k + 1]), 1.0);
  }
  return SparseVector::from_entries(std::move(entries));
}

SparseVector input_features(const FeatureIndex& index, const Observation& piece) {
  std::vector<SparseVector::Entry> entries;
  const std::size_t span = index.num_patterns();
  for (std::size_t k = 0; k < piece.nodes.size(); ++k)
    for (PatternId p : piece.nodes[k])
      entries.emplace_back(static_cast<FeatureId>(k * span + p), 1.0);
  return SparseVector::from_entries(std::move(entries));
}

}  // namespace ambigseq
