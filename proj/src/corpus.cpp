#include "ambigseq/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "ambigseq/errors.hpp"
#include "ambigseq/random.hpp"
#include "ambigseq/text.hpp"

namespace ambigseq {

LabelAlphabet::LabelAlphabet(const std::vector<std::string>& names) {
  for (const auto& n : names) {
    if (find(n)) throw DataError("duplicate label '" + n + "'");
    add(n);
  }
}

LabelId LabelAlphabet::add(std::string_view name) {
  if (auto id = find(name)) return *id;
  if (labels_.size() >= 0xFFFF) throw DataError("too many labels");
  const auto id = static_cast<LabelId>(labels_.size());
  labels_.emplace_back(name);
  index_.emplace(labels_.back(), id);
  return id;
}

std::optional<LabelId> LabelAlphabet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

LabelId LabelAlphabet::lookup(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw DataError("unknown label '" + std::string(name) + "'");
}

namespace {

template <typename LabelFn>
std::vector<Sequence> parse_blocks(std::string_view text, int token_column,
                                   int label_column, LabelFn&& to_id) {
  if (token_column < 0) throw ConfigError("token column must be >= 0");
  const auto needed =
      static_cast<std::size_t>(std::max(token_column, label_column)) + 1;
  std::vector<Sequence> sequences;
  Sequence current;
  auto flush = [&] {
    if (!current.tokens.empty()) sequences.push_back(std::move(current));
    current = Sequence{};
  };
  text::for_each_line(text, [&](std::string_view line, std::size_t number) {
    const auto fields = text::split_ws(line);
    if (fields.empty()) {
      flush();
      return;
    }
    if (fields.size() < needed) {
      throw ParseError(number, "expected at least " + std::to_string(needed) +
                                   " columns, found " +
                                   std::to_string(fields.size()));
    }
    current.tokens.emplace_back(fields[static_cast<std::size_t>(token_column)]);
    if (label_column >= 0) {
      current.gold.push_back(
          to_id(fields[static_cast<std::size_t>(label_column)], number));
    }
  });
  flush();
  return sequences;
}

}  // namespace

ConllData parse_conll(std::string_view text, int token_column, int label_column) {
  ConllData data;
  data.sequences = parse_blocks(
      text, token_column, label_column,
      [&](std::string_view label, std::size_t) { return data.alphabet.add(label); });
  return data;
}

std::vector<Sequence> parse_conll(std::string_view text, int token_column,
                                  int label_column, const LabelAlphabet& alphabet) {
  return parse_blocks(text, token_column, label_column,
                      [&](std::string_view label, std::size_t line) {
                        auto id = alphabet.find(label);
                        if (!id) {
                          throw ParseError(line, "label '" + std::string(label) +
                                                     "' is not in the training alphabet");
                        }
                        return *id;
                      });
}

void write_conll(std::ostream& out, const std::vector<Sequence>& sequences,
                 const LabelAlphabet& alphabet) {
  for (const auto& seq : sequences) {
    for (std::size_t t = 0; t < seq.length(); ++t) {
      out << seq.tokens[t];
      if (seq.has_gold()) out << ' ' << alphabet.name(seq.gold[t]);
      out << '\n';
    }
    out << '\n';
  }
}

AmbiguousCorpus exact_corpus(const std::vector<Sequence>& gold,
                             const LabelAlphabet& alphabet, std::size_t width) {
  AmbiguousCorpus corpus;
  corpus.alphabet = alphabet;
  corpus.sequences = gold;
  corpus.settings.width = width;
  corpus.settings.candidates = 1;
  corpus.settings.exact_fraction = 1.0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (!gold[s].has_gold()) throw DataError("sequence " + std::to_string(s) + " has no gold labels");
    for (auto& piece : decompose(gold[s], s, width, &corpus.skipped_sequences)) {
      piece.candidates = {piece.gold};
      corpus.pieces.push_back(std::move(piece));
    }
  }
  return corpus;
}

namespace {

// Draws `count` distinct codes from [0, space) \ {excluded}.
std::vector<std::uint64_t> sample_decoys(std::uint64_t space, std::uint64_t excluded,
                                         std::size_t count, Rng& rng) {
  std::vector<std::uint64_t> out;
  if (count == 0) return out;
  const std::uint64_t pool = space - 1;
  if (2 * static_cast<std::uint64_t>(count) > pool) {
    std::vector<std::uint64_t> all;
    all.reserve(pool);
    for (std::uint64_t c = 0; c < space; ++c)
      if (c != excluded) all.push_back(c);
    // partial Fisher-Yates
    for (std::size_t i = 0; i < count; ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_below(rng, all.size() - i));
      std::swap(all[i], all[j]);
      out.push_back(all[i]);
    }
    return out;
  }
  std::unordered_set<std::uint64_t> seen;
  while (out.size() < count) {
    std::uint64_t c = uniform_below(rng, pool);
    if (c >= excluded) ++c;
    if (seen.insert(c).second) out.push_back(c);
  }
  return out;
}

}  // namespace

AmbiguousCorpus corrupt(const std::vector<Sequence>& gold,
                        const LabelAlphabet& alphabet,
                        const CorruptionSettings& settings) {
  if (settings.candidates < 1) throw ConfigError("cl must be >= 1");
  if (!(settings.exact_fraction >= 0.0 && settings.exact_fraction <= 1.0))
    throw ConfigError("p must lie in [0, 1]");
  if (alphabet.empty()) throw ConfigError("empty label alphabet");
  const TupleSpace space(alphabet.size(), settings.width);
  if (settings.candidates > space.size()) {
    throw ConfigError("cl=" + std::to_string(settings.candidates) +
                      " exceeds the tuple space size " + std::to_string(space.size()));
  }

  AmbiguousCorpus corpus = exact_corpus(gold, alphabet, settings.width);
  corpus.settings = settings;

  Rng rng(settings.seed);
  const std::size_t n = corpus.pieces.size();
  const auto num_exact = static_cast<std::size_t>(
      std::floor(settings.exact_fraction * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_in_place(std::span<std::size_t>(order), rng);

  std::vector<bool> exact(n, false);
  for (std::size_t i = 0; i < std::min(num_exact, n); ++i) exact[order[i]] = true;

  for (std::size_t i = 0; i < n; ++i) {
    Piece& piece = corpus.pieces[i];
    if (exact[i] || settings.candidates == 1) continue;
    const std::uint64_t gold_code = space.encode(piece.gold);
    auto decoys = sample_decoys(space.size(), gold_code, settings.candidates - 1, rng);
    piece.candidates.clear();
    piece.candidates.push_back(piece.gold);
    for (auto code : decoys) piece.candidates.push_back(space.decode(code));
    shuffle_in_place(std::span<LabelTuple>(piece.candidates), rng);
  }
  return corpus;
}

std::string escape_label(std::string_view name) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char c : name) {
    if (c == ',' || c == '|' || c == '%' || c == '=' || text::is_space(c)) {
      const auto u = static_cast<unsigned char>(c);
      out += '%';
      out += kHex[u >> 4];
      out += kHex[u & 15];
    } else {
      out += c;
    }
  }
  return out;
}

std::string unescape_label(std::string_view s) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%') {
      const int hi = i + 1 < s.size() ? hex(s[i + 1]) : -1;
      const int lo = i + 2 < s.size() ? hex(s[i + 2]) : -1;
      if (hi < 0 || lo < 0) throw DataError("bad escape in label '" + std::string(s) + "'");
      out += static_cast<char>(hi * 16 + lo);
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

void write_corpus(std::ostream& out, const AmbiguousCorpus& corpus) {
  const auto& st = corpus.settings;
  out << "# ambigseq-corpus 1\n";
  out << "# w=" << st.width << '\n';
  out << "# cl=" << st.candidates << '\n';
  out << "# p=" << text::format_double(st.exact_fraction) << '\n';
  out << "# seed=" << st.seed << '\n';
  out << "# labels=";
  for (std::size_t i = 0; i < corpus.alphabet.size(); ++i) {
    if (i) out << ',';
    out << escape_label(corpus.alphabet.name(static_cast<LabelId>(i)));
  }
  out << '\n';
  out << "# pieces=" << corpus.pieces.size() << '\n';
  for (const auto& piece : corpus.pieces) {
    out << piece.seq_id << ' ' << piece.start << " candidates=";
    for (std::size_t c = 0; c < piece.candidates.size(); ++c) {
      if (c) out << '|';
      const auto& tuple = piece.candidates[c];
      for (std::size_t k = 0; k < tuple.size(); ++k) {
        if (k) out << ',';
        out << escape_label(corpus.alphabet.name(tuple[k]));
      }
    }
    out << '\n';
  }
}

AmbiguousCorpus read_corpus(std::string_view body,
                            const std::vector<Sequence>& sequences,
                            const LabelAlphabet& alphabet) {
  AmbiguousCorpus corpus;
  corpus.alphabet = alphabet;
  corpus.sequences = sequences;
  bool have_width = false;
  std::size_t expected_pieces = 0;
  bool have_count = false;
  text::for_each_line(body, [&](std::string_view line, std::size_t number) {
    line = text::trim(line);
    if (line.empty()) return;
    if (line.front() == '#') {
      auto kv = text::trim(line.substr(1));
      const auto eq = kv.find('=');
      if (eq == std::string_view::npos) return;
      const auto key = kv.substr(0, eq);
      const auto value = kv.substr(eq + 1);
      std::uint64_t u = 0;
      double d = 0;
      if (key == "w") {
        if (!text::parse_uint(value, u) || u < 1) throw ParseError(number, "bad w");
        corpus.settings.width = u;
        have_width = true;
      } else if (key == "cl") {
        if (!text::parse_uint(value, u)) throw ParseError(number, "bad cl");
        corpus.settings.candidates = u;
      } else if (key == "p") {
        if (!text::parse_double(value, d)) throw ParseError(number, "bad p");
        corpus.settings.exact_fraction = d;
      } else if (key == "seed") {
        if (!text::parse_uint(value, u)) throw ParseError(number, "bad seed");
        corpus.settings.seed = u;
      } else if (key == "labels") {
        std::vector<std::string> names;
        for (auto part : text::split(value, ',')) names.push_back(unescape_label(part));
        if (names != alphabet.labels())
          throw ParseError(number, "corpus label set differs from the data alphabet");
      } else if (key == "pieces") {
        if (!text::parse_uint(value, u)) throw ParseError(number, "bad piece count");
        expected_pieces = u;
        have_count = true;
      }
      return;
    }
    if (!have_width) throw ParseError(number, "piece line before '# w=' header");
    const auto fields = text::split_ws(line);
    if (fields.size() != 3 || fields[2].substr(0, 11) != "candidates=")
      throw ParseError(number, "expected 'seq_id span_start candidates=...'");
    std::uint64_t seq_id = 0, start = 0;
    if (!text::parse_uint(fields[0], seq_id) || !text::parse_uint(fields[1], start))
      throw ParseError(number, "bad piece position");
    if (seq_id >= sequences.size()) throw ParseError(number, "sequence id out of range");
    const auto& seq = sequences[seq_id];
    const std::size_t w = corpus.settings.width;
    if (start + w >= seq.length()) throw ParseError(number, "piece exceeds sequence length");
    Piece piece;
    piece.seq_id = seq_id;
    piece.start = start;
    piece.width = w;
    if (seq.has_gold())
      piece.gold.assign(seq.gold.begin() + start, seq.gold.begin() + start + w + 1);
    std::set<LabelTuple> seen;
    for (auto cand : text::split(fields[2].substr(11), '|')) {
      LabelTuple tuple;
      for (auto name : text::split(cand, ',')) {
        auto id = alphabet.find(unescape_label(name));
        if (!id) throw ParseError(number, "unknown label '" + std::string(name) + "'");
        tuple.push_back(*id);
      }
      if (tuple.size() != w + 1) throw ParseError(number, "tuple length differs from w+1");
      if (!seen.insert(tuple).second) throw ParseError(number, "duplicate candidate tuple");
      piece.candidates.push_back(std::move(tuple));
    }
    corpus.pieces.push_back(std::move(piece));
  });
  if (have_count && expected_pieces != corpus.pieces.size())
    throw DataError("corpus file declares " + std::to_string(expected_pieces) +
                    " pieces but contains " + std::to_string(corpus.pieces.size()));
  return corpus;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ambigseq
