#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ambigseq/pieces.hpp"
#include "ambigseq/sequence.hpp"

namespace ambigseq {

struct ConllData {
  LabelAlphabet alphabet;
  std::vector<Sequence> sequences;
};

// Parses whitespace-separated columns, one token per line, blank lines between
// sequences. Column indices are 0-based; label_column < 0 reads tokens only.
// The alphabet collects labels in first-occurrence order.
ConllData parse_conll(std::string_view text, int token_column, int label_column);

// Same, but labels must already exist in the frozen `alphabet`; an unseen
// label raises DataError.
std::vector<Sequence> parse_conll(std::string_view text, int token_column,
                                  int label_column, const LabelAlphabet& alphabet);

// Writes `token label` lines (or bare tokens for unlabeled sequences).
void write_conll(std::ostream& out, const std::vector<Sequence>& sequences,
                 const LabelAlphabet& alphabet);

struct CorruptionSettings {
  std::size_t width = 1;
  std::size_t candidates = 3;  // cl
  double exact_fraction = 0.5; // p
  std::uint64_t seed = 0;
};

struct AmbiguousCorpus {
  LabelAlphabet alphabet;
  std::vector<Sequence> sequences;
  std::vector<Piece> pieces;
  CorruptionSettings settings;
  std::size_t skipped_sequences = 0;

  std::size_t width() const noexcept { return settings.width; }
};

// Decomposes `gold` into pieces and gives every piece a candidate set that
// contains its gold tuple: floor(p * #pieces) pieces chosen uniformly keep
// only the gold tuple, the rest receive cl-1 distinct random decoys. Output
// is a pure function of the inputs and the seed.
AmbiguousCorpus corrupt(const std::vector<Sequence>& gold,
                        const LabelAlphabet& alphabet,
                        const CorruptionSettings& settings);

// Builds an exact corpus (candidate set = {gold}) over `gold`.
AmbiguousCorpus exact_corpus(const std::vector<Sequence>& gold,
                             const LabelAlphabet& alphabet, std::size_t width);

// Line format: a `# key=value` header (w, cl, p, seed, labels, pieces) then
// one `seq_id span_start candidates=t1|t2|...` line per piece, where each
// tuple is its comma-joined label names.
void write_corpus(std::ostream& out, const AmbiguousCorpus& corpus);

// Reads a corpus file; sequences supply tokens and gold labels.
AmbiguousCorpus read_corpus(std::string_view text,
                            const std::vector<Sequence>& sequences,
                            const LabelAlphabet& alphabet);

// Label names are escaped so that ',', '|', '%' and whitespace survive the
// line formats ("," -> "%2C").
std::string escape_label(std::string_view name);
std::string unescape_label(std::string_view text);

std::string read_file(const std::string& path);

}  // namespace ambigseq
