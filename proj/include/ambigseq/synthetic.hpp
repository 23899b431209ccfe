#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ambigseq/sequence.hpp"

namespace ambigseq {

// A seeded hidden Markov source. Each state owns a block of words it emits
// with probability `own_word_prob`; otherwise it draws from a pool shared by
// all states, so single tokens are ambiguous and transitions matter.
struct HmmSettings {
  std::size_t states = 5;
  std::size_t length = 10;
  std::size_t words_per_state = 8;
  std::size_t shared_words = 20;
  double own_word_prob = 0.6;
  double transition_sharpness = 2.0;  // >1 concentrates transition rows
  std::uint64_t seed = 0;
};

struct HmmBenchmark {
  LabelAlphabet alphabet;  // S0 .. S{states-1}
  std::vector<Sequence> train;
  std::vector<Sequence> test;
};

// The same seed always gives the same chain, emissions and samples.
HmmBenchmark generate_hmm(const HmmSettings& settings, std::size_t train_count,
                          std::size_t test_count);

}  // namespace ambigseq
