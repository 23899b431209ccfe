#include "ambigseq/synthetic.hpp"

#include <cmath>
#include <string>

#include "ambigseq/errors.hpp"
#include "ambigseq/random.hpp"

namespace ambigseq {

namespace {

std::size_t draw(const std::vector<double>& cumulative, Rng& rng) {
  const double u = uniform_unit(rng) * cumulative.back();
  for (std::size_t k = 0; k < cumulative.size(); ++k)
    if (u < cumulative[k]) return k;
  return cumulative.size() - 1;
}

std::vector<double> random_cumulative(std::size_t size, double sharpness, Rng& rng) {
  std::vector<double> c(size);
  double total = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    total += std::pow(uniform_unit(rng) + 1e-3, sharpness);
    c[k] = total;
  }
  return c;
}

}  // namespace

HmmBenchmark generate_hmm(const HmmSettings& s, std::size_t train_count, std::size_t test_count) {
  if (s.states < 1 || s.length < 1 || s.words_per_state < 1)
    throw ConfigError("HMM needs at least one state, position and word per state");
  if (!(s.own_word_prob >= 0.0 && s.own_word_prob <= 1.0))
    throw ConfigError("own_word_prob must lie in [0, 1]");
  if (s.shared_words == 0 && s.own_word_prob < 1.0)
    throw ConfigError("shared pool is empty but own_word_prob < 1");

  Rng rng(mix_seed(s.seed, 0x484d4dULL));
  HmmBenchmark out;
  for (std::size_t k = 0; k < s.states; ++k) out.alphabet.add("S" + std::to_string(k));

  const auto start = random_cumulative(s.states, s.transition_sharpness, rng);
  std::vector<std::vector<double>> transition;
  for (std::size_t k = 0; k < s.states; ++k)
    transition.push_back(random_cumulative(s.states, s.transition_sharpness, rng));

  auto sample = [&](Rng& g) {
    Sequence seq;
    std::size_t state = draw(start, g);
    for (std::size_t t = 0; t < s.length; ++t) {
      if (t > 0) state = draw(transition[state], g);
      std::size_t word;
      if (uniform_unit(g) < s.own_word_prob)
        word = state * s.words_per_state + uniform_below(g, s.words_per_state);
      else
        word = s.states * s.words_per_state + uniform_below(g, s.shared_words);
      seq.tokens.push_back("w" + std::to_string(word));
      seq.gold.push_back(static_cast<LabelId>(state));
    }
    return seq;
  };

  Rng train_rng(mix_seed(s.seed, 1));
  Rng test_rng(mix_seed(s.seed, 2));
  for (std::size_t i = 0; i < train_count; ++i) out.train.push_back(sample(train_rng));
  for (std::size_t i = 0; i < test_count; ++i) out.test.push_back(sample(test_rng));
  return out;
}

}  // namespace ambigseq
