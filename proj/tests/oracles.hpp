#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance runner: exhaustive decoding, a full-constraint dual solver and
// small random instances.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "ambigseq/corpus.hpp"
#include "ambigseq/features.hpp"
#include "ambigseq/model.hpp"
#include "ambigseq/random.hpp"
#include "ambigseq/wdpsl.hpp"

namespace oracle {

using namespace ambigseq;

inline FeatureTemplate small_templates() {
  return FeatureTemplate::parse("word,transition,bias");
}

inline LabelAlphabet letters(std::size_t q) {
  LabelAlphabet a;
  for (std::size_t k = 0; k < q; ++k) a.add(std::string(1, static_cast<char>('A' + k)));
  return a;
}

// Random labeled sequences over a small vocabulary.
inline std::vector<Sequence> random_sequences(Rng& rng, std::size_t count, std::size_t min_len,
                                              std::size_t max_len, std::size_t q,
                                              std::size_t vocab) {
  std::vector<Sequence> out;
  for (std::size_t i = 0; i < count; ++i) {
    Sequence s;
    const std::size_t len = min_len + uniform_below(rng, max_len - min_len + 1);
    for (std::size_t t = 0; t < len; ++t) {
      s.tokens.push_back("v" + std::to_string(uniform_below(rng, vocab)));
      s.gold.push_back(static_cast<LabelId>(uniform_below(rng, q)));
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct Instance {
  AmbiguousCorpus corpus;
  std::shared_ptr<const FeatureIndex> index;
  TrainingSet data;
};

inline Instance make_instance(const AmbiguousCorpus& corpus,
                              const FeatureTemplate& templates = small_templates()) {
  Instance inst;
  inst.corpus = corpus;
  inst.index = std::make_shared<const FeatureIndex>(index_features(inst.corpus, templates));
  inst.data = TrainingSet::build(inst.corpus, inst.index);
  return inst;
}

// At most `max_pieces` pieces, q labels, w=1, cl in [1, max_cl].
inline Instance tiny_instance(std::uint64_t seed, std::size_t max_pieces = 6, std::size_t q = 3,
                              std::size_t max_cl = 3) {
  Rng rng(mix_seed(seed, 77));
  const auto alphabet = letters(q);
  std::vector<Sequence> seqs;
  std::size_t pieces = 0;
  while (true) {
    auto s = random_sequences(rng, 1, 2, 4, q, 4)[0];
    if (pieces + s.length() - 1 > max_pieces) break;
    pieces += s.length() - 1;
    seqs.push_back(std::move(s));
  }
  if (seqs.empty()) seqs = random_sequences(rng, 1, 2, 2, q, 4);
  CorruptionSettings cs;
  cs.width = 1;
  cs.candidates = 1 + uniform_below(rng, max_cl);
  cs.exact_fraction = uniform_unit(rng);
  cs.seed = seed;
  return make_instance(corrupt(seqs, alphabet, cs));
}

// argmax over all q^L labelings, ties to the lexicographically smallest.
inline std::vector<LabelId> brute_force_decode(const WeightModel& model, const Sequence& seq) {
  const std::size_t q = model.index().num_labels();
  const std::size_t len = seq.length();
  const Observation obs = model.index().observe(seq);
  const auto w = model.weights();
  const auto& index = model.index();
  std::vector<LabelId> y(len, 0), best;
  double best_score = -std::numeric_limits<double>::infinity();
  while (true) {
    double s = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      if (index.templates().bias) s += w[index.bias_index(y[t])];
      for (PatternId p : obs.nodes[t]) s += w[index.state_index(p, y[t])];
      if (t > 0 && index.templates().transition) s += w[index.transition_index(y[t - 1], y[t])];
    }
    if (s > best_score) {
      best_score = s;
      best = y;
    }
    std::size_t k = len;
    while (k > 0) {
      --k;
      if (++y[k] < q) break;
      y[k] = 0;
      if (k == 0) return best;
    }
    if (len == 0) return best;
  }
}

// Every constraint of the two-margin objective written out densely:
// groups of rows (a, b) sharing one hinge with weight `capacity`.
struct DenseGroup {
  double capacity = 0.0;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
};

inline std::vector<double> dense(const SparseVector& v, std::size_t d) {
  std::vector<double> out(d, 0.0);
  for (const auto& [i, x] : v.entries()) out[i] += x;
  return out;
}

inline std::vector<DenseGroup> enumerate_constraints(const TrainingSet& data,
                                                     const ConfidenceTable& P, double c1,
                                                     double c2) {
  const std::size_t d = data.index->dimension();
  const std::size_t n = data.size();
  const std::size_t q = data.num_labels();
  std::vector<DenseGroup> groups;
  for (std::size_t i = 0; i < n; ++i) {
    const Piece& piece = data.pieces[i];
    std::vector<double> set(d, 0.0);
    for (const auto& y : piece.candidates) {
      const auto f = dense(joint_features(*data.index, data.observations[i], y), d);
      for (std::size_t k = 0; k < d; ++k) set[k] += f[k];
    }
    DenseGroup g;
    g.capacity = c1 / static_cast<double>(n);
    LabelTuple y(data.width + 1, 0);
    bool done = false;
    while (!done) {
      const bool member = std::find(piece.candidates.begin(), piece.candidates.end(), y) !=
                          piece.candidates.end();
      const auto f = dense(joint_features(*data.index, data.observations[i], y), d);
      std::vector<double> a(d);
      for (std::size_t k = 0; k < d; ++k) a[k] = set[k] - f[k];
      g.a.push_back(std::move(a));
      g.b.push_back(member ? 0.0 : static_cast<double>(piece.candidates.size()));
      std::size_t k = y.size();
      done = true;
      while (k > 0) {
        --k;
        if (++y[k] < q) {
          done = false;
          break;
        }
        y[k] = 0;
      }
    }
    groups.push_back(std::move(g));
    for (std::size_t j = 0; j < piece.candidates.size(); ++j) {
      DenseGroup h;
      h.capacity = c2 * P[i][j] / static_cast<double>(n);
      h.a.push_back(dense(joint_features(*data.index, data.observations[i], piece.candidates[j]), d));
      h.b.push_back(1.0);
      groups.push_back(std::move(h));
    }
  }
  return groups;
}

inline double dense_primal(const std::vector<DenseGroup>& groups, const std::vector<double>& w) {
  double v = 0.0;
  for (double x : w) v += 0.5 * x * x;
  for (const auto& g : groups) {
    double worst = 0.0;
    for (std::size_t r = 0; r < g.a.size(); ++r) {
      double dot = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) dot += g.a[r][k] * w[k];
      worst = std::max(worst, g.b[r] - dot);
    }
    v += g.capacity * worst;
  }
  return v;
}

// Euclidean projection onto {x >= 0, sum x <= cap}.
inline void project_capped_simplex(std::vector<double>& x, double cap) {
  double pos = 0.0;
  for (double& v : x) {
    v = std::max(v, 0.0);
    pos += v;
  }
  if (pos <= cap) return;
  std::vector<double> s = x;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cumulative += s[k];
    const double t = (cumulative - cap) / static_cast<double>(k + 1);
    if (k + 1 == s.size() || s[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (double& v : x) v = std::max(v - theta, 0.0);
}

struct OracleResult {
  std::vector<double> weights;
  double primal = 0.0;
  double dual = 0.0;
  std::size_t iterations = 0;
};

// Accelerated projected gradient on the dual of the full constraint set.
inline OracleResult solve_full_qp(const std::vector<DenseGroup>& groups, std::size_t d,
                                  std::size_t max_iterations = 200000, double gap_tol = 1e-10) {
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t r = 0; r < groups[g].a.size(); ++r) rows.emplace_back(g, r);
  const std::size_t m = rows.size();
  auto row = [&](std::size_t k) -> const std::vector<double>& {
    return groups[rows[k].first].a[rows[k].second];
  };
  auto weights_of = [&](const std::vector<double>& alpha) {
    std::vector<double> w(d, 0.0);
    for (std::size_t k = 0; k < m; ++k)
      if (alpha[k] != 0.0)
        for (std::size_t j = 0; j < d; ++j) w[j] += alpha[k] * row(k)[j];
    return w;
  };
  auto dual_of = [&](const std::vector<double>& alpha, const std::vector<double>& w) {
    double v = 0.0;
    for (std::size_t k = 0; k < m; ++k) v += alpha[k] * groups[rows[k].first].b[rows[k].second];
    for (double x : w) v -= 0.5 * x * x;
    return v;
  };
  // Lipschitz constant of the dual gradient: top eigenvalue of A A^T.
  double lipschitz = 0.0;
  {
    std::vector<double> v(m, 1.0);
    for (int it = 0; it < 200; ++it) {
      const auto w = weights_of(v);
      std::vector<double> next(m);
      double norm = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) dot += row(k)[j] * w[j];
        next[k] = dot;
        norm += dot * dot;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      lipschitz = norm;
      for (std::size_t k = 0; k < m; ++k) v[k] = next[k] / norm;
    }
    lipschitz = std::max(lipschitz * 1.05, 1e-12);
  }

  std::vector<double> alpha(m, 0.0), y = alpha, prev = alpha;
  double t = 1.0;
  OracleResult out;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const auto w = weights_of(y);
    std::vector<double> z(m);
    for (std::size_t k = 0; k < m; ++k) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += row(k)[j] * w[j];
      z[k] = y[k] + (groups[rows[k].first].b[rows[k].second] - dot) / lipschitz;
    }
    std::size_t k0 = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const std::size_t len = groups[g].a.size();
      std::vector<double> part(z.begin() + static_cast<std::ptrdiff_t>(k0),
                               z.begin() + static_cast<std::ptrdiff_t>(k0 + len));
      project_capped_simplex(part, groups[g].capacity);
      std::copy(part.begin(), part.end(), z.begin() + static_cast<std::ptrdiff_t>(k0));
      k0 += len;
    }
    prev = alpha;
    alpha = z;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t k = 0; k < m; ++k) y[k] = alpha[k] + (t - 1.0) / t_next * (alpha[k] - prev[k]);
    t = t_next;
    out.iterations = it;
    if (it % 200 == 0 || it == max_iterations) {
      const auto wa = weights_of(alpha);
      const double p = dense_primal(groups, wa), dv = dual_of(alpha, wa);
      out.weights = wa;
      out.primal = p;
      out.dual = dv;
      if (p - dv <= gap_tol * std::max(1.0, std::abs(p))) break;
    }
  }
  return out;
}

}  // namespace oracle
