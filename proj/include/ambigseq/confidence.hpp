#pragma once

#include <cstddef>
#include <vector>

namespace ambigseq {

// P[i][j]: confidence that candidate j of piece i is the ground truth.
struct ConfidenceTable {
  std::vector<std::vector<double>> values;

  std::size_t num_pieces() const noexcept { return values.size(); }
  const std::vector<double>& operator[](std::size_t piece) const { return values[piece]; }
  std::vector<double>& operator[](std::size_t piece) { return values[piece]; }

  friend bool operator==(const ConfidenceTable&, const ConfidenceTable&) = default;
};

}  // namespace ambigseq
