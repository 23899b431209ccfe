#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ambigseq {

using LabelId = std::uint16_t;

// Dense bidirectional mapping between label names and ids 0..size()-1.
class LabelAlphabet {
 public:
  LabelAlphabet() = default;
  explicit LabelAlphabet(const std::vector<std::string>& names);

  // Returns the id of `name`, inserting it at the end if absent.
  LabelId add(std::string_view name);
  std::optional<LabelId> find(std::string_view name) const;
  // Throws DataError for unknown names.
  LabelId lookup(std::string_view name) const;
  const std::string& name(LabelId id) const { return labels_.at(id); }

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const LabelAlphabet& a, const LabelAlphabet& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelId> index_;
};

struct Sequence {
  std::vector<std::string> tokens;
  std::vector<LabelId> gold;  // empty when the corpus is unlabeled

  std::size_t length() const noexcept { return tokens.size(); }
  bool has_gold() const noexcept { return !gold.empty(); }

  friend bool operator==(const Sequence&, const Sequence&) = default;
};

}  // namespace ambigseq
