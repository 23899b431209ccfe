#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ambigseq/corpus.hpp"
#include "ambigseq/experiment.hpp"

namespace ambigseq {

// Flat key=value settings. Every key has a default; unknown keys and
// malformed values raise ConfigError.
class RunConfig {
 public:
  RunConfig();

  // `key = value` lines; '#' starts a comment line.
  void load(std::string_view text);
  void set(std::string_view key, std::string_view value);

  bool known(std::string_view key) const { return values_.count(std::string(key)) > 0; }
  bool is_set(std::string_view key) const { return explicit_.count(std::string(key)) > 0; }
  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  long long get_int(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;

  // Every key in sorted order, so reruns write identical files.
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

// `<command> [--config FILE] [--key value | --flag] ...`. A `--key` not
// followed by a value (or followed by another `--key`) sets it to true.
struct CommandLine {
  std::string command;
  RunConfig config;
};
CommandLine parse_command_line(const std::vector<std::string>& args);

MethodConfig method_config(const RunConfig& config);
CorruptionSettings corruption_settings(const RunConfig& config);
SweepSettings sweep_settings(const RunConfig& config);

}  // namespace ambigseq
