#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mpsflow::cli {

// Flat key = value file; '#' starts a comment. Physics parameters have no
// silent defaults: every key a subcommand reads must be present unless it is
// a tolerance-style knob, and unread keys are an error.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key);
  long get_long(const std::string& key);
  double get_double(const std::string& key);
  std::uint64_t get_seed(const std::string& key);
  // Tolerance/knob style accessors with defaults.
  long get_long_or(const std::string& key, long fallback);
  double get_double_or(const std::string& key, double fallback);
  std::string get_string_or(const std::string& key, const std::string& fallback);

  void override_value(const std::string& key, const std::string& value);
  void reject_unknown() const;  // throws ConfigError for unread keys
  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> consumed_;
};

// Runs one experiment; returns the process exit status (0 ok, 2 config error,
// 3 resource cap, 4 numerical consistency failure, 1 other).
int run(const std::vector<std::string>& args);

}  // namespace mpsflow::cli
