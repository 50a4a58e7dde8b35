#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fd3 {

// Flat key/value settings with dotted keys, e.g. `clahe.clip_limit = 2.0`.
// Text form: one `key = value` per line, `#` starts a comment. List values
// are comma separated, optionally wrapped in brackets: `[8, 8]`.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& origin = "<string>");
  // Accepts the text form or a run manifest (JSON with a "config" object).
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> find(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;

  // Entries of `other` override entries of this config.
  void merge(const Config& other);

  // Entries under `prefix.` with the prefix removed.
  Config subtree(const std::string& prefix) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string to_text() const;

 private:
  std::map<std::string, std::string> entries_;
};

std::vector<double> parse_number_list(std::string_view text, const std::string& what);

// Shortest text that parses back to exactly v.
std::string format_number(double v);

}  // namespace fd3
