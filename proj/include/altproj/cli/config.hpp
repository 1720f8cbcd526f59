#pragma once

// Flat `key = value` experiment configs: one entry per line, `#` starts a
// comment, lists are comma-separated.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace altproj::cli {

class KeyValueConfig {
 public:
  /// Throws invalid-input naming the line on syntax errors or duplicate keys.
  static KeyValueConfig parse(const std::string& text, const std::string& source = "config");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& source() const noexcept { return source_; }

  /// Raw text of a required key; throws invalid-input naming the key.
  const std::string& raw(const std::string& key) const;

  double number(const std::string& key) const;
  std::optional<double> optional_number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t count(const std::string& key) const;  // nonnegative integer
  std::optional<std::uint64_t> optional_count(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  /// "a..b" (inclusive) or a comma-separated list of nonnegative integers.
  std::vector<std::uint64_t> seeds(const std::string& key) const;
  std::string word(const std::string& key) const;

  /// Rejects any key outside `allowed`.
  void require_known(const std::set<std::string>& allowed) const;

  /// Entries in file order.
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
    return ordered_;
  }

 private:
  std::string source_;
  std::map<std::string, std::size_t> entries_;  // key -> index into ordered_
  std::vector<std::pair<std::string, std::string>> ordered_;
};

std::optional<double> parse_double(const std::string& text);
std::optional<std::uint64_t> parse_count(const std::string& text);

}  // namespace altproj::cli
