#include "altproj/cli/config.hpp"

#include "altproj/cli/trace_io.hpp"
#include "altproj/error.hpp"

#include <charconv>
#include <sstream>

namespace altproj::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!text.empty() && text.back() == ',') out.emplace_back();
  return out;
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char ch : key) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '_' || ch == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

std::optional<double> parse_double(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<std::uint64_t> parse_count(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& source) {
  KeyValueConfig cfg;
  cfg.source_ = source;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) fail(ErrorCode::invalid_input, where + "expected `key = value`");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) fail(ErrorCode::invalid_input, where + "bad key '" + key + "'");
    if (value.empty()) fail(ErrorCode::invalid_input, where + "empty value for '" + key + "'");
    if (cfg.entries_.count(key)) {
      fail(ErrorCode::invalid_input, where + "duplicate key '" + key + "'");
    }
    cfg.entries_[key] = cfg.ordered_.size();
    cfg.ordered_.emplace_back(std::move(key), std::move(value));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

const std::string& KeyValueConfig::raw(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    fail(ErrorCode::invalid_input, source_ + ": missing required key '" + key + "'");
  }
  return ordered_[it->second].second;
}

double KeyValueConfig::number(const std::string& key) const {
  const auto v = parse_double(raw(key));
  if (!v) fail(ErrorCode::invalid_input, source_ + ": key '" + key + "' is not a number");
  return *v;
}

std::optional<double> KeyValueConfig::optional_number(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

std::int64_t KeyValueConfig::integer(const std::string& key) const {
  const std::string& text = raw(key);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::invalid_input, source_ + ": key '" + key + "' is not an integer");
  }
  return value;
}

std::uint64_t KeyValueConfig::count(const std::string& key) const {
  const auto v = parse_count(raw(key));
  if (!v) {
    fail(ErrorCode::invalid_input, source_ + ": key '" + key + "' is not a nonnegative integer");
  }
  return *v;
}

std::optional<std::uint64_t> KeyValueConfig::optional_count(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return count(key);
}

std::vector<double> KeyValueConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split_list(raw(key))) {
    const auto v = parse_double(item);
    if (!v) {
      fail(ErrorCode::invalid_input,
           source_ + ": key '" + key + "' has a non-numeric entry '" + item + "'");
    }
    out.push_back(*v);
  }
  return out;
}

std::vector<std::uint64_t> KeyValueConfig::seeds(const std::string& key) const {
  const std::string& text = raw(key);
  const auto bad = [&] {
    fail(ErrorCode::invalid_input, source_ + ": key '" + key + "' must be a..b or a list");
  };
  std::vector<std::uint64_t> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto lo = parse_count(trim(text.substr(0, dots)));
    const auto hi = parse_count(trim(text.substr(dots + 2)));
    if (!lo || !hi || *lo > *hi || *hi - *lo >= 1000000) bad();
    for (std::uint64_t s = *lo; s <= *hi; ++s) out.push_back(s);
    return out;
  }
  for (const std::string& item : split_list(text)) {
    const auto v = parse_count(item);
    if (!v) bad();
    out.push_back(*v);
  }
  return out;
}

std::string KeyValueConfig::word(const std::string& key) const { return raw(key); }

void KeyValueConfig::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : ordered_) {
    if (!allowed.count(key)) fail(ErrorCode::invalid_input, source_ + ": unknown key '" + key + "'");
  }
}

}  // namespace altproj::cli
