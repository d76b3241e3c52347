// Flat key=value configuration files with [section] headers, '#' comments and
// blank lines. No nesting, no quoting — diff-friendly and trivially parsed.
// Lookup failures and malformed values throw ConfigError naming the key, so
// the CLI can report the offending entry and exit with the config error code.

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wiretap {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace detail

class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "config") {
    Config config;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view body = detail::trim(line);
      if (const auto hash = body.find('#'); hash != std::string_view::npos) {
        body = detail::trim(body.substr(0, hash));
      }
      if (body.empty()) continue;
      if (body.front() == '[') {
        if (body.back() != ']' || body.size() < 3) {
          throw ConfigError(origin + ":" + std::to_string(lineno) +
                            ": malformed section header");
        }
        section = std::string(detail::trim(body.substr(1, body.size() - 2)));
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": expected key = value");
      }
      const std::string key(detail::trim(body.substr(0, eq)));
      const std::string value(detail::trim(body.substr(eq + 1)));
      if (key.empty()) {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": empty key");
      }
      config.values_[section.empty() ? key : section + "." + key] = value;
    }
    return config;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
      throw ConfigError("cannot open config file " + path.string());
    }
    return parse(in, path.filename().string());
  }

  bool contains(const std::string& key) const {
    return values_.find(key) != values_.end();
  }

  const std::string& get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      throw ConfigError("missing config key: " + key);
    }
    return it->second;
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  long get_long(const std::string& key) const {
    return parse_long(key, get_string(key));
  }
  long get_long(const std::string& key, long fallback) const {
    return contains(key) ? get_long(key) : fallback;
  }

  double get_double(const std::string& key) const {
    return parse_double(key, get_string(key));
  }
  double get_double(const std::string& key, double fallback) const {
    return contains(key) ? get_double(key) : fallback;
  }

  // Hex (0x prefix) or decimal; used for the UHF seed.
  std::uint32_t get_u32(const std::string& key) const {
    const std::string& text = get_string(key);
    int base = 10;
    std::string_view digits = text;
    if (digits.starts_with("0x") || digits.starts_with("0X")) {
      base = 16;
      digits.remove_prefix(2);
    }
    std::uint32_t value = 0;
    const auto res =
        std::from_chars(digits.data(), digits.data() + digits.size(), value,
                        base);
    if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size()) {
      throw ConfigError("config key " + key + ": bad unsigned value '" +
                        text + "'");
    }
    return value;
  }
  std::uint32_t get_u32(const std::string& key, std::uint32_t fallback) const {
    return contains(key) ? get_u32(key) : fallback;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!contains(key)) return fallback;
    const std::string& text = get_string(key);
    std::uint64_t value = 0;
    const auto res =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
      throw ConfigError("config key " + key + ": bad unsigned value '" +
                        text + "'");
    }
    return value;
  }

  std::vector<long> get_long_list(const std::string& key) const {
    std::vector<long> out;
    for (const auto& item : split_list(get_string(key))) {
      out.push_back(parse_long(key, item));
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(get_string(key))) {
      out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
  }

 private:
  static std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string current;
    std::istringstream stream(text);
    while (std::getline(stream, current, ',')) {
      items.emplace_back(detail::trim(current));
    }
    return items;
  }

  static long parse_long(const std::string& key, const std::string& text) {
    long value = 0;
    const auto res =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
      throw ConfigError("config key " + key + ": bad integer '" + text + "'");
    }
    return value;
  }

  static double parse_double(const std::string& key, const std::string& text) {
    double value = 0.0;
    const auto res =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
      throw ConfigError("config key " + key + ": bad number '" + text + "'");
    }
    return value;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace wiretap
