#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gaitref/error.hpp"

namespace gaitref {

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Flat `key = value` run configuration. '#' starts a comment; blank lines are
// skipped. Typed getters track which keys were read so the caller can reject
// unknown ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text) {
    KeyValueConfig cfg;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      std::string line = text.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = detail::strip(line);
      if (line.empty()) continue;
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config line " + std::to_string(line_no) + " has no '='");
      }
      std::string key = detail::strip(line.substr(0, eq));
      std::string value = detail::strip(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
      if (cfg.values_.count(key)) throw ConfigError("duplicate config key '" + key + "'");
      cfg.values_[key] = value;
      if (pos > text.size()) break;
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    used_.insert(key);
    return it == values_.end() ? def : it->second;
  }

  std::string require_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required config key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  std::int64_t get_int(const std::string& key, std::int64_t def) const {
    auto it = values_.find(key);
    used_.insert(key);
    if (it == values_.end()) return def;
    return parse_int(key, it->second);
  }

  double get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    used_.insert(key);
    if (it == values_.end()) return def;
    return parse_double(key, it->second);
  }

  bool get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    used_.insert(key);
    if (it == values_.end()) return def;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "' wants a boolean, got '" + v + "'");
  }

  std::vector<std::int64_t> get_int_list(const std::string& key,
                                         const std::vector<std::int64_t>& def) const {
    auto it = values_.find(key);
    used_.insert(key);
    if (it == values_.end()) return def;
    std::vector<std::int64_t> out;
    const std::string& v = it->second;
    if (detail::strip(v).empty()) return out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
      std::size_t comma = v.find(',', pos);
      if (comma == std::string::npos) comma = v.size();
      out.push_back(parse_int(key, detail::strip(v.substr(pos, comma - pos))));
      pos = comma + 1;
      if (comma == v.size()) break;
    }
    return out;
  }

  // Every present key must have been consumed by a getter.
  void reject_unknown_keys() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
      (void)value;
      if (!used_.count(key)) unknown += unknown.empty() ? key : ", " + key;
    }
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
  }

  // Fully-resolved `key = value` text, for run logging.
  std::string resolved_text() const {
    std::string out;
    for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
    return out;
  }

 private:
  static std::int64_t parse_int(const std::string& key, const std::string& v) {
    if (v.empty()) throw ConfigError("config key '" + key + "' wants an integer, got ''");
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size()) {
      throw ConfigError("config key '" + key + "' wants an integer, got '" + v + "'");
    }
    return static_cast<std::int64_t>(x);
  }

  static double parse_double(const std::string& key, const std::string& v) {
    if (v.empty()) throw ConfigError("config key '" + key + "' wants a number, got ''");
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size()) {
      throw ConfigError("config key '" + key + "' wants a number, got '" + v + "'");
    }
    return x;
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace gaitref
