#ifndef MHE_CONFIG_HPP
#define MHE_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mhe/errors.hpp"

namespace mhe {

// Sectioned key = value configuration. Unknown keys are rejected after
// loading so a typo never silently falls back to a default: every getter
// marks its key consumed, and require_all_consumed() reports leftovers.
class ConfigStore {
 public:
  static ConfigStore from_string(const std::string& text, const std::string& origin = "<string>") {
    ConfigStore store;
    store.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (trimmed.front() == '[') {
        if (trimmed.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
        section = trim(trimmed.substr(1, trimmed.size() - 2));
        if (section.empty())
          throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty section name");
        store.values_[section];
        continue;
      }
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside any section");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
      if (store.values_[section].count(key))
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                          "' in [" + section + "]");
      store.values_[section][key] = value;
    }
    return store;
  }

  static ConfigStore from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto sec = values_.find(section);
    return sec != values_.end() && sec->second.count(key) > 0;
  }

  std::string get_string(const std::string& section, const std::string& key) const {
    const auto sec = values_.find(section);
    if (sec == values_.end() || !sec->second.count(key))
      throw ConfigError("missing required config key [" + section + "] " + key);
    consumed_.insert({section, key});
    return sec->second.at(key);
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    return get_string(section, key);
  }

  double get_double(const std::string& section, const std::string& key) const {
    return parse_double(get_string(section, key), section, key);
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return get_double(section, key);
  }

  int get_int(const std::string& section, const std::string& key) const {
    const std::string raw = get_string(section, key);
    char* end = nullptr;
    const long v = std::strtol(raw.c_str(), &end, 10);
    if (end == raw.c_str() || *end != '\0')
      throw ConfigError("config key [" + section + "] " + key + " is not an integer: " + raw);
    return static_cast<int>(v);
  }

  int get_int(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    return get_int(section, key);
  }

  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = get_string(section, key);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
    if (end == raw.c_str() || *end != '\0')
      throw ConfigError("config key [" + section + "] " + key + " is not an integer: " + raw);
    return static_cast<std::uint64_t>(v);
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string raw = get_string(section, key);
    std::transform(raw.begin(), raw.end(), raw.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
    if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
    throw ConfigError("config key [" + section + "] " + key + " is not a boolean: " + raw);
  }

  std::vector<double> get_vector(const std::string& section, const std::string& key) const {
    const std::string raw = get_string(section, key);
    std::vector<double> out;
    std::string cur;
    std::istringstream in(raw);
    while (std::getline(in, cur, ','))
      out.push_back(parse_double(trim(cur), section, key));
    if (out.empty())
      throw ConfigError("config key [" + section + "] " + key + " is an empty list");
    return out;
  }

  std::vector<double> get_vector(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    return get_vector(section, key);
  }

  // Rejects every key no getter asked for; catches typos and stale settings.
  void require_all_consumed() const {
    std::vector<std::string> unknown;
    for (const auto& [section, keys] : values_)
      for (const auto& [key, value] : keys)
        if (!consumed_.count({section, key})) unknown.push_back("[" + section + "] " + key);
    if (!unknown.empty()) {
      std::string msg = origin_ + ": unknown config keys:";
      for (const auto& k : unknown) msg += " " + k + ";";
      throw ConfigError(msg);
    }
  }

 private:
  static std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  static double parse_double(const std::string& raw, const std::string& section,
                             const std::string& key) {
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0')
      throw ConfigError("config key [" + section + "] " + key + " is not a number: " + raw);
    return v;
  }

  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> values_;
  mutable std::set<std::pair<std::string, std::string>> consumed_;
};

}  // namespace mhe

#endif  // MHE_CONFIG_HPP
