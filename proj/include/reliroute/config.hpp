#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "reliroute/csv.hpp"
#include "reliroute/error.hpp"

namespace reliroute {

// Plain `key = value` text; `#` starts a comment, blank lines are ignored.
class KeyValues {
 public:
  KeyValues() = default;

  static KeyValues parse(std::istream& in, const std::string& source) {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::string t = csv::trim(line);
      if (t.empty()) continue;
      auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw ConfigurationError(source + ":" + std::to_string(lineno) + ": expected key = value");
      }
      std::string key = csv::trim(t.substr(0, eq));
      std::string value = csv::trim(t.substr(eq + 1));
      if (key.empty()) throw ConfigurationError(source + ":" + std::to_string(lineno) + ": empty key");
      kv.values_[key] = value;
    }
    return kv;
  }

  static KeyValues read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse(in, path.string());
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::optional<std::string> text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }

  // Numeric value; blank counts as absent.
  std::optional<double> number(const std::string& key) const {
    auto t = text(key);
    if (!t || t->empty()) return std::nullopt;
    auto v = csv::try_parse_double(*t);
    if (!v) throw ConfigurationError("config key '" + key + "': expected a number, got '" + *t + "'");
    return v;
  }

  // Keys that no consumer has read yet.
  std::set<std::string> unused() const {
    std::set<std::string> out;
    for (const auto& [k, v] : values_) {
      if (!used_.count(k)) out.insert(k);
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace reliroute
