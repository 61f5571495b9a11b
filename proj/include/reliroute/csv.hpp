#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "reliroute/error.hpp"

namespace reliroute::csv {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return std::string(s.substr(b, e - b));
}

// Splits one CSV line. Double-quoted fields may contain commas; "" is an
// escaped quote.
inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct Row {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

// A parsed CSV file: header row plus data rows, with `#` comment lines and
// blank lines dropped.
class Table {
 public:
  Table() = default;

  static Table parse(std::istream& in, std::string source) {
    Table t;
    t.source_ = std::move(source);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (lineno == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
          static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
      }
      std::string stripped = trim(line);
      if (stripped.empty() || stripped[0] == '#') continue;
      auto fields = split_line(stripped);
      if (!have_header) {
        for (std::size_t i = 0; i < fields.size(); ++i) t.columns_[fields[i]] = i;
        t.header_ = std::move(fields);
        have_header = true;
        continue;
      }
      t.rows_.push_back(Row{lineno, std::move(fields)});
    }
    if (!have_header) throw SchemaError(t.source_ + ": missing header row");
    return t;
  }

  static Table read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return parse(in, path.string());
  }

  const std::string& source() const { return source_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }
  bool has(const std::string& column) const { return columns_.count(column) != 0; }

  void require(std::initializer_list<const char*> names) const {
    for (const char* n : names) {
      if (!has(n)) throw SchemaError(source_ + ": missing required column '" + n + "'");
    }
  }

  // Field value, or empty when the column is absent or the row is short.
  std::string get(const Row& row, const std::string& column) const {
    auto it = columns_.find(column);
    if (it == columns_.end() || it->second >= row.fields.size()) return {};
    return row.fields[it->second];
  }

  std::string where(const Row& row) const { return source_ + ":" + std::to_string(row.line); }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::map<std::string, std::size_t> columns_;
  std::vector<Row> rows_;
};

inline std::optional<double> try_parse_double(std::string_view s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline double parse_double(std::string_view s, const std::string& what) {
  auto v = try_parse_double(s);
  if (!v) throw SchemaError(what + ": expected a number, got '" + std::string(s) + "'");
  return *v;
}

inline long long parse_integer(std::string_view s, const std::string& what) {
  std::string t = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw SchemaError(what + ": expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

// Shortest decimal text that reads back to the same double.
inline std::string exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Fixed-point text with `digits` significant digits and no exponent;
// trailing zeros are stripped.
inline std::string fixed_significant(double v, int digits = 12) {
  if (v == 0 || !std::isfinite(v)) return v == 0 ? "0" : exact(v);
  int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(v))));
  int decimals = std::max(0, digits - 1 - magnitude);
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

// Money-style rendering used on the console: rounded to 1e-6, at least one
// decimal place ("4734.0").
inline std::string human(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  while (s.size() > 2 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  if (s == "-0.0") s = "0.0";
  return s;
}

}  // namespace reliroute::csv
