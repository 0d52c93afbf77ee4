#pragma once

// Brute-force reference for the set-matching metric. Works on plain
// (table, column, type) string rows with its own regex normalization so it
// shares no code with the library's scoring path.

#include <algorithm>
#include <cctype>
#include <regex>
#include <string>
#include <tuple>
#include <vector>

namespace schemaprobe::testing {

struct OracleRow {
  std::string table;
  std::string column;
  std::string type;
};

inline std::string oracle_norm(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  std::replace(s.begin(), s.end(), ' ', '_');
  return std::regex_replace(s, std::regex("[^a-z0-9_]"), "");
}

inline std::string oracle_type(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  s = std::regex_replace(s, std::regex("\\(.*\\)"), "");
  s = std::regex_replace(s, std::regex("^\\s+|\\s+$"), "");
  if (s == "varchar" || s == "text") return "text";
  if (s == "int" || s == "integer") return "int";
  if (s == "bool" || s == "boolean") return "bool";
  if (s == "date" || s == "datetime" || s == "timestamp") return "datetime";
  return s;
}

struct OracleCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double f1() const {
    const double p = tp + fp == 0 ? 0.0 : double(tp) / (tp + fp);
    const double r = tp + fn == 0 ? 0.0 : double(tp) / (tp + fn);
    return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
  }
};

// level 0: tables, 1: table+column, 2: table+column+type. Deduplicates by
// linear scan, then counts matches pairwise.
inline OracleCounts oracle_level(const std::vector<OracleRow>& predicted,
                                 const std::vector<OracleRow>& actual, int level) {
  auto key = [level](const OracleRow& r) {
    std::vector<std::string> k{oracle_norm(r.table)};
    if (level >= 1) k.push_back(oracle_norm(r.column));
    if (level >= 2) k.push_back(oracle_type(r.type));
    return k;
  };
  auto unique_keys = [&](const std::vector<OracleRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows) {
      auto k = key(r);
      if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
    return out;
  };
  const auto p = unique_keys(predicted);
  const auto a = unique_keys(actual);
  OracleCounts c;
  for (const auto& k : p) {
    bool hit = false;
    for (const auto& g : a) hit = hit || g == k;
    hit ? ++c.tp : ++c.fp;
  }
  c.fn = static_cast<int>(a.size()) - c.tp;
  return c;
}

// Rows parsed from a simple "CREATE TABLE t (c TYPE, ...);" listing with a
// regex, independent of the library's SQL parser.
inline std::vector<OracleRow> oracle_rows_from_ddl(const std::string& ddl) {
  std::vector<OracleRow> rows;
  const std::regex table_re(R"(CREATE TABLE (\w+) \(([^;]*)\);)");
  const std::regex column_re(R"((\w+)\s+(\w+))");
  for (auto it = std::sregex_iterator(ddl.begin(), ddl.end(), table_re); it != std::sregex_iterator();
       ++it) {
    const std::string table = (*it)[1];
    const std::string body = (*it)[2];
    for (auto c = std::sregex_iterator(body.begin(), body.end(), column_re);
         c != std::sregex_iterator(); ++c) {
      rows.push_back(OracleRow{table, (*c)[1], (*c)[2]});
    }
  }
  return rows;
}

}  // namespace schemaprobe::testing
