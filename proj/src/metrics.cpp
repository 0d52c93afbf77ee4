#include "schemaprobe/metrics.hpp"

#include <fstream>
#include <sstream>

#include "schemaprobe/error.hpp"

namespace schemaprobe {

namespace {

template <typename Set>
LevelScore score_level(const Set& predicted, const Set& actual) {
  LevelScore level;
  if (predicted.empty() && actual.empty()) {
    level.skipped = true;
    return level;
  }
  for (const auto& item : predicted) {
    if (actual.count(item)) {
      ++level.tp;
    } else {
      ++level.fp;
    }
  }
  level.fn = actual.size() - level.tp;
  level.score = ScoreTriple::from_counts(level.tp, level.fp, level.fn);
  return level;
}

// Singular/plural variants of a name, excluding the name itself.
std::vector<std::string> suffix_variants(const std::string& name) {
  std::vector<std::string> out{name + "s", name + "es"};
  auto ends_with = [&](std::string_view suffix) {
    return name.size() > suffix.size() &&
           name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("es")) out.push_back(name.substr(0, name.size() - 2));
  if (ends_with("s")) out.push_back(name.substr(0, name.size() - 1));
  return out;
}

std::vector<std::string> with_self(const std::string& name, std::vector<std::string> variants) {
  variants.insert(variants.begin(), name);
  return variants;
}

}  // namespace

ScoreTriple ScoreTriple::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
  const double recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
  return from_pr(precision, recall);
}

ScoreTriple ScoreTriple::from_pr(double precision, double recall) {
  const double sum = precision + recall;
  return ScoreTriple{precision, recall, sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum};
}

ErrorBreakdown& ErrorBreakdown::operator+=(const ErrorBreakdown& other) {
  suffix_mismatch += other.suffix_mismatch;
  semantic_substitution += other.semantic_substitution;
  other_fp += other.other_fp;
  other_fn += other.other_fn;
  return *this;
}

SynonymTable SynonymTable::parse(std::string_view text) {
  SynonymTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    auto predicted = try_normalize_identifier(trim(line.substr(0, tab)));
    auto actual = try_normalize_identifier(trim(line.substr(tab + 1)));
    if (predicted && actual) table.map_[*predicted].insert(*actual);
  }
  return table;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void SynonymTable::add(std::string_view predicted, std::string_view actual) {
  map_[normalize_identifier(predicted)].insert(normalize_identifier(actual));
}

const std::set<std::string>& SynonymTable::targets(const std::string& predicted) const {
  static const std::set<std::string> kNone;
  auto it = map_.find(predicted);
  return it == map_.end() ? kNone : it->second;
}

std::size_t SynonymTable::size() const {
  std::size_t n = 0;
  for (const auto& [_, targets] : map_) n += targets.size();
  return n;
}

ErrorBreakdown classify_errors(const CanonicalSchema& predicted, const CanonicalSchema& actual,
                               const SynonymTable& synonyms) {
  ErrorBreakdown out;
  std::set<ColumnKey> explained;

  for (const auto& [table, column] : predicted.columns) {
    if (actual.columns.count({table, column})) continue;

    // Suffix: vary table and/or column by "s"/"es", never both unchanged.
    std::optional<ColumnKey> suffix_hit;
    for (const auto& t : with_self(table, suffix_variants(table))) {
      for (const auto& c : with_self(column, suffix_variants(column))) {
        if (t == table && c == column) continue;
        if (actual.columns.count({t, c})) {
          suffix_hit = ColumnKey{t, c};
          break;
        }
      }
      if (suffix_hit) break;
    }
    if (suffix_hit) {
      ++out.suffix_mismatch;
      explained.insert(*suffix_hit);
      continue;
    }

    std::optional<ColumnKey> synonym_hit;
    std::vector<std::string> tables{table};
    for (const auto& t : synonyms.targets(table)) tables.push_back(t);
    std::vector<std::string> columns{column};
    for (const auto& c : synonyms.targets(column)) columns.push_back(c);
    for (const auto& t : tables) {
      for (const auto& c : columns) {
        if (t == table && c == column) continue;
        if (actual.columns.count({t, c})) {
          synonym_hit = ColumnKey{t, c};
          break;
        }
      }
      if (synonym_hit) break;
    }
    if (synonym_hit) {
      ++out.semantic_substitution;
      explained.insert(*synonym_hit);
      continue;
    }
    ++out.other_fp;
  }

  for (const auto& key : actual.columns) {
    if (!predicted.columns.count(key) && !explained.count(key)) ++out.other_fn;
  }
  return out;
}

DbScore score_database(const CanonicalSchema& predicted, const CanonicalSchema& actual,
                       const SynonymTable& synonyms) {
  if (actual.tables.empty()) {
    throw Error(ErrorCode::kEmptyGroundTruth, "ground-truth schema has no tables");
  }
  DbScore out;
  out.table = score_level(predicted.tables, actual.tables);
  out.table_col = score_level(predicted.columns, actual.columns);
  out.table_col_type = score_level(predicted.typed_columns, actual.typed_columns);
  out.errors = classify_errors(predicted, actual, synonyms);
  return out;
}

namespace {

LevelAggregate aggregate_level(std::span<const DbScore> scores, LevelScore DbScore::*level) {
  LevelAggregate out;
  double p = 0.0;
  double r = 0.0;
  double f = 0.0;
  for (const auto& s : scores) {
    const auto& l = s.*level;
    if (l.skipped) continue;
    p += l.score.precision;
    r += l.score.recall;
    f += l.score.f1;
    ++out.databases;
  }
  if (out.databases == 0) return out;
  const double n = static_cast<double>(out.databases);
  out.macro = ScoreTriple{p / n, r / n, f / n};
  out.f1_of_means = ScoreTriple::from_pr(out.macro.precision, out.macro.recall).f1;
  return out;
}

}  // namespace

AggregateScore aggregate_scores(std::span<const DbScore> scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "no database scores to aggregate");
  return AggregateScore{
      aggregate_level(scores, &DbScore::table),
      aggregate_level(scores, &DbScore::table_col),
      aggregate_level(scores, &DbScore::table_col_type),
  };
}

}  // namespace schemaprobe
