#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schemaprobe/schema.hpp"

namespace schemaprobe {

struct ScoreTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static ScoreTriple from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
  static ScoreTriple from_pr(double precision, double recall);
};

// One matching level for one database. A level where both the predicted and
// the actual set are empty is skipped and left out of aggregates.
struct LevelScore {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  bool skipped = false;
  ScoreTriple score;
};

struct ErrorBreakdown {
  std::size_t suffix_mismatch = 0;
  std::size_t semantic_substitution = 0;
  std::size_t other_fp = 0;
  std::size_t other_fn = 0;

  ErrorBreakdown& operator+=(const ErrorBreakdown& other);
};

struct DbScore {
  std::string db_id;
  LevelScore table;
  LevelScore table_col;
  LevelScore table_col_type;
  ErrorBreakdown errors;
};

// Directional predicted -> actual synonym pairs, stored normalized.
class SynonymTable {
 public:
  SynonymTable() = default;

  // "predicted<TAB>actual" per line; '#' starts a comment.
  static SynonymTable parse(std::string_view text);
  static SynonymTable load(const std::filesystem::path& path);

  void add(std::string_view predicted, std::string_view actual);
  const std::set<std::string>& targets(const std::string& predicted) const;
  std::size_t size() const;

 private:
  std::map<std::string, std::set<std::string>> map_;
};

// Column-level false positives are classified as suffix_mismatch when a
// singular/plural variant ("s"/"es") of the predicted table or column name
// hits a ground-truth pair, semantic_substitution when the synonym table
// does, and other_fp otherwise. Ground-truth pairs that were missed and are
// not the target of a classified false positive count as other_fn.
ErrorBreakdown classify_errors(const CanonicalSchema& predicted,
                               const CanonicalSchema& actual,
                               const SynonymTable& synonyms = {});

DbScore score_database(const CanonicalSchema& predicted,
                       const CanonicalSchema& actual,
                       const SynonymTable& synonyms = {});

struct LevelAggregate {
  // Mean of per-database P, R and F1, each averaged independently.
  ScoreTriple macro;
  // F1 recomputed from the averaged P and R, reported alongside.
  double f1_of_means = 0.0;
  std::size_t databases = 0;
};

struct AggregateScore {
  LevelAggregate table;
  LevelAggregate table_col;
  LevelAggregate table_col_type;
};

AggregateScore aggregate_scores(std::span<const DbScore> scores);

}  // namespace schemaprobe
