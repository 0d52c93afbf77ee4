#include <random>

#include "doctest.h"
#include "schemaprobe/error.hpp"
#include "schemaprobe/metrics.hpp"
#include "schemaprobe/sql_extract.hpp"
#include "set_oracle.hpp"
#include "worked_example.hpp"

using namespace schemaprobe;

namespace {

CanonicalSchema canon(std::initializer_list<TableDef> tables) {
  return canonicalize(Schema("db", std::vector<TableDef>(tables)));
}

}  // namespace

TEST_CASE("score_database: identity scores 1.0 at every level") {
  auto c = canon({{"students", {{"name", "TEXT"}, {"id", "INT"}}}, {"courses", {{"title", "TEXT"}}}});
  auto s = score_database(c, c);
  CHECK(s.table.score.f1 == 1.0);
  CHECK(s.table_col.score.f1 == 1.0);
  CHECK(s.table_col_type.score.f1 == 1.0);
  CHECK(s.errors.suffix_mismatch + s.errors.semantic_substitution + s.errors.other_fp +
            s.errors.other_fn ==
        0);
}

TEST_CASE("score_database: table-level arithmetic") {
  auto predicted = canon({{"students", {}}});
  auto actual = canon({{"students", {}}, {"courses", {}}});
  auto s = score_database(predicted, actual);
  CHECK(s.table.score.precision == 1.0);
  CHECK(s.table.score.recall == 0.5);
  CHECK(s.table.score.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(s.table_col.skipped);
}

TEST_CASE("score_database: worked example matches the brute-force oracle") {
  using namespace schemaprobe::testing;
  const auto predicted = canonicalize(extract_schema(kWorkedReconstruction));
  const auto actual = canonicalize(extract_schema(kWorkedGroundTruth));
  const auto s = score_database(predicted, actual);

  const auto pr = oracle_rows_from_ddl(kWorkedReconstruction);
  const auto ar = oracle_rows_from_ddl(kWorkedGroundTruth);
  const auto t = oracle_level(pr, ar, 0);
  const auto tc = oracle_level(pr, ar, 1);
  const auto tct = oracle_level(pr, ar, 2);

  CHECK(s.table.tp == std::size_t(t.tp));
  CHECK(s.table_col.tp == std::size_t(tc.tp));
  CHECK(s.table_col.fp == std::size_t(tc.fp));
  CHECK(s.table_col.fn == std::size_t(tc.fn));
  CHECK(s.table_col_type.tp == std::size_t(tct.tp));
  CHECK(s.table_col_type.fp == std::size_t(tct.fp));
  CHECK(s.table_col_type.fn == std::size_t(tct.fn));

  // Frozen from the oracle.
  CHECK(s.table.score.f1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.table_col.tp == 15);
  CHECK(s.table_col.fp == 0);
  CHECK(s.table_col.fn == 2);
  CHECK(s.table_col.score.f1 == doctest::Approx(0.9375).epsilon(1e-12));
  CHECK(s.table_col_type.tp == 12);
  CHECK(s.table_col_type.score.f1 == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("score_database: wrong-table column is both FP and FN") {
  auto predicted = canon({{"a", {{"x", "INT"}}}, {"b", {}}});
  auto actual = canon({{"a", {}}, {"b", {{"x", "INT"}}}});
  auto s = score_database(predicted, actual);
  CHECK(s.table_col.tp == 0);
  CHECK(s.table_col.fp == 1);
  CHECK(s.table_col.fn == 1);
}

TEST_CASE("score_database: empty prediction gives zero precision") {
  auto s = score_database(CanonicalSchema{}, canon({{"t", {{"c", "INT"}}}}));
  CHECK(s.table.score.precision == 0.0);
  CHECK(s.table.score.f1 == 0.0);
  CHECK_FALSE(s.table.skipped);
  CHECK_THROWS_AS(score_database(CanonicalSchema{}, CanonicalSchema{}), Error);
}

TEST_CASE("score_database: monotone containment and level ordering (property)") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    CanonicalSchema actual;
    const int tables = 1 + int(rng() % 6);
    for (int t = 0; t < tables; ++t) {
      const auto tn = "t" + std::to_string(t);
      actual.tables.insert(tn);
      const int cols = int(rng() % 5);
      for (int c = 0; c < cols; ++c) {
        const auto cn = "c" + std::to_string(c);
        actual.columns.emplace(tn, cn);
        actual.typed_columns.emplace(tn, cn, (rng() % 2) ? "int" : "text");
      }
    }
    CanonicalSchema p1, p2;
    for (const auto& t : actual.tables) {
      const auto r = rng() % 3;
      if (r >= 1) p2.tables.insert(t);
      if (r == 2) p1.tables.insert(t);
    }
    const auto s1 = score_database(p1, actual);
    const auto s2 = score_database(p2, actual);
    CHECK(s1.table.score.recall <= s2.table.score.recall);
    if (!p1.tables.empty()) CHECK(s1.table.score.precision == 1.0);
    if (!p2.tables.empty()) CHECK(s2.table.score.precision == 1.0);

    // Random noisy prediction: typed TPs never exceed column TPs.
    CanonicalSchema noisy;
    for (const auto& [t, c] : actual.columns) {
      if (rng() % 2) {
        noisy.tables.insert(t);
        noisy.columns.emplace(t, c);
        noisy.typed_columns.emplace(t, c, (rng() % 2) ? "int" : "text");
      }
    }
    noisy.tables.insert("extra");
    noisy.columns.emplace("extra", "c0");
    const auto sn = score_database(noisy, actual);
    CHECK(sn.table_col_type.tp <= sn.table_col.tp);
    CHECK(sn.table_col.tp <= noisy.columns.size());
    CHECK(sn.errors.suffix_mismatch + sn.errors.semantic_substitution + sn.errors.other_fp ==
          sn.table_col.fp);
  }
}

TEST_CASE("aggregate_scores macro-averages each quantity") {
  DbScore a;
  a.table.score = ScoreTriple{1.0, 1.0, 1.0};
  DbScore b;
  b.table.score = ScoreTriple{0.0, 0.0, 0.0};
  DbScore skipped_levels;
  for (auto* l : {&a.table_col, &a.table_col_type, &b.table_col, &b.table_col_type}) l->skipped = true;
  std::vector<DbScore> two{a, b};
  auto agg = aggregate_scores(two);
  CHECK(agg.table.macro.f1 == 0.5);
  CHECK(agg.table.databases == 2);
  CHECK(agg.table_col.databases == 0);

  std::vector<DbScore> one{a};
  CHECK(aggregate_scores(one).table.macro.f1 == 1.0);

  std::vector<DbScore> three(3);
  const double f1s[] = {1.0, 0.9375, 0.75};
  for (int i = 0; i < 3; ++i) three[i].table.score = ScoreTriple{1.0, 1.0, f1s[i]};
  CHECK(aggregate_scores(three).table.macro.f1 == doctest::Approx(2.6875 / 3).epsilon(1e-12));

  // n copies of one score aggregate to itself.
  DbScore x;
  x.table.score = ScoreTriple::from_counts(3, 1, 2);
  x.table_col.score = ScoreTriple::from_counts(7, 2, 5);
  x.table_col_type.score = ScoreTriple::from_counts(4, 5, 8);
  std::vector<DbScore> copies(9, x);
  auto ax = aggregate_scores(copies);
  CHECK(ax.table.macro.f1 == doctest::Approx(x.table.score.f1).epsilon(1e-12));
  CHECK(ax.table_col.macro.recall == doctest::Approx(x.table_col.score.recall).epsilon(1e-12));
  CHECK(ax.table_col_type.macro.precision ==
        doctest::Approx(x.table_col_type.score.precision).epsilon(1e-12));

  CHECK_THROWS_AS(aggregate_scores(std::vector<DbScore>{}), Error);
}

TEST_CASE("classify_errors separates suffix, synonym and other errors") {
  auto s1 = classify_errors(canon({{"school", {{"student", ""}}}}),
                            canon({{"school", {{"students", ""}}}}));
  CHECK(s1.suffix_mismatch == 1);
  CHECK(s1.other_fp == 0);
  CHECK(s1.other_fn == 0);

  SynonymTable synonyms;
  synonyms.add("ssn", "socialsecurity");
  auto s2 = classify_errors(canon({{"hr", {{"ssn", ""}}}}), canon({{"hr", {{"socialsecurity", ""}}}}),
                            synonyms);
  CHECK(s2.semantic_substitution == 1);
  CHECK(s2.other_fn == 0);

  auto c = canon({{"a", {{"b", ""}}}});
  auto s3 = classify_errors(c, c);
  CHECK(s3.suffix_mismatch + s3.semantic_substitution + s3.other_fp + s3.other_fn == 0);

  // Table name drift counts as a suffix mismatch of the column pair.
  auto s4 = classify_errors(canon({{"student", {{"name", ""}}}}),
                            canon({{"students", {{"name", ""}}}, {"x", {{"y", ""}}}}));
  CHECK(s4.suffix_mismatch == 1);
  CHECK(s4.other_fn == 1);
}

TEST_CASE("SynonymTable parses tab-separated pairs and comments") {
  auto t = SynonymTable::parse("# header\nSSN\tSocialSecurity\nbad line\nDOB\tdate of birth # trailing\n");
  CHECK(t.size() == 2);
  CHECK(t.targets("ssn").count("socialsecurity") == 1);
  CHECK(t.targets("dob").count("date_of_birth") == 1);
  CHECK(SynonymTable::load(SCHEMAPROBE_DATA_DIR "/synonyms.tsv").size() > 0);
}
