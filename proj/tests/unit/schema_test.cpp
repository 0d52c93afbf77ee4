#include <random>
#include <string>

#include "doctest.h"
#include "schemaprobe/error.hpp"
#include "schemaprobe/schema.hpp"

using namespace schemaprobe;

namespace {

std::string random_identifier(std::mt19937_64& rng) {
  static const std::string kAlphabet =
      "abcXYZ019_ -#@$.()[]\"'\t\xc3\xa9!?";
  std::uniform_int_distribution<std::size_t> len(0, 24);
  std::uniform_int_distribution<std::size_t> pick(0, kAlphabet.size() - 1);
  std::string s(len(rng), ' ');
  for (auto& c : s) c = kAlphabet[pick(rng)];
  return s;
}

bool in_charset(const std::string& s) {
  for (char c : s) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("normalize_identifier applies the lowercase/underscore/strip rules") {
  CHECK(normalize_identifier("Famous_Title") == "famous_title");
  CHECK(normalize_identifier("Date of ceremony") == "date_of_ceremony");
  CHECK(normalize_identifier("Volume-ID#") == "volumeid");
  CHECK_THROWS_AS(normalize_identifier("#@!"), Error);
  try {
    normalize_identifier("--");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNormalizationEmpty);
  }
}

TEST_CASE("normalize_identifier is idempotent and lands in [a-z0-9_]") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto raw = random_identifier(rng);
    const auto once = try_normalize_identifier(raw);
    if (!once) continue;
    CHECK(in_charset(*once));
    CHECK(normalize_identifier(*once) == *once);
  }
}

TEST_CASE("canonical_type maps type families") {
  CHECK(canonical_type("VARCHAR(255)") == "text");
  CHECK(canonical_type("text") == "text");
  CHECK(canonical_type("INTEGER") == "int");
  CHECK(canonical_type("int") == "int");
  CHECK(canonical_type("Boolean") == "bool");
  CHECK(canonical_type("bool") == "bool");
  CHECK(canonical_type("DECIMAL(10, 2)") == "real");
  CHECK(canonical_type("double precision") == "real");
  CHECK(canonical_type("character varying(20)") == "text");
  CHECK(canonical_type("TIMESTAMP") == "datetime");
  CHECK(canonical_type("") == "unknown");
  CHECK(canonical_type("Geometry") == "geometry");
  CHECK(canonical_type("varchar(255") == "text");
}

TEST_CASE("canonical_type is idempotent and never emits '(' or uppercase") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto raw = random_identifier(rng);
    const auto once = canonical_type(raw);
    CHECK(once.find('(') == std::string::npos);
    for (char c : once) CHECK_FALSE((c >= 'A' && c <= 'Z'));
    CHECK(canonical_type(once) == once);
  }
}

TEST_CASE("canonicalize collapses duplicates and drops empty identifiers") {
  Schema s("db", {TableDef{"STUDENTS", {{"name", "TEXT"}}}});
  auto c = canonicalize(s);
  CHECK(c.tables == std::set<std::string>{"students"});
  CHECK(c.columns == std::set<ColumnKey>{{"students", "name"}});
  CHECK(c.typed_columns == std::set<TypedColumnKey>{{"students", "name", "text"}});

  Schema dup("db", {TableDef{"Artist", {}}, TableDef{"ARTIST", {}}});
  CHECK(dup.tables().size() == 1);
  CHECK(canonicalize(dup).tables == std::set<std::string>{"artist"});

  CHECK(canonicalize(Schema{}).empty());

  Schema junk("db", {TableDef{"t", {{"##", "INT"}, {"ok", ""}}}});
  auto cj = canonicalize(junk);
  CHECK(cj.dropped == 1);
  CHECK(cj.columns.size() == 1);
  CHECK(cj.typed_columns.empty());
}

TEST_CASE("Schema merges columns and fills unknown types") {
  Schema s("db");
  s.add_column("Students", {"Name", ""});
  s.add_column("students", {"name", "TEXT"});
  s.add_column("students", {"NAME", "INT"});
  REQUIRE(s.tables().size() == 1);
  REQUIRE(s.tables()[0].columns.size() == 1);
  CHECK(s.tables()[0].name == "Students");
  CHECK(s.tables()[0].columns[0].data_type == "TEXT");
}

TEST_CASE("render_ddl quotes identifiers that are not plain words") {
  Schema s("db", {TableDef{"festival", {{"Date of ceremony", "TEXT"}, {"order", "INT"}, {"id", ""}}}});
  const auto ddl = render_ddl(s);
  CHECK(ddl ==
        "CREATE TABLE festival (\n    \"Date of ceremony\" TEXT,\n    \"order\" INT,\n    id\n);\n");
  CHECK(render_pipe_schema(s) == "festival: Date of ceremony (TEXT), order (INT), id");
}
