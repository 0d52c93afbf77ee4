#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace schemaprobe {

struct ColumnDef {
  std::string name;
  // Raw declared type, e.g. "VARCHAR(255)". Empty means unknown.
  std::string data_type;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
};

enum class Stage { kBaseline, kPsi, kReconstruction, kGroundTruth };

std::string_view stage_name(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

// A database schema. Tables and columns are keyed by their normalized
// identifier: adding an element whose normalized name already exists merges
// into the existing one (first raw spelling kept, a declared type fills an
// unknown one).
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::string db_id) : db_id_(std::move(db_id)) {}
  Schema(std::string db_id, std::vector<TableDef> tables);

  const std::string& db_id() const { return db_id_; }
  void set_db_id(std::string db_id) { db_id_ = std::move(db_id); }

  const std::vector<TableDef>& tables() const { return tables_; }
  bool empty() const { return tables_.empty(); }
  std::size_t column_count() const;

  TableDef& add_table(std::string_view name);
  void add_table(const TableDef& table);
  void add_column(std::string_view table, const ColumnDef& column);

  const TableDef* find_table(std::string_view name) const;

  // Optional stage tag per element; keys are "table" or "table.column".
  const std::map<std::string, Stage>& provenance() const { return provenance_; }
  void tag(const std::string& element, Stage stage) { provenance_[element] = stage; }
  void tag_all(Stage stage);

  // Tables and columns sorted by normalized name.
  Schema sorted() const;

 private:
  TableDef* find_table_mut(std::string_view name);

  std::string db_id_;
  std::vector<TableDef> tables_;
  std::map<std::string, Stage> provenance_;
};

// Identifier used for merge keys: normalize_identifier, or the lowercased raw
// text when normalization yields nothing.
std::string merge_key(std::string_view raw);

// Lowercase, spaces to underscores, drop everything outside [a-z0-9_].
// Throws Error{kNormalizationEmpty} if nothing survives.
std::string normalize_identifier(std::string_view raw);
std::optional<std::string> try_normalize_identifier(std::string_view raw);

// Canonical type family name ("text", "int", "bool", "real", "datetime"),
// the cleaned lowercase spelling for unmapped types, or "unknown" for empty
// input.
std::string canonical_type(std::string_view raw);

using ColumnKey = std::pair<std::string, std::string>;
using TypedColumnKey = std::tuple<std::string, std::string, std::string>;

struct CanonicalSchema {
  std::set<std::string> tables;
  std::set<ColumnKey> columns;
  std::set<TypedColumnKey> typed_columns;
  // Elements whose identifiers normalized to nothing.
  std::size_t dropped = 0;

  bool empty() const { return tables.empty(); }
  bool operator==(const CanonicalSchema& other) const {
    return tables == other.tables && columns == other.columns &&
           typed_columns == other.typed_columns;
  }
};

// Columns with an empty declared type are left out of typed_columns.
CanonicalSchema canonicalize(const Schema& schema);

// CREATE TABLE rendering without constraints; identifiers quoted only when
// they are not plain words.
std::string render_ddl(const Schema& schema);
// "table1: column1 (type), column2 (type) | table2: ..." for T5-style prompts.
std::string render_pipe_schema(const Schema& schema);
std::string quote_identifier_if_needed(std::string_view name);

}  // namespace schemaprobe
