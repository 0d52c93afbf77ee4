#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schemaprobe/schema.hpp"

namespace schemaprobe {

enum class StatementKind { kSelect, kInsert, kCreateTable, kOther, kUnparseable };

std::string_view statement_kind_name(StatementKind kind);

struct SqlStatement {
  std::string raw;
  StatementKind kind = StatementKind::kOther;
};

struct ExtractionResult {
  Schema schema;
  std::size_t attributed = 0;
  std::vector<std::string> unattributed;
  std::size_t skipped_statements = 0;
};

// Pulls SQL statements out of a model response. Fenced code blocks win when
// present; otherwise the text is scanned for statement keywords. Splits on
// ';' outside literals and comments, and at a new line that opens a new
// top-level statement. Text without any statement keyword yields nothing.
std::vector<SqlStatement> split_statements(std::string_view text);

// Table name, column names and verbatim declared types; constraint clauses
// are ignored. A malformed statement is counted in skipped_statements.
ExtractionResult extract_from_create(const SqlStatement& stmt);

// Tables from FROM/JOIN/INTO, columns resolved through the alias map. An
// unqualified column is bound only when exactly one table is in scope.
ExtractionResult extract_from_query(const SqlStatement& stmt);

// Dispatches on kind; other/unparseable statements are counted as skipped.
ExtractionResult extract_statement(const SqlStatement& stmt);

// Fills unknown column types from literal comparisons, INSERT values and
// numeric aggregates found in the statements. Literal evidence beats
// aggregate evidence; within a tier the first observation wins.
ExtractionResult infer_types(ExtractionResult result, std::span<const SqlStatement> statements);

// Union of all results, sorted by normalized name; a declared type fills an
// unknown one and the first declared type wins.
Schema merge_extractions(std::span<const ExtractionResult> results);

struct ExtractionStats {
  std::size_t statements = 0;
  std::size_t skipped = 0;
  std::size_t attributed = 0;
  std::size_t unattributed = 0;
};

// split + extract + infer + merge over free-form text.
Schema extract_schema(std::string_view text, ExtractionStats* stats = nullptr);

}  // namespace schemaprobe
