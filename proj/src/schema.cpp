#include "schemaprobe/schema.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>

#include "schemaprobe/error.hpp"

namespace schemaprobe {

namespace {

char ascii_lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

const std::unordered_map<std::string, std::string>& type_families() {
  static const std::unordered_map<std::string, std::string> kFamilies = {
      {"varchar", "text"},   {"char", "text"},         {"nvarchar", "text"},
      {"text", "text"},      {"string", "text"},       {"clob", "text"},
      {"int", "int"},        {"integer", "int"},       {"bigint", "int"},
      {"smallint", "int"},   {"tinyint", "int"},       {"bool", "bool"},
      {"boolean", "bool"},   {"float", "real"},        {"double", "real"},
      {"real", "real"},      {"decimal", "real"},      {"numeric", "real"},
      {"date", "datetime"},  {"datetime", "datetime"}, {"timestamp", "datetime"},
      {"time", "datetime"},
      // Multi-word spellings whose first word is not itself a family key.
      {"character varying", "text"}, {"character", "text"},
  };
  return kFamilies;
}

bool is_plain_word(std::string_view name) {
  if (name.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

// Names that would be taken for clause keywords by the extractor.
bool is_reserved_word(std::string_view name) {
  static const std::set<std::string> kReserved = {
      "select", "from",  "where", "table", "create", "insert", "into",  "values",
      "join",   "on",    "and",   "or",    "not",    "null",   "order", "group",
      "by",     "as",    "in",    "is",    "like",   "primary", "foreign", "key",
      "unique", "check", "constraint", "references", "default", "union", "having",
      "limit",  "case",  "when",  "then",  "else",   "end",    "between", "distinct",
  };
  return kReserved.count(lowercase(name)) > 0;
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kBaseline: return "baseline";
    case Stage::kPsi: return "psi";
    case Stage::kReconstruction: return "reconstruction";
    case Stage::kGroundTruth: return "ground_truth";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view name) {
  if (name == "baseline") return Stage::kBaseline;
  if (name == "psi") return Stage::kPsi;
  if (name == "reconstruction") return Stage::kReconstruction;
  if (name == "ground_truth") return Stage::kGroundTruth;
  return std::nullopt;
}

std::optional<std::string> try_normalize_identifier(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    char lc = ascii_lower(c);
    if (lc == ' ') lc = '_';
    if ((lc >= 'a' && lc <= 'z') || (lc >= '0' && lc <= '9') || lc == '_') out.push_back(lc);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::string normalize_identifier(std::string_view raw) {
  auto normalized = try_normalize_identifier(raw);
  if (!normalized) {
    throw Error(ErrorCode::kNormalizationEmpty,
                "identifier '" + std::string(raw) + "' is empty after normalization");
  }
  return *normalized;
}

std::string merge_key(std::string_view raw) {
  auto normalized = try_normalize_identifier(raw);
  return normalized ? *normalized : lowercase(raw);
}

std::string canonical_type(std::string_view raw) {
  // Lowercase and drop parenthesized length/precision, including an
  // unterminated trailing "(".
  std::string cleaned;
  int depth = 0;
  for (char c : raw) {
    if (c == '(') {
      ++depth;
      continue;
    }
    if (c == ')') {
      if (depth > 0) --depth;
      continue;
    }
    if (depth == 0) cleaned.push_back(ascii_lower(c));
  }
  // Collapse whitespace runs and trim.
  std::string collapsed;
  for (char c : cleaned) {
    if (is_space(c)) {
      if (!collapsed.empty() && collapsed.back() != ' ') collapsed.push_back(' ');
    } else {
      collapsed.push_back(c);
    }
  }
  while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
  if (collapsed.empty()) return "unknown";

  const auto& families = type_families();
  if (auto it = families.find(collapsed); it != families.end()) return it->second;
  const auto first_word = collapsed.substr(0, collapsed.find(' '));
  if (auto it = families.find(first_word); it != families.end()) return it->second;
  return collapsed;
}

Schema::Schema(std::string db_id, std::vector<TableDef> tables) : db_id_(std::move(db_id)) {
  for (const auto& table : tables) add_table(table);
}

std::size_t Schema::column_count() const {
  std::size_t n = 0;
  for (const auto& t : tables_) n += t.columns.size();
  return n;
}

TableDef* Schema::find_table_mut(std::string_view name) {
  const auto key = merge_key(name);
  for (auto& t : tables_) {
    if (merge_key(t.name) == key) return &t;
  }
  return nullptr;
}

const TableDef* Schema::find_table(std::string_view name) const {
  return const_cast<Schema*>(this)->find_table_mut(name);
}

TableDef& Schema::add_table(std::string_view name) {
  if (auto* existing = find_table_mut(name)) return *existing;
  tables_.push_back(TableDef{std::string(name), {}});
  return tables_.back();
}

void Schema::add_table(const TableDef& table) {
  add_table(table.name);
  for (const auto& column : table.columns) add_column(table.name, column);
}

void Schema::add_column(std::string_view table, const ColumnDef& column) {
  auto& target = add_table(table);
  const auto key = merge_key(column.name);
  for (auto& existing : target.columns) {
    if (merge_key(existing.name) == key) {
      if (existing.data_type.empty()) existing.data_type = column.data_type;
      return;
    }
  }
  target.columns.push_back(column);
}

void Schema::tag_all(Stage stage) {
  for (const auto& t : tables_) {
    provenance_[t.name] = stage;
    for (const auto& c : t.columns) provenance_[t.name + "." + c.name] = stage;
  }
}

Schema Schema::sorted() const {
  Schema out = *this;
  auto by_key = [](const auto& a, const auto& b) {
    return std::pair(merge_key(a.name), a.name) < std::pair(merge_key(b.name), b.name);
  };
  std::stable_sort(out.tables_.begin(), out.tables_.end(), by_key);
  for (auto& t : out.tables_) std::stable_sort(t.columns.begin(), t.columns.end(), by_key);
  return out;
}

CanonicalSchema canonicalize(const Schema& schema) {
  CanonicalSchema out;
  for (const auto& table : schema.tables()) {
    auto table_name = try_normalize_identifier(table.name);
    if (!table_name) {
      out.dropped += 1 + table.columns.size();
      continue;
    }
    out.tables.insert(*table_name);
    for (const auto& column : table.columns) {
      auto column_name = try_normalize_identifier(column.name);
      if (!column_name) {
        ++out.dropped;
        continue;
      }
      out.columns.emplace(*table_name, *column_name);
      if (!column.data_type.empty()) {
        out.typed_columns.emplace(*table_name, *column_name, canonical_type(column.data_type));
      }
    }
  }
  return out;
}

std::string quote_identifier_if_needed(std::string_view name) {
  if (is_plain_word(name) && !is_reserved_word(name)) return std::string(name);
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string render_ddl(const Schema& schema) {
  std::ostringstream out;
  bool first = true;
  for (const auto& table : schema.tables()) {
    if (!first) out << "\n";
    first = false;
    out << "CREATE TABLE " << quote_identifier_if_needed(table.name) << " (";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      const auto& column = table.columns[i];
      out << "\n    " << quote_identifier_if_needed(column.name);
      if (!column.data_type.empty()) out << " " << column.data_type;
      if (i + 1 < table.columns.size()) out << ",";
    }
    out << (table.columns.empty() ? ");\n" : "\n);\n");
  }
  return out.str();
}

std::string render_pipe_schema(const Schema& schema) {
  std::ostringstream out;
  for (std::size_t t = 0; t < schema.tables().size(); ++t) {
    const auto& table = schema.tables()[t];
    if (t > 0) out << " | ";
    out << table.name << ":";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      const auto& column = table.columns[i];
      out << (i == 0 ? " " : ", ") << column.name;
      if (!column.data_type.empty()) out << " (" << column.data_type << ")";
    }
  }
  return out.str();
}

}  // namespace schemaprobe
