#include "schemaprobe/sql_extract.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>

#include "schemaprobe/error.hpp"
#include "sql_lexer.hpp"

namespace schemaprobe {

using detail::is_identifier;
using detail::is_punct;
using detail::is_word;
using detail::to_upper;
using detail::Token;
using detail::TokenKind;

std::string_view statement_kind_name(StatementKind kind) {
  switch (kind) {
    case StatementKind::kSelect: return "select";
    case StatementKind::kInsert: return "insert";
    case StatementKind::kCreateTable: return "create_table";
    case StatementKind::kOther: return "other";
    case StatementKind::kUnparseable: return "unparseable";
  }
  return "other";
}

namespace {

// ---------------------------------------------------------------------------
// Statement splitting

const std::set<std::string>& statement_keywords() {
  static const std::set<std::string> kKeywords = {
      "SELECT", "INSERT", "CREATE", "WITH", "UPDATE", "DELETE", "ALTER", "DROP", "REPLACE",
  };
  return kKeywords;
}

bool opens_statement(const Token& t) {
  return t.kind == TokenKind::kWord && statement_keywords().count(to_upper(t.text)) > 0;
}

bool is_upper_word(const Token& t) {
  return std::none_of(t.text.begin(), t.text.end(),
                      [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

StatementKind classify(const std::vector<Token>& tokens) {
  if (tokens.empty()) return StatementKind::kOther;
  const auto first = to_upper(tokens[0].text);
  if (tokens[0].kind != TokenKind::kWord) return StatementKind::kOther;
  if (first == "SELECT") return StatementKind::kSelect;
  if (first == "INSERT") return StatementKind::kInsert;
  if (first == "REPLACE" && tokens.size() > 1 && is_word(tokens[1], "INTO")) {
    return StatementKind::kInsert;
  }
  if (first == "WITH") return StatementKind::kUnparseable;
  if (first == "CREATE") {
    for (std::size_t i = 1; i < tokens.size() && i < 4; ++i) {
      const auto w = to_upper(tokens[i].text);
      if (w == "TABLE") return StatementKind::kCreateTable;
      if (w != "TEMP" && w != "TEMPORARY" && w != "VIRTUAL" && w != "GLOBAL" && w != "LOCAL") break;
    }
  }
  return StatementKind::kOther;
}

struct Chunk {
  std::string text;
  bool fenced = false;
};

std::vector<Chunk> fenced_chunks(std::string_view text) {
  std::vector<Chunk> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    std::size_t body = open + 3;
    auto close = text.find("```", body);
    const bool closed = close != std::string_view::npos;
    if (!closed) close = text.size();
    std::string inner(text.substr(body, close - body));
    // Drop a language tag such as ```sql on its own line.
    if (const auto nl = inner.find('\n'); nl != std::string::npos) {
      const auto tag = inner.substr(0, nl);
      const bool tag_like = std::all_of(tag.begin(), tag.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+' ||
               c == '\r';
      });
      if (tag_like && !statement_keywords().count(to_upper(tag))) inner.erase(0, nl + 1);
    }
    out.push_back(Chunk{std::move(inner), true});
    if (!closed) break;
    pos = close + 3;
  }
  return out;
}

void split_chunk(const Chunk& chunk, std::vector<SqlStatement>& out) {
  const auto tokens = detail::tokenize(chunk.text);

  auto emit = [&](std::size_t first, std::size_t last) {
    if (first >= last) return;
    const std::vector<Token> slice(tokens.begin() + static_cast<std::ptrdiff_t>(first),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(last));
    const auto begin = tokens[first].begin;
    const auto end = tokens[last - 1].end;
    out.push_back(SqlStatement{chunk.text.substr(begin, end - begin), classify(slice)});
  };

  auto can_open = [&](const Token& t) {
    if (!opens_statement(t)) return false;
    // Outside code fences a lowercase keyword mid-line is most likely prose.
    return chunk.fenced || t.line_start || is_upper_word(t);
  };

  // A keyword at the start of a line begins a new statement unless the
  // previous token says the current one continues (subquery, set operation,
  // INSERT ... SELECT, CREATE TABLE ... AS SELECT).
  auto continues = [&](std::size_t start, std::size_t j) {
    const auto& prev = tokens[j - 1];
    const auto pu = to_upper(prev.text);
    if (is_punct(prev, "(") || pu == "UNION" || pu == "INTERSECT" || pu == "EXCEPT" ||
        pu == "ALL" || pu == "AS" || pu == "DISTINCT") {
      return true;
    }
    const bool wraps_select = is_word(tokens[start], "INSERT") || is_word(tokens[start], "REPLACE") ||
                              is_word(tokens[start], "CREATE");
    return wraps_select && is_word(tokens[j], "SELECT") &&
           (is_punct(prev, ")") || prev.kind == TokenKind::kWord ||
            prev.kind == TokenKind::kQuotedIdent);
  };

  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t start = i;
    while (start < tokens.size() && !is_punct(tokens[start], ";") && !can_open(tokens[start])) {
      ++start;
    }
    if (start == tokens.size() || is_punct(tokens[start], ";")) {
      // Segment without a statement keyword.
      if (chunk.fenced) emit(i, start);
      i = start + 1;
      continue;
    }
    int depth = 0;
    std::size_t j = start + 1;
    for (; j < tokens.size(); ++j) {
      const auto& t = tokens[j];
      if (is_punct(t, ";")) break;
      if (is_punct(t, "(")) ++depth;
      if (is_punct(t, ")") && depth > 0) --depth;
      if (depth == 0 && t.line_start && can_open(t) && !continues(start, j)) break;
    }
    emit(start, j);
    i = (j < tokens.size() && is_punct(tokens[j], ";")) ? j + 1 : j;
  }
}

// ---------------------------------------------------------------------------
// Shared parsing helpers

std::string source_span(const std::string& raw, const Token& first, const Token& last) {
  std::string text = raw.substr(first.begin, last.end - first.begin);
  std::string out;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// Parses "name" or "schema.name"; returns the last part.
std::optional<std::string> parse_qualified_name(const std::vector<Token>& tokens, std::size_t& i) {
  if (i >= tokens.size() || !is_identifier(tokens[i])) return std::nullopt;
  std::string name = tokens[i++].text;
  while (i + 1 < tokens.size() && is_punct(tokens[i], ".") && is_identifier(tokens[i + 1])) {
    name = tokens[i + 1].text;
    i += 2;
  }
  return name;
}

// ---------------------------------------------------------------------------
// CREATE TABLE

const std::set<std::string>& column_constraint_words() {
  static const std::set<std::string> kWords = {
      "PRIMARY",   "NOT",      "NULL",     "DEFAULT",   "REFERENCES", "UNIQUE",
      "CHECK",     "AUTO_INCREMENT", "AUTOINCREMENT", "COLLATE", "GENERATED", "CONSTRAINT",
      "COMMENT",   "IDENTITY", "ON",       "AS",        "CHARACTER_SET", "ENCODE",
  };
  return kWords;
}

bool is_table_constraint(const std::vector<Token>& el) {
  if (el.empty() || el[0].kind != TokenKind::kWord) return false;
  const auto w = to_upper(el[0].text);
  if (w == "CONSTRAINT") return true;
  if ((w == "PRIMARY" || w == "FOREIGN") && el.size() > 1 && is_word(el[1], "KEY")) return true;
  if (w == "UNIQUE" || w == "CHECK" || w == "KEY" || w == "INDEX" || w == "FULLTEXT" ||
      w == "SPATIAL" || w == "EXCLUDE") {
    if (el.size() > 1 && is_punct(el[1], "(")) return true;
    if (el.size() > 2 && is_identifier(el[1]) && is_punct(el[2], "(")) return true;
    if (el.size() > 1 && (is_word(el[1], "KEY") || is_word(el[1], "INDEX"))) return true;
  }
  return false;
}

ExtractionResult parse_create(const SqlStatement& stmt) {
  const auto tokens = detail::tokenize(stmt.raw);
  auto malformed = [&](const std::string& why) {
    return Error(ErrorCode::kMalformedDdl, why + ": " + stmt.raw.substr(0, 80));
  };
  std::size_t i = 0;
  if (i >= tokens.size() || !is_word(tokens[i], "CREATE")) throw malformed("expected CREATE");
  ++i;
  while (i < tokens.size() && !is_word(tokens[i], "TABLE")) {
    const auto w = to_upper(tokens[i].text);
    if (w != "TEMP" && w != "TEMPORARY" && w != "VIRTUAL" && w != "GLOBAL" && w != "LOCAL") {
      throw malformed("expected TABLE");
    }
    ++i;
  }
  if (i >= tokens.size()) throw malformed("expected TABLE");
  ++i;
  if (i + 2 < tokens.size() && is_word(tokens[i], "IF") && is_word(tokens[i + 1], "NOT") &&
      is_word(tokens[i + 2], "EXISTS")) {
    i += 3;
  }
  const auto table = parse_qualified_name(tokens, i);
  if (!table || table->empty()) throw malformed("missing table name");
  if (i >= tokens.size() || !is_punct(tokens[i], "(")) throw malformed("missing column list");
  ++i;

  ExtractionResult result;
  result.schema.add_table(*table);

  // Split the body into comma-separated elements at depth zero. A missing
  // closing parenthesis (truncated reply) ends the body at end of input.
  std::vector<std::vector<Token>> elements(1);
  int depth = 0;
  for (; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (is_punct(t, "(")) ++depth;
    if (is_punct(t, ")")) {
      if (depth == 0) break;
      --depth;
    }
    if (depth == 0 && is_punct(t, ",")) {
      elements.emplace_back();
      continue;
    }
    elements.back().push_back(t);
  }

  for (const auto& el : elements) {
    if (el.empty() || is_table_constraint(el)) continue;
    if (!is_identifier(el[0]) && el[0].kind != TokenKind::kString) continue;
    ColumnDef column{el[0].text, ""};
    if (column.name.empty()) continue;
    std::size_t type_end = 1;
    int type_depth = 0;
    for (; type_end < el.size(); ++type_end) {
      const auto& t = el[type_end];
      if (is_punct(t, "(")) ++type_depth;
      if (is_punct(t, ")")) --type_depth;
      if (type_depth == 0 && t.kind == TokenKind::kWord &&
          column_constraint_words().count(to_upper(t.text))) {
        break;
      }
    }
    if (type_end > 1) column.data_type = source_span(stmt.raw, el[1], el[type_end - 1]);
    result.schema.add_column(*table, column);
    ++result.attributed;
  }
  return result;
}

// ---------------------------------------------------------------------------
// SELECT / INSERT analysis

enum class LiteralType { kText, kInt, kReal, kDatetime, kBool };

std::string_view literal_type_sql(LiteralType t) {
  switch (t) {
    case LiteralType::kText: return "TEXT";
    case LiteralType::kInt: return "INT";
    case LiteralType::kReal: return "REAL";
    case LiteralType::kDatetime: return "DATETIME";
    case LiteralType::kBool: return "BOOLEAN";
  }
  return "TEXT";
}

LiteralType string_literal_type(const std::string& s) {
  static const std::regex kDate(R"(^\d{4}-\d{2}-\d{2})");
  return std::regex_search(s, kDate) ? LiteralType::kDatetime : LiteralType::kText;
}

LiteralType number_literal_type(const std::string& s) {
  return s.find_first_of(".eE") == std::string::npos ? LiteralType::kInt : LiteralType::kReal;
}

struct ColumnRef {
  std::vector<std::string> parts;  // qualifier parts followed by the column name
  bool order_context = false;      // ORDER BY / GROUP BY / HAVING: may name an output alias
  std::optional<LiteralType> strong;
  bool aggregate = false;
};

struct ScopeEntry {
  std::string table;  // base table name; empty for a derived table
  std::string alias;
};

struct Scope {
  Scope* parent = nullptr;
  std::vector<ScopeEntry> entries;
  std::vector<ColumnRef> refs;
  std::set<std::string> output_aliases;
};

struct Resolved {
  std::string table;
  std::string column;
  std::optional<LiteralType> strong;
  bool aggregate = false;
};

struct Analysis {
  std::vector<std::string> tables;
  std::vector<Resolved> columns;
  std::vector<std::string> unattributed;
};

const std::set<std::string>& clause_stop_words() {
  static const std::set<std::string> kWords = {
      "FROM",  "WHERE",  "GROUP",     "ORDER",  "HAVING", "LIMIT", "OFFSET",  "UNION",
      "INTERSECT", "EXCEPT", "JOIN", "INNER", "LEFT", "RIGHT", "FULL", "CROSS",
      "NATURAL", "ON", "USING", "WINDOW", "FETCH", "VALUES", "SET", "INTO", "RETURNING",
      "OUTER", "QUALIFY",
  };
  return kWords;
}

const std::set<std::string>& expression_words() {
  static const std::set<std::string> kWords = {
      "AND",  "OR",     "NOT",    "IS",      "NULL",     "CASE",    "WHEN",      "THEN",
      "ELSE", "END",    "EXISTS", "ASC",     "DESC",     "DISTINCT", "ALL",      "ANY",
      "SOME", "IN",     "LIKE",   "ILIKE",   "BETWEEN",  "ESCAPE",  "OVER",      "PARTITION",
      "BY",   "ROWS",   "RANGE",  "UNBOUNDED", "PRECEDING", "FOLLOWING", "CURRENT", "ROW",
      "FILTER", "GLOB", "REGEXP", "COLLATE", "TOP", "PERCENT", "DIV", "MOD", "SIMILAR", "TO",
  };
  return kWords;
}

const std::set<std::string>& datetime_keywords() {
  static const std::set<std::string> kWords = {
      "CURRENT_DATE", "CURRENT_TIMESTAMP", "CURRENT_TIME", "NOW", "LOCALTIMESTAMP", "LOCALTIME",
  };
  return kWords;
}

bool is_comparison(const Token& t) {
  static const std::set<std::string> kOps = {"=", "==", "<", ">", "<=", ">=", "<>", "!="};
  return t.kind == TokenKind::kPunct && kOps.count(t.text) > 0;
}

bool same_name(const std::string& a, const std::string& b) { return merge_key(a) == merge_key(b); }

class QueryAnalyzer {
 public:
  explicit QueryAnalyzer(const std::string& raw) : tokens_(detail::tokenize(raw)) {}

  Analysis run() {
    if (at_end()) throw Error(ErrorCode::kMalformedQuery, "empty statement");
    if (word_is("SELECT")) {
      parse_select(nullptr);
    } else if (word_is("INSERT") || word_is("REPLACE")) {
      parse_insert();
    } else {
      throw Error(ErrorCode::kMalformedQuery, "expected SELECT or INSERT");
    }
    return std::move(analysis_);
  }

 private:
  struct Operand {
    std::optional<std::size_t> ref;  // index into scope->refs
    std::optional<LiteralType> literal;
  };

  struct ExprState {
    Operand last;
    bool pending_compare = false;  // comparison/LIKE/BETWEEN/IN after `last`
    std::optional<std::size_t> in_list_ref;
    bool between = false;
  };

  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    static const Token kEnd{TokenKind::kPunct, "", 0, 0, false};
    return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead] : kEnd;
  }
  bool word_is(std::string_view kw, std::size_t ahead = 0) const { return is_word(peek(ahead), kw); }
  bool punct_is(std::string_view p, std::size_t ahead = 0) const {
    return pos_ + ahead < tokens_.size() && is_punct(peek(ahead), p);
  }
  std::string upper(std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::kWord ? to_upper(peek(ahead).text) : std::string();
  }

  bool at_clause_stop() const {
    if (at_end()) return true;
    if (punct_is(";") || punct_is(")") || punct_is(",")) return true;
    const auto u = upper();
    if (u.empty()) return false;
    // LEFT(...) / RIGHT(...) are string functions, not join keywords.
    if ((u == "LEFT" || u == "RIGHT") && punct_is("(", 1)) return false;
    if (clause_stop_words().count(u)) return true;
    return false;
  }

  void skip_balanced_parens() {
    if (!punct_is("(")) return;
    int depth = 0;
    while (!at_end()) {
      if (punct_is("(")) ++depth;
      if (punct_is(")")) {
        --depth;
        if (depth == 0) {
          ++pos_;
          return;
        }
      }
      ++pos_;
    }
  }

  // --- SELECT -------------------------------------------------------------

  void parse_select(Scope* parent) {
    Scope scope;
    scope.parent = parent;
    ++pos_;  // SELECT
    while (word_is("DISTINCT") || word_is("ALL")) ++pos_;
    if (word_is("TOP")) {
      ++pos_;
      if (peek().kind == TokenKind::kNumber) ++pos_;
      if (word_is("PERCENT")) ++pos_;
    }
    // Select list.
    while (!at_end()) {
      parse_expression(scope, /*select_item=*/true, /*order_context=*/false);
      if (punct_is(",")) {
        ++pos_;
        continue;
      }
      break;
    }
    if (word_is("INTO")) {  // SELECT ... INTO target
      ++pos_;
      parse_qualified_name(tokens_, pos_);
    }
    if (word_is("FROM")) {
      ++pos_;
      parse_from(scope);
    }
    bool more = true;
    while (more && !at_end()) {
      more = false;
      if (word_is("WHERE")) {
        ++pos_;
        parse_expression(scope, false, false);
        more = true;
      } else if ((word_is("GROUP") || word_is("ORDER")) && word_is("BY", 1)) {
        pos_ += 2;
        while (!at_end()) {
          parse_expression(scope, false, true);
          if (punct_is(",")) {
            ++pos_;
            continue;
          }
          break;
        }
        more = true;
      } else if (word_is("HAVING")) {
        ++pos_;
        parse_expression(scope, false, true);
        more = true;
      } else if (word_is("LIMIT") || word_is("OFFSET")) {
        ++pos_;
        while (!at_end() && (peek().kind == TokenKind::kNumber || punct_is(","))) ++pos_;
        more = true;
      } else if (word_is("FETCH")) {
        while (!at_end() && !punct_is(";") && !punct_is(")") && !word_is("UNION")) ++pos_;
        more = true;
      }
    }
    resolve(scope);
    if (word_is("UNION") || word_is("INTERSECT") || word_is("EXCEPT")) {
      ++pos_;
      while (word_is("ALL") || word_is("DISTINCT")) ++pos_;
      if (punct_is("(") && word_is("SELECT", 1)) {
        ++pos_;
        parse_select(parent);
        if (punct_is(")")) ++pos_;
      } else if (word_is("SELECT")) {
        parse_select(parent);
      }
    }
  }

  void parse_from(Scope& scope) {
    parse_table_ref(scope);
    while (!at_end()) {
      if (punct_is(",")) {
        ++pos_;
        parse_table_ref(scope);
        continue;
      }
      bool join = false;
      while (word_is("NATURAL") || word_is("LEFT") || word_is("RIGHT") || word_is("FULL") ||
             word_is("INNER") || word_is("CROSS") || word_is("OUTER")) {
        ++pos_;
        join = true;
      }
      if (word_is("JOIN")) {
        ++pos_;
        join = true;
      } else if (join) {
        // Dangling join modifier without JOIN; treat as end of clause.
        return;
      }
      if (!join) return;
      const std::size_t left_index = scope.entries.empty() ? 0 : scope.entries.size() - 1;
      parse_table_ref(scope);
      if (word_is("ON")) {
        ++pos_;
        parse_expression(scope, false, false);
      } else if (word_is("USING") && punct_is("(", 1)) {
        pos_ += 2;
        while (!at_end() && !punct_is(")")) {
          if (is_identifier(peek())) {
            // The column exists on both sides of the join.
            const auto& right = scope.entries.back();
            const auto& left = scope.entries[left_index];
            for (const auto* side : {&left, &right}) {
              if (!side->table.empty()) {
                ColumnRef ref{};
                ref.parts = {side->alias.empty() ? side->table : side->alias, peek().text};
                scope.refs.push_back(std::move(ref));
              }
            }
          }
          ++pos_;
        }
        if (punct_is(")")) ++pos_;
      }
    }
  }

  void parse_table_ref(Scope& scope) {
    ScopeEntry entry;
    if (punct_is("(")) {
      if (word_is("SELECT", 1) || word_is("WITH", 1)) {
        ++pos_;
        if (word_is("SELECT")) {
          parse_select(scope.parent);
        } else {
          throw Error(ErrorCode::kMalformedQuery, "common table expressions are not supported");
        }
        if (punct_is(")")) ++pos_;
      } else {
        // Parenthesized join tree.
        ++pos_;
        parse_from(scope);
        if (punct_is(")")) ++pos_;
        return;
      }
    } else {
      auto name = parse_qualified_name(tokens_, pos_);
      if (!name) return;
      if (punct_is("(")) {
        // Table-valued function; not a table.
        skip_balanced_parens();
      } else {
        entry.table = *name;
        analysis_.tables.push_back(*name);
      }
    }
    if (word_is("AS")) {
      ++pos_;
      if (is_identifier(peek())) entry.alias = tokens_[pos_++].text;
    } else if (is_identifier(peek()) && !at_clause_stop() &&
               !expression_words().count(upper())) {
      entry.alias = tokens_[pos_++].text;
    }
    if (entry.table.empty() && entry.alias.empty()) return;
    scope.entries.push_back(std::move(entry));
  }

  // --- expressions ----------------------------------------------------------

  void record_ref(Scope& scope, ColumnRef ref, ExprState& st, const std::vector<std::string>& funcs) {
    if (!funcs.empty()) {
      const auto& f = funcs.back();
      ref.aggregate = f == "SUM" || f == "AVG" || f == "MIN" || f == "MAX";
    }
    scope.refs.push_back(std::move(ref));
    const auto index = scope.refs.size() - 1;
    if (st.pending_compare && st.last.literal) {
      scope.refs[index].strong = scope.refs[index].strong.value_or(*st.last.literal);
      st.pending_compare = false;
    }
    st.last = Operand{index, std::nullopt};
  }

  void record_literal(Scope& scope, LiteralType type, ExprState& st) {
    if (st.in_list_ref) {
      auto& ref = scope.refs[*st.in_list_ref];
      if (!ref.strong) ref.strong = type;
      st.last = Operand{std::nullopt, type};
      return;
    }
    if (st.pending_compare && st.last.ref) {
      auto& ref = scope.refs[*st.last.ref];
      if (!ref.strong) ref.strong = type;
      if (!st.between) st.pending_compare = false;
      st.last.literal = type;
      return;
    }
    st.last = Operand{std::nullopt, type};
  }

  // Scans one expression, recording column references and literal evidence.
  // Stops before ',' / ')' / a clause keyword at depth zero.
  void parse_expression(Scope& scope, bool select_item, bool order_context) {
    ExprState st;
    std::vector<std::string> funcs;  // enclosing call names, "" for plain parens
    std::vector<std::optional<std::size_t>> in_lists;
    while (!at_end()) {
      const int depth = static_cast<int>(funcs.size());
      const Token& t = peek();
      if (depth == 0 && at_clause_stop()) break;
      if (t.kind == TokenKind::kPunct) {
        if (t.text == "(") {
          if (word_is("SELECT", 1)) {
            ++pos_;
            parse_select(&scope);
            if (punct_is(")")) ++pos_;
            st.last = Operand{};
            continue;
          }
          funcs.emplace_back();
          in_lists.push_back(std::nullopt);
          ++pos_;
          continue;
        }
        if (t.text == ")") {
          if (depth == 0) break;
          funcs.pop_back();
          if (in_lists.back()) st.in_list_ref.reset();
          in_lists.pop_back();
          st.last = Operand{};
          ++pos_;
          continue;
        }
        if (is_comparison(t)) {
          st.pending_compare = st.last.ref.has_value() || st.last.literal.has_value();
          st.between = false;
          ++pos_;
          continue;
        }
        if (t.text == "-" && peek(1).kind == TokenKind::kNumber && !st.last.ref &&
            !st.last.literal) {
          ++pos_;
          continue;
        }
        if (t.text == ",") {
          ++pos_;  // argument separator inside a call
          continue;
        }
        if (t.text == "*" || t.text == "." || t.text == "::") {
          if (t.text == "::") {
            ++pos_;
            if (is_identifier(peek())) ++pos_;
            skip_balanced_parens();
            continue;
          }
          ++pos_;
          continue;
        }
        // Arithmetic or concatenation: the operand is no longer a bare column.
        if (!st.in_list_ref) st.last = Operand{};
        st.pending_compare = false;
        ++pos_;
        continue;
      }
      if (t.kind == TokenKind::kString) {
        record_literal(scope, string_literal_type(t.text), st);
        ++pos_;
        continue;
      }
      if (t.kind == TokenKind::kNumber) {
        record_literal(scope, number_literal_type(t.text), st);
        ++pos_;
        continue;
      }

      // Identifier.
      const auto u = t.kind == TokenKind::kWord ? to_upper(t.text) : std::string();
      if (t.kind == TokenKind::kWord) {
        if (u == "AS") {
          ++pos_;
          if (is_identifier(peek()) || peek().kind == TokenKind::kString) {
            if (select_item && depth == 0) scope.output_aliases.insert(merge_key(peek().text));
            ++pos_;
            skip_balanced_parens();  // CAST(x AS VARCHAR(10))
          }
          continue;
        }
        if (u == "TRUE" || u == "FALSE") {
          record_literal(scope, LiteralType::kBool, st);
          ++pos_;
          continue;
        }
        if (u == "NULL") {
          st.pending_compare = false;
          ++pos_;
          continue;
        }
        if ((u == "DATE" || u == "TIMESTAMP" || u == "TIME") && peek(1).kind == TokenKind::kString) {
          ++pos_;
          record_literal(scope, LiteralType::kDatetime, st);
          ++pos_;
          continue;
        }
        if (u == "INTERVAL") {
          pos_ += 2;
          if (peek().kind == TokenKind::kWord) ++pos_;
          continue;
        }
        if (datetime_keywords().count(u) && !punct_is("(", 1)) {
          record_literal(scope, LiteralType::kDatetime, st);
          ++pos_;
          continue;
        }
        if (u == "LIKE" || u == "ILIKE" || u == "GLOB") {
          st.pending_compare = st.last.ref.has_value();
          st.between = false;
          ++pos_;
          continue;
        }
        if (u == "BETWEEN") {
          st.pending_compare = st.last.ref.has_value();
          st.between = true;
          ++pos_;
          continue;
        }
        if (u == "IN" && punct_is("(", 1) && !word_is("SELECT", 2)) {
          const auto ref = st.last.ref;
          pos_ += 2;
          funcs.emplace_back();
          in_lists.push_back(ref);
          st.in_list_ref = ref;
          continue;
        }
        if (u == "AND" && st.between) {
          st.between = false;  // upper bound follows
          ++pos_;
          continue;
        }
        if (u == "NULLS") {
          pos_ += 2;  // NULLS FIRST / LAST
          continue;
        }
        if (u == "EXTRACT" && punct_is("(", 1)) {
          pos_ += 3;  // EXTRACT ( YEAR FROM ...
          funcs.push_back("EXTRACT");
          in_lists.push_back(std::nullopt);
          if (word_is("FROM")) ++pos_;
          continue;
        }
        if (depth > 0 && (u == "FROM" || u == "FOR" || u == "SEPARATOR")) {
          ++pos_;  // SUBSTRING(x FROM 1 FOR 2), GROUP_CONCAT(x SEPARATOR ',')
          continue;
        }
        if (expression_words().count(u)) {
          if (u == "AND" || u == "OR" || u == "NOT" || u == "WHEN" || u == "THEN" || u == "ELSE" ||
              u == "CASE" || u == "END") {
            st = ExprState{};
            if (!in_lists.empty() && in_lists.back()) st.in_list_ref = in_lists.back();
          }
          ++pos_;
          continue;
        }
      }
      if (punct_is("(", 1)) {
        funcs.push_back(u);
        in_lists.push_back(std::nullopt);
        pos_ += 2;
        st.last = Operand{};
        continue;
      }
      // Implicit alias: an identifier right after a complete operand.
      if ((st.last.ref || st.last.literal) && !st.pending_compare && depth == 0 &&
          !punct_is(".", 1)) {
        if (select_item) scope.output_aliases.insert(merge_key(t.text));
        ++pos_;
        continue;
      }
      ColumnRef ref{};
      ref.order_context = order_context;
      ref.parts.push_back(t.text);
      ++pos_;
      bool star = false;
      while (punct_is(".")) {
        if (is_identifier(peek(1))) {
          ref.parts.push_back(peek(1).text);
          pos_ += 2;
        } else if (punct_is("*", 1)) {
          star = true;
          pos_ += 2;
          break;
        } else {
          ++pos_;
          break;
        }
      }
      if (star) {
        st.last = Operand{};
        continue;
      }
      record_ref(scope, std::move(ref), st, funcs);
    }
  }

  // --- resolution -----------------------------------------------------------

  const ScopeEntry* lookup_qualifier(Scope* scope, const std::string& qualifier) const {
    for (Scope* s = scope; s != nullptr; s = s->parent) {
      for (const auto& e : s->entries) {
        if (!e.alias.empty() && same_name(e.alias, qualifier)) return &e;
      }
      for (const auto& e : s->entries) {
        if (e.alias.empty() && !e.table.empty() && same_name(e.table, qualifier)) return &e;
      }
      for (const auto& e : s->entries) {
        if (!e.table.empty() && same_name(e.table, qualifier)) return &e;
      }
    }
    return nullptr;
  }

  void bind(const std::string& table, const ColumnRef& ref) {
    analysis_.columns.push_back(Resolved{table, ref.parts.back(), ref.strong, ref.aggregate});
  }

  void resolve(Scope& scope) {
    for (const auto& ref : scope.refs) {
      const auto& column = ref.parts.back();
      if (ref.parts.size() >= 2) {
        const auto& qualifier = ref.parts[ref.parts.size() - 2];
        const auto* entry = lookup_qualifier(&scope, qualifier);
        if (entry == nullptr) {
          analysis_.unattributed.push_back(qualifier + "." + column);
        } else if (!entry->table.empty()) {
          bind(entry->table, ref);
        }
        continue;
      }
      if (ref.order_context && scope.output_aliases.count(merge_key(column))) continue;
      // The innermost scope that has any FROM entries decides.
      Scope* s = &scope;
      while (s != nullptr && s->entries.empty()) s = s->parent;
      if (s != nullptr && s->entries.size() == 1 && !s->entries[0].table.empty()) {
        bind(s->entries[0].table, ref);
      } else {
        analysis_.unattributed.push_back(column);
      }
    }
  }

  // --- INSERT ---------------------------------------------------------------

  void parse_insert() {
    ++pos_;  // INSERT / REPLACE
    if (word_is("OR")) pos_ += 2;  // INSERT OR REPLACE
    while (word_is("IGNORE") || word_is("LOW_PRIORITY") || word_is("DELAYED")) ++pos_;
    if (!word_is("INTO")) throw Error(ErrorCode::kMalformedQuery, "expected INTO");
    ++pos_;
    auto table = parse_qualified_name(tokens_, pos_);
    if (!table) throw Error(ErrorCode::kMalformedQuery, "missing INSERT target");
    analysis_.tables.push_back(*table);
    if (word_is("AS")) pos_ += 2;
    std::vector<std::string> columns;
    if (punct_is("(") && !word_is("SELECT", 1)) {
      ++pos_;
      while (!at_end() && !punct_is(")")) {
        if (is_identifier(peek())) columns.push_back(peek().text);
        ++pos_;
      }
      if (punct_is(")")) ++pos_;
    }
    std::vector<std::optional<LiteralType>> types(columns.size());
    if (word_is("VALUES") || word_is("VALUE")) {
      ++pos_;
      while (punct_is("(")) {
        ++pos_;
        std::size_t index = 0;
        int depth = 0;
        bool simple = true;
        while (!at_end()) {
          const auto& t = peek();
          if (is_punct(t, "(")) ++depth;
          if (is_punct(t, ")")) {
            if (depth == 0) break;
            --depth;
          }
          if (depth == 0 && is_punct(t, ",")) {
            ++index;
            simple = true;
            ++pos_;
            continue;
          }
          std::optional<LiteralType> lit;
          if (t.kind == TokenKind::kString) lit = string_literal_type(t.text);
          if (t.kind == TokenKind::kNumber) lit = number_literal_type(t.text);
          if (is_word(t, "TRUE") || is_word(t, "FALSE")) lit = LiteralType::kBool;
          if (lit && simple && depth == 0 && index < types.size() && !types[index]) {
            types[index] = lit;
          }
          if (!is_punct(t, "-")) simple = false;
          ++pos_;
        }
        if (punct_is(")")) ++pos_;
        if (punct_is(",")) ++pos_;
      }
    } else if (word_is("SELECT") || (punct_is("(") && word_is("SELECT", 1))) {
      const bool paren = punct_is("(");
      if (paren) ++pos_;
      parse_select(nullptr);
      if (paren && punct_is(")")) ++pos_;
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
      analysis_.columns.push_back(Resolved{*table, columns[i], types[i], false});
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Analysis analysis_;
};

}  // namespace

std::vector<SqlStatement> split_statements(std::string_view text) {
  std::vector<SqlStatement> out;
  auto chunks = fenced_chunks(text);
  if (chunks.empty()) chunks.push_back(Chunk{std::string(text), false});
  for (const auto& chunk : chunks) split_chunk(chunk, out);
  return out;
}

ExtractionResult extract_from_create(const SqlStatement& stmt) {
  try {
    return parse_create(stmt);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMalformedDdl) throw;
    ExtractionResult skipped;
    skipped.skipped_statements = 1;
    return skipped;
  }
}

ExtractionResult extract_from_query(const SqlStatement& stmt) {
  ExtractionResult result;
  Analysis analysis;
  try {
    analysis = QueryAnalyzer(stmt.raw).run();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMalformedQuery) throw;
    result.skipped_statements = 1;
    return result;
  }
  for (const auto& table : analysis.tables) result.schema.add_table(table);
  for (const auto& column : analysis.columns) {
    result.schema.add_column(column.table, ColumnDef{column.column, ""});
    ++result.attributed;
  }
  result.unattributed = std::move(analysis.unattributed);
  return result;
}

ExtractionResult extract_statement(const SqlStatement& stmt) {
  switch (stmt.kind) {
    case StatementKind::kCreateTable: return extract_from_create(stmt);
    case StatementKind::kSelect:
    case StatementKind::kInsert: return extract_from_query(stmt);
    case StatementKind::kOther:
    case StatementKind::kUnparseable: break;
  }
  ExtractionResult skipped;
  skipped.skipped_statements = 1;
  return skipped;
}

ExtractionResult infer_types(ExtractionResult result, std::span<const SqlStatement> statements) {
  // (table key, column key) -> evidence, first-seen per tier.
  std::map<ColumnKey, LiteralType> strong;
  std::map<ColumnKey, LiteralType> weak;
  for (const auto& stmt : statements) {
    if (stmt.kind != StatementKind::kSelect && stmt.kind != StatementKind::kInsert) continue;
    Analysis analysis;
    try {
      analysis = QueryAnalyzer(stmt.raw).run();
    } catch (const Error&) {
      continue;
    }
    for (const auto& c : analysis.columns) {
      const ColumnKey key{merge_key(c.table), merge_key(c.column)};
      if (c.strong) strong.emplace(key, *c.strong);
      if (c.aggregate) weak.emplace(key, LiteralType::kInt);
    }
  }
  Schema typed(result.schema.db_id());
  for (const auto& table : result.schema.tables()) {
    TableDef copy = table;
    for (auto& column : copy.columns) {
      if (!column.data_type.empty()) continue;
      const ColumnKey key{merge_key(table.name), merge_key(column.name)};
      if (auto it = strong.find(key); it != strong.end()) {
        column.data_type = std::string(literal_type_sql(it->second));
      } else if (auto wit = weak.find(key); wit != weak.end()) {
        column.data_type = std::string(literal_type_sql(wit->second));
      }
    }
    typed.add_table(copy);
  }
  result.schema = std::move(typed);
  return result;
}

Schema merge_extractions(std::span<const ExtractionResult> results) {
  Schema merged;
  for (const auto& r : results) {
    for (const auto& table : r.schema.tables()) merged.add_table(table);
  }
  return merged.sorted();
}

Schema extract_schema(std::string_view text, ExtractionStats* stats) {
  const auto statements = split_statements(text);
  std::vector<ExtractionResult> results;
  results.reserve(statements.size());
  ExtractionStats local;
  local.statements = statements.size();
  for (const auto& stmt : statements) {
    results.push_back(extract_statement(stmt));
    local.skipped += results.back().skipped_statements;
    local.attributed += results.back().attributed;
    local.unattributed += results.back().unattributed.size();
  }
  if (stats) *stats = local;
  ExtractionResult combined;
  combined.schema = merge_extractions(results);
  return infer_types(std::move(combined), statements).schema;
}

}  // namespace schemaprobe
