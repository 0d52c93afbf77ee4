#include "sql_lexer.hpp"

#include <algorithm>
#include <cctype>

namespace schemaprobe::detail {

namespace {

bool word_start(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || c == '_' || u >= 0x80;
}

bool word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '$' || u >= 0x80;
}

bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); });
  return out;
}

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> tokens;
  const std::size_t n = sql.size();
  std::size_t i = 0;
  bool at_line_start = true;

  auto push = [&](TokenKind kind, std::string text, std::size_t begin, std::size_t end) {
    tokens.push_back(Token{kind, std::move(text), begin, end, at_line_start});
    at_line_start = false;
  };

  while (i < n) {
    const char c = sql[i];
    if (c == '\n') {
      at_line_start = true;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      const auto close = sql.find("*/", i + 2);
      i = close == std::string_view::npos ? n : close + 2;
      continue;
    }
    const std::size_t begin = i;
    if (c == '\'') {
      std::string text;
      ++i;
      while (i < n) {
        if (sql[i] == '\'') {
          if (i + 1 < n && sql[i + 1] == '\'') {
            text.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        text.push_back(sql[i++]);
      }
      push(TokenKind::kString, std::move(text), begin, i);
      continue;
    }
    if (c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : c;
      std::string text;
      ++i;
      while (i < n) {
        if (sql[i] == close) {
          if (close != ']' && i + 1 < n && sql[i + 1] == close) {
            text.push_back(close);
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        text.push_back(sql[i++]);
      }
      push(TokenKind::kQuotedIdent, std::move(text), begin, i);
      continue;
    }
    if (digit(c) || (c == '.' && i + 1 < n && digit(sql[i + 1]))) {
      while (i < n && digit(sql[i])) ++i;
      if (i < n && sql[i] == '.') {
        ++i;
        while (i < n && digit(sql[i])) ++i;
      }
      if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
        if (j < n && digit(sql[j])) {
          i = j;
          while (i < n && digit(sql[i])) ++i;
        }
      }
      // "123abc" is an identifier in most dialects.
      if (i < n && word_start(sql[i])) {
        while (i < n && word_char(sql[i])) ++i;
        push(TokenKind::kWord, std::string(sql.substr(begin, i - begin)), begin, i);
        continue;
      }
      push(TokenKind::kNumber, std::string(sql.substr(begin, i - begin)), begin, i);
      continue;
    }
    if (word_start(c)) {
      while (i < n && word_char(sql[i])) ++i;
      push(TokenKind::kWord, std::string(sql.substr(begin, i - begin)), begin, i);
      continue;
    }
    static constexpr std::string_view kTwoChar[] = {"<=", ">=", "<>", "!=", "||", "::", "=="};
    bool matched = false;
    if (i + 1 < n) {
      for (auto op : kTwoChar) {
        if (sql.substr(i, 2) == op) {
          push(TokenKind::kPunct, std::string(op), begin, i + 2);
          i += 2;
          matched = true;
          break;
        }
      }
    }
    if (matched) continue;
    push(TokenKind::kPunct, std::string(1, c), begin, i + 1);
    ++i;
  }
  return tokens;
}

}  // namespace schemaprobe::detail
