#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace schemaprobe::detail {

enum class TokenKind { kWord, kQuotedIdent, kString, kNumber, kPunct };

struct Token {
  TokenKind kind;
  // Identifier or literal content with quotes removed; punctuation verbatim.
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  // First token on its source line.
  bool line_start = false;
};

// Never fails: unterminated literals and comments run to end of input.
std::vector<Token> tokenize(std::string_view sql);

std::string to_upper(std::string_view s);

inline bool is_word(const Token& t, std::string_view upper_keyword) {
  return t.kind == TokenKind::kWord && to_upper(t.text) == upper_keyword;
}

inline bool is_punct(const Token& t, std::string_view p) {
  return t.kind == TokenKind::kPunct && t.text == p;
}

inline bool is_identifier(const Token& t) {
  return t.kind == TokenKind::kWord || t.kind == TokenKind::kQuotedIdent;
}

}  // namespace schemaprobe::detail
