#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace prooftutor {

enum class TokenKind { Word, Meta, Symbol, String, Number, Newline, End };

/// Unicode operator aliases are normalised to their ASCII spelling, so the
/// parsers only ever see `in`, `subset`, `/\`, `->`, ... .
struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  std::size_t offset = 0;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_word(std::string_view t) const { return is(TokenKind::Word, t); }
  bool is_symbol(std::string_view t) const { return is(TokenKind::Symbol, t); }
};

/// Tokenises `text`. Newline tokens are emitted only when `keep_newlines`.
std::vector<Token> tokenize(std::string_view text, bool keep_newlines = false);

/// Identifier characters: letters, digits, `_`, `'`, and `-` when followed by
/// a letter or digit (so `Def-eq` is one word but `a->b` is not).
bool is_identifier(std::string_view word);

/// Line and column (both 1-based) of a byte offset.
std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset);

}  // namespace prooftutor
