#include "prooftutor/lexer.hpp"

#include <array>
#include <cctype>
#include <utility>

#include "prooftutor/logic.hpp"

namespace prooftutor {

namespace {

struct Alias {
  std::string_view utf8;
  TokenKind kind;
  std::string_view ascii;
};

// Longest spellings first where prefixes overlap.
constexpr std::array<Alias, 20> kAliases{{
    {"⁻¹", TokenKind::Symbol, "⁻¹"},  // ⁻¹ postfix inverse
    {"∈", TokenKind::Word, "in"},                    // ∈
    {"⊂", TokenKind::Word, "subset"},                // ⊂
    {"⊆", TokenKind::Word, "subset"},                // ⊆
    {"⊃", TokenKind::Word, "supset"},                // ⊃
    {"⊇", TokenKind::Word, "supset"},                // ⊇
    {"∧", TokenKind::Symbol, "/\\"},                 // ∧
    {"∨", TokenKind::Symbol, "\\/"},                 // ∨
    {"¬", TokenKind::Word, "not"},                   // ¬
    {"⇒", TokenKind::Symbol, "->"},                  // ⇒
    {"→", TokenKind::Symbol, "->"},                  // →
    {"⇔", TokenKind::Symbol, "<->"},                 // ⇔
    {"↔", TokenKind::Symbol, "<->"},                 // ↔
    {"∀", TokenKind::Word, "forall"},                // ∀
    {"∃", TokenKind::Word, "exists"},                // ∃
    {"∘", TokenKind::Symbol, "∘"},              // ∘
    {"∪", TokenKind::Symbol, "∪"},              // ∪
    {"∩", TokenKind::Symbol, "∩"},              // ∩
    {"⊢", TokenKind::Symbol, "|-"},                  // ⊢
    {"·", TokenKind::Symbol, "."},                   // ·
}};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

}  // namespace

bool is_identifier(std::string_view word) {
  if (word.empty() || !ident_start(word[0])) return false;
  for (std::size_t i = 1; i < word.size(); ++i) {
    char c = word[i];
    if (ident_char(c)) continue;
    if (c == '-' && i + 1 < word.size() &&
        std::isalnum(static_cast<unsigned char>(word[i + 1])))
      continue;
    return false;
  }
  return true;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::vector<Token> tokenize(std::string_view text, bool keep_newlines) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto push = [&](TokenKind k, std::string t, std::size_t at) {
    out.push_back(Token{k, std::move(t), at});
  };
  while (i < n) {
    char c = text[i];
    if (c == '\n') {
      if (keep_newlines) push(TokenKind::Newline, "\n", i);
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {  // comment to end of line
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    std::size_t start = i;
    if (ident_start(c)) {
      ++i;
      while (i < n) {
        if (ident_char(text[i])) {
          ++i;
        } else if (text[i] == '-' && i + 1 < n &&
                   std::isalnum(static_cast<unsigned char>(text[i + 1]))) {
          i += 2;
        } else {
          break;
        }
      }
      push(TokenKind::Word, std::string(text.substr(start, i - start)), start);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      push(TokenKind::Number, std::string(text.substr(start, i - start)), start);
      continue;
    }
    if (c == '?') {
      ++i;
      std::size_t name_start = i;
      if (i < n && ident_start(text[i])) {
        while (i < n && (ident_char(text[i]) ||
                         (text[i] == '-' && i + 1 < n &&
                          std::isalnum(static_cast<unsigned char>(text[i + 1]))))) {
          i += text[i] == '-' ? 2 : 1;
        }
      }
      if (i == name_start) throw ParseError("expected meta-variable name after '?'", start);
      push(TokenKind::Meta, std::string(text.substr(name_start, i - name_start)), start);
      continue;
    }
    if (c == '"') {
      ++i;
      std::string value;
      while (i < n && text[i] != '"') {
        if (text[i] == '\\' && i + 1 < n) ++i;
        value.push_back(text[i]);
        ++i;
      }
      if (i >= n) throw ParseError("unterminated string", start);
      ++i;
      push(TokenKind::String, std::move(value), start);
      continue;
    }
    auto rest = text.substr(i);
    if (rest.starts_with("<->")) {
      push(TokenKind::Symbol, "<->", start);
      i += 3;
      continue;
    }
    if (rest.starts_with("->") || rest.starts_with("/\\") || rest.starts_with("\\/") ||
        rest.starts_with("|-") || rest.starts_with("<=") || rest.starts_with(">=")) {
      push(TokenKind::Symbol, std::string(rest.substr(0, 2)), start);
      i += 2;
      continue;
    }
    if (static_cast<unsigned char>(c) >= 0x80) {
      bool matched = false;
      for (const auto& alias : kAliases) {
        if (rest.starts_with(alias.utf8)) {
          push(alias.kind, std::string(alias.ascii), start);
          i += alias.utf8.size();
          matched = true;
          break;
        }
      }
      if (!matched) throw ParseError("unexpected character", start);
      continue;
    }
    switch (c) {
      case '(': case ')': case ',': case '.': case ';': case '{': case '}':
      case '=': case ':': case '<': case '>': case '*': case '[': case ']':
        push(TokenKind::Symbol, std::string(1, c), start);
        ++i;
        continue;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
  }
  out.push_back(Token{TokenKind::End, "", n});
  return out;
}

}  // namespace prooftutor
