#pragma once

#include <string>
#include <vector>

#include "prooftutor/lexer.hpp"
#include "prooftutor/logic.hpp"

namespace prooftutor {

/// Recursive-descent parser over a shared token stream. Stops at the first
/// token that cannot continue the formula, leaving `pos` there, so callers
/// embedding formulas in larger languages can resume after it.
class FormulaParser {
 public:
  FormulaParser(const std::vector<Token>& tokens, std::size_t& pos, const ArityTable& arities,
                ParseOptions options)
      : tokens_(tokens), pos_(pos), arities_(arities), options_(options) {}

  Formula formula();
  Term term();

 private:
  const Token& peek(std::size_t ahead = 0) const;
  const Token& advance();
  [[noreturn]] void fail(const std::string& what) const;
  void expect_symbol(const char* s);

  Formula iff();
  Formula implication();
  Formula disjunction();
  Formula conjunction();
  Formula unary();
  Formula quantifier();
  Formula atom_or_group();
  Term infix_term();
  Term comp_term();
  Term postfix_term();
  Term primary_term();
  Term identifier(const Token& tok);

  const std::vector<Token>& tokens_;
  std::size_t& pos_;
  const ArityTable& arities_;
  ParseOptions options_;
  std::vector<std::string> bound_;
};

bool is_formula_keyword(std::string_view word);

}  // namespace prooftutor
