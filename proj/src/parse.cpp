#include <algorithm>

#include "prooftutor/formula_parser.hpp"

namespace prooftutor {

bool is_formula_keyword(std::string_view word) {
  return word == "not" || word == "forall" || word == "exists" || word == "in" ||
         word == "subset" || word == "supset";
}

const Token& FormulaParser::peek(std::size_t ahead) const {
  std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
  return tokens_[i];
}

const Token& FormulaParser::advance() {
  const Token& t = tokens_[pos_];
  if (pos_ + 1 < tokens_.size()) ++pos_;
  return t;
}

void FormulaParser::fail(const std::string& what) const {
  const Token& t = peek();
  std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
  throw ParseError(what + ", found " + found, t.offset);
}

void FormulaParser::expect_symbol(const char* s) {
  if (!peek().is_symbol(s)) fail(std::string("expected '") + s + "'");
  advance();
}

Formula FormulaParser::formula() { return iff(); }

Formula FormulaParser::iff() {
  Formula left = implication();
  while (peek().is_symbol("<->")) {
    advance();
    left = Formula::equivalence(left, implication());
  }
  return left;
}

Formula FormulaParser::implication() {
  Formula left = disjunction();
  if (peek().is_symbol("->")) {
    advance();
    return Formula::implication(left, implication());
  }
  return left;
}

Formula FormulaParser::disjunction() {
  Formula left = conjunction();
  while (peek().is_symbol("\\/")) {
    advance();
    left = Formula::disjunction(left, conjunction());
  }
  return left;
}

Formula FormulaParser::conjunction() {
  Formula left = unary();
  while (peek().is_symbol("/\\")) {
    advance();
    left = Formula::conjunction(left, unary());
  }
  return left;
}

Formula FormulaParser::unary() {
  if (peek().is_word("not")) {
    advance();
    return Formula::negation(unary());
  }
  if (peek().is_word("forall") || peek().is_word("exists")) return quantifier();
  return atom_or_group();
}

Formula FormulaParser::quantifier() {
  bool universal = advance().text == "forall";
  std::vector<std::string> vars;
  while (peek().kind == TokenKind::Word && !is_formula_keyword(peek().text)) {
    const Token& v = advance();
    if (arities_.contains(v.text) && arities_.arity(v.text).value() > 0)
      throw ParseError("cannot bind function symbol '" + v.text + "'", v.offset);
    vars.push_back(v.text);
  }
  if (vars.empty()) fail("expected bound variable");
  expect_symbol(".");
  for (const auto& v : vars) bound_.push_back(v);
  Formula body = formula();
  bound_.resize(bound_.size() - vars.size());
  for (auto it = vars.rbegin(); it != vars.rend(); ++it)
    body = universal ? Formula::forall(*it, body) : Formula::exists(*it, body);
  return body;
}

Formula FormulaParser::atom_or_group() {
  const std::size_t start = pos_;
  if (peek().is_symbol("(")) {
    // Either a parenthesised formula or an atom whose left term is parenthesised.
    try {
      Term left = term();
      const Token& rel = peek();
      if (rel.is_symbol("=") || rel.is_word("in") || rel.is_word("subset") ||
          rel.is_word("supset")) {
        std::string pred = advance().text;
        return Formula::atom(pred, {left, term()});
      }
    } catch (const ParseError&) {
    }
    pos_ = start;
    advance();
    Formula inner = formula();
    expect_symbol(")");
    return inner;
  }
  const Token& first = peek();
  if (first.kind == TokenKind::Word && !is_formula_keyword(first.text) &&
      !peek(1).is_symbol("(") && !arities_.contains(first.text) &&
      std::find(bound_.begin(), bound_.end(), first.text) == bound_.end()) {
    // Bare identifier not followed by a relation: nullary proposition.
    const Token& next = peek(1);
    bool relation = next.is_symbol("=") || next.is_word("in") || next.is_word("subset") ||
                    next.is_word("supset") || next.is_symbol("∘") ||
                    next.is_symbol("∪") || next.is_symbol("∩") ||
                    next.is_symbol("⁻¹");
    if (!relation) {
      advance();
      return Formula::atom(first.text, {});
    }
  }
  Term left = term();
  const Token& rel = peek();
  if (rel.is_symbol("=") || rel.is_word("in") || rel.is_word("subset") ||
      rel.is_word("supset")) {
    std::string pred = advance().text;
    return Formula::atom(pred, {left, term()});
  }
  fail("expected '=', 'in', 'subset' or 'supset'");
}

Term FormulaParser::term() { return infix_term(); }

Term FormulaParser::infix_term() {
  Term left = comp_term();
  while (peek().is_symbol("∪") || peek().is_symbol("∩")) {
    std::string fn = advance().text == "∪" ? "union" : "inter";
    left = Term::apply(fn, {left, comp_term()});
  }
  return left;
}

Term FormulaParser::comp_term() {
  Term left = postfix_term();
  while (peek().is_symbol("∘")) {
    advance();
    left = Term::apply("comp", {left, postfix_term()});
  }
  return left;
}

Term FormulaParser::postfix_term() {
  Term t = primary_term();
  while (peek().is_symbol("⁻¹")) {
    advance();
    t = Term::apply("inv", {t});
  }
  return t;
}

Term FormulaParser::primary_term() {
  const Token& tok = peek();
  if (tok.kind == TokenKind::Meta) {
    if (!options_.allow_meta)
      throw ParseError("meta-variables are not permitted here", tok.offset);
    advance();
    return Term::meta(tok.text);
  }
  if (tok.is_symbol("(")) {
    advance();
    Term first = term();
    if (peek().is_symbol(",")) {
      advance();
      Term second = term();
      expect_symbol(")");
      return Term::pair(first, second);
    }
    expect_symbol(")");
    return first;
  }
  if (tok.kind == TokenKind::Word && !is_formula_keyword(tok.text)) {
    advance();
    return identifier(tok);
  }
  fail("expected term");
}

Term FormulaParser::identifier(const Token& tok) {
  const std::string& name = tok.text;
  if (peek().is_symbol("(")) {
    auto arity = arities_.arity(name);
    if (!arity) throw ParseError("unknown function symbol '" + name + "'", tok.offset);
    advance();
    std::vector<Term> args;
    if (!peek().is_symbol(")")) {
      args.push_back(term());
      while (peek().is_symbol(",")) {
        advance();
        args.push_back(term());
      }
    }
    expect_symbol(")");
    if (static_cast<int>(args.size()) != *arity)
      throw ParseError("arity mismatch for '" + name + "': expected " +
                           std::to_string(*arity) + ", got " + std::to_string(args.size()),
                       tok.offset);
    return Term::apply(name, std::move(args));
  }
  if (std::find(bound_.begin(), bound_.end(), name) != bound_.end())
    return Term::variable(name);
  if (auto arity = arities_.arity(name)) {
    if (*arity != 0)
      throw ParseError("arity mismatch for '" + name + "': expected " +
                           std::to_string(*arity) + ", got 0",
                       tok.offset);
    return Term::constant(name);
  }
  if (options_.closed) throw ParseError("unbound variable '" + name + "'", tok.offset);
  return Term::constant(name);
}

Formula parse_formula(std::string_view text, const ArityTable& arities, ParseOptions options) {
  auto tokens = tokenize(text);
  std::size_t pos = 0;
  FormulaParser parser(tokens, pos, arities, options);
  Formula f = parser.formula();
  if (tokens[pos].kind != TokenKind::End)
    throw ParseError("unexpected '" + tokens[pos].text + "'", tokens[pos].offset);
  return f;
}

Term parse_term(std::string_view text, const ArityTable& arities, ParseOptions options) {
  auto tokens = tokenize(text);
  std::size_t pos = 0;
  FormulaParser parser(tokens, pos, arities, options);
  Term t = parser.term();
  if (tokens[pos].kind != TokenKind::End)
    throw ParseError("unexpected '" + tokens[pos].text + "'", tokens[pos].offset);
  return t;
}

}  // namespace prooftutor
