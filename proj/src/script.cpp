#include "prooftutor/script.hpp"

#include <algorithm>
#include <array>

#include "prooftutor/formula_parser.hpp"
#include "prooftutor/lexer.hpp"

namespace prooftutor {

namespace {

constexpr std::array<std::string_view, 15> kKeywords = {
    "proof", "qed", "assume", "let", "thus", "hence", "subgoal", "subgoals",
    "cases", "set", "trivial", "by", "from", "using", "and"};

bool is_keyword(const Token& t) {
  return t.kind == TokenKind::Word &&
         std::find(kKeywords.begin(), kKeywords.end(), t.text) != kKeywords.end();
}

class ScriptParser {
 public:
  ScriptParser(std::string_view text, const ArityTable& arities)
      : tokens_(tokenize(text, /*keep_newlines=*/true)), arities_(arities) {}

  ProofScript script() {
    ProofScript out;
    skip_separators();
    bool wrapped = false;
    if (peek().is_word("proof")) {
      advance();
      wrapped = true;
    }
    steps(out.steps, &out.spans, wrapped);
    if (wrapped) {
      if (!peek().is_word("qed")) fail("expected 'qed'");
      advance();
      skip_separators();
    }
    if (peek().kind != TokenKind::End) fail("unexpected input after the proof");
    return out;
  }

  ProofStep single() {
    skip_separators();
    ProofStep s = peek().is_word("qed") ? (advance(), ProofStep{QedStep{}}) : step();
    skip_separators();
    if (peek().kind != TokenKind::End) fail("expected end of step");
    return s;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& advance() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::End       ? "end of input"
                        : t.kind == TokenKind::Newline ? "end of line"
                                                       : "'" + t.text + "'";
    throw ParseError(what + ", found " + found, t.offset);
  }
  bool separator() const {
    return peek().kind == TokenKind::Newline || peek().is_symbol(";");
  }
  void skip_separators() {
    while (separator()) advance();
  }
  void skip_newlines() {
    while (peek().kind == TokenKind::Newline) advance();
  }

  // Steps up to End, '}' or a wrapper-closing `qed`.
  void steps(std::vector<ProofStep>& out, std::vector<Span>* spans, bool wrapped) {
    skip_separators();
    bool closed = false;
    while (peek().kind != TokenKind::End && !peek().is_symbol("}")) {
      if (peek().is_word("qed")) {
        if (wrapped) return;
        if (closed) fail("'qed' may appear only once");
        std::size_t begin = advance().offset;
        out.push_back(ProofStep{QedStep{}});
        if (spans) spans->push_back({begin, begin + 3});
        closed = true;
        skip_separators();
        continue;
      }
      if (closed) fail("'qed' must be the last step");
      std::size_t begin = peek().offset;
      out.push_back(step());
      if (spans) spans->push_back({begin, last_end_});
      if (separator()) {
        skip_separators();
      } else if (!peek().is_word("qed") && !peek().is_symbol("}") &&
                 peek().kind != TokenKind::End) {
        fail("expected ';' or newline between steps");
      }
    }
  }

  Formula formula(bool allow_meta = false) {
    FormulaParser p(tokens_, pos_, arities_, {.closed = false, .allow_meta = allow_meta});
    Formula f = p.formula();
    mark_end();
    return f;
  }
  Term term(bool allow_meta = false) {
    FormulaParser p(tokens_, pos_, arities_, {.closed = false, .allow_meta = allow_meta});
    Term t = p.term();
    mark_end();
    return t;
  }
  void mark_end() {
    if (pos_ > 0) {
      const Token& prev = tokens_[pos_ - 1];
      last_end_ = prev.offset + prev.text.size() + (prev.kind == TokenKind::Meta ? 1 : 0);
    }
  }
  void consumed() {
    mark_end();
  }

  std::optional<std::string> by() {
    if (!peek().is_word("by")) return std::nullopt;
    advance();
    consumed();
    if (peek().kind == TokenKind::Word && !is_keyword(peek())) {
      std::string name = advance().text;
      consumed();
      return name;
    }
    return std::string();
  }

  std::vector<std::string> from() {
    std::vector<std::string> labels;
    if (!peek().is_word("from")) return labels;
    advance();
    consumed();
    if (peek().kind != TokenKind::Word || is_keyword(peek())) return labels;
    labels.push_back(advance().text);
    consumed();
    while (peek().is_symbol(",")) {
      advance();
      if (peek().kind != TokenKind::Word || is_keyword(peek())) fail("expected label");
      labels.push_back(advance().text);
      consumed();
    }
    return labels;
  }

  ProofStep step() {
    const Token& t = peek();
    if (t.is_word("assume") || t.is_word("let")) return assume();
    if (t.is_word("hence")) {
      advance();
      return fact();
    }
    if (t.is_word("subgoal")) return ProofStep{subgoal(true)};
    if (t.is_word("subgoals")) return subgoals();
    if (t.is_word("cases")) return cases();
    if (t.is_word("set")) return set();
    if (t.is_word("trivial")) {
      advance();
      consumed();
      TrivialStep s;
      s.by = by();
      s.from = from();
      return ProofStep{s};
    }
    if (is_keyword(t) || t.is_word("proof")) fail("unknown or misplaced keyword");
    return fact();
  }

  ProofStep assume() {
    advance();
    AssumeStep s;
    s.hyps.push_back(formula());
    while (peek().is_symbol(",") || peek().is_word("and")) {
      advance();
      s.hyps.push_back(formula());
    }
    s.from = from();
    if (peek().is_word("thus")) {
      advance();
      s.thus = formula();
    }
    return ProofStep{s};
  }

  ProofStep fact() {
    FactStep s;
    if (peek().is_symbol(".")) {
      advance();
      Continuation c;
      const Token& op = peek();
      if (op.is_symbol("=") || op.is_word("in") || op.is_word("subset") ||
          op.is_word("supset")) {
        c.op = advance().text;
        c.rhs = term();
      } else if (op.is_symbol("->") || op.is_symbol("<->")) {
        c.op = advance().text;
        c.rhs = formula();
      } else {
        fail("expected a binary operator after '.'");
      }
      s.form = c;
    } else {
      s.form = formula();
    }
    s.by = by();
    s.from = from();
    return ProofStep{s};
  }

  SubgoalStep subgoal(bool with_by) {
    if (!peek().is_word("subgoal")) fail("expected 'subgoal'");
    advance();
    SubgoalStep s;
    s.goal = formula();
    if (peek().is_word("using")) {
      advance();
      s.using_.push_back(formula());
      while (peek().is_word("and")) {
        advance();
        s.using_.push_back(formula());
      }
    }
    if (with_by) s.by = by();
    return s;
  }

  ProofStep subgoals() {
    advance();
    SubgoalsStep s;
    skip_newlines();
    do {
      s.goals.push_back(subgoal(false));
      // A newline may separate the listed goals.
      std::size_t save = pos_;
      skip_newlines();
      if (!peek().is_word("subgoal")) pos_ = save;
    } while (peek().is_word("subgoal"));
    s.by = by();
    return ProofStep{s};
  }

  ProofStep cases() {
    advance();
    CasesStep s;
    do {
      CaseBranch b;
      b.hyp = formula();
      skip_newlines();
      if (!peek().is_symbol("{")) fail("expected '{'");
      advance();
      bool wrapped = false;
      skip_separators();
      if (peek().is_word("proof")) {
        advance();
        wrapped = true;
      }
      steps(b.steps, nullptr, wrapped);
      if (wrapped) {
        if (!peek().is_word("qed")) fail("expected 'qed'");
        advance();
        skip_separators();
      }
      if (!peek().is_symbol("}")) fail("expected '}'");
      advance();
      consumed();
      s.branches.push_back(std::move(b));
      std::size_t save = pos_;
      skip_newlines();
      if (peek().is_word("by") || peek().is_word("from")) break;
      if (starts_formula()) continue;
      pos_ = save;
      break;
    } while (true);
    s.by = by();
    s.from = from();
    return ProofStep{s};
  }

  bool starts_formula() const {
    const Token& t = peek();
    if (t.kind == TokenKind::Word) return !is_keyword(t);
    return t.is_symbol("(");
  }

  ProofStep set() {
    advance();
    SetStep s;
    do {
      if (peek().kind != TokenKind::Word || is_keyword(peek())) fail("expected variable name");
      std::string name = advance().text;
      if (!peek().is_symbol("=")) fail("expected '='");
      advance();
      std::size_t save = pos_;
      bool done = false;
      try {
        Term t = term(/*allow_meta=*/true);
        if (separator() || peek().is_symbol(",") || peek().kind == TokenKind::End ||
            peek().is_symbol("}") || peek().is_word("qed")) {
          s.bindings.emplace_back(name, t);
          done = true;
        }
      } catch (const ParseError&) {
      }
      if (!done) {
        pos_ = save;
        s.bindings.emplace_back(name, formula(/*allow_meta=*/true));
      }
    } while (peek().is_symbol(",") && (advance(), true));
    return ProofStep{s};
  }

  std::vector<Token> tokens_;
  const ArityTable& arities_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
};

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) out += (i ? ", " : "") + labels[i];
  return out;
}

void render_by_from(std::string& out, const std::optional<std::string>& by,
                    const std::vector<std::string>& from) {
  if (by) out += by->empty() ? " by" : " by " + *by;
  if (!from.empty()) out += " from " + join_labels(from);
}

std::string render_value(const std::variant<Term, Formula>& v) {
  return std::holds_alternative<Term>(v) ? render(std::get<Term>(v))
                                         : render(std::get<Formula>(v));
}

std::string render_subgoal(const SubgoalStep& s) {
  std::string out = "subgoal " + render(s.goal);
  for (std::size_t i = 0; i < s.using_.size(); ++i)
    out += (i ? " and " : " using ") + render(s.using_[i]);
  return out;
}

}  // namespace

ProofStep parse_step(std::string_view text, const ArityTable& arities) {
  return ScriptParser(text, arities).single();
}

ProofScript parse_script(std::string_view text, const ArityTable& arities) {
  return ScriptParser(text, arities).script();
}

std::string render(const ProofStep& step) {
  struct Visitor {
    std::string operator()(const AssumeStep& s) const {
      std::string out = "assume ";
      for (std::size_t i = 0; i < s.hyps.size(); ++i) out += (i ? ", " : "") + render(s.hyps[i]);
      if (!s.from.empty()) out += " from " + join_labels(s.from);
      if (s.thus) out += " thus " + render(*s.thus);
      return out;
    }
    std::string operator()(const FactStep& s) const {
      std::string out;
      if (const auto* c = std::get_if<Continuation>(&s.form)) {
        out = "." + c->op + " " + render_value(c->rhs);
      } else {
        out = render(std::get<Formula>(s.form));
      }
      render_by_from(out, s.by, s.from);
      return out;
    }
    std::string operator()(const SubgoalStep& s) const {
      std::string out = render_subgoal(s);
      render_by_from(out, s.by, {});
      return out;
    }
    std::string operator()(const SubgoalsStep& s) const {
      std::string out = "subgoals";
      for (const auto& g : s.goals) out += " " + render_subgoal(g);
      render_by_from(out, s.by, {});
      return out;
    }
    std::string operator()(const CasesStep& s) const {
      std::string out = "cases";
      for (const auto& b : s.branches) {
        out += " " + render(b.hyp) + " {";
        for (std::size_t i = 0; i < b.steps.size(); ++i)
          out += (i ? "; " : " ") + render(b.steps[i]);
        out += b.steps.empty() ? "}" : " }";
      }
      render_by_from(out, s.by, s.from);
      return out;
    }
    std::string operator()(const SetStep& s) const {
      std::string out = "set ";
      for (std::size_t i = 0; i < s.bindings.size(); ++i)
        out += (i ? ", " : "") + s.bindings[i].first + " = " + render_value(s.bindings[i].second);
      return out;
    }
    std::string operator()(const TrivialStep& s) const {
      std::string out = "trivial";
      render_by_from(out, s.by, s.from);
      return out;
    }
    std::string operator()(const QedStep&) const { return "qed"; }
  };
  return std::visit(Visitor{}, step.node);
}

std::string render(const ProofScript& script) {
  std::string out;
  for (const auto& s : script.steps) out += render(s) + "\n";
  return out;
}

const char* step_kind(const ProofStep& step) {
  static constexpr const char* kNames[] = {"assume", "fact",  "subgoal", "subgoals",
                                           "cases",  "set",   "trivial", "qed"};
  return kNames[step.node.index()];
}

std::optional<std::string> step_by(const ProofStep& step) {
  std::optional<std::string> by;
  std::visit(
      [&](const auto& s) {
        if constexpr (requires { s.by; }) by = s.by;
      },
      step.node);
  if (by && by->empty()) return std::nullopt;
  return by;
}

}  // namespace prooftutor
