#include <algorithm>
#include <functional>
#include <sstream>

#include "prooftutor/logic.hpp"

namespace prooftutor {

namespace {

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

// ---------------------------------------------------------------------------
// Term

struct Term::Node {
  TermKind kind;
  std::string name;
  std::vector<Term> args;
  std::size_t hash;
};

namespace {

std::size_t term_hash(TermKind kind, const std::string& name, const std::vector<Term>& args) {
  std::size_t h = mix(static_cast<std::size_t>(kind), std::hash<std::string>{}(name));
  for (const auto& a : args) h = mix(h, a.hash());
  return h;
}

}  // namespace

Term Term::variable(std::string name) {
  auto h = term_hash(TermKind::Variable, name, {});
  return Term(std::make_shared<const Node>(Node{TermKind::Variable, std::move(name), {}, h}));
}

Term Term::meta(std::string name) {
  auto h = term_hash(TermKind::MetaVariable, name, {});
  return Term(
      std::make_shared<const Node>(Node{TermKind::MetaVariable, std::move(name), {}, h}));
}

Term Term::constant(std::string name) {
  auto h = term_hash(TermKind::Constant, name, {});
  return Term(std::make_shared<const Node>(Node{TermKind::Constant, std::move(name), {}, h}));
}

Term Term::pair(Term first, Term second) {
  std::vector<Term> args{std::move(first), std::move(second)};
  auto h = term_hash(TermKind::Pair, "", args);
  return Term(std::make_shared<const Node>(Node{TermKind::Pair, "", std::move(args), h}));
}

Term Term::apply(std::string function, std::vector<Term> args) {
  auto h = term_hash(TermKind::Application, function, args);
  return Term(std::make_shared<const Node>(
      Node{TermKind::Application, std::move(function), std::move(args), h}));
}

Term::Term() : Term(constant("_")) {}

TermKind Term::kind() const { return node_->kind; }
const std::string& Term::name() const { return node_->name; }
std::span<const Term> Term::args() const { return node_->args; }
std::size_t Term::hash() const { return node_->hash; }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->hash != b.node_->hash || a.node_->kind != b.node_->kind ||
      a.node_->name != b.node_->name || a.node_->args.size() != b.node_->args.size())
    return false;
  return std::equal(a.node_->args.begin(), a.node_->args.end(), b.node_->args.begin());
}

bool operator<(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return false;
  if (a.kind() != b.kind()) return a.kind() < b.kind();
  if (a.name() != b.name()) return a.name() < b.name();
  return std::lexicographical_compare(a.node_->args.begin(), a.node_->args.end(),
                                      b.node_->args.begin(), b.node_->args.end());
}

// ---------------------------------------------------------------------------
// Formula

struct Formula::Node {
  FormulaKind kind;
  std::string name;
  std::vector<Term> terms;
  std::vector<Formula> children;
  std::size_t hash;
};

namespace {

std::size_t formula_hash(FormulaKind kind, const std::string& name,
                         const std::vector<Term>& terms, const std::vector<Formula>& children,
                         const std::function<std::size_t(const Formula&)>& child_hash) {
  std::size_t h = mix(static_cast<std::size_t>(kind) + 101, std::hash<std::string>{}(name));
  for (const auto& t : terms) h = mix(h, t.hash());
  for (const auto& c : children) h = mix(h, child_hash(c));
  return h;
}

}  // namespace

Formula Formula::atom(std::string predicate, std::vector<Term> args) {
  auto h = formula_hash(FormulaKind::Atom, predicate, args, {}, nullptr);
  return Formula(std::make_shared<const Node>(
      Node{FormulaKind::Atom, std::move(predicate), std::move(args), {}, h}));
}

Formula Formula::negation(Formula f) {
  std::vector<Formula> children{std::move(f)};
  auto h = formula_hash(FormulaKind::Not, "", {}, children,
                        [](const Formula& c) { return c.node_->hash; });
  return Formula(
      std::make_shared<const Node>(Node{FormulaKind::Not, "", {}, std::move(children), h}));
}

Formula Formula::binary(FormulaKind kind, Formula a, Formula b) {
  std::vector<Formula> children{std::move(a), std::move(b)};
  auto h = formula_hash(kind, "", {}, children, [](const Formula& c) { return c.node_->hash; });
  return Formula(std::make_shared<const Node>(Node{kind, "", {}, std::move(children), h}));
}

Formula Formula::quantified(FormulaKind kind, std::string var, Formula body) {
  std::vector<Formula> children{std::move(body)};
  auto h = formula_hash(kind, var, {}, children, [](const Formula& c) { return c.node_->hash; });
  return Formula(
      std::make_shared<const Node>(Node{kind, std::move(var), {}, std::move(children), h}));
}

Formula Formula::conjunction(Formula a, Formula b) {
  return binary(FormulaKind::And, std::move(a), std::move(b));
}
Formula Formula::disjunction(Formula a, Formula b) {
  return binary(FormulaKind::Or, std::move(a), std::move(b));
}
Formula Formula::implication(Formula a, Formula b) {
  return binary(FormulaKind::Implies, std::move(a), std::move(b));
}
Formula Formula::equivalence(Formula a, Formula b) {
  return binary(FormulaKind::Iff, std::move(a), std::move(b));
}
Formula Formula::forall(std::string var, Formula body) {
  return quantified(FormulaKind::Forall, std::move(var), std::move(body));
}
Formula Formula::exists(std::string var, Formula body) {
  return quantified(FormulaKind::Exists, std::move(var), std::move(body));
}

Formula::Formula() : Formula(atom("true", {})) {}

FormulaKind Formula::kind() const { return node_->kind; }
const std::string& Formula::name() const { return node_->name; }
std::span<const Term> Formula::terms() const { return node_->terms; }
const Formula& Formula::lhs() const { return node_->children.at(0); }
const Formula& Formula::rhs() const { return node_->children.at(1); }
const Formula& Formula::body() const { return node_->children.at(0); }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->hash != b.node_->hash || a.node_->kind != b.node_->kind ||
      a.node_->name != b.node_->name)
    return false;
  return a.node_->terms == b.node_->terms && a.node_->children == b.node_->children;
}

bool operator<(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return false;
  if (a.kind() != b.kind()) return a.kind() < b.kind();
  if (a.name() != b.name()) return a.name() < b.name();
  if (a.node_->terms != b.node_->terms)
    return std::lexicographical_compare(a.node_->terms.begin(), a.node_->terms.end(),
                                        b.node_->terms.begin(), b.node_->terms.end());
  return std::lexicographical_compare(a.node_->children.begin(), a.node_->children.end(),
                                      b.node_->children.begin(), b.node_->children.end());
}

// ---------------------------------------------------------------------------
// Arity table

ArityTable ArityTable::relations() {
  ArityTable t;
  t.declare("comp", 2);
  t.declare("inv", 1);
  t.declare("union", 2);
  t.declare("inter", 2);
  return t;
}

void ArityTable::declare(const std::string& symbol, int arity) { symbols_[symbol] = arity; }

std::optional<int> ArityTable::arity(const std::string& symbol) const {
  auto it = symbols_.find(symbol);
  if (it == symbols_.end()) return std::nullopt;
  return it->second;
}

bool is_binary_predicate(std::string_view name) {
  return name == "in" || name == "=" || name == "subset" || name == "supset";
}

// ---------------------------------------------------------------------------
// Rendering

std::string render(const Term& t) {
  switch (t.kind()) {
    case TermKind::Variable:
    case TermKind::Constant:
      return t.name();
    case TermKind::MetaVariable:
      return "?" + t.name();
    case TermKind::Pair:
      return "(" + render(t.args()[0]) + "," + render(t.args()[1]) + ")";
    case TermKind::Application: {
      std::string out = t.name() + "(";
      for (std::size_t i = 0; i < t.args().size(); ++i) {
        if (i) out += ",";
        out += render(t.args()[i]);
      }
      return out + ")";
    }
  }
  return {};
}

namespace {

int precedence(FormulaKind k) {
  switch (k) {
    case FormulaKind::Iff: return 1;
    case FormulaKind::Implies: return 2;
    case FormulaKind::Or: return 3;
    case FormulaKind::And: return 4;
    case FormulaKind::Not: return 5;
    case FormulaKind::Atom: return 6;
    case FormulaKind::Forall:
    case FormulaKind::Exists: return 0;
  }
  return 0;
}

const char* connective(FormulaKind k) {
  switch (k) {
    case FormulaKind::And: return " /\\ ";
    case FormulaKind::Or: return " \\/ ";
    case FormulaKind::Implies: return " -> ";
    case FormulaKind::Iff: return " <-> ";
    default: return "";
  }
}

void render_into(const Formula& f, std::string& out);

void render_operand(const Formula& f, bool parens, std::string& out) {
  if (parens) out += "(";
  render_into(f, out);
  if (parens) out += ")";
}

void render_into(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case FormulaKind::Atom:
      if (f.terms().empty()) {
        out += f.name();
      } else {
        out += render(f.terms()[0]);
        out += " " + f.name() + " ";
        out += render(f.terms()[1]);
      }
      return;
    case FormulaKind::Not: {
      out += "not ";
      const auto& b = f.body();
      render_operand(b, precedence(b.kind()) < precedence(FormulaKind::Not), out);
      return;
    }
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      out += f.kind() == FormulaKind::Forall ? "forall" : "exists";
      const Formula* cur = &f;
      while (cur->kind() == f.kind()) {
        out += " " + cur->name();
        cur = &cur->body();
      }
      out += ". ";
      render_into(*cur, out);
      return;
    }
    default: {
      int p = precedence(f.kind());
      // `->` associates to the right, the others to the left.
      bool right_assoc = f.kind() == FormulaKind::Implies;
      const auto& l = f.lhs();
      const auto& r = f.rhs();
      int pl = precedence(l.kind());
      int pr = precedence(r.kind());
      render_operand(l, pl < p || (pl == p && right_assoc) || l.is_quantifier(), out);
      out += connective(f.kind());
      render_operand(r, pr < p || (pr == p && !right_assoc) || r.is_quantifier(), out);
      return;
    }
  }
}

}  // namespace

std::string render(const Formula& f) {
  std::string out;
  render_into(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Queries

void collect_metas(const Term& t, std::set<std::string>& out) {
  if (t.is_meta()) out.insert(t.name());
  for (const auto& a : t.args()) collect_metas(a, out);
}

void collect_metas(const Formula& f, std::set<std::string>& out) {
  if (f.is_atom()) {
    for (const auto& t : f.terms()) collect_metas(t, out);
  } else if (f.is_binary()) {
    collect_metas(f.lhs(), out);
    collect_metas(f.rhs(), out);
  } else {
    collect_metas(f.body(), out);
  }
}

bool contains_meta(const Formula& f) {
  std::set<std::string> s;
  collect_metas(f, s);
  return !s.empty();
}

void collect_free_names(const Term& t, std::set<std::string>& out) {
  if (t.kind() == TermKind::Constant || t.kind() == TermKind::Variable) out.insert(t.name());
  for (const auto& a : t.args()) collect_free_names(a, out);
}

namespace {

void free_names(const Formula& f, std::vector<std::string>& bound, std::set<std::string>& out) {
  if (f.is_atom()) {
    std::set<std::string> names;
    for (const auto& t : f.terms()) collect_free_names(t, names);
    for (const auto& n : names)
      if (std::find(bound.begin(), bound.end(), n) == bound.end()) out.insert(n);
  } else if (f.is_binary()) {
    free_names(f.lhs(), bound, out);
    free_names(f.rhs(), bound, out);
  } else if (f.is_quantifier()) {
    bound.push_back(f.name());
    free_names(f.body(), bound, out);
    bound.pop_back();
  } else {
    free_names(f.body(), bound, out);
  }
}

}  // namespace

void collect_free_names(const Formula& f, std::set<std::string>& out) {
  std::vector<std::string> bound;
  free_names(f, bound, out);
}

void collect_all_names(const Formula& f, std::set<std::string>& out) {
  if (f.is_atom()) {
    for (const auto& t : f.terms()) collect_free_names(t, out);
  } else if (f.is_binary()) {
    collect_all_names(f.lhs(), out);
    collect_all_names(f.rhs(), out);
  } else {
    if (f.is_quantifier()) out.insert(f.name());
    collect_all_names(f.body(), out);
  }
}

void collect_compound_subterms(const Term& t, std::set<std::string>& out) {
  if (t.kind() == TermKind::Application) out.insert(render(t));
  for (const auto& a : t.args()) collect_compound_subterms(a, out);
}

void collect_compound_subterms(const Formula& f, std::set<std::string>& out) {
  if (f.is_atom()) {
    for (const auto& t : f.terms()) collect_compound_subterms(t, out);
  } else if (f.is_binary()) {
    collect_compound_subterms(f.lhs(), out);
    collect_compound_subterms(f.rhs(), out);
  } else {
    collect_compound_subterms(f.body(), out);
  }
}

std::vector<Formula> conjuncts(const Formula& f) {
  if (f.kind() != FormulaKind::And) return {f};
  auto out = conjuncts(f.lhs());
  auto r = conjuncts(f.rhs());
  out.insert(out.end(), r.begin(), r.end());
  return out;
}

}  // namespace prooftutor
