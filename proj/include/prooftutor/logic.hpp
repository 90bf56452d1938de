#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prooftutor {

/// Raised for malformed input text; carries the byte offset of the failure.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

enum class TermKind { Variable, MetaVariable, Constant, Pair, Application };

/// Immutable first-order term. Copies share structure.
class Term {
 public:
  /// Placeholder constant `_`; lets terms sit in default-constructed aggregates.
  Term();
  static Term variable(std::string name);
  static Term meta(std::string name);
  static Term constant(std::string name);
  static Term pair(Term first, Term second);
  static Term apply(std::string function, std::vector<Term> args);

  TermKind kind() const;
  const std::string& name() const;
  std::span<const Term> args() const;

  bool is_meta() const { return kind() == TermKind::MetaVariable; }
  bool is_compound() const {
    return kind() == TermKind::Pair || kind() == TermKind::Application;
  }
  std::size_t hash() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator<(const Term& a, const Term& b);

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

enum class FormulaKind { Atom, Not, And, Or, Implies, Iff, Forall, Exists };

/// Immutable first-order formula. Quantifiers bind one identifier each.
class Formula {
 public:
  /// Placeholder nullary atom `true`.
  Formula();
  static Formula atom(std::string predicate, std::vector<Term> args);
  static Formula negation(Formula f);
  static Formula conjunction(Formula a, Formula b);
  static Formula disjunction(Formula a, Formula b);
  static Formula implication(Formula a, Formula b);
  static Formula equivalence(Formula a, Formula b);
  static Formula forall(std::string var, Formula body);
  static Formula exists(std::string var, Formula body);
  static Formula binary(FormulaKind kind, Formula a, Formula b);
  static Formula quantified(FormulaKind kind, std::string var, Formula body);

  FormulaKind kind() const;
  /// Predicate symbol (atoms) or bound identifier (quantifiers).
  const std::string& name() const;
  std::span<const Term> terms() const;
  const Formula& lhs() const;
  const Formula& rhs() const;
  /// Operand of a negation or quantifier.
  const Formula& body() const;

  bool is_atom() const { return kind() == FormulaKind::Atom; }
  bool is_quantifier() const {
    return kind() == FormulaKind::Forall || kind() == FormulaKind::Exists;
  }
  bool is_binary() const {
    auto k = kind();
    return k == FormulaKind::And || k == FormulaKind::Or ||
           k == FormulaKind::Implies || k == FormulaKind::Iff;
  }

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator<(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Function-symbol arities. Predicates are fixed: `in`, `=`, `subset`, `supset`
/// are binary, any other predicate name is a nullary proposition.
class ArityTable {
 public:
  /// Table with the relation-algebra symbols comp/2, inv/1, union/2, inter/2.
  static ArityTable relations();

  void declare(const std::string& symbol, int arity);
  std::optional<int> arity(const std::string& symbol) const;
  bool contains(const std::string& symbol) const { return arity(symbol).has_value(); }
  const std::map<std::string, int>& symbols() const { return symbols_; }

  friend bool operator==(const ArityTable&, const ArityTable&) = default;

 private:
  std::map<std::string, int> symbols_;
};

bool is_binary_predicate(std::string_view name);

struct ParseOptions {
  /// Reject identifiers that are neither bound nor declared nullary symbols.
  bool closed = false;
  /// Permit `?name` meta-variables.
  bool allow_meta = true;
};

Formula parse_formula(std::string_view text, const ArityTable& arities,
                      ParseOptions options = {});
Term parse_term(std::string_view text, const ArityTable& arities,
                ParseOptions options = {});

std::string render(const Term& t);
std::string render(const Formula& f);

// ---------------------------------------------------------------------------
// Substitutions

/// Finite map from meta-variable names to terms, kept idempotent.
class Substitution {
 public:
  Substitution() = default;

  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }
  const Term* find(const std::string& meta) const;
  bool contains(const std::string& meta) const { return map_.count(meta) != 0; }
  const std::map<std::string, Term>& bindings() const { return map_; }

  /// Adds meta := term after resolving term against the current bindings.
  /// Returns false when the occurs check fails.
  bool bind(const std::string& meta, const Term& term);

  /// Inserts a binding verbatim (no resolution, no occurs check). Used by
  /// one-way matching where the target's meta-variables are rigid.
  void set_raw(const std::string& meta, const Term& term) { map_.insert_or_assign(meta, term); }

  /// Composition: apply `other` after this.
  Substitution then(const Substitution& other) const;

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  std::map<std::string, Term> map_;
};

std::string render(const Substitution& s);

Term substitute(const Term& t, const Substitution& s);
Formula substitute(const Formula& f, const Substitution& s);

/// Replaces free occurrences of a variable or constant identifier by a term.
Formula replace_identifier(const Formula& f, const std::string& name, const Term& by);
Term replace_identifier(const Term& t, const std::string& name, const Term& by);
/// Renames constants (free identifiers) simultaneously.
Formula rename_constants(const Formula& f, const std::map<std::string, std::string>& renaming);

bool alpha_equal(const Formula& a, const Formula& b);

/// Canonical text that is equal for alpha-equivalent formulas.
std::string alpha_key(const Formula& f);

/// Most general unifier of two formulas (meta-variables only), if any.
std::optional<Substitution> unify(const Formula& a, const Formula& b);
std::optional<Substitution> unify(const Term& a, const Term& b);
/// Extends `s` so that the two formulas become alpha-equal.
bool unify_into(const Formula& a, const Formula& b, Substitution& s);
bool unify_into(const Term& a, const Term& b, Substitution& s);

/// One-way matching: binds meta-variables of `pattern` only. Meta-variables in
/// `target` are rigid. `s` is extended in place.
bool match(const Formula& pattern, const Formula& target, Substitution& s);
bool match(const Term& pattern, const Term& target, Substitution& s);

// ---------------------------------------------------------------------------
// Queries

void collect_metas(const Formula& f, std::set<std::string>& out);
void collect_metas(const Term& t, std::set<std::string>& out);
/// Identifiers occurring free (constants and unbound variables).
void collect_free_names(const Formula& f, std::set<std::string>& out);
void collect_free_names(const Term& t, std::set<std::string>& out);
/// All identifiers, bound or free (used for fresh-name generation).
void collect_all_names(const Formula& f, std::set<std::string>& out);
/// Compound subterms (pairs excluded) occurring in the formula.
void collect_compound_subterms(const Formula& f, std::set<std::string>& out);
void collect_compound_subterms(const Term& t, std::set<std::string>& out);

bool contains_meta(const Formula& f);

/// Splits nested conjunctions into their conjuncts, left to right.
std::vector<Formula> conjuncts(const Formula& f);

}  // namespace prooftutor
