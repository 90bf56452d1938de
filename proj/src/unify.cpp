#include <functional>

#include "prooftutor/logic.hpp"

namespace prooftutor {

// ---------------------------------------------------------------------------
// Substitution

const Term* Substitution::find(const std::string& meta) const {
  auto it = map_.find(meta);
  return it == map_.end() ? nullptr : &it->second;
}

bool Substitution::bind(const std::string& meta, const Term& term) {
  Term resolved = substitute(term, *this);
  if (resolved.is_meta() && resolved.name() == meta) return true;
  std::set<std::string> metas;
  collect_metas(resolved, metas);
  if (metas.count(meta)) return false;
  Substitution single;
  single.map_.emplace(meta, resolved);
  for (auto& [k, v] : map_) v = substitute(v, single);
  map_.insert_or_assign(meta, resolved);
  return true;
}

Substitution Substitution::then(const Substitution& other) const {
  Substitution out = *this;
  for (const auto& [k, v] : other.map_) {
    if (!out.contains(k)) out.bind(k, v);
  }
  for (auto& [k, v] : out.map_) v = substitute(v, other);
  return out;
}

std::string render(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : s.bindings()) {
    if (!first) out += ", ";
    first = false;
    out += "?" + k + " := " + render(v);
  }
  return out + "}";
}

// ---------------------------------------------------------------------------
// Substitution application

Term substitute(const Term& t, const Substitution& s) {
  if (s.empty()) return t;
  switch (t.kind()) {
    case TermKind::MetaVariable:
      if (const Term* b = s.find(t.name())) return *b;
      return t;
    case TermKind::Variable:
    case TermKind::Constant:
      return t;
    case TermKind::Pair:
      return Term::pair(substitute(t.args()[0], s), substitute(t.args()[1], s));
    case TermKind::Application: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(substitute(a, s));
      return Term::apply(t.name(), std::move(args));
    }
  }
  return t;
}

namespace {

std::string fresh_binder(const std::string& base, const std::set<std::string>& avoid) {
  std::string candidate = base + "'";
  while (avoid.count(candidate)) candidate += "'";
  return candidate;
}

Term replace_names(const Term& t, const std::map<std::string, Term>& by) {
  switch (t.kind()) {
    case TermKind::Variable:
    case TermKind::Constant: {
      auto it = by.find(t.name());
      return it == by.end() ? t : it->second;
    }
    case TermKind::MetaVariable:
      return t;
    case TermKind::Pair:
      return Term::pair(replace_names(t.args()[0], by), replace_names(t.args()[1], by));
    case TermKind::Application: {
      std::vector<Term> args;
      for (const auto& a : t.args()) args.push_back(replace_names(a, by));
      return Term::apply(t.name(), std::move(args));
    }
  }
  return t;
}

// Rewrites atoms' terms with `leaf`, renaming binders that would capture a
// name occurring in `range_names`.
Formula map_terms(const Formula& f, const std::function<Term(const Term&)>& leaf,
                  const std::set<std::string>& range_names,
                  std::map<std::string, Term> renames) {
  switch (f.kind()) {
    case FormulaKind::Atom: {
      std::vector<Term> terms;
      for (const auto& t : f.terms()) terms.push_back(leaf(replace_names(t, renames)));
      return Formula::atom(f.name(), std::move(terms));
    }
    case FormulaKind::Not:
      return Formula::negation(map_terms(f.body(), leaf, range_names, renames));
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      std::string var = f.name();
      renames.erase(var);
      if (range_names.count(var)) {
        std::set<std::string> avoid = range_names;
        collect_all_names(f.body(), avoid);
        std::string fresh = fresh_binder(var, avoid);
        renames.insert_or_assign(var, Term::variable(fresh));
        var = fresh;
      }
      return Formula::quantified(f.kind(), var, map_terms(f.body(), leaf, range_names, renames));
    }
    default:
      return Formula::binary(f.kind(), map_terms(f.lhs(), leaf, range_names, renames),
                             map_terms(f.rhs(), leaf, range_names, renames));
  }
}

}  // namespace

Formula substitute(const Formula& f, const Substitution& s) {
  if (s.empty()) return f;
  std::set<std::string> metas;
  collect_metas(f, metas);
  std::set<std::string> range_names;
  bool any = false;
  for (const auto& m : metas) {
    if (const Term* b = s.find(m)) {
      any = true;
      collect_free_names(*b, range_names);
    }
  }
  if (!any) return f;
  return map_terms(
      f, [&](const Term& t) { return substitute(t, s); }, range_names, {});
}

Term replace_identifier(const Term& t, const std::string& name, const Term& by) {
  return replace_names(t, {{name, by}});
}

namespace {

// Simultaneous replacement of free identifiers, capture-avoiding.
Formula replace_free(const Formula& f, const std::map<std::string, Term>& by,
                     const std::set<std::string>& range_names) {
  switch (f.kind()) {
    case FormulaKind::Atom: {
      std::vector<Term> terms;
      for (const auto& t : f.terms()) terms.push_back(replace_names(t, by));
      return Formula::atom(f.name(), std::move(terms));
    }
    case FormulaKind::Not:
      return Formula::negation(replace_free(f.body(), by, range_names));
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      auto inner = by;
      inner.erase(f.name());
      if (inner.empty()) return f;
      std::string var = f.name();
      Formula body = f.body();
      if (range_names.count(var)) {
        std::set<std::string> avoid = range_names;
        collect_all_names(body, avoid);
        for (const auto& [k, v] : inner) avoid.insert(k);
        std::string fresh = fresh_binder(var, avoid);
        body = replace_free(body, {{var, Term::variable(fresh)}}, {});
        var = fresh;
      }
      return Formula::quantified(f.kind(), var, replace_free(body, inner, range_names));
    }
    default:
      return Formula::binary(f.kind(), replace_free(f.lhs(), by, range_names),
                             replace_free(f.rhs(), by, range_names));
  }
}

}  // namespace

Formula replace_identifier(const Formula& f, const std::string& name, const Term& by) {
  std::set<std::string> range_names;
  collect_free_names(by, range_names);
  return replace_free(f, {{name, by}}, range_names);
}

Formula rename_constants(const Formula& f, const std::map<std::string, std::string>& renaming) {
  if (renaming.empty()) return f;
  std::map<std::string, Term> by;
  std::set<std::string> range_names;
  for (const auto& [from, to] : renaming) {
    by.emplace(from, Term::constant(to));
    range_names.insert(to);
  }
  return replace_free(f, by, range_names);
}

// ---------------------------------------------------------------------------
// Alpha equivalence

namespace {

void key_term(const Term& t, const std::vector<std::string>& env, std::string& out) {
  switch (t.kind()) {
    case TermKind::Variable:
    case TermKind::Constant: {
      for (std::size_t i = env.size(); i-- > 0;) {
        if (env[i] == t.name()) {
          out += "#" + std::to_string(i);
          return;
        }
      }
      out += t.name();
      return;
    }
    case TermKind::MetaVariable:
      out += "?" + t.name();
      return;
    case TermKind::Pair:
      out += "(";
      key_term(t.args()[0], env, out);
      out += ",";
      key_term(t.args()[1], env, out);
      out += ")";
      return;
    case TermKind::Application:
      out += t.name() + "(";
      for (std::size_t i = 0; i < t.args().size(); ++i) {
        if (i) out += ",";
        key_term(t.args()[i], env, out);
      }
      out += ")";
      return;
  }
}

void key_formula(const Formula& f, std::vector<std::string>& env, std::string& out) {
  switch (f.kind()) {
    case FormulaKind::Atom:
      out += f.name() + "[";
      for (const auto& t : f.terms()) {
        key_term(t, env, out);
        out += ";";
      }
      out += "]";
      return;
    case FormulaKind::Not:
      out += "~(";
      key_formula(f.body(), env, out);
      out += ")";
      return;
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      out += f.kind() == FormulaKind::Forall ? "A(" : "E(";
      env.push_back(f.name());
      key_formula(f.body(), env, out);
      env.pop_back();
      out += ")";
      return;
    default:
      out += std::to_string(static_cast<int>(f.kind())) + "(";
      key_formula(f.lhs(), env, out);
      out += ",";
      key_formula(f.rhs(), env, out);
      out += ")";
      return;
  }
}

}  // namespace

std::string alpha_key(const Formula& f) {
  std::vector<std::string> env;
  std::string out;
  key_formula(f, env, out);
  return out;
}

bool alpha_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  return alpha_key(a) == alpha_key(b);
}

// ---------------------------------------------------------------------------
// Unification and matching

namespace {

// Binder placeholders use a character the lexer never produces.
std::string binder_name(std::size_t depth) { return "#b" + std::to_string(depth); }

bool mentions_binder(const Term& t) {
  std::set<std::string> names;
  collect_free_names(t, names);
  for (const auto& n : names)
    if (!n.empty() && n[0] == '#') return true;
  return false;
}

bool unify_terms(const Term& a0, const Term& b0, Substitution& s) {
  Term a = substitute(a0, s);
  Term b = substitute(b0, s);
  if (a == b) return true;
  if (a.is_meta()) {
    if (mentions_binder(b)) return false;
    return s.bind(a.name(), b);
  }
  if (b.is_meta()) {
    if (mentions_binder(a)) return false;
    return s.bind(b.name(), a);
  }
  if (a.kind() != b.kind() || a.name() != b.name() || a.args().size() != b.args().size())
    return false;
  for (std::size_t i = 0; i < a.args().size(); ++i)
    if (!unify_terms(a.args()[i], b.args()[i], s)) return false;
  return true;
}

bool unify_formulas(const Formula& a, const Formula& b, Substitution& s, std::size_t depth) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case FormulaKind::Atom:
      if (a.name() != b.name() || a.terms().size() != b.terms().size()) return false;
      for (std::size_t i = 0; i < a.terms().size(); ++i)
        if (!unify_terms(a.terms()[i], b.terms()[i], s)) return false;
      return true;
    case FormulaKind::Not:
      return unify_formulas(a.body(), b.body(), s, depth);
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      Term v = Term::variable(binder_name(depth));
      return unify_formulas(replace_identifier(a.body(), a.name(), v),
                            replace_identifier(b.body(), b.name(), v), s, depth + 1);
    }
    default:
      return unify_formulas(a.lhs(), b.lhs(), s, depth) &&
             unify_formulas(a.rhs(), b.rhs(), s, depth);
  }
}

class Matcher {
 public:
  explicit Matcher(Substitution& s) : s_(s) {}

  bool terms(const Term& p, const Term& t) {
    if (p.is_meta()) {
      if (const Term* b = s_.find(p.name())) return *b == t;
      if (auto it = raw_.find(p.name()); it != raw_.end()) return it->second == t;
      if (mentions_binder(t)) return false;
      raw_.emplace(p.name(), t);
      return true;
    }
    if (p.kind() != t.kind() || p.name() != t.name() || p.args().size() != t.args().size())
      return false;
    for (std::size_t i = 0; i < p.args().size(); ++i)
      if (!terms(p.args()[i], t.args()[i])) return false;
    return true;
  }

  bool formulas(const Formula& p, const Formula& t, std::size_t depth) {
    if (p.kind() != t.kind()) return false;
    switch (p.kind()) {
      case FormulaKind::Atom:
        if (p.name() != t.name() || p.terms().size() != t.terms().size()) return false;
        for (std::size_t i = 0; i < p.terms().size(); ++i)
          if (!terms(p.terms()[i], t.terms()[i])) return false;
        return true;
      case FormulaKind::Not:
        return formulas(p.body(), t.body(), depth);
      case FormulaKind::Forall:
      case FormulaKind::Exists: {
        Term v = Term::variable(binder_name(depth));
        return formulas(replace_identifier(p.body(), p.name(), v),
                        replace_identifier(t.body(), t.name(), v), depth + 1);
      }
      default:
        return formulas(p.lhs(), t.lhs(), depth) && formulas(p.rhs(), t.rhs(), depth);
    }
  }

  std::map<std::string, Term>& raw() { return raw_; }

 private:
  Substitution& s_;
  std::map<std::string, Term> raw_;
};

}  // namespace

bool unify_into(const Term& a, const Term& b, Substitution& s) {
  Substitution trial = s;
  if (!unify_terms(a, b, trial)) return false;
  s = std::move(trial);
  return true;
}

bool unify_into(const Formula& a, const Formula& b, Substitution& s) {
  Substitution trial = s;
  if (!unify_formulas(a, b, trial, 0)) return false;
  s = std::move(trial);
  return true;
}

std::optional<Substitution> unify(const Term& a, const Term& b) {
  Substitution s;
  if (!unify_into(a, b, s)) return std::nullopt;
  return s;
}

std::optional<Substitution> unify(const Formula& a, const Formula& b) {
  Substitution s;
  if (!unify_into(a, b, s)) return std::nullopt;
  return s;
}

// Matching keeps pattern bindings verbatim: the target's meta-variables are
// rigid, so bindings are inserted without resolution against each other.
bool match(const Term& pattern, const Term& target, Substitution& s) {
  Matcher m(s);
  if (!m.terms(pattern, target)) return false;
  for (auto& [k, v] : m.raw()) s.set_raw(k, v);
  return true;
}

bool match(const Formula& pattern, const Formula& target, Substitution& s) {
  Matcher m(s);
  if (!m.formulas(pattern, target, 0)) return false;
  for (auto& [k, v] : m.raw()) s.set_raw(k, v);
  return true;
}

}  // namespace prooftutor
