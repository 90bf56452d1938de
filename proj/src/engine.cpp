#include "prooftutor/engine.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace prooftutor {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::Forward: return "forward";
    case Direction::Backward: return "backward";
    case Direction::Close: return "close";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Synthesis

namespace {

Term pattern_meta(const std::string& name) { return Term::meta("%" + name); }

// Replaces a bound variable by a pattern meta, renaming apart if needed.
Formula open_binder(const Formula& quantified, std::set<std::string>& used) {
  std::string name = quantified.name();
  std::string meta = name;
  for (int i = 1; used.count(meta); ++i) meta = name + std::to_string(i);
  used.insert(meta);
  return replace_identifier(quantified.body(), name, pattern_meta(meta));
}

std::string meta_name_of(const Formula& quantified, const std::set<std::string>& before,
                         const std::set<std::string>& after) {
  for (const auto& m : after)
    if (!before.count(m)) return "%" + m;
  return "%" + quantified.name();
}

// Premises of a forward rule: alternatives (one per disjunct), each a list of
// atoms. Existentials become pattern metas.
bool premise_alternatives(const Formula& f, std::set<std::string>& used,
                          std::vector<std::vector<Formula>>& out) {
  switch (f.kind()) {
    case FormulaKind::Atom:
      out = {{f}};
      return true;
    case FormulaKind::And: {
      std::vector<std::vector<Formula>> l, r;
      if (!premise_alternatives(f.lhs(), used, l) || !premise_alternatives(f.rhs(), used, r))
        return false;
      out.clear();
      for (const auto& a : l)
        for (const auto& b : r) {
          auto c = a;
          c.insert(c.end(), b.begin(), b.end());
          out.push_back(std::move(c));
        }
      return true;
    }
    case FormulaKind::Or: {
      std::vector<std::vector<Formula>> l, r;
      if (!premise_alternatives(f.lhs(), used, l) || !premise_alternatives(f.rhs(), used, r))
        return false;
      out = l;
      out.insert(out.end(), r.begin(), r.end());
      return true;
    }
    case FormulaKind::Exists:
      return premise_alternatives(open_binder(f, used), used, out);
    default:
      return false;
  }
}

struct ForwardConclusion {
  std::vector<Formula> extra_premises;
  std::vector<Formula> produced;
  std::vector<std::string> witnesses;
};

bool forward_conclusion(const Formula& f, std::set<std::string>& used, ForwardConclusion& out) {
  switch (f.kind()) {
    case FormulaKind::Atom:
    case FormulaKind::Or:
      out.produced.push_back(f);
      return true;
    case FormulaKind::And:
      return forward_conclusion(f.lhs(), used, out) && forward_conclusion(f.rhs(), used, out);
    case FormulaKind::Exists: {
      auto before = used;
      Formula body = open_binder(f, used);
      out.witnesses.push_back(meta_name_of(f, before, used));
      return forward_conclusion(body, used, out);
    }
    case FormulaKind::Forall: {
      // Only a guarded universal is usable: its variables are bound by the guard.
      Formula body = open_binder(f, used);
      if (body.kind() != FormulaKind::Forall && body.kind() != FormulaKind::Implies) return false;
      return forward_conclusion(body, used, out);
    }
    case FormulaKind::Implies: {
      std::vector<std::vector<Formula>> alts;
      if (!premise_alternatives(f.lhs(), used, alts) || alts.size() != 1) return false;
      out.extra_premises.insert(out.extra_premises.end(), alts[0].begin(), alts[0].end());
      return forward_conclusion(f.rhs(), used, out);
    }
    default:
      return false;
  }
}

struct BackwardAlt {
  std::vector<GoalSpec> goals;
  std::vector<std::string> new_metas;
  int hyp_intro = 0;
};

bool backward_alternatives(const Formula& f, const GoalSpec& ctx, std::set<std::string>& used,
                           std::vector<BackwardAlt>& out) {
  switch (f.kind()) {
    case FormulaKind::Atom: {
      GoalSpec g = ctx;
      g.goal = f;
      out = {BackwardAlt{{g}, {}, 0}};
      return true;
    }
    case FormulaKind::And: {
      std::vector<BackwardAlt> l, r;
      if (!backward_alternatives(f.lhs(), ctx, used, l) ||
          !backward_alternatives(f.rhs(), ctx, used, r))
        return false;
      out.clear();
      for (const auto& a : l)
        for (const auto& b : r) {
          BackwardAlt c = a;
          c.goals.insert(c.goals.end(), b.goals.begin(), b.goals.end());
          c.new_metas.insert(c.new_metas.end(), b.new_metas.begin(), b.new_metas.end());
          c.hyp_intro += b.hyp_intro;
          out.push_back(std::move(c));
        }
      return true;
    }
    case FormulaKind::Or: {
      std::vector<BackwardAlt> l, r;
      if (!backward_alternatives(f.lhs(), ctx, used, l) ||
          !backward_alternatives(f.rhs(), ctx, used, r))
        return false;
      out = l;
      out.insert(out.end(), r.begin(), r.end());
      return true;
    }
    case FormulaKind::Exists: {
      // A witness chosen later must not depend on eigenvariables of this goal.
      if (!ctx.eigen.empty() || !ctx.hyps.empty()) return false;
      auto before = used;
      Formula body = open_binder(f, used);
      std::string meta = meta_name_of(f, before, used);
      if (!backward_alternatives(body, ctx, used, out)) return false;
      for (auto& alt : out) alt.new_metas.insert(alt.new_metas.begin(), meta);
      return true;
    }
    case FormulaKind::Forall: {
      auto before = used;
      Formula body = open_binder(f, used);
      GoalSpec inner = ctx;
      inner.eigen.push_back(meta_name_of(f, before, used));
      return backward_alternatives(body, inner, used, out);
    }
    case FormulaKind::Implies: {
      std::vector<std::vector<Formula>> alts;
      if (!premise_alternatives(f.lhs(), used, alts) || alts.size() != 1) return false;
      GoalSpec inner = ctx;
      inner.hyps.insert(inner.hyps.end(), alts[0].begin(), alts[0].end());
      if (!backward_alternatives(f.rhs(), inner, used, out)) return false;
      for (auto& alt : out) alt.hyp_intro += static_cast<int>(alts[0].size());
      return true;
    }
    default:
      return false;
  }
}

std::set<std::string> metas_of(const std::vector<Formula>& fs) {
  std::set<std::string> out;
  for (const auto& f : fs) collect_metas(f, out);
  return out;
}

InferenceRule base_rule(const Assertion& a, const std::string& name, Direction d) {
  InferenceRule r;
  r.name = name;
  r.concept_name = a.concept_name.empty() ? a.label : a.concept_name;
  r.kind = a.kind;
  r.direction = d;
  r.is_buggy = a.kind == AssertionKind::Buggy;
  r.source = a.formula;
  return r;
}

// Rules for `premise -> conclusion` over pattern metas. `fwd`/`bwd` are the
// names of the two directions.
void implication_rules(const Assertion& a, const Formula& premise, const Formula& conclusion,
                       const std::set<std::string>& used0, const std::string& fwd,
                       const std::string& bwd, std::vector<InferenceRule>& out) {
  {
    std::set<std::string> used = used0;
    std::vector<std::vector<Formula>> alts;
    ForwardConclusion fc;
    if (premise_alternatives(premise, used, alts) && forward_conclusion(conclusion, used, fc)) {
      for (std::size_t i = 0; i < alts.size(); ++i) {
        InferenceRule r = base_rule(a, alts.size() > 1 ? fwd + "." + std::to_string(i + 1) : fwd,
                                    Direction::Forward);
        r.premises = alts[i];
        r.premises.insert(r.premises.end(), fc.extra_premises.begin(), fc.extra_premises.end());
        r.conclusion = conclusion;
        r.produced = fc.produced;
        r.witnesses = fc.witnesses;
        // Every produced meta must be bound by the premises or be a witness.
        auto bound = metas_of(r.premises);
        bound.insert(r.witnesses.begin(), r.witnesses.end());
        auto needed = metas_of(r.produced);
        if (std::includes(bound.begin(), bound.end(), needed.begin(), needed.end()) &&
            !r.premises.empty())
          out.push_back(std::move(r));
      }
    }
  }
  if (conclusion.is_atom()) {
    std::set<std::string> used = used0;
    std::vector<BackwardAlt> alts;
    if (backward_alternatives(premise, GoalSpec{}, used, alts)) {
      auto goal_metas = metas_of({conclusion});
      for (std::size_t i = 0; i < alts.size(); ++i) {
        InferenceRule r = base_rule(a, alts.size() > 1 ? bwd + "." + std::to_string(i + 1) : bwd,
                                    Direction::Backward);
        r.conclusion = conclusion;
        r.goals = alts[i].goals;
        r.new_metas = alts[i].new_metas;
        r.hyp_intro = alts[i].hyp_intro;
        // Prenex variables absent from the goal pattern become session metas.
        std::set<std::string> covered = goal_metas;
        covered.insert(r.new_metas.begin(), r.new_metas.end());
        for (const auto& g : r.goals) covered.insert(g.eigen.begin(), g.eigen.end());
        std::vector<Formula> all;
        for (const auto& g : r.goals) {
          all.push_back(g.goal);
          all.insert(all.end(), g.hyps.begin(), g.hyps.end());
        }
        for (const auto& m : metas_of(all))
          if (!covered.count(m)) {
            r.new_metas.push_back(m);
            covered.insert(m);
          }
        out.push_back(std::move(r));
      }
    }
  }
}

}  // namespace

std::vector<InferenceRule> synthesize_inferences(const Assertion& a,
                                                 std::vector<std::string>* diagnostics) {
  std::vector<InferenceRule> out;
  std::set<std::string> used;
  Formula body = a.formula;
  while (body.kind() == FormulaKind::Forall) body = open_binder(body, used);

  auto diagnose = [&](const std::string& why) {
    if (diagnostics) diagnostics->push_back(a.label + ": " + why);
  };

  switch (body.kind()) {
    case FormulaKind::Iff:
      implication_rules(a, body.lhs(), body.rhs(), used, a.label + "-fwd", a.label + "-bwd-rev",
                        out);
      implication_rules(a, body.rhs(), body.lhs(), used, a.label + "-fwd-rev", a.label + "-bwd",
                        out);
      break;
    case FormulaKind::Implies:
      implication_rules(a, body.lhs(), body.rhs(), used, a.label + "-fwd", a.label + "-bwd", out);
      break;
    case FormulaKind::Atom: {
      if (body.name() == "=" && body.terms().size() == 2) {
        // Equality of sets: members of one side are members of the other.
        std::string p = "p";
        for (int i = 1; used.count(p); ++i) p = "p" + std::to_string(i);
        used.insert(p);
        Formula l = Formula::atom("in", {pattern_meta(p), body.terms()[0]});
        Formula r = Formula::atom("in", {pattern_meta(p), body.terms()[1]});
        implication_rules(a, l, r, used, a.label + "-fwd", a.label + "-bwd-rev", out);
        implication_rules(a, r, l, used, a.label + "-fwd-rev", a.label + "-bwd", out);
      }
      InferenceRule c = base_rule(a, a.label, Direction::Close);
      c.conclusion = body;
      out.push_back(std::move(c));
      break;
    }
    default:
      diagnose("unsupported assertion shape");
      return {};
  }
  if (out.empty()) diagnose("no usable inference");
  // Forward rules first, in the order the assertion reads.
  std::stable_sort(out.begin(), out.end(), [](const InferenceRule& x, const InferenceRule& y) {
    auto rank = [](Direction d) { return d == Direction::Forward ? 0 : d == Direction::Backward ? 1 : 2; };
    return rank(x.direction) < rank(y.direction);
  });
  return out;
}

RuleBase RuleBase::from(const Theory& theory) {
  RuleBase base;
  for (const auto& a : theory.assertions) {
    auto rules = synthesize_inferences(a, &base.diagnostics);
    base.rules.insert(base.rules.end(), rules.begin(), rules.end());
  }
  return base;
}

const InferenceRule* RuleBase::find(const std::string& name) const {
  for (const auto& r : rules)
    if (r.name == name) return &r;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Applications

std::size_t RuleApplication::arity() const {
  if (direction == Direction::Forward) return 1;
  return produced.size();
}

std::string render(const RuleApplication& app) {
  std::ostringstream out;
  out << app.rule << " on " << app.task;
  if (!app.consumed.empty()) {
    out << " from ";
    for (std::size_t i = 0; i < app.consumed.size(); ++i) out << (i ? "," : "") << app.consumed[i];
  }
  Substitution visible;
  for (const auto& [k, v] : app.subst.bindings())
    visible.set_raw(k[0] == '%' ? k.substr(1) : k, v);
  out << " " << render(visible);
  if (!app.closing.empty()) out << " closing " << render(app.closing);
  return out.str();
}

std::string fresh_name(std::set<std::string>& avoid) {
  static const char* kBase[] = {"x", "y", "z"};
  for (int round = 0;; ++round) {
    for (const char* b : kBase) {
      std::string candidate = round == 0 ? b : b + std::to_string(round);
      if (!avoid.count(candidate)) {
        avoid.insert(candidate);
        return candidate;
      }
    }
  }
}

namespace {

std::set<std::string> all_names(const Sequent& s) {
  std::set<std::string> out;
  collect_all_names(s.goal, out);
  for (const auto& h : s.hyps) collect_all_names(h.formula, out);
  return out;
}

void match_premises(const InferenceRule& rule, const Sequent& s, std::size_t i,
                    std::vector<std::string>& labels, const Substitution& sub,
                    const std::function<void(const std::vector<std::string>&,
                                             const Substitution&)>& emit) {
  if (i == rule.premises.size()) {
    emit(labels, sub);
    return;
  }
  for (const auto& h : s.hyps) {
    Substitution next = sub;
    if (!match(rule.premises[i], h.formula, next)) continue;
    labels.push_back(h.label);
    match_premises(rule, s, i + 1, labels, next, emit);
    labels.pop_back();
  }
}

RuleApplication backward_application(const InferenceRule& rule, const Sequent& s,
                                      const Substitution& match, const Supply& supply) {
  RuleApplication app;
  app.rule = rule.name;
  app.concept_name = rule.concept_name;
  app.direction = Direction::Backward;
  app.is_buggy = rule.is_buggy;
  app.task = s.label;
  app.fingerprint = sequent_key(s);
  app.hyp_intro = rule.hyp_intro;
  Substitution sub = match;
  int meta = supply.next_meta;
  for (const auto& m : rule.new_metas) {
    std::string name = "m" + std::to_string(meta++);
    sub.set_raw(m, Term::meta(name));
    app.new_metas.push_back(name);
  }
  std::set<std::string> avoid = all_names(s);
  for (const auto& g : rule.goals) {
    Substitution local = sub;
    for (const auto& e : g.eigen) {
      std::string name = fresh_name(avoid);
      local.set_raw(e, Term::constant(name));
      sub.set_raw(e, Term::constant(name));
      app.fresh.push_back(name);
    }
    Sequent out;
    out.hyps = s.hyps;
    for (const auto& h : g.hyps) {
      Formula f = substitute(h, local);
      if (std::none_of(out.hyps.begin(), out.hyps.end(),
                       [&](const Hypothesis& x) { return alpha_equal(x.formula, f); }))
        out.hyps.push_back({out.next_hyp_label(), f});
    }
    out.goal = substitute(g.goal, local);
    app.produced.push_back(std::move(out));
  }
  app.subst = sub;
  return app;
}

}  // namespace

RuleApplication forward_application(const InferenceRule& rule, const Sequent& s,
                                    const std::vector<std::string>& consumed,
                                    const Substitution& match) {
  RuleApplication app;
  app.rule = rule.name;
  app.concept_name = rule.concept_name;
  app.direction = Direction::Forward;
  app.is_buggy = rule.is_buggy;
  app.task = s.label;
  app.fingerprint = sequent_key(s);
  app.consumed = consumed;
  Substitution sub = match;
  std::set<std::string> avoid = all_names(s);
  for (const auto& w : rule.witnesses) {
    std::string name = fresh_name(avoid);
    sub.set_raw(w, Term::constant(name));
    app.fresh.push_back(name);
  }
  for (const auto& p : rule.produced) {
    Formula f = substitute(p, sub);
    bool dup = std::any_of(app.produced_hyps.begin(), app.produced_hyps.end(),
                           [&](const Formula& g) { return alpha_equal(f, g); });
    if (!dup) app.produced_hyps.push_back(f);
  }
  app.subst = sub;
  return app;
}

std::vector<RuleApplication> applicable_rules(const Sequent& s, const RuleBase& rules,
                                              const RuleFilter& filter, const Supply& supply) {
  std::vector<RuleApplication> out;
  for (const auto& rule : rules.rules) {
    if (rule.is_buggy ? !filter.buggy : !filter.normal) continue;
    if (filter.kind && rule.kind != *filter.kind) continue;
    switch (rule.direction) {
      case Direction::Forward: {
        if (!filter.forward) break;
        std::vector<std::string> labels;
        match_premises(rule, s, 0, labels, Substitution{},
                       [&](const std::vector<std::string>& ls, const Substitution& sub) {
                         out.push_back(forward_application(rule, s, ls, sub));
                       });
        break;
      }
      case Direction::Backward: {
        if (!filter.backward) break;
        Substitution sub;
        if (match(rule.conclusion, s.goal, sub))
          out.push_back(backward_application(rule, s, sub, supply));
        break;
      }
      case Direction::Close: {
        if (!filter.close) break;
        Substitution sub;
        if (match(rule.conclusion, s.goal, sub)) {
          RuleApplication app;
          app.rule = rule.name;
          app.concept_name = rule.concept_name;
          app.direction = Direction::Close;
          app.is_buggy = rule.is_buggy;
          app.task = s.label;
          app.fingerprint = sequent_key(s);
          app.subst = sub;
          out.push_back(std::move(app));
        }
        break;
      }
    }
  }
  return out;
}

namespace {

bool within_scope(const Substitution& sigma,
                  const std::map<std::string, std::set<std::string>>* scope) {
  if (!scope) return true;
  for (const auto& [meta, term] : sigma.bindings()) {
    auto it = scope->find(meta);
    if (it == scope->end()) continue;
    std::set<std::string> names;
    collect_free_names(term, names);
    for (const auto& n : names)
      if (!it->second.count(n)) return false;
  }
  return true;
}

}  // namespace

std::vector<RuleApplication> axiom_closures(
    const Sequent& s, const std::map<std::string, std::set<std::string>>* scope) {
  std::vector<RuleApplication> out;
  std::set<std::string> seen;
  for (const auto& h : s.hyps) {
    auto sigma = unify(s.goal, h.formula);
    if (!sigma || !within_scope(*sigma, scope)) continue;
    std::string key = render(*sigma);
    if (!seen.insert(key).second) continue;
    RuleApplication app;
    app.rule = "Ax";
    app.concept_name = "axiom";
    app.direction = Direction::Close;
    app.task = s.label;
    app.fingerprint = sequent_key(s);
    app.consumed = {h.label};
    app.closing = *sigma;
    out.push_back(std::move(app));
    if (sigma->empty()) break;  // a plain match subsumes every instantiating one
  }
  return out;
}

std::optional<RuleApplication> or_split(const Sequent& s) {
  for (std::size_t i = 0; i < s.hyps.size(); ++i) {
    const Formula& f = s.hyps[i].formula;
    if (f.kind() != FormulaKind::Or) continue;
    RuleApplication app;
    app.rule = "or-l";
    app.concept_name = "or-elim";
    app.direction = Direction::Backward;
    app.task = s.label;
    app.fingerprint = sequent_key(s);
    app.consumed = {s.hyps[i].label};
    for (const Formula& part : {f.lhs(), f.rhs()}) {
      Sequent out = s;
      out.label.clear();
      out.hyps[i].formula = part;
      // Drop a case hypothesis that is already present elsewhere.
      for (std::size_t j = 0; j < out.hyps.size(); ++j)
        if (j != i && alpha_equal(out.hyps[j].formula, part)) {
          out.hyps.erase(out.hyps.begin() + static_cast<std::ptrdiff_t>(i));
          break;
        }
      app.produced.push_back(std::move(out));
    }
    return app;
  }
  return std::nullopt;
}

std::vector<Sequent> apply(RuleApplication& app, const Sequent& s, Supply& supply) {
  if (app.task != s.label || app.fingerprint != sequent_key(s))
    throw StaleApplication("stale application of " + app.rule + " to " + s.label);
  app.produced_labels.clear();
  std::vector<Sequent> out;
  switch (app.direction) {
    case Direction::Forward: {
      Sequent next = s;
      for (const auto& f : app.produced_hyps)
        if (!next.has_hypothesis(f)) next.hyps.push_back({next.next_hyp_label(), f});
      next.label = supply.task_label();
      app.produced_labels.push_back(next.label);
      out.push_back(std::move(next));
      break;
    }
    case Direction::Backward:
      for (const auto& p : app.produced) {
        Sequent next = p;
        next.label = supply.task_label();
        app.produced_labels.push_back(next.label);
        out.push_back(std::move(next));
      }
      supply.next_meta += static_cast<int>(app.new_metas.size());
      break;
    case Direction::Close:
      break;
  }
  return out;
}

bool is_redundant(const RuleApplication& app, const Sequent& s) {
  if (app.direction != Direction::Forward) return false;
  if (app.fresh.empty()) {
    return std::all_of(app.produced_hyps.begin(), app.produced_hyps.end(),
                       [&](const Formula& f) { return s.has_hypothesis(f); });
  }
  // Witnesses: redundant if existing terms already satisfy the produced facts.
  Substitution back;
  std::vector<Formula> patterns;
  for (const auto& f : app.produced_hyps) {
    Formula p = f;
    for (const auto& w : app.fresh) p = replace_identifier(p, w, Term::meta("%w-" + w));
    patterns.push_back(p);
  }
  std::function<bool(std::size_t, const Substitution&)> go = [&](std::size_t i,
                                                                 const Substitution& sub) {
    if (i == patterns.size()) return true;
    for (const auto& h : s.hyps) {
      Substitution next = sub;
      if (match(patterns[i], h.formula, next) && go(i + 1, next)) return true;
    }
    return false;
  };
  return go(0, back);
}

std::set<std::string> compound_universe(const Sequent& s) {
  std::set<std::string> out;
  collect_compound_subterms(s.goal, out);
  for (const auto& h : s.hyps) collect_compound_subterms(h.formula, out);
  return out;
}

bool is_admissible(const RuleApplication& app, const std::set<std::string>& universe) {
  if (app.is_buggy) return true;
  std::set<std::string> terms;
  for (const auto& f : app.produced_hyps) collect_compound_subterms(f, terms);
  for (const auto& p : app.produced) {
    collect_compound_subterms(p.goal, terms);
    for (const auto& h : p.hyps) collect_compound_subterms(h.formula, terms);
  }
  return std::includes(universe.begin(), universe.end(), terms.begin(), terms.end());
}

}  // namespace prooftutor
