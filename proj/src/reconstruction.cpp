#include "prooftutor/reconstruction.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace prooftutor {

std::size_t MentalProofState::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < open.size(); ++i)
    if (open[i].label == label) return i;
  return open.size();
}

std::string state_key(const MentalProofState& s) {
  std::string out;
  for (const auto& q : s.open) out += sequent_key(q) + "\n";
  return out + "#" + std::to_string(s.marked) + "#" + render(s.sigma);
}

std::string render(const MentalProofState& s) {
  std::ostringstream out;
  for (std::size_t i = 0; i < s.open.size(); ++i)
    out << (i == s.marked ? "* " : "  ") << s.open[i].label << ": " << render(s.open[i]) << "\n";
  if (s.open.empty()) out << "  (no open tasks)\n";
  if (!s.sigma.empty()) out << "  sigma " << render(s.sigma) << "\n";
  return out.str();
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Verified: return "verified";
    case Verdict::Rejected: return "rejected";
    case Verdict::Buggy: return "buggy";
    case Verdict::ResourceExhausted: return "resource_exhausted";
  }
  return "?";
}

void apply_to_state(MentalProofState& st, RuleApplication& app) {
  std::size_t i = st.index_of(app.task);
  if (i == st.open.size()) throw StaleApplication("no open task " + app.task);
  Sequent src = st.open[i];
  std::vector<Sequent> out = apply(app, src, st.supply);
  if (!app.new_metas.empty()) {
    std::set<std::string> names = sequent_names(src);
    for (const auto& m : app.new_metas) st.meta_scope[m] = names;
  }
  st.open.erase(st.open.begin() + static_cast<std::ptrdiff_t>(i));
  st.open.insert(st.open.begin() + static_cast<std::ptrdiff_t>(i), out.begin(), out.end());
  if (!app.closing.empty()) {
    st.sigma = st.sigma.then(app.closing);
    for (auto& q : st.open) {
      q.goal = substitute(q.goal, app.closing);
      for (auto& h : q.hyps) h.formula = substitute(h.formula, app.closing);
    }
  }
  if (st.marked > i) st.marked = st.marked + out.size() - 1;
  if (st.marked >= st.open.size()) st.marked = st.open.empty() ? 0 : st.open.size() - 1;
  st.history.push_back(app);
}

void rename_state(MentalProofState& st, const std::map<std::string, std::string>& renaming) {
  if (renaming.empty()) return;
  for (auto& q : st.open) {
    q.goal = rename_constants(q.goal, renaming);
    for (auto& h : q.hyps) h.formula = rename_constants(h.formula, renaming);
  }
  if (st.last_fact) st.last_fact = rename_constants(*st.last_fact, renaming);
  for (auto& [meta, names] : st.meta_scope) {
    std::set<std::string> renamed;
    for (const auto& n : names) {
      auto it = renaming.find(n);
      renamed.insert(it == renaming.end() ? n : it->second);
    }
    names = std::move(renamed);
  }
}

MentalProofState replay(const MentalProofState& from, std::vector<RuleApplication> trace,
                        const std::map<std::string, std::string>& renaming) {
  MentalProofState st = from;
  for (auto& app : trace) apply_to_state(st, app);
  rename_state(st, renaming);
  return st;
}

std::vector<MentalProofState> initial_states(const Exercise& ex) {
  MentalProofState st;
  st.open.push_back(Sequent{"T0", {}, ex.goal});
  return {st};
}

bool close_check(const MentalProofState& state) { return state.open.empty(); }

std::string render_trace(const std::vector<RuleApplication>& trace) {
  std::ostringstream out;
  for (const auto& app : trace) {
    out << render(app);
    if (!app.produced_labels.empty()) {
      out << " ->";
      for (const auto& l : app.produced_labels) out << " " << l;
    }
    out << "\n";
  }
  return out.str();
}

namespace {

// ---------------------------------------------------------------------------
// Step preparation

Formula replace_atom(const Formula& f, const std::string& name, const Formula& by) {
  switch (f.kind()) {
    case FormulaKind::Atom:
      return f.name() == name && f.terms().empty() ? by : f;
    case FormulaKind::Not:
      return Formula::negation(replace_atom(f.body(), name, by));
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      return Formula::quantified(f.kind(), f.name(), replace_atom(f.body(), name, by));
    default:
      return Formula::binary(f.kind(), replace_atom(f.lhs(), name, by),
                             replace_atom(f.rhs(), name, by));
  }
}

Formula expand(Formula f, const MentalProofState& st) {
  for (const auto& [name, value] : st.abbreviations) {
    if (const auto* t = std::get_if<Term>(&value))
      f = replace_identifier(f, name, *t);
    else
      f = replace_atom(f, name, std::get<Formula>(value));
  }
  return f;
}

enum class Want { Assume, Fact, Subgoal, Subgoals, Cases, Trivial, Qed };

/// A step resolved against one start state: abbreviations expanded, the
/// student's own new names turned into pattern metas `%s<name>`.
struct Request {
  Want want = Want::Fact;
  std::vector<Formula> hyps;  // assume hypotheses or case formulas
  std::optional<Formula> thus;
  Formula fact;               // the fact as stated (student names)
  std::vector<Formula> goals;
  std::vector<Formula> using_;
  std::vector<std::vector<ProofStep>> branches;
  std::set<std::string> student_fresh;
  std::string error;
};

std::set<std::string> state_names(const MentalProofState& st) {
  std::set<std::string> out;
  for (const auto& q : st.open) {
    auto n = sequent_names(q);
    out.insert(n.begin(), n.end());
  }
  for (const auto& [name, v] : st.abbreviations) out.insert(name);
  return out;
}

Formula to_pattern(const Formula& f, const std::set<std::string>& student_fresh) {
  Formula out = f;
  for (const auto& n : student_fresh) out = replace_identifier(out, n, Term::meta("%s" + n));
  return out;
}

std::optional<Formula> continue_fact(const MentalProofState& st, const Continuation& c) {
  if (!st.last_fact) return std::nullopt;
  const Formula& last = *st.last_fact;
  if (const auto* t = std::get_if<Term>(&c.rhs)) {
    if (!last.is_atom() || last.terms().size() != 2) return std::nullopt;
    return Formula::atom(c.op, {last.terms()[1], *t});
  }
  if (!last.is_binary()) return std::nullopt;
  FormulaKind k = c.op == "->" ? FormulaKind::Implies : FormulaKind::Iff;
  return Formula::binary(k, last.rhs(), std::get<Formula>(c.rhs));
}

Request prepare(const ProofStep& step, const MentalProofState& st, const Theory& theory) {
  Request r;
  if (const auto* s = step.as<AssumeStep>()) {
    r.want = Want::Assume;
    for (const auto& h : s->hyps) r.hyps.push_back(expand(h, st));
    if (s->thus) r.thus = expand(*s->thus, st);
  } else if (const auto* s = step.as<FactStep>()) {
    r.want = Want::Fact;
    if (const auto* f = std::get_if<Formula>(&s->form)) {
      r.fact = expand(*f, st);
    } else if (auto f = continue_fact(st, std::get<Continuation>(s->form))) {
      r.fact = expand(*f, st);
    } else {
      r.error = "there is no previous fact to continue";
    }
  } else if (const auto* s = step.as<SubgoalStep>()) {
    r.want = Want::Subgoal;
    r.goals.push_back(expand(s->goal, st));
    for (const auto& u : s->using_) r.using_.push_back(expand(u, st));
  } else if (const auto* s = step.as<SubgoalsStep>()) {
    r.want = Want::Subgoals;
    for (const auto& g : s->goals) r.goals.push_back(expand(g.goal, st));
  } else if (const auto* s = step.as<CasesStep>()) {
    r.want = Want::Cases;
    for (const auto& b : s->branches) {
      r.hyps.push_back(expand(b.hyp, st));
      r.branches.push_back(b.steps);
    }
  } else if (step.as<TrivialStep>()) {
    r.want = Want::Trivial;
  } else {
    r.want = Want::Qed;
  }
  // Names the student introduces: neither in the state nor declared symbols.
  std::set<std::string> names;
  auto add = [&](const Formula& f) { collect_free_names(f, names); };
  for (const auto& f : r.hyps) add(f);
  if (r.thus) add(*r.thus);
  if (r.want == Want::Fact && r.error.empty()) add(r.fact);
  for (const auto& f : r.goals) add(f);
  for (const auto& f : r.using_) add(f);
  std::set<std::string> known = state_names(st);
  for (const auto& n : names)
    if (!known.count(n) && !theory.arities.contains(n)) r.student_fresh.insert(n);
  return r;
}

// ---------------------------------------------------------------------------
// Search

struct Node {
  MentalProofState state;
  std::vector<RuleApplication> trace;
  std::set<std::string> lineage;  // open labels descending from the marked task
  std::set<std::string> fresh;    // constants the trace introduced
  bool buggy_used = false;
  std::size_t origin = 0;
};

struct Match {
  MentalProofState state;
  std::vector<RuleApplication> trace;
  std::map<std::string, std::string> renaming;
  std::string interpretation;
  std::size_t origin = 0;
  std::vector<std::string> branch_labels;  // cases: the task of each branch
  bool buggy = false;
};

struct Context {
  const Theory& theory;
  const RuleBase& rules;
  const SearchLimits& limits;
  std::size_t nodes = 0;
  bool exhausted = false;
};

std::vector<const Sequent*> lineage_leaves(const Node& n) {
  std::vector<const Sequent*> out;
  for (const auto& q : n.state.open)
    if (n.lineage.count(q.label)) out.push_back(&q);
  return out;
}

std::string node_key(const Node& n) {
  std::string key = state_key(n.state) + "#";
  for (std::size_t i = 0; i < n.state.open.size(); ++i)
    if (n.lineage.count(n.state.open[i].label)) key += std::to_string(i) + ",";
  return key + (n.buggy_used ? "#b" : "#n");
}

/// Turns pattern bindings into a renaming of search-introduced constants to
/// the student's names; nullopt when a student name does not denote a fresh
/// constant or two names collide.
std::optional<std::map<std::string, std::string>> student_renaming(const Substitution& sub,
                                                                   const Request& req,
                                                                   const Node& node) {
  std::map<std::string, std::string> ren;
  std::set<std::string> taken;  // fresh constants claimed by student names
  for (const auto& n : req.student_fresh) {
    const Term* t = sub.find("%s" + n);
    if (!t) continue;
    if (t->kind() != TermKind::Constant || !node.fresh.count(t->name())) return std::nullopt;
    if (!taken.insert(t->name()).second) return std::nullopt;
    if (t->name() != n) ren[t->name()] = n;
  }
  std::set<std::string> names = state_names(node.state);
  for (const auto& [from, to] : ren)
    if (names.count(to) && !ren.count(to)) return std::nullopt;
  // Existential binders matched to fresh witnesses take the binder's name
  // when that name is free after the renaming above.
  std::set<std::string> after;
  for (const auto& n : names) {
    auto it = ren.find(n);
    after.insert(it == ren.end() ? n : it->second);
  }
  names = std::move(after);
  for (const auto& [meta, t] : sub.bindings()) {
    if (meta.rfind("%e", 0) != 0) continue;
    std::string binder = meta.substr(2, meta.find('#') - 2);
    if (t.kind() != TermKind::Constant || !node.fresh.count(t.name())) continue;
    if (taken.count(t.name()) || t.name() == binder) continue;
    bool used = names.count(binder) || req.student_fresh.count(binder);
    for (const auto& [from, to] : ren) used = used || to == binder;
    if (used) continue;
    taken.insert(t.name());
    ren[t.name()] = binder;
  }
  return ren;
}

using Emit = std::function<bool(const Substitution&)>;

/// Enumerates ways `f` holds by the hypotheses of `s`: atoms (and anything
/// else) by matching a hypothesis, conjunctions part by part, existentials by
/// a witness, disjunctions by either side. `emit` returns true to stop.
bool establish(const Formula& f, const Sequent& s, const Substitution& sub, int& counter,
               const Emit& emit) {
  for (const auto& h : s.hyps) {
    Substitution next = sub;
    if (match(f, h.formula, next) && emit(next)) return true;
  }
  switch (f.kind()) {
    case FormulaKind::And:
      return establish(f.lhs(), s, sub, counter, [&](const Substitution& mid) {
        return establish(f.rhs(), s, mid, counter, emit);
      });
    case FormulaKind::Or:
      return establish(f.lhs(), s, sub, counter, emit) ||
             establish(f.rhs(), s, sub, counter, emit);
    case FormulaKind::Exists: {
      std::string meta = "%e" + f.name() + "#" + std::to_string(counter++);
      Formula body = replace_identifier(f.body(), f.name(), Term::meta(meta));
      return establish(body, s, sub, counter, emit);
    }
    default:
      return false;
  }
}

Match make_match(const Node& n, const std::string& task, const std::map<std::string, std::string>& ren,
                 const char* interpretation) {
  Match m;
  m.state = n.state;
  m.state.marked = std::min(m.state.index_of(task), m.state.open.empty() ? 0 : m.state.open.size() - 1);
  rename_state(m.state, ren);
  m.trace = n.trace;
  m.renaming = ren;
  m.interpretation = interpretation;
  m.origin = n.origin;
  m.buggy = n.buggy_used;
  return m;
}

void assume_matches(const Node& n, const Request& req, const Sequent& root,
                    std::vector<Match>& out) {
  std::vector<Formula> pats;
  for (const auto& h : req.hyps) pats.push_back(to_pattern(h, req.student_fresh));
  std::optional<Formula> thus;
  if (req.thus) thus = to_pattern(*req.thus, req.student_fresh);
  for (const Sequent* leaf : lineage_leaves(n)) {
    std::function<void(std::size_t, const Substitution&)> go = [&](std::size_t i,
                                                                   const Substitution& sub) {
      if (i == pats.size()) {
        Substitution fin = sub;
        if (thus && !match(*thus, leaf->goal, fin)) return;
        if (auto ren = student_renaming(fin, req, n))
          out.push_back(make_match(n, leaf->label, *ren, "assume"));
        return;
      }
      for (const auto& h : leaf->hyps) {
        if (root.has_hypothesis(h.formula)) continue;
        Substitution next = sub;
        if (match(pats[i], h.formula, next)) go(i + 1, next);
      }
    };
    go(0, Substitution{});
  }
}

void fact_matches(const Node& n, const Request& req, const Context& ctx,
                  std::vector<Match>& out) {
  Formula pat = to_pattern(req.fact, req.student_fresh);
  for (const Sequent* leaf : lineage_leaves(n)) {
    int counter = 0;
    establish(pat, *leaf, Substitution{}, counter, [&](const Substitution& sub) {
      auto ren = student_renaming(sub, req, n);
      if (!ren) return false;
      Match m = make_match(n, leaf->label, *ren, "fact");
      m.state.last_fact = req.fact;
      // A fact that is the goal itself closes the task.
      const Sequent& q = m.state.open[m.state.marked];
      if (static_cast<int>(m.trace.size()) < ctx.limits.depth && alpha_equal(req.fact, q.goal)) {
        for (auto& ax : axiom_closures(q, &m.state.meta_scope)) {
          if (!ax.closing.empty()) continue;
          apply_to_state(m.state, ax);
          m.trace.push_back(ax);
          m.state.marked = 0;
          break;
        }
      }
      out.push_back(std::move(m));
      return true;
    });
  }
}

void subgoal_matches(const Node& n, const Request& req, std::vector<Match>& out,
                     const char* interpretation) {
  std::vector<Formula> goals;
  for (const auto& g : req.goals) goals.push_back(to_pattern(g, req.student_fresh));
  std::vector<Formula> using_;
  for (const auto& u : req.using_) using_.push_back(to_pattern(u, req.student_fresh));
  auto leaves = lineage_leaves(n);
  std::vector<const Sequent*> chosen;
  std::function<void(std::size_t, const Substitution&)> go = [&](std::size_t i,
                                                                 const Substitution& sub) {
    if (i == goals.size()) {
      // `using` facts must hold in the first stated task.
      std::function<bool(std::size_t, const Substitution&)> uses =
          [&](std::size_t j, const Substitution& s2) -> bool {
        if (j == using_.size()) {
          auto ren = student_renaming(s2, req, n);
          if (!ren) return false;
          out.push_back(make_match(n, chosen.front()->label, *ren, interpretation));
          return true;
        }
        int counter = 0;
        return establish(using_[j], *chosen.front(), s2, counter,
                         [&](const Substitution& s3) { return uses(j + 1, s3); });
      };
      uses(0, sub);
      return;
    }
    for (const Sequent* leaf : leaves) {
      if (std::find(chosen.begin(), chosen.end(), leaf) != chosen.end()) continue;
      Substitution next = sub;
      if (!match(goals[i], leaf->goal, next)) continue;
      chosen.push_back(leaf);
      go(i + 1, next);
      chosen.pop_back();
    }
  };
  go(0, Substitution{});
}

void cases_matches(const Node& n, const Request& req, const Sequent& root,
                   std::vector<Match>& out) {
  std::vector<Formula> pats;
  for (const auto& h : req.hyps) pats.push_back(to_pattern(h, req.student_fresh));
  auto leaves = lineage_leaves(n);
  std::vector<const Sequent*> chosen;
  std::function<void(std::size_t, const Substitution&)> go = [&](std::size_t i,
                                                                 const Substitution& sub) {
    if (i == pats.size()) {
      auto ren = student_renaming(sub, req, n);
      if (!ren) return;
      Match m = make_match(n, chosen.front()->label, *ren, "cases");
      for (const Sequent* c : chosen) m.branch_labels.push_back(c->label);
      out.push_back(std::move(m));
      return;
    }
    for (const Sequent* leaf : leaves) {
      if (std::find(chosen.begin(), chosen.end(), leaf) != chosen.end()) continue;
      for (const auto& h : leaf->hyps) {
        if (root.has_hypothesis(h.formula)) continue;
        Substitution next = sub;
        if (!match(pats[i], h.formula, next)) continue;
        chosen.push_back(leaf);
        go(i + 1, next);
        chosen.pop_back();
      }
    }
  };
  go(0, Substitution{});
}

std::vector<Match> filter(const Node& n, const Request& req, const Sequent& root,
                          const Context& ctx) {
  std::vector<Match> out;
  switch (req.want) {
    case Want::Assume:
      assume_matches(n, req, root, out);
      break;
    case Want::Fact: {
      fact_matches(n, req, ctx, out);
      // A bare formula may also name a goal reached backward.
      Request as_goal = req;
      as_goal.goals = {req.fact};
      subgoal_matches(n, as_goal, out, "subgoal");
      for (auto& m : out) m.state.last_fact = req.fact;
      break;
    }
    case Want::Subgoal:
      subgoal_matches(n, req, out, "subgoal");
      break;
    case Want::Subgoals:
      subgoal_matches(n, req, out, "subgoals");
      break;
    case Want::Cases:
      cases_matches(n, req, root, out);
      break;
    case Want::Trivial:
      if (lineage_leaves(n).empty()) {
        Match m = make_match(n, "", {}, "trivial");
        m.state.marked = 0;
        out.push_back(std::move(m));
      }
      break;
    case Want::Qed:
      if (n.state.open.empty()) out.push_back(make_match(n, "", {}, "qed"));
      break;
  }
  return out;
}

/// A fact that instantiates an assertion: strip the fact's universal
/// binders, then match the assertion's body with its binders as metas.
std::optional<const Assertion*> assertion_instance(const Formula& fact, const Theory& theory,
                                                   bool buggy) {
  Formula target = fact;
  while (target.kind() == FormulaKind::Forall)
    target = replace_identifier(target.body(), target.name(),
                                Term::constant("%f" + target.name()));
  for (const auto& a : theory.assertions) {
    if ((a.kind == AssertionKind::Buggy) != buggy) continue;
    Formula pat = a.formula;
    while (pat.kind() == FormulaKind::Forall)
      pat = replace_identifier(pat.body(), pat.name(), Term::meta("%" + pat.name()));
    Substitution sub;
    if (match(pat, target, sub)) return &a;
  }
  return std::nullopt;
}

RuleApplication instance_application(const Assertion& a, const Formula& fact, const Sequent& s) {
  RuleApplication app;
  app.rule = a.label;
  app.concept_name = a.concept_name.empty() ? a.label : a.concept_name;
  app.direction = Direction::Forward;
  app.is_buggy = a.kind == AssertionKind::Buggy;
  app.task = s.label;
  app.fingerprint = sequent_key(s);
  app.produced_hyps = {fact};
  return app;
}

void expand_node(const Node& n, bool buggy_pass, const std::set<std::string>& universe,
                 Context& ctx, std::vector<Node>& same_level, std::vector<Node>& next_level) {
  for (const Sequent* leaf : lineage_leaves(n)) {
    const Sequent s = *leaf;
    std::vector<RuleApplication> apps;
    for (auto& app : applicable_rules(s, ctx.rules, RuleFilter{}, n.state.supply)) {
      if (is_redundant(app, s) || !is_admissible(app, universe)) continue;
      apps.push_back(std::move(app));
    }
    if (buggy_pass && !n.buggy_used) {
      RuleFilter bf;
      bf.normal = false;
      bf.buggy = true;
      for (auto& app : applicable_rules(s, ctx.rules, bf, n.state.supply))
        if (!is_redundant(app, s)) apps.push_back(std::move(app));
    }
    for (auto& app : axiom_closures(s, &n.state.meta_scope)) apps.push_back(std::move(app));
    if (auto split = or_split(s)) apps.push_back(std::move(*split));

    for (auto& app : apps) {
      if (ctx.nodes >= ctx.limits.node_budget) {
        ctx.exhausted = true;
        return;
      }
      ++ctx.nodes;
      Node child = n;
      apply_to_state(child.state, app);
      child.lineage.erase(s.label);
      child.lineage.insert(app.produced_labels.begin(), app.produced_labels.end());
      child.fresh.insert(app.fresh.begin(), app.fresh.end());
      child.trace.push_back(app);
      if (app.is_buggy) {
        child.buggy_used = true;
        same_level.push_back(std::move(child));  // a buggy step is free
      } else {
        next_level.push_back(std::move(child));
      }
    }
  }
}

struct PassResult {
  std::vector<Match> matches;
  bool exhausted = false;
  std::size_t nodes = 0;
};

PassResult search(const std::vector<MentalProofState>& states, const std::vector<Request>& reqs,
                  bool buggy_pass, Context& ctx) {
  PassResult res;
  std::vector<Node> level;
  std::vector<Sequent> roots;
  std::set<std::string> universe;
  for (std::size_t i = 0; i < states.size(); ++i) {
    Node n;
    n.state = states[i];
    n.origin = i;
    const Sequent* marked = n.state.marked_sequent();
    roots.push_back(marked ? *marked : Sequent{});
    if (reqs[i].want == Want::Qed) {
      for (const auto& q : n.state.open) n.lineage.insert(q.label);
    } else if (marked) {
      n.lineage.insert(marked->label);
    }
    for (const Sequent* q : lineage_leaves(n)) {
      auto u = compound_universe(*q);
      universe.insert(u.begin(), u.end());
    }
    const Request& r = reqs[i];
    for (const auto& f : r.hyps) collect_compound_subterms(f, universe);
    if (r.thus) collect_compound_subterms(*r.thus, universe);
    if (r.want == Want::Fact) collect_compound_subterms(r.fact, universe);
    for (const auto& f : r.goals) collect_compound_subterms(f, universe);
    for (const auto& f : r.using_) collect_compound_subterms(f, universe);
    level.push_back(std::move(n));
  }

  std::set<std::string> visited;
  for (const auto& n : level) visited.insert(node_key(n));

  // Facts that instantiate an assertion count as one inference: they join
  // the matches of level 1.
  std::vector<Match> instances;
  if (ctx.limits.depth >= 1) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      const Request& r = reqs[i];
      const Sequent* marked = states[i].marked_sequent();
      if (r.want != Want::Fact || !r.error.empty() || !marked) continue;
      auto a = assertion_instance(r.fact, ctx.theory, buggy_pass);
      if (!a) continue;
      Match m;
      m.state = states[i];
      RuleApplication app = instance_application(**a, r.fact, *marked);
      apply_to_state(m.state, app);
      m.state.marked = m.state.index_of(app.produced_labels.front());
      m.state.last_fact = r.fact;
      m.trace.push_back(app);
      m.interpretation = "fact";
      m.origin = i;
      m.buggy = buggy_pass;
      instances.push_back(std::move(m));
    }
  }

  for (int depth = 0;; ++depth) {
    std::vector<Node> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      const Node& n = level[i];
      const Request& r = reqs[n.origin];
      if (!r.error.empty()) continue;
      if (!buggy_pass || n.buggy_used) {
        auto found = filter(n, r, roots[n.origin], ctx);
        if (!found.empty()) {
          for (auto& m : found) res.matches.push_back(std::move(m));
          continue;  // matched nodes are not expanded
        }
      }
      if (depth >= ctx.limits.depth || ctx.exhausted) continue;
      std::vector<Node> same;
      expand_node(level[i], buggy_pass, universe, ctx, same, next);
      for (auto& c : same)
        if (visited.insert(node_key(c)).second) level.push_back(std::move(c));
    }
    if (depth == 1 || (depth == 0 && res.matches.empty() && next.empty())) {
      for (auto& m : instances) res.matches.push_back(std::move(m));
      instances.clear();
    }
    if (!res.matches.empty()) break;
    if (depth >= ctx.limits.depth || next.empty() || ctx.exhausted) break;
    level.clear();
    for (auto& c : next)
      if (visited.insert(node_key(c)).second) level.push_back(std::move(c));
  }
  if (res.matches.empty() && !instances.empty()) res.matches = std::move(instances);
  res.exhausted = ctx.exhausted;
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------

namespace {

const Assertion* buggy_source(const RuleApplication& app, const Theory& theory) {
  for (const auto& a : theory.assertions)
    if (a.kind == AssertionKind::Buggy &&
        (a.label == app.concept_name || app.rule.rfind(a.label, 0) == 0))
      return &a;
  return nullptr;
}

// Runs each branch's own steps from the branch task, in order.
bool complete_cases(Match& m, const Request& req, const Theory& theory, const RuleBase& rules,
                    const SearchLimits& limits) {
  MentalProofState st = m.state;
  for (std::size_t b = 0; b < req.branches.size(); ++b) {
    std::size_t idx = st.index_of(m.branch_labels[b]);
    if (idx == st.open.size()) return req.branches[b].empty();
    st.marked = idx;
    for (const auto& inner : req.branches[b]) {
      auto r = reconstruct_step({st}, inner, theory, rules, limits);
      if (r.verdict != Verdict::Verified) return false;
      st = r.successors.front();
      m.trace.insert(m.trace.end(), r.traces.front().begin(), r.traces.front().end());
      for (const auto& kv : r.renamings.front()) m.renaming.insert(kv);
    }
  }
  st.marked = 0;
  m.state = std::move(st);
  return true;
}

}  // namespace

ReconstructionResult reconstruct_step(const std::vector<MentalProofState>& states,
                                      const ProofStep& step, const Theory& theory,
                                      const SearchLimits& limits) {
  return reconstruct_step(states, step, theory, RuleBase::from(theory), limits);
}

ReconstructionResult reconstruct_step(const std::vector<MentalProofState>& states,
                                      const ProofStep& step, const Theory& theory,
                                      const RuleBase& rules, const SearchLimits& limits) {
  ReconstructionResult out;
  if (states.empty()) {
    out.diagnostic = "no proof state";
    return out;
  }

  if (const auto* set = step.as<SetStep>()) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      MentalProofState st = states[i];
      std::set<std::string> scope = state_names(st);
      for (const auto& [name, value] : set->bindings) {
        std::set<std::string> metas;
        if (const auto* t = std::get_if<Term>(&value))
          collect_metas(*t, metas);
        else
          collect_metas(std::get<Formula>(value), metas);
        for (const auto& m : metas) st.meta_scope.emplace(m, scope);
        st.abbreviations[name] = value;
      }
      out.successors.push_back(std::move(st));
      out.traces.emplace_back();
      out.renamings.emplace_back();
      out.interpretations.push_back("set");
      out.origins.push_back(i);
    }
    out.verdict = Verdict::Verified;
    out.proof_complete = close_check(out.successors.front());
    return out;
  }

  std::vector<Request> reqs;
  for (const auto& st : states) reqs.push_back(prepare(step, st, theory));
  if (std::all_of(reqs.begin(), reqs.end(), [](const Request& r) { return !r.error.empty(); })) {
    out.diagnostic = reqs.front().error;
    return out;
  }

  Context ctx{theory, rules, limits};
  PassResult first = search(states, reqs, false, ctx);
  out.nodes = ctx.nodes;
  std::vector<Match> matches;
  for (auto& m : first.matches) {
    if (m.interpretation == "cases" &&
        !complete_cases(m, reqs[m.origin], theory, rules, limits))
      continue;
    matches.push_back(std::move(m));
  }

  if (!matches.empty()) {
    std::stable_sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
      return a.trace.size() < b.trace.size();
    });
    std::set<std::string> seen;
    for (auto& m : matches) {
      if (out.successors.size() >= limits.width) break;
      if (!seen.insert(state_key(m.state) + "#" + m.interpretation).second) continue;
      out.successors.push_back(std::move(m.state));
      out.traces.push_back(std::move(m.trace));
      out.renamings.push_back(std::move(m.renaming));
      out.interpretations.push_back(m.interpretation);
      out.origins.push_back(m.origin);
    }
    out.verdict = Verdict::Verified;
    out.proof_complete = close_check(out.successors.front());
    return out;
  }

  bool any_buggy = std::any_of(rules.rules.begin(), rules.rules.end(),
                               [](const InferenceRule& r) { return r.is_buggy; });
  if (any_buggy) {
    Context bctx{theory, rules, limits};
    PassResult second = search(states, reqs, true, bctx);
    out.nodes += bctx.nodes;
    for (const auto& m : second.matches) {
      for (const auto& app : m.trace) {
        if (!app.is_buggy) continue;
        const Assertion* a = buggy_source(app, theory);
        out.verdict = Verdict::Buggy;
        out.buggy_rule = a ? a->label : app.rule;
        out.buggy_message = a ? a->message : "";
        out.diagnostic = render_trace(m.trace);
        return out;
      }
    }
  }
  out.verdict = first.exhausted ? Verdict::ResourceExhausted : Verdict::Rejected;
  std::string err;
  for (const auto& r : reqs)
    if (!r.error.empty()) err = r.error;
  out.diagnostic = err;
  return out;
}

}  // namespace prooftutor
