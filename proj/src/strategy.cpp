#include "prooftutor/strategy.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace prooftutor {

bool is_builtin_strategy(const std::string& name) {
  return name == "deepaxiom" || name == "or-l";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Tok {
  std::string text;
  std::size_t offset;
};

std::vector<Tok> strategy_tokens(std::string_view text) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == ',' || c == '(' || c == ')' || c == '*') {
      out.push_back({std::string(1, c), i++});
    } else {
      std::size_t b = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
             text[i] != ',' && text[i] != '(' && text[i] != ')' && text[i] != '#')
        ++i;
      out.push_back({std::string(text.substr(b, i - b)), b});
    }
  }
  return out;
}

class StrategyParser {
 public:
  explicit StrategyParser(std::vector<Tok> toks) : toks_(std::move(toks)) {}

  std::vector<std::pair<std::string, StrategyExpr>> blocks() {
    std::vector<std::pair<std::string, StrategyExpr>> out;
    while (pos_ < toks_.size()) {
      expect("strategy");
      if (at_end()) fail("expected strategy name");
      std::string name = toks_[pos_++].text;
      out.emplace_back(name, seq());
    }
    return out;
  }

 private:
  bool at_end() const { return pos_ >= toks_.size(); }
  bool peek(const char* w) const { return !at_end() && toks_[pos_].text == w; }
  [[noreturn]] void fail(const std::string& what) const {
    std::size_t off = at_end() ? (toks_.empty() ? 0 : toks_.back().offset) : toks_[pos_].offset;
    throw ParseError(what, off);
  }
  void expect(const char* w) {
    if (!peek(w)) fail(std::string("expected '") + w + "'");
    ++pos_;
  }

  StrategyExpr seq() {
    StrategyExpr first = unary();
    if (!peek("then")) return first;
    ++pos_;
    StrategyExpr e;
    e.kind = StrategyExpr::Kind::Seq;
    e.children = {std::move(first), seq()};
    return e;
  }

  StrategyExpr unary() {
    if (at_end() || peek("strategy")) fail("expected strategy expression");
    StrategyExpr e;
    if (peek("try") || peek("repeat")) {
      e.kind = toks_[pos_++].text == "try" ? StrategyExpr::Kind::Try : StrategyExpr::Kind::Repeat;
      e.children.push_back(unary());
      return e;
    }
    if (peek("first")) {
      ++pos_;
      e.kind = StrategyExpr::Kind::First;
      e.children.push_back(unary());
      while (peek(",")) {
        ++pos_;
        e.children.push_back(unary());
      }
      return e;
    }
    if (peek("use")) {
      ++pos_;
      expect("select");
      expect("*");
      expect("from");
      if (at_end()) fail("expected assertion set");
      e.kind = StrategyExpr::Kind::UseSelect;
      e.name = toks_[pos_++].text;
      expect("as");
      if (peek("backward")) {
        e.direction = Direction::Backward;
      } else if (peek("forward")) {
        e.direction = Direction::Forward;
      } else {
        fail("expected 'backward' or 'forward'");
      }
      ++pos_;
      return e;
    }
    if (peek("(")) {
      ++pos_;
      e = seq();
      expect(")");
      return e;
    }
    static const std::set<std::string> kReserved = {"then", ",", ")", "*", "select",
                                                    "from", "as"};
    if (kReserved.count(toks_[pos_].text)) fail("unexpected '" + toks_[pos_].text + "'");
    e.name = toks_[pos_++].text;
    e.kind = is_builtin_strategy(e.name) ? StrategyExpr::Kind::Builtin : StrategyExpr::Kind::Call;
    return e;
  }

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
};

void check_refs(const StrategyExpr& e, const StrategyTable& table) {
  if (e.kind == StrategyExpr::Kind::Call && !table.count(e.name))
    throw StrategyError("unknown strategy '" + e.name + "'");
  if (e.kind == StrategyExpr::Kind::UseSelect && e.name != "definitions" &&
      e.name != "theorems" && e.name != "assertions")
    throw StrategyError("unknown assertion set '" + e.name + "'");
  for (const auto& c : e.children) check_refs(c, table);
}

// Calls reachable without passing through a repeat.
void direct_calls(const StrategyExpr& e, std::set<std::string>& out) {
  if (e.kind == StrategyExpr::Kind::Repeat) return;
  if (e.kind == StrategyExpr::Kind::Call) out.insert(e.name);
  for (const auto& c : e.children) direct_calls(c, out);
}

}  // namespace

StrategyTable parse_strategies(std::string_view text) {
  StrategyTable table;
  for (auto& [name, e] : StrategyParser(strategy_tokens(text)).blocks()) {
    if (table.count(name)) throw StrategyError("strategy '" + name + "' defined twice");
    table.emplace(name, std::move(e));
  }
  for (const auto& [name, e] : table) check_refs(e, table);
  // Cycle check over calls not guarded by repeat.
  std::map<std::string, int> mark;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    if (mark[n] == 1) throw StrategyError("strategy '" + n + "' calls itself");
    if (mark[n] == 2) return;
    mark[n] = 1;
    std::set<std::string> calls;
    direct_calls(table.at(n), calls);
    for (const auto& c : calls) visit(c);
    mark[n] = 2;
  };
  for (const auto& [name, e] : table) visit(name);
  return table;
}

std::string render(const StrategyExpr& e) {
  using K = StrategyExpr::Kind;
  switch (e.kind) {
    case K::Call:
    case K::Builtin:
      return e.name;
    case K::Seq: {
      const StrategyExpr& l = e.children[0];
      std::string left = l.kind == K::Seq ? "(" + render(l) + ")" : render(l);
      return left + " then " + render(e.children[1]);
    }
    case K::Try:
    case K::Repeat: {
      const StrategyExpr& c = e.children[0];
      std::string inner = c.kind == K::Seq ? "(" + render(c) + ")" : render(c);
      return std::string(e.kind == K::Try ? "try " : "repeat ") + inner;
    }
    case K::First: {
      std::string out = "first ";
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        const StrategyExpr& c = e.children[i];
        bool wrap = c.kind == K::Seq || c.kind == K::First;
        out += (i ? ", " : "") + (wrap ? "(" + render(c) + ")" : render(c));
      }
      return out;
    }
    case K::UseSelect:
      return "use select * from " + e.name + " as " +
             (e.direction == Direction::Forward ? "forward" : "backward");
  }
  return "";
}

// ---------------------------------------------------------------------------
// Execution

namespace {

struct Outcome {
  bool ok = false;
  bool progress = false;
  std::vector<std::string> targets;
  std::vector<PlanEdge> edges;
};

Outcome failure() { return {}; }

class Executor {
 public:
  Executor(const RuleBase& rules, const StrategyTable& table, std::size_t budget, Supply supply,
           const Sequent& root)
      : rules_(rules), table_(table), budget_(budget), supply_(supply) {
    universe_ = compound_universe(root);
    add_task(root);
  }

  Outcome run(const StrategyExpr& e, const std::string& task) {
    using K = StrategyExpr::Kind;
    if (exhausted_) return failure();
    switch (e.kind) {
      case K::Call: {
        Outcome body = run(table_.at(e.name), task);
        if (!body.ok || !body.progress) return failure();
        PlanEdge edge;
        edge.strategy = true;
        edge.label = e.name;
        edge.source = task;
        edge.targets = body.targets;
        edge.children = std::move(body.edges);
        Outcome out{true, true, edge.targets, {}};
        out.edges.push_back(std::move(edge));
        return out;
      }
      case K::Seq: {
        Outcome first = run(e.children[0], task);
        if (!first.ok) return failure();
        Outcome out{true, first.progress, {}, std::move(first.edges)};
        for (const auto& t : first.targets) {
          Outcome second = run(e.children[1], t);
          if (!second.ok) return failure();
          out.progress = out.progress || second.progress;
          out.targets.insert(out.targets.end(), second.targets.begin(), second.targets.end());
          for (auto& edge : second.edges) out.edges.push_back(std::move(edge));
        }
        return out;
      }
      case K::Try: {
        Outcome r = run(e.children[0], task);
        if (r.ok) return r;
        return {true, false, {task}, {}};
      }
      case K::First:
        for (const auto& alt : e.children) {
          Outcome r = run(alt, task);
          if (r.ok && r.progress) return r;
          if (exhausted_) break;
        }
        return failure();
      case K::Repeat:
        return repeat(e.children[0], task);
      case K::UseSelect:
        return use_select(e, task);
      case K::Builtin:
        return builtin(e.name, task);
    }
    return failure();
  }

  std::map<std::string, Sequent> tasks;
  std::vector<Formula> hypotheses;
  std::size_t used = 0;
  bool exhausted() const { return exhausted_; }

 private:
  void add_task(const Sequent& s) {
    tasks[s.label] = s;
    seen_.insert(sequent_key(s));
    for (const auto& h : s.hyps)
      if (std::none_of(hypotheses.begin(), hypotheses.end(),
                       [&](const Formula& f) { return alpha_equal(f, h.formula); }))
        hypotheses.push_back(h.formula);
  }

  bool spend() {
    if (used >= budget_) {
      exhausted_ = true;
      return false;
    }
    ++used;
    return true;
  }

  PlanEdge inference_edge(RuleApplication& app, const Sequent& s) {
    std::vector<Sequent> out = apply(app, s, supply_);
    for (const auto& q : out) add_task(q);
    PlanEdge edge;
    edge.label = app.rule;
    edge.source = s.label;
    edge.targets = app.produced_labels;
    edge.app = app;
    return edge;
  }

  Outcome repeat(const StrategyExpr& body, const std::string& task) {
    Outcome out{false, false, {task}, {}};
    while (!exhausted_) {
      bool step = false;
      std::vector<std::string> next;
      for (const auto& t : out.targets) {
        Outcome r = run(body, t);
        if (r.ok && r.progress) {
          step = true;
          next.insert(next.end(), r.targets.begin(), r.targets.end());
          for (auto& edge : r.edges) out.edges.push_back(std::move(edge));
        } else {
          next.push_back(t);
        }
      }
      out.targets = std::move(next);
      if (!step) break;
      out.ok = out.progress = true;
    }
    return out;
  }

  RuleFilter select_filter(const StrategyExpr& e) const {
    RuleFilter f;
    f.forward = e.direction == Direction::Forward;
    f.backward = e.direction == Direction::Backward;
    f.close = false;
    if (e.name == "definitions") f.kind = AssertionKind::Definition;
    if (e.name == "theorems") f.kind = AssertionKind::Theorem;
    return f;
  }

  Outcome use_select(const StrategyExpr& e, const std::string& task) {
    Sequent cur = tasks.at(task);
    // A task whose goal is already a hypothesis is left to closing.
    if (cur.has_hypothesis(cur.goal)) return failure();
    std::vector<RuleApplication> snapshot;
    for (auto& app : applicable_rules(cur, rules_, select_filter(e), supply_)) {
      if (!app.new_metas.empty() || is_redundant(app, cur) || !is_admissible(app, universe_))
        continue;
      // Backward steps that lead back to an earlier task only go round in circles.
      if (std::any_of(app.produced.begin(), app.produced.end(),
                      [&](const Sequent& q) { return seen_.count(sequent_key(q)); }))
        continue;
      snapshot.push_back(std::move(app));
    }
    Outcome out{false, false, {task}, {}};
    if (e.direction == Direction::Backward) {
      if (snapshot.empty() || !spend()) return failure();
      PlanEdge edge = inference_edge(snapshot.front(), cur);
      out = {true, true, edge.targets, {}};
      out.edges.push_back(std::move(edge));
      return out;
    }
    for (const auto& planned : snapshot) {
      if (cur.has_hypothesis(cur.goal)) break;
      const InferenceRule* rule = rules_.find(planned.rule);
      RuleApplication app = forward_application(*rule, cur, planned.consumed, planned.subst);
      if (is_redundant(app, cur)) continue;
      if (!spend()) break;
      PlanEdge edge = inference_edge(app, cur);
      cur = tasks.at(edge.targets.front());
      out.edges.push_back(std::move(edge));
      out.ok = out.progress = true;
    }
    if (!out.ok) return failure();
    out.targets = {cur.label};
    return out;
  }

  Outcome builtin(const std::string& name, const std::string& task) {
    const Sequent cur = tasks.at(task);
    std::optional<RuleApplication> app;
    if (name == "deepaxiom") {
      auto closes = axiom_closures(cur);
      if (!closes.empty()) app = closes.front();
    } else {
      app = or_split(cur);
    }
    if (!app || !spend()) return failure();
    PlanEdge edge = inference_edge(*app, cur);
    Outcome out{true, true, edge.targets, {}};
    out.edges.push_back(std::move(edge));
    return out;
  }

  const RuleBase& rules_;
  const StrategyTable& table_;
  std::size_t budget_;
  Supply supply_;
  std::set<std::string> universe_;
  std::set<std::string> seen_;
  bool exhausted_ = false;
};

Supply supply_after(const Sequent& task) {
  Supply s;
  if (task.label.size() > 1 && task.label[0] == 'T' &&
      std::all_of(task.label.begin() + 1, task.label.end(),
                  [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    s.next_task = std::stoi(task.label.substr(1)) + 1;
  return s;
}

}  // namespace

StrategyRun run_strategy(const std::string& name, const Sequent& task, const Theory& theory,
                         std::size_t budget, std::optional<Supply> supply) {
  RuleBase rules = RuleBase::from(theory);
  StrategyTable table = parse_strategies(theory.strategies);
  return run_strategy(name, task, theory, rules, table, budget, supply);
}

StrategyRun run_strategy(const std::string& name, const Sequent& task, const Theory&,
                         const RuleBase& rules, const StrategyTable& table, std::size_t budget,
                         std::optional<Supply> supply) {
  StrategyExpr call;
  if (is_builtin_strategy(name)) {
    call.kind = StrategyExpr::Kind::Builtin;
  } else if (table.count(name)) {
    call.kind = StrategyExpr::Kind::Call;
  } else {
    throw StrategyError("unknown strategy '" + name + "'");
  }
  call.name = name;

  StrategyRun run;
  if (budget == 0) {
    run.budget_exhausted = true;
    return run;
  }
  Supply start = supply ? *supply : supply_after(task);
  Executor ex(rules, table, budget, start, task);
  Outcome out = ex.run(call, task.label);
  run.expansions = ex.used;
  run.budget_exhausted = ex.exhausted();
  run.hypotheses = ex.hypotheses;
  if (!out.ok || out.edges.size() != 1 || run.budget_exhausted) return run;

  HierarchicalProofPlan plan;
  plan.root = task.label;
  plan.tasks = std::move(ex.tasks);
  plan.supply = start;
  plan.top = std::move(out.edges.front());
  plan.open = plan.top.targets;
  run.plan = std::move(plan);
  return run;
}

// ---------------------------------------------------------------------------
// Flattening

namespace {

PlanEdge leaf_copy(const PlanEdge& e) {
  PlanEdge out = e;
  out.children.clear();
  return out;
}

void at_level(const PlanEdge& e, int depth, int level, std::vector<PlanEdge>& out) {
  if (depth == level || e.children.empty()) {
    out.push_back(leaf_copy(e));
    return;
  }
  for (const auto& c : e.children) at_level(c, depth + 1, level, out);
}

void selecting(const PlanEdge& e, const std::set<std::string>& labels, std::vector<PlanEdge>& out) {
  if (labels.count(e.label) || e.children.empty()) {
    out.push_back(leaf_copy(e));
    return;
  }
  for (const auto& c : e.children) selecting(c, labels, out);
}

int depth_of(const PlanEdge& e) {
  int d = 0;
  for (const auto& c : e.children) d = std::max(d, 1 + depth_of(c));
  return d;
}

void render_edge(const PlanEdge& e, int indent, std::ostringstream& out) {
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << (e.strategy ? "[" : "")
      << e.label << (e.strategy ? "]" : "") << " " << e.source << " ->";
  if (e.targets.empty()) out << " closed";
  for (const auto& t : e.targets) out << " " << t;
  out << "\n";
  for (const auto& c : e.children) render_edge(c, indent + 1, out);
}

}  // namespace

std::vector<PlanEdge> flatten_at_level(const HierarchicalProofPlan& plan, int level) {
  if (level < 0) throw std::invalid_argument("plan level must be non-negative");
  std::vector<PlanEdge> out;
  at_level(plan.top, 0, level, out);
  return out;
}

std::vector<PlanEdge> flatten_selecting(const HierarchicalProofPlan& plan,
                                        const std::set<std::string>& labels) {
  std::vector<PlanEdge> out;
  selecting(plan.top, labels, out);
  return out;
}

std::vector<PlanEdge> flatten_fully(const HierarchicalProofPlan& plan) {
  return flatten_at_level(plan, plan_depth(plan));
}

int plan_depth(const HierarchicalProofPlan& plan) { return depth_of(plan.top); }

MentalProofState replay_plan(const HierarchicalProofPlan& plan) {
  MentalProofState st;
  st.open.push_back(plan.tasks.at(plan.root));
  st.supply = plan.supply;
  for (const auto& e : flatten_fully(plan)) {
    if (!e.app) throw StaleApplication("strategy edge without refinement: " + e.label);
    RuleApplication app = *e.app;
    apply_to_state(st, app);
    if (app.produced_labels != e.targets)
      throw StaleApplication("replay of " + e.label + " produced different tasks");
  }
  return st;
}

std::string render(const HierarchicalProofPlan& plan) {
  std::ostringstream out;
  render_edge(plan.top, 0, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Relevance

const char* to_string(Relevance r) {
  switch (r) {
    case Relevance::Relevant: return "relevant";
    case Relevance::Irrelevant: return "irrelevant";
    case Relevance::Unknown: return "unknown";
  }
  return "?";
}

namespace {

// Parts a hypothesis is matched through: existential binders become metas and
// conjunctions split.
void relevance_parts(const Formula& f, int& fresh, std::vector<Formula>& out) {
  if (f.kind() == FormulaKind::Exists) {
    relevance_parts(replace_identifier(f.body(), f.name(), Term::meta("%q" + std::to_string(fresh++))),
                    fresh, out);
  } else if (f.kind() == FormulaKind::And) {
    relevance_parts(f.lhs(), fresh, out);
    relevance_parts(f.rhs(), fresh, out);
  } else {
    out.push_back(f);
  }
}

Formula strip_foralls(Formula f, const std::string& prefix) {
  for (int i = 0; f.kind() == FormulaKind::Forall; ++i)
    f = replace_identifier(f.body(), f.name(), Term::meta(prefix + std::to_string(i)));
  return f;
}

}  // namespace

Relevance check_relevance(const MentalProofState& state, const std::vector<Formula>& hyps,
                          const std::string& strategy, const Theory& theory,
                          std::size_t budget) {
  const Sequent* task = state.marked_sequent();
  if (!task || budget == 0) return Relevance::Unknown;
  StrategyRun run = run_strategy(strategy, *task, theory, budget, state.supply);

  std::set<std::string> known;
  for (const auto& q : state.open) {
    auto n = sequent_names(q);
    known.insert(n.begin(), n.end());
  }
  // Names the strategy invents are generalised too.
  std::vector<Formula> targets;
  for (const auto& f : run.hypotheses) {
    std::set<std::string> invented;
    collect_free_names(f, invented);
    Formula target = f;
    for (const auto& n : invented)
      if (!known.count(n)) target = replace_identifier(target, n, Term::meta("%h" + n));
    targets.push_back(target);
  }
  // A universal statement is relevant when it instantiates an assertion the plan applies.
  std::vector<Formula> used;
  if (run.plan)
    for (const auto& e : flatten_fully(*run.plan))
      if (const Assertion* a = theory.find(e.app->concept_name))
        used.push_back(strip_foralls(a->formula, "%a"));

  int fresh = 0;
  for (const auto& h : hyps) {
    std::set<std::string> names;
    collect_free_names(h, names);
    Formula pattern = h;
    for (const auto& n : names)
      if (!known.count(n)) pattern = replace_identifier(pattern, n, Term::meta("%g" + n));
    std::vector<Formula> parts;
    relevance_parts(pattern, fresh, parts);
    for (const auto& part : parts) {
      bool found = false;
      if (part.kind() == FormulaKind::Forall) {
        Formula body = strip_foralls(part, "%u");
        for (const auto& u : used)
          if (unify(body, u)) found = true;
      } else {
        for (const auto& t : targets)
          if (unify(part, t)) found = true;
      }
      if (!found) return run.budget_exhausted ? Relevance::Unknown : Relevance::Irrelevant;
    }
  }
  return Relevance::Relevant;
}

}  // namespace prooftutor
