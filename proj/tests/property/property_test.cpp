#include <gtest/gtest.h>

#include <random>

#include "oracles/semantics.hpp"
#include "prooftutor/reconstruction.hpp"

namespace pt = prooftutor;

namespace {

const pt::DataDir kData = pt::DataDir::bundled();
const pt::ArityTable kArities = pt::ArityTable::relations();

struct Bound {
  std::string name;
  oracle::Sort sort;
};

// Random ASTs over the relation vocabulary. Element constants a b c,
// relation constants R S T, propositions P W, metas ?m1 ?m2.
struct Gen {
  std::mt19937 rng;
  bool metas = true;  // student scripts never contain them
  explicit Gen(unsigned seed) : rng(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  bool coin(int percent = 50) { return pick(100) < percent; }

  pt::Term element(const std::vector<Bound>& bound) {
    std::vector<std::string> vars;
    for (const auto& b : bound)
      if (b.sort == oracle::Sort::Element) vars.push_back(b.name);
    if (!vars.empty() && coin(60)) return pt::Term::variable(vars[pick(static_cast<int>(vars.size()))]);
    if (metas && coin(10)) return pt::Term::meta("m" + std::to_string(1 + pick(2)));
    static const char* kElems[] = {"a", "b", "c"};
    return pt::Term::constant(kElems[pick(3)]);
  }

  pt::Term relation(int depth, const std::vector<Bound>& bound) {
    if (depth <= 0 || coin(40)) {
      std::vector<std::string> vars;
      for (const auto& b : bound)
        if (b.sort == oracle::Sort::Relation) vars.push_back(b.name);
      if (!vars.empty() && coin(50)) return pt::Term::variable(vars[pick(static_cast<int>(vars.size()))]);
      static const char* kRels[] = {"R", "S", "T"};
      return pt::Term::constant(kRels[pick(3)]);
    }
    switch (pick(4)) {
      case 0: return pt::Term::apply("inv", {relation(depth - 1, bound)});
      case 1: return pt::Term::apply("comp", {relation(depth - 1, bound), relation(depth - 1, bound)});
      case 2: return pt::Term::apply("union", {relation(depth - 1, bound), relation(depth - 1, bound)});
      default: return pt::Term::apply("inter", {relation(depth - 1, bound), relation(depth - 1, bound)});
    }
  }

  pt::Formula atom(std::vector<Bound>& bound, bool propositions = true) {
    switch (pick(propositions ? 5 : 4)) {
      case 0:
      case 1:
        return pt::Formula::atom(
            "in", {pt::Term::pair(element(bound), element(bound)), relation(2, bound)});
      case 2: return pt::Formula::atom("=", {relation(2, bound), relation(2, bound)});
      case 3:
        return pt::Formula::atom(coin() ? "subset" : "supset", {relation(2, bound), relation(2, bound)});
      default: return pt::Formula::atom(coin() ? "P" : "W", {});
    }
  }

  pt::Formula formula(int depth, std::vector<Bound> bound = {}, bool propositions = true) {
    if (depth <= 0 || coin(30)) return atom(bound, propositions);
    switch (pick(7)) {
      case 0: return pt::Formula::negation(formula(depth - 1, bound, propositions));
      case 1:
      case 2:
      case 3:
      case 4: {
        static const pt::FormulaKind kOps[] = {pt::FormulaKind::And, pt::FormulaKind::Or,
                                               pt::FormulaKind::Implies, pt::FormulaKind::Iff};
        auto op = kOps[pick(4)];
        return pt::Formula::binary(op, formula(depth - 1, bound, propositions),
                                   formula(depth - 1, bound, propositions));
      }
      default: {
        static const char* kElemVars[] = {"x", "y", "z", "u"};
        static const char* kRelVars[] = {"X", "Y", "Z"};
        bool rel = coin(30);
        Bound b{rel ? kRelVars[pick(3)] : kElemVars[pick(4)],
                rel ? oracle::Sort::Relation : oracle::Sort::Element};
        bound.push_back(b);
        auto body = formula(depth - 1, bound, propositions);
        return pt::Formula::quantified(coin() ? pt::FormulaKind::Forall : pt::FormulaKind::Exists,
                                       b.name, body);
      }
    }
  }

  std::optional<std::string> by() {
    switch (pick(4)) {
      case 0: return "Def-subset";
      case 1: return "";
      default: return std::nullopt;
    }
  }

  std::vector<std::string> labels() {
    std::vector<std::string> out;
    for (int i = pick(3); i > 0; --i) out.push_back("h" + std::to_string(1 + pick(4)));
    return out;
  }

  // Nested branch steps exclude qed, which must close its block.
  pt::ProofStep step(int depth, bool nested = false) {
    pt::ProofStep s;
    int kind = pick(depth > 0 ? 9 : 8);
    if (nested && kind == 7) kind = 6;
    switch (kind) {
      case 0: {
        pt::AssumeStep a;
        for (int i = 1 + pick(2); i > 0; --i) a.hyps.push_back(formula(2));
        a.from = labels();
        if (coin()) a.thus = formula(2);
        s.node = a;
        break;
      }
      case 1:
      case 2: {
        pt::FactStep f;
        if (coin(75)) {
          f.form = formula(3);
        } else {
          static const char* kTermOps[] = {"=", "subset", "supset"};
          static const char* kFormulaOps[] = {"->", "<->"};
          if (coin())
            f.form = pt::Continuation{kTermOps[pick(3)], relation(2, {})};
          else
            f.form = pt::Continuation{kFormulaOps[pick(2)], formula(2)};
        }
        f.by = by();
        f.from = labels();
        s.node = f;
        break;
      }
      case 3: {
        pt::SubgoalStep g{formula(2), {}, by()};
        for (int i = pick(3); i > 0; --i) g.using_.push_back(formula(1));
        s.node = g;
        break;
      }
      case 4: {
        pt::SubgoalsStep g;
        for (int i = 2 + pick(2); i > 0; --i) {
          pt::SubgoalStep inner{formula(2), {}, std::nullopt};
          if (coin(25)) inner.using_.push_back(formula(1));
          g.goals.push_back(inner);
        }
        g.by = by();
        s.node = g;
        break;
      }
      case 5: {
        pt::SetStep set;
        for (int i = 1 + pick(2); i > 0; --i) {
          std::string name = "A" + std::to_string(i);
          if (coin())
            set.bindings.push_back({name, pt::Term::apply("comp", {relation(1, {}), relation(1, {})})});
          else
            set.bindings.push_back({name, formula(2, {}, false)});
        }
        s.node = set;
        break;
      }
      case 6: s.node = pt::TrivialStep{by(), labels()}; break;
      case 7: s.node = pt::QedStep{}; break;
      default: {
        pt::CasesStep c;
        for (int i = 2; i > 0; --i) {
          pt::CaseBranch b{formula(2), {}};
          for (int k = pick(3); k > 0; --k) b.steps.push_back(step(depth - 1, true));
          c.branches.push_back(b);
        }
        c.by = by();
        c.from = labels();
        s.node = c;
        break;
      }
    }
    return s;
  }
};

}  // namespace

TEST(Property, FormulaRoundTrip) {
  Gen gen(20261016);
  for (int i = 0; i < 1000; ++i) {
    auto f = gen.formula(5);
    std::string text = pt::render(f);
    pt::Formula back;
    ASSERT_NO_THROW(back = pt::parse_formula(text, kArities)) << text;
    ASSERT_EQ(back, f) << text << "\n" << pt::render(back);
  }
}

TEST(Property, ScriptRoundTrip) {
  Gen gen(7);
  gen.metas = false;
  for (int i = 0; i < 1000; ++i) {
    auto s = gen.step(2);
    std::string text = pt::render(s);
    pt::ProofStep back;
    ASSERT_NO_THROW(back = pt::parse_step(text, kArities)) << text;
    ASSERT_EQ(back, s) << text << "\n" << pt::render(back);
  }
}

namespace {

// Small term language for the unification oracle.
pt::Term small_term(Gen& g, int depth, bool metas = true) {
  if (depth <= 0 || g.coin(35)) {
    if (metas && g.coin(50)) return pt::Term::meta(std::string(1, "XYZ"[g.pick(3)]));
    return pt::Term::constant(g.coin() ? "a" : "b");
  }
  switch (g.pick(3)) {
    case 0: return pt::Term::pair(small_term(g, depth - 1, metas), small_term(g, depth - 1, metas));
    case 1: return pt::Term::apply("inv", {small_term(g, depth - 1, metas)});
    default:
      return pt::Term::apply("comp", {small_term(g, depth - 1, metas), small_term(g, depth - 1, metas)});
  }
}

std::vector<pt::Term> ground_universe() {
  std::vector<pt::Term> base{pt::Term::constant("a"), pt::Term::constant("b")};
  std::vector<pt::Term> out = base;
  for (const auto& x : base) {
    out.push_back(pt::Term::apply("inv", {x}));
    for (const auto& y : base) {
      out.push_back(pt::Term::pair(x, y));
      out.push_back(pt::Term::apply("comp", {x, y}));
    }
  }
  return out;
}

pt::Term tuple_of_metas() {
  return pt::Term::pair(pt::Term::meta("X"), pt::Term::pair(pt::Term::meta("Y"), pt::Term::meta("Z")));
}

}  // namespace

TEST(Property, UnifierAgreesWithEnumeration) {
  Gen gen(99);
  auto universe = ground_universe();
  int unifiable = 0;
  for (int i = 0; i < 500; ++i) {
    pt::Term a = small_term(gen, 3), b = small_term(gen, 3);
    auto mgu = pt::unify(a, b);
    std::string ctx = pt::render(a) + " =?= " + pt::render(b);
    if (mgu) {
      ++unifiable;
      ASSERT_EQ(pt::substitute(a, *mgu), pt::substitute(b, *mgu)) << ctx;
      ASSERT_EQ(pt::substitute(pt::substitute(a, *mgu), *mgu), pt::substitute(a, *mgu)) << ctx;
    }
    for (const auto& x : universe)
      for (const auto& y : universe)
        for (const auto& z : universe) {
          pt::Substitution theta;
          theta.set_raw("X", x);
          theta.set_raw("Y", y);
          theta.set_raw("Z", z);
          if (pt::substitute(a, theta) != pt::substitute(b, theta)) continue;
          // A ground unifier exists, so the MGU must exist and be more general.
          ASSERT_TRUE(mgu) << ctx;
          pt::Substitution delta;
          ASSERT_TRUE(pt::match(pt::substitute(tuple_of_metas(), *mgu),
                                pt::substitute(tuple_of_metas(), theta), delta))
              << ctx << " with " << pt::render(theta);
        }
  }
  EXPECT_GT(unifiable, 50);
}

namespace {

using oracle::Sort;

std::map<std::string, Sort> rule_sorts(const pt::InferenceRule& r) {
  std::map<std::string, Sort> out;
  for (const auto& f : r.premises) oracle::note_sorts(f, out);
  for (const auto& f : r.produced) oracle::note_sorts(f, out);
  oracle::note_sorts(r.conclusion, out);
  for (const auto& g : r.goals) {
    for (const auto& h : g.hyps) oracle::note_sorts(h, out);
    oracle::note_sorts(g.goal, out);
  }
  return out;
}

// Calls `body` for every assignment of `metas` in the model's env.
template <class F>
bool forall_assignments(const std::vector<std::string>& metas, std::size_t i,
                        const std::map<std::string, Sort>& sorts, oracle::Model& m, F&& body) {
  if (i == metas.size()) return body();
  Sort s = sorts.count(metas[i]) ? sorts.at(metas[i]) : Sort::Element;
  for (int v = 0; v < oracle::domain_size(s); ++v) {
    m.env[metas[i]] = {s, v};
    if (!forall_assignments(metas, i + 1, sorts, m, body)) return false;
  }
  return true;
}

template <class F>
bool exists_assignment(const std::vector<std::string>& metas, const std::map<std::string, Sort>& sorts,
                       oracle::Model& m, F&& body) {
  return !forall_assignments(metas, 0, sorts, m, [&] { return !body(); });
}

}  // namespace

TEST(Property, SynthesizedRulesAreSoundOnSmallModels) {
  auto rules = pt::RuleBase::from(kData.theory("relations"));
  Gen gen(4242);
  std::map<std::string, int> exercised;
  for (const auto& rule : rules.rules) {
    ASSERT_FALSE(rule.is_buggy);
    auto sorts = rule_sorts(rule);
    std::set<std::string> quantified(rule.witnesses.begin(), rule.witnesses.end());
    quantified.insert(rule.new_metas.begin(), rule.new_metas.end());
    for (const auto& g : rule.goals) quantified.insert(g.eigen.begin(), g.eigen.end());

    for (int trial = 0; trial < 50; ++trial) {
      oracle::Model m = oracle::Model::random(gen.rng);
      pt::Substitution inst;
      for (const auto& [name, sort] : sorts) {
        if (quantified.count(name)) continue;
        if (sort == Sort::Relation) {
          inst.set_raw(name, gen.relation(1, {}));
        } else {
          auto e = [&] { return pt::Term::constant(gen.coin() ? "e0" : "e1"); };
          inst.set_raw(name, sort == Sort::Pair ? pt::Term::pair(e(), e()) : e());
        }
      }
      auto sub = [&](const pt::Formula& f) { return pt::substitute(f, inst); };
      std::string ctx = rule.name + " trial " + std::to_string(trial);

      if (rule.direction == pt::Direction::Forward) {
        bool premises = true;
        for (const auto& p : rule.premises) premises = premises && oracle::holds(sub(p), m);
        if (!premises) continue;
        bool ok = exists_assignment(rule.witnesses, sorts, m, [&] {
          for (const auto& p : rule.produced)
            if (!oracle::holds(sub(p), m)) return false;
          return true;
        });
        ASSERT_TRUE(ok) << ctx;
        ++exercised[rule.name];
      } else if (rule.direction == pt::Direction::Backward) {
        bool subgoals = exists_assignment(rule.new_metas, sorts, m, [&] {
          for (const auto& g : rule.goals) {
            bool holds = forall_assignments(g.eigen, 0, sorts, m, [&] {
              for (const auto& h : g.hyps)
                if (!oracle::holds(sub(h), m)) return true;
              return oracle::holds(sub(g.goal), m);
            });
            if (!holds) return false;
          }
          return true;
        });
        if (!subgoals) continue;
        ASSERT_TRUE(oracle::holds(sub(rule.conclusion), m)) << ctx;
        ++exercised[rule.name];
      }
    }
  }
  for (const auto& rule : rules.rules)
    if (rule.direction != pt::Direction::Close) EXPECT_GT(exercised[rule.name], 0) << rule.name;
}

namespace {

void expect_replays(const std::vector<pt::MentalProofState>& from, const pt::ReconstructionResult& r,
                    const pt::ProofStep& step) {
  if (r.verdict != pt::Verdict::Verified || step.as<pt::CasesStep>()) return;
  for (std::size_t i = 0; i < r.successors.size(); ++i) {
    auto replayed = pt::replay(from[r.origins[i]], r.traces[i], r.renamings[i]);
    EXPECT_EQ(pt::state_key(replayed), pt::state_key(r.successors[i])) << pt::render(step);
  }
}

std::string fingerprint(const pt::ReconstructionResult& r) {
  std::string out = std::string(pt::to_string(r.verdict)) + "|" + r.buggy_message + "|" +
                    r.diagnostic + "|" + std::to_string(r.nodes) + "\n";
  for (std::size_t i = 0; i < r.successors.size(); ++i)
    out += pt::render(r.successors[i]) + pt::render_trace(r.traces[i]) + r.interpretations[i] + "\n";
  return out;
}

std::string run_dialog(const std::string& exercise, const std::string& theory,
                       const std::vector<std::string>& steps) {
  auto [ex, th] = kData.exercise(exercise, theory);
  auto states = pt::initial_states(ex);
  std::string out;
  for (const auto& text : steps) {
    auto step = pt::parse_step(text, th.arities);
    auto r = pt::reconstruct_step(states, step, th);
    expect_replays(states, r, step);
    out += fingerprint(r);
    if (r.verdict == pt::Verdict::Verified) states = r.successors;
  }
  return out;
}

const std::vector<std::pair<std::string, std::vector<std::string>>> kScenarios{
    {"relations", {"let (x,y) in inv(comp(R,S))", "hence (y,x) in comp(S,R)"}},
    {"relations-buggy", {"let (x,y) in inv(comp(R,S))", "hence (y,x) in comp(S,R)"}},
    {"relations",
     {"subgoals subgoal inv(comp(R,S)) subset comp(inv(S),inv(R)) subgoal inv(comp(R,S)) supset "
      "comp(inv(S),inv(R))"}},
    {"relations",
     {"let (x,y) in inv(comp(R,S))", "hence (y,z) in R /\\ (z,x) in S",
      "hence (x,y) in comp(inv(S),inv(R))", "trivial", "let (x,y) in comp(inv(S),inv(R))",
      "hence (x,z) in inv(S) /\\ (z,y) in inv(R)", "hence (y,x) in comp(R,S)", "trivial"}},
};

}  // namespace

TEST(Property, ReconstructionIsDeterministicAndReplays) {
  for (const auto& [theory, steps] : kScenarios)
    EXPECT_EQ(run_dialog("rel-inv-comp", theory, steps), run_dialog("rel-inv-comp", theory, steps));
  std::vector<std::string> union_steps{
      "forall a b. (a,b) in union(R,S) <-> (a,b) in R \\/ (a,b) in S",
      "exists x. (a,x) in union(R,S) /\\ (x,b) in T",
      "hence exists x. (a,x) in union(R,S) /\\ (x,b) in T by Def-comp"};
  EXPECT_EQ(run_dialog("rel-union-comp", "", union_steps),
            run_dialog("rel-union-comp", "", union_steps));
}

TEST(Property, VerifiedFactsHoldInEveryModelOfTheHypotheses) {
  auto [ex, th] = kData.exercise("rel-inv-comp");
  auto states = pt::initial_states(ex);
  states = pt::reconstruct_step(states, pt::parse_step("let (x,y) in inv(comp(R,S))", th.arities), th)
               .successors;
  ASSERT_EQ(states.size(), 1u);
  const pt::Sequent& marked = *states[0].marked_sequent();

  Gen gen(31337);
  int verified = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<Bound> none;
    pt::Term rel = gen.relation(2, none);
    // Occasionally restrict to R and S only so the fact has a chance to follow.
    std::string u = gen.coin() ? "x" : "y", v = gen.coin() ? "x" : "y";
    pt::Formula fact = pt::Formula::atom(
        "in", {pt::Term::pair(pt::Term::constant(u), pt::Term::constant(v)), rel});
    if (i % 4 == 0)
      fact = pt::Formula::atom("in", {pt::Term::pair(pt::Term::constant("y"), pt::Term::constant("x")),
                                      pt::Term::apply("comp", {pt::Term::constant("R"),
                                                               pt::Term::constant("S")})});
    pt::ProofStep step;
    step.node = pt::FactStep{fact, std::nullopt, {}};
    auto r = pt::reconstruct_step(states, step, th);
    expect_replays(states, r, step);
    if (r.verdict != pt::Verdict::Verified) continue;
    ++verified;
    for (int R = 0; R < 16; ++R)
      for (int S = 0; S < 16; ++S)
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y) {
            oracle::Model m;
            m.relations = {{"R", R}, {"S", S}, {"T", 0}};
            m.env["x"] = {Sort::Element, x};
            m.env["y"] = {Sort::Element, y};
            bool hyps = true;
            for (const auto& h : marked.hyps) hyps = hyps && oracle::holds(h.formula, m);
            if (hyps) ASSERT_TRUE(oracle::holds(fact, m)) << pt::render(fact);
          }
  }
  EXPECT_GT(verified, 0);
}
