#include <gtest/gtest.h>

#include "prooftutor/reconstruction.hpp"

namespace pt = prooftutor;

namespace {

const pt::DataDir kData = pt::DataDir::bundled();

struct Dialog {
  pt::Exercise ex;
  pt::Theory theory;
  std::vector<pt::MentalProofState> states;

  explicit Dialog(const std::string& exercise, const std::string& theory_name = "") {
    auto loaded = kData.exercise(exercise, theory_name);
    ex = loaded.first;
    theory = loaded.second;
    states = pt::initial_states(ex);
  }

  pt::ReconstructionResult step(const std::string& text, int depth = 4) {
    pt::SearchLimits limits;
    limits.depth = depth;
    auto r = pt::reconstruct_step(states, pt::parse_step(text, theory.arities), theory, limits);
    if (r.verdict == pt::Verdict::Verified) states = r.successors;
    return r;
  }
};

std::vector<std::string> rules(const std::vector<pt::RuleApplication>& trace) {
  std::vector<std::string> out;
  for (const auto& a : trace) out.push_back(a.rule);
  return out;
}

}  // namespace

TEST(Reconstruct, InitialState) {
  Dialog run("rel-inv-comp");
  ASSERT_EQ(run.states.size(), 1u);
  EXPECT_EQ(pt::render(run.states[0]), "* T0: |- inv(comp(R,S)) = comp(inv(S),inv(R))\n");
}

TEST(Reconstruct, LetPairVerifiedWithTwoInferences) {
  Dialog run("rel-inv-comp");
  auto r = run.step("let (x,y) in inv(comp(R,S))");
  ASSERT_EQ(r.verdict, pt::Verdict::Verified);
  ASSERT_EQ(r.successors.size(), 1u);
  EXPECT_EQ(rules(r.traces[0]), (std::vector<std::string>{"Def-eq-bwd", "Def-subset-bwd"}));
  const auto& st = r.successors[0];
  ASSERT_EQ(st.open.size(), 2u);
  EXPECT_EQ(pt::render(*st.marked_sequent()),
            "(x,y) in inv(comp(R,S)) |- (x,y) in comp(inv(S),inv(R))");
  for (const auto& q : st.open)
    if (&q != st.marked_sequent())
      EXPECT_EQ(pt::render(q), "|- inv(comp(R,S)) supset comp(inv(S),inv(R))");
  EXPECT_FALSE(r.proof_complete);
}

TEST(Reconstruct, DepthOneCannotReachThePair) {
  Dialog run("rel-inv-comp");
  EXPECT_EQ(run.step("let (x,y) in inv(comp(R,S))", 1).verdict, pt::Verdict::Rejected);
}

TEST(Reconstruct, WrongOrderRejected) {
  Dialog run("rel-inv-comp");
  run.step("let (x,y) in inv(comp(R,S))");
  auto r = run.step("hence (y,x) in comp(S,R)");
  EXPECT_EQ(r.verdict, pt::Verdict::Rejected);
  EXPECT_TRUE(r.successors.empty());
}

TEST(Reconstruct, WrongOrderDiagnosedWithBuggyTheory) {
  Dialog run("rel-inv-comp", "relations-buggy");
  run.step("let (x,y) in inv(comp(R,S))");
  auto r = run.step("hence (y,x) in comp(S,R)");
  ASSERT_EQ(r.verdict, pt::Verdict::Buggy);
  EXPECT_EQ(r.buggy_message, "inverse reverses the order of composition");
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(Reconstruct, SubgoalsSplitTheEquation) {
  Dialog run("rel-inv-comp");
  auto r = run.step(
      "subgoals subgoal inv(comp(R,S)) subset comp(inv(S),inv(R)) "
      "subgoal inv(comp(R,S)) supset comp(inv(S),inv(R))");
  ASSERT_EQ(r.verdict, pt::Verdict::Verified);
  EXPECT_EQ(rules(r.traces[0]), std::vector<std::string>{"Def-eq-bwd"});
  EXPECT_EQ(pt::render(r.successors[0].marked_sequent()->goal),
            "inv(comp(R,S)) subset comp(inv(S),inv(R))");
}

TEST(Reconstruct, SingleSubgoalAnnouncement) {
  Dialog run("rel-inv-comp");
  auto r = run.step("subgoal inv(comp(R,S)) subset comp(inv(S),inv(R))");
  ASSERT_EQ(r.verdict, pt::Verdict::Verified);
  EXPECT_EQ(pt::render(r.successors[0].marked_sequent()->goal),
            "inv(comp(R,S)) subset comp(inv(S),inv(R))");
}

TEST(Reconstruct, UnrelatedPairRejected) {
  Dialog run("rel-inv-comp");
  EXPECT_EQ(run.step("let (a,b) in Q").verdict, pt::Verdict::Rejected);
}

TEST(Reconstruct, RestatedGoalNeedsNoInference) {
  Dialog run("rel-inv-comp");
  auto r = run.step("subgoal inv(comp(R,S)) = comp(inv(S),inv(R))");
  ASSERT_EQ(r.verdict, pt::Verdict::Verified);
  EXPECT_TRUE(r.traces[0].empty());
}

TEST(Reconstruct, FullProofCloses) {
  Dialog run("rel-inv-comp");
  const char* steps[] = {"let (x,y) in inv(comp(R,S))",
                         "hence (y,z) in R /\\ (z,x) in S",
                         "hence (x,y) in comp(inv(S),inv(R))",
                         "trivial",
                         "let (x,y) in comp(inv(S),inv(R))",
                         "hence (x,z) in inv(S) /\\ (z,y) in inv(R)",
                         "hence (y,x) in comp(R,S)",
                         "trivial"};
  pt::ReconstructionResult last;
  for (const char* s : steps) {
    last = run.step(s);
    ASSERT_EQ(last.verdict, pt::Verdict::Verified) << s;
  }
  EXPECT_TRUE(last.proof_complete);
  EXPECT_TRUE(pt::close_check(run.states[0]));
}

TEST(Reconstruct, StudentWitnessNameIsKept) {
  Dialog run("rel-inv-comp");
  run.step("let (x,y) in inv(comp(R,S))");
  auto r = run.step("hence (y,w) in R /\\ (w,x) in S");
  ASSERT_EQ(r.verdict, pt::Verdict::Verified);
  const auto& hyps = r.successors[0].marked_sequent()->hyps;
  bool named = false;
  for (const auto& h : hyps) named = named || pt::render(h.formula) == "(y,w) in R";
  EXPECT_TRUE(named);
}

TEST(Reconstruct, UnionDialog) {
  Dialog run("rel-union-comp");
  auto r1 = run.step("forall a b. (a,b) in union(R,S) <-> (a,b) in R \\/ (a,b) in S");
  ASSERT_EQ(r1.verdict, pt::Verdict::Verified);
  auto r2 = run.step("exists x. (a,x) in union(R,S) /\\ (x,b) in T");
  ASSERT_EQ(r2.verdict, pt::Verdict::Verified);
  EXPECT_EQ(rules(r2.traces[0]),
            (std::vector<std::string>{"Def-eq-bwd", "Def-subset-bwd", "Def-comp-fwd"}));
  auto r3 = run.step("hence exists x. (a,x) in union(R,S) /\\ (x,b) in T by Def-comp");
  EXPECT_EQ(r3.verdict, pt::Verdict::Verified);
}

TEST(Reconstruct, RejectedStepLeavesInputUntouched) {
  Dialog run("rel-inv-comp");
  run.step("let (x,y) in inv(comp(R,S))");
  auto before = pt::state_key(run.states[0]);
  run.step("hence (y,x) in comp(S,R)");
  EXPECT_EQ(pt::state_key(run.states[0]), before);
}

TEST(Reconstruct, NodeBudgetReportsExhaustion) {
  Dialog run("rel-inv-comp");
  run.step("let (x,y) in inv(comp(R,S))");
  pt::SearchLimits limits;
  limits.node_budget = 3;
  auto r = pt::reconstruct_step(run.states, pt::parse_step("hence (y,x) in comp(S,R)", run.theory.arities),
                                run.theory, limits);
  EXPECT_EQ(r.verdict, pt::Verdict::ResourceExhausted);
}

TEST(Replay, TraceReproducesSuccessor) {
  Dialog run("rel-inv-comp");
  auto start = run.states;
  auto r = run.step("let (x,y) in inv(comp(R,S))");
  ASSERT_EQ(r.verdict, pt::Verdict::Verified);
  auto replayed = pt::replay(start[r.origins[0]], r.traces[0], r.renamings[0]);
  EXPECT_EQ(pt::state_key(replayed), pt::state_key(r.successors[0]));
}

TEST(Replay, StaleApplicationThrows) {
  Dialog run("rel-inv-comp");
  auto start = run.states;
  auto r = run.step("let (x,y) in inv(comp(R,S))");
  auto trace = r.traces[0];
  std::swap(trace[0], trace[1]);
  EXPECT_THROW(pt::replay(start[0], trace), pt::StaleApplication);
}
