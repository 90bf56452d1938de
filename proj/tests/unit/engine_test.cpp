#include <gtest/gtest.h>

#include "prooftutor/engine.hpp"

namespace pt = prooftutor;

namespace {

const pt::DataDir kData = pt::DataDir::bundled();

pt::Formula F(const std::string& s) { return pt::parse_formula(s, pt::ArityTable::relations()); }

pt::Sequent seq(std::vector<std::string> hyps, const std::string& goal) {
  pt::Sequent s{"T1", {}, F(goal)};
  int i = 1;
  for (const auto& h : hyps) s.hyps.push_back({"h" + std::to_string(i++), F(h)});
  return s;
}

std::vector<std::string> names(const std::vector<pt::RuleApplication>& apps) {
  std::vector<std::string> out;
  for (const auto& a : apps) out.push_back(a.rule);
  return out;
}

}  // namespace

TEST(Synthesis, RelationsRuleSet) {
  auto rb = pt::RuleBase::from(kData.theory("relations"));
  EXPECT_TRUE(rb.diagnostics.empty());
  ASSERT_NE(rb.find("Def-subset-bwd"), nullptr);
  EXPECT_EQ(rb.find("Def-subset-bwd")->hyp_intro, 1);
  EXPECT_EQ(rb.find("Def-subset-bwd")->direction, pt::Direction::Backward);
  // The witness of a composition is fresh going forward, a new meta going backward.
  EXPECT_EQ(rb.find("Def-comp-fwd")->witnesses.size(), 1u);
  EXPECT_EQ(rb.find("Def-comp-bwd")->new_metas.size(), 1u);
  for (const char* n : {"Def-inv-fwd", "Def-inv-fwd-rev", "Def-inv-bwd", "Def-inv-bwd-rev"})
    EXPECT_NE(rb.find(n), nullptr) << n;
  // Y would be unbound reading Def-union right to left.
  EXPECT_EQ(rb.find("Def-union-fwd-rev"), nullptr);
  for (const auto& r : rb.rules) EXPECT_FALSE(r.is_buggy) << r.name;
}

TEST(Synthesis, BuggyRulesAreMarked) {
  auto rb = pt::RuleBase::from(kData.theory("relations-buggy"));
  int buggy = 0;
  for (const auto& r : rb.rules)
    if (r.is_buggy) {
      ++buggy;
      EXPECT_EQ(r.concept_name, "inv-comp-buggy");
    }
  EXPECT_EQ(buggy, 5);
  ASSERT_NE(rb.find("inv-comp-buggy"), nullptr);
  EXPECT_EQ(rb.find("inv-comp-buggy")->direction, pt::Direction::Close);
}

TEST(Applicable, InitialGoalOnlyDefEq) {
  auto rb = pt::RuleBase::from(kData.theory("relations"));
  auto apps = pt::applicable_rules(seq({}, "inv(comp(R,S)) = comp(inv(S),inv(R))"), rb, {}, {});
  EXPECT_EQ(names(apps), std::vector<std::string>{"Def-eq-bwd"});
}

TEST(Applicable, BackwardSubsetIntroducesPair) {
  auto rb = pt::RuleBase::from(kData.theory("relations"));
  auto s = seq({}, "inv(comp(R,S)) subset comp(inv(S),inv(R))");
  pt::RuleFilter f;
  f.forward = false;
  auto apps = pt::applicable_rules(s, rb, f, {});
  ASSERT_EQ(names(apps), (std::vector<std::string>{"Def-subset-bwd", "Trans-subset-bwd"}));
  pt::Supply supply{2, 1};
  auto out = pt::apply(apps[0], s, supply);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].label, "T2");
  EXPECT_EQ(pt::render(out[0]), "(x,y) in inv(comp(R,S)) |- (x,y) in comp(inv(S),inv(R))");
  EXPECT_EQ(apps[0].fresh, (std::vector<std::string>{"x", "y"}));
}

TEST(Applicable, ForwardCompositionNamesWitness) {
  auto rb = pt::RuleBase::from(kData.theory("relations"));
  auto s = seq({"(y,x) in comp(R,S)"}, "(x,y) in comp(inv(S),inv(R))");
  pt::RuleFilter f;
  f.backward = false;
  f.close = false;
  auto apps = pt::applicable_rules(s, rb, f, {});
  // Def-inv-fwd-rev and Def-inter-fwd-rev also match; admissibility prunes them later.
  ASSERT_EQ(names(apps),
            (std::vector<std::string>{"Def-comp-fwd", "Def-inv-fwd-rev", "Def-inter-fwd-rev"}));
  EXPECT_FALSE(pt::is_admissible(apps[1], pt::compound_universe(s)));
  pt::Supply supply{2, 1};
  auto out = pt::apply(apps[0], s, supply);
  ASSERT_EQ(out[0].hyps.size(), 3u);
  EXPECT_EQ(pt::render(out[0].hyps[1].formula), "(y,z) in R");
  EXPECT_EQ(pt::render(out[0].hyps[2].formula), "(z,x) in S");
}

TEST(Axiom, ClosesOnUnifiableHypothesis) {
  auto s = seq({"(x,y) in R", "(x,y) in S"}, "(x,y) in S");
  auto apps = pt::axiom_closures(s);
  ASSERT_EQ(apps.size(), 1u);
  EXPECT_EQ(apps[0].consumed, std::vector<std::string>{"h2"});
  EXPECT_TRUE(pt::axiom_closures(seq({"(x,y) in R"}, "(y,x) in R")).empty());
}

TEST(Axiom, MetaScopeBlocksEigenvariables) {
  auto s = seq({"(x,y) in R"}, "(x,?m1) in R");
  std::map<std::string, std::set<std::string>> scope{{"m1", {"R", "S"}}};
  EXPECT_EQ(pt::axiom_closures(s).size(), 1u);
  EXPECT_TRUE(pt::axiom_closures(s, &scope).empty());
}

TEST(OrSplit, FirstDisjunction) {
  auto s = seq({"(x,y) in R \\/ (x,y) in S"}, "(x,y) in union(R,S)");
  auto app = pt::or_split(s);
  ASSERT_TRUE(app);
  EXPECT_EQ(app->produced.size(), 2u);
  EXPECT_FALSE(pt::or_split(seq({"(x,y) in R"}, "(x,y) in R")));
}

TEST(Redundancy, ProducedHypothesisAlreadyPresent) {
  auto rb = pt::RuleBase::from(kData.theory("relations"));
  auto s = seq({"(x,y) in inv(R)", "(y,x) in R"}, "(x,y) in S");
  pt::RuleFilter f;
  f.backward = false;
  f.close = false;
  for (const auto& app : pt::applicable_rules(s, rb, f, {}))
    if (app.rule == "Def-inv-fwd") EXPECT_TRUE(pt::is_redundant(app, s));
}

TEST(FreshNames, Sequence) {
  std::set<std::string> avoid{"y"};
  EXPECT_EQ(pt::fresh_name(avoid), "x");
  EXPECT_EQ(pt::fresh_name(avoid), "z");
  EXPECT_EQ(pt::fresh_name(avoid), "x1");
}
