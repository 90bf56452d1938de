#include <gtest/gtest.h>

#include "prooftutor/script.hpp"

namespace pt = prooftutor;

namespace {

const pt::ArityTable kRel = pt::ArityTable::relations();

pt::Formula F(const std::string& s) { return pt::parse_formula(s, kRel); }
pt::ProofStep P(const std::string& s) { return pt::parse_step(s, kRel); }

}  // namespace

TEST(Step, LetIntroducesHypothesis) {
  auto s = P("let (x,y) in inv(comp(R,S))");
  const auto* a = s.as<pt::AssumeStep>();
  ASSERT_NE(a, nullptr);
  ASSERT_EQ(a->hyps.size(), 1u);
  EXPECT_EQ(a->hyps[0], F("(x,y) in inv(comp(R,S))"));
  EXPECT_TRUE(a->from.empty());
  EXPECT_FALSE(a->thus);
}

TEST(Step, Subgoals) {
  auto s = P("subgoals subgoal inv(comp(R,S)) subset comp(inv(S),inv(R)) subgoal inv(comp(R,S)) "
             "supset comp(inv(S),inv(R))");
  const auto* g = s.as<pt::SubgoalsStep>();
  ASSERT_NE(g, nullptr);
  ASSERT_EQ(g->goals.size(), 2u);
  EXPECT_EQ(g->goals[1].goal, F("inv(comp(R,S)) supset comp(inv(S),inv(R))"));
}

TEST(Step, TrivialWithJustification) {
  auto s = P("trivial by Def-inv from h1");
  const auto* t = s.as<pt::TrivialStep>();
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->by, "Def-inv");
  EXPECT_EQ(t->from, std::vector<std::string>{"h1"});
}

TEST(Step, SubgoalUsing) {
  auto s = P("subgoal A subset B using A = B by Def-eq");
  const auto* g = s.as<pt::SubgoalStep>();
  ASSERT_NE(g, nullptr);
  ASSERT_EQ(g->using_.size(), 1u);
  EXPECT_EQ(g->using_[0], F("A = B"));
  EXPECT_EQ(g->by, "Def-eq");
}

TEST(Step, Aliases) {
  EXPECT_EQ(P("let x in A"), P("assume x in A"));
  EXPECT_EQ(P("hence x in A"), P("x in A"));
}

TEST(Step, Relaxations) {
  EXPECT_NO_THROW(P("x in A by"));
  EXPECT_NO_THROW(P("x in A from"));
  EXPECT_NO_THROW(P("assume x in A"));
  EXPECT_NO_THROW(P("assume x in A from h1 thus x in B"));
  EXPECT_EQ(pt::step_by(P("x in A by")), std::nullopt);
}

TEST(Step, Continuation) {
  auto s = P(".= comp(S,R) by Def-inv");
  const auto* f = s.as<pt::FactStep>();
  ASSERT_NE(f, nullptr);
  const auto* c = std::get_if<pt::Continuation>(&f->form);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->op, "=");
  EXPECT_EQ(pt::render(s), ".= comp(S,R) by Def-inv");
}

TEST(Step, CasesAndSet) {
  auto s = P("cases x in A { trivial } x in B { hence x in C; trivial } from h1");
  const auto* c = s.as<pt::CasesStep>();
  ASSERT_NE(c, nullptr);
  ASSERT_EQ(c->branches.size(), 2u);
  EXPECT_EQ(c->branches[1].steps.size(), 2u);
  EXPECT_EQ(P(pt::render(s)), s);
  auto t = P("set Q = comp(R,S), f = ?X in Q");
  const auto* st = t.as<pt::SetStep>();
  ASSERT_NE(st, nullptr);
  ASSERT_EQ(st->bindings.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<pt::Term>(st->bindings[0].second));
  EXPECT_TRUE(std::holds_alternative<pt::Formula>(st->bindings[1].second));
}

TEST(Step, Errors) {
  EXPECT_THROW(P("thus x in A"), pt::ParseError);
  EXPECT_THROW(P("let"), pt::ParseError);
  EXPECT_THROW(P("let x in ?A"), pt::ParseError);
}

TEST(Script, WrappedProof) {
  auto s = pt::parse_script("proof let (x,y) in inv(comp(R,S)); hence (y,x) in comp(R,S) qed", kRel);
  ASSERT_EQ(s.steps.size(), 2u);
  EXPECT_NE(s.steps[1].as<pt::FactStep>(), nullptr);
  EXPECT_EQ(s.spans[0].begin, 6u);
  EXPECT_EQ(s.spans[0].end, std::string("proof let (x,y) in inv(comp(R,S))").size());
}

TEST(Script, Empty) {
  EXPECT_TRUE(pt::parse_script("", kRel).steps.empty());
  EXPECT_TRUE(pt::parse_script("proof qed", kRel).steps.empty());
}

TEST(Script, NewlineSeparated) {
  auto s = pt::parse_script("let x in A\nhence x in B\ntrivial\nqed\n", kRel);
  ASSERT_EQ(s.steps.size(), 4u);
  EXPECT_NE(s.steps[3].as<pt::QedStep>(), nullptr);
  EXPECT_THROW(pt::parse_script("qed\nlet x in A", kRel), pt::ParseError);
}
