#include <gtest/gtest.h>

#include "prooftutor/granularity.hpp"
#include "prooftutor/reconstruction.hpp"

namespace pt = prooftutor;
using G = pt::Granularity;

namespace {

const pt::DataDir kData = pt::DataDir::bundled();

pt::GranularityFeatures feat(int total, int mcu, int hypintro = 0, int relations = 0,
                             int unmastered = 0) {
  pt::GranularityFeatures f;
  f.total = total;
  f.mcu = mcu;
  f.hypintro = hypintro;
  f.relations = relations;
  f.unmastered = unmastered;
  return f;
}

// The figure's tree written out by hand, as an independent reference.
G figure_oracle(const pt::GranularityFeatures& f) {
  if (f.total <= 1) return G::Appropriate;
  if (f.mcu == 0) return G::Appropriate;
  if (f.mcu <= 2) return f.hypintro == 0 ? G::TooSmall : G::Appropriate;
  if (f.mcu == 3) return f.relations <= 2 ? G::Appropriate : G::TooBig;
  return G::TooBig;
}

pt::RuleApplication app(const std::string& concept_name, int hyp_intro = 0) {
  pt::RuleApplication a;
  a.rule = concept_name + "-bwd";
  a.concept_name = concept_name;
  a.hyp_intro = hyp_intro;
  return a;
}

}  // namespace

TEST(Classifier, FigureCases) {
  auto c = pt::GranularityClassifier::load(kData.classifier_path("paper-fig"));
  EXPECT_EQ(c.classify(feat(1, 0)), G::Appropriate);
  EXPECT_EQ(c.classify(feat(2, 2, 0)), G::TooSmall);
  EXPECT_EQ(c.classify(feat(2, 4)), G::TooBig);
  EXPECT_EQ(c.classify(feat(2, 3, 0, 3)), G::TooBig);
}

TEST(Classifier, FigureMatchesReferenceEverywhere) {
  auto c = pt::GranularityClassifier::load(kData.classifier_path("paper-fig"));
  for (int total = 0; total <= 6; ++total)
    for (int mcu = 0; mcu <= 6; ++mcu)
      for (int hyp = 0; hyp <= 2; ++hyp)
        for (int rel = 0; rel <= 5; ++rel) {
          auto f = feat(total, mcu, hyp, rel);
          ASSERT_EQ(c.classify(f), figure_oracle(f))
              << total << " " << mcu << " " << hyp << " " << rel;
        }
}

TEST(Classifier, RuleList) {
  auto c = pt::GranularityClassifier::load(kData.classifier_path("cautious"));
  EXPECT_EQ(c.classify(feat(4, 0)), G::TooBig);
  EXPECT_EQ(c.classify(feat(2, 2, 0)), G::TooSmall);
  EXPECT_EQ(c.classify(feat(2, 2, 1)), G::Appropriate);
}

TEST(Classifier, Linear) {
  auto c = pt::GranularityClassifier::parse(
      "(linear (class appropriate (bias 1)) (class too_big (bias 0) (total 1)))");
  EXPECT_EQ(c.classify(feat(0, 0)), G::Appropriate);
  EXPECT_EQ(c.classify(feat(3, 0)), G::TooBig);
}

TEST(Classifier, RejectsGapsOverlapsAndUnknowns) {
  EXPECT_THROW(pt::GranularityClassifier::parse(
                   "(node total ((<= 1) (leaf appropriate)) ((> 2) (leaf too_big)))"),
               pt::ClassifierError);
  EXPECT_THROW(pt::GranularityClassifier::parse(
                   "(node total ((<= 2) (leaf appropriate)) ((>= 2) (leaf too_big)))"),
               pt::ClassifierError);
  EXPECT_THROW(pt::GranularityClassifier::parse("(node size ((>= 0) (leaf appropriate)))"),
               pt::ClassifierError);
  EXPECT_THROW(pt::GranularityClassifier::parse("(leaf huge)"), pt::ClassifierError);
  EXPECT_THROW(pt::GranularityClassifier::parse("(leaf appropriate"), pt::ClassifierError);
}

TEST(Features, CountsAgainstTheModel) {
  pt::StudentModel m;
  m.concepts["Def-eq"] = {true, 3};
  std::vector<pt::RuleApplication> trace{app("Def-eq"), app("Def-subset", 1), app("Def-inv"),
                                         app("Def-inv")};
  auto step = pt::parse_step("let (x,y) in R", pt::ArityTable::relations());
  auto f = pt::extract_features(trace, m, step);
  EXPECT_EQ(f.total, 4);
  EXPECT_EQ(f.mcu, 1);
  EXPECT_EQ(f.unmastered, 2);
  EXPECT_EQ(f.hypintro, 1);
  EXPECT_EQ(f.relations, 3);
  EXPECT_FALSE(f.verbalized);
  auto by = pt::parse_step("hence (x,y) in R by Def-inv", pt::ArityTable::relations());
  EXPECT_TRUE(pt::extract_features(trace, m, by).verbalized);
}

TEST(Features, UnknownNameThrows) {
  EXPECT_THROW(pt::GranularityFeatures{}.get("size"), std::out_of_range);
  EXPECT_TRUE(pt::GranularityFeatures::known("relations"));
}

TEST(StudentModel, MasteryAtThresholdAndMonotone) {
  pt::StudentModel m;
  std::vector<pt::RuleApplication> trace{app("Def-inv"), app("Def-inv")};
  m = pt::update_student_model(m, trace);
  EXPECT_EQ(m.concepts["Def-inv"].correct_uses, 1);  // once per step
  m = pt::update_student_model(m, trace);
  EXPECT_FALSE(m.mastered("Def-inv"));
  m = pt::update_student_model(m, trace);
  EXPECT_TRUE(m.mastered("Def-inv"));
  auto before = m;
  m = pt::update_student_model(m, {});
  EXPECT_EQ(m, before);
  EXPECT_FALSE(m.mastered("Def-comp"));
}

TEST(Granularity, Names) {
  for (G g : {G::Appropriate, G::TooSmall, G::TooBig})
    EXPECT_EQ(pt::granularity_from_string(pt::to_string(g)), g);
}
