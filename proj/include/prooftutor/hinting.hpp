#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prooftutor/strategy.hpp"
#include "prooftutor/theory.hpp"

namespace prooftutor {

/// 1 strategic, 2 variables, 3 concept question, 4 backward premises,
/// 5 subgoal pointer, 6 forward conclusion, 7 full application,
/// 8 application with the assertion restated. 0 marks the fallback hint.
const char* hint_category_name(int category);

struct HintTemplate {
  int category = 1;
  bool for_strategy = false;
  std::string strategy;   // named strategy; empty = any strategy
  std::string direction;  // inference: backward, forward, close, or empty for any
  std::string text;       // may use {assertion} {goal} {premises} {conclusion}
                          // {variables} {strategy} {subgoal} {statement}
};

struct TemplateSet {
  std::vector<HintTemplate> templates;

  /// Lines `template <category> for <strategy|inference|name> [direction]: "<text>"`.
  static TemplateSet parse(std::string_view text);
  static TemplateSet load(const std::string& path);
};

struct Hint {
  int category = 0;
  std::string text;
  std::string edge;  // label of the plan edge the hint talks about
  int level = 0;     // nesting depth of that edge
  bool strategic = true;
};

/// Fills the template's slots from a plan edge; nullopt when the template
/// does not apply to the edge or a slot has no value.
std::optional<std::string> instantiate_template(const HintTemplate& t, const PlanEdge& edge,
                                                const HierarchicalProofPlan& plan,
                                                const Theory& theory);

/// All hints for a plan, most abstract first: one edge per nesting level,
/// following first children, each with its categories in order. Starts below
/// the root strategy when the root has children.
std::vector<Hint> hint_ladder(const HierarchicalProofPlan& plan, const TemplateSet& templates,
                              const Theory& theory);

/// The hint at a ladder position (the last one once the ladder is used up),
/// or a fallback when there is no plan.
Hint generate_hint(const std::optional<HierarchicalProofPlan>& plan, std::size_t position,
                   const TemplateSet& templates, const Theory& theory);

}  // namespace prooftutor
