#include "prooftutor/hinting.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

namespace prooftutor {

const char* hint_category_name(int category) {
  static constexpr const char* kNames[] = {"none",
                                           "strategic",
                                           "variables",
                                           "concept-question",
                                           "backward-premises",
                                           "subgoal-pointer",
                                           "forward-conclusion",
                                           "full-application",
                                           "application-with-assertion"};
  return category >= 0 && category <= 8 ? kNames[category] : "?";
}

TemplateSet TemplateSet::parse(std::string_view text) {
  static const std::regex line_re(
      R"re(^\s*template\s+([1-8])\s+for\s+([A-Za-z0-9_-]+)(?:\s+(backward|forward|close))?\s*:\s*"(.*)"\s*$)re");
  TemplateSet out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    std::size_t here = offset;
    offset += line.size() + 1;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (!std::regex_match(line, m, line_re)) throw ParseError("malformed template line", here);
    HintTemplate t;
    t.category = std::stoi(m[1]);
    std::string target = m[2];
    if (target == "inference") {
      t.direction = m[3];
    } else {
      if (m[3].matched) throw ParseError("strategy templates take no direction", here);
      t.for_strategy = true;
      if (target != "strategy") t.strategy = target;
    }
    t.text = m[4];
    out.templates.push_back(std::move(t));
  }
  return out;
}

TemplateSet TemplateSet::load(const std::string& path) { return parse(read_file(path)); }

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " and " : "") + parts[i];
  return out;
}

const char* direction_word(Direction d) {
  switch (d) {
    case Direction::Forward: return "forward";
    case Direction::Backward: return "backward";
    case Direction::Close: return "close";
  }
  return "";
}

std::map<std::string, std::string> slots(const PlanEdge& edge, const HierarchicalProofPlan& plan,
                                         const Theory& theory) {
  std::map<std::string, std::string> out;
  auto src = plan.tasks.find(edge.source);
  if (src == plan.tasks.end()) return out;
  const Sequent& s = src->second;
  out["goal"] = render(s.goal);
  if (edge.strategy) {
    out["strategy"] = edge.label;
    return out;
  }
  const RuleApplication& app = *edge.app;
  if (app.rule != "Ax") out["assertion"] = app.concept_name;
  if (const Assertion* a = theory.find(app.concept_name)) out["statement"] = render(a->formula);

  std::vector<std::string> premises, conclusion, variables;
  std::set<std::string> names;
  if (app.direction == Direction::Forward) {
    for (const auto& label : app.consumed)
      if (const Hypothesis* h = s.find(label)) {
        premises.push_back(render(h->formula));
        collect_free_names(h->formula, names);
      }
    for (const auto& f : app.produced_hyps) conclusion.push_back(render(f));
  } else {
    collect_free_names(s.goal, names);
    for (const auto& label : edge.targets) {
      auto t = plan.tasks.find(label);
      if (t == plan.tasks.end()) continue;
      const Sequent& q = t->second;
      premises.push_back(render(q.goal));
      std::string text;
      for (const auto& h : q.hyps)
        if (!s.has_hypothesis(h.formula)) text += render(h.formula) + " -> ";
      conclusion.push_back(text + render(q.goal));
    }
    if (!premises.empty()) out["subgoal"] = premises.front();
  }
  for (const auto& n : names) variables.push_back(n);
  if (!premises.empty()) out["premises"] = join(premises);
  if (!conclusion.empty()) out["conclusion"] = join(conclusion);
  if (!variables.empty()) out["variables"] = join(variables);
  return out;
}

bool applies(const HintTemplate& t, const PlanEdge& edge) {
  if (edge.strategy != t.for_strategy) return false;
  if (edge.strategy) return t.strategy.empty() || t.strategy == edge.label;
  return t.direction.empty() || t.direction == direction_word(edge.app->direction);
}

}  // namespace

std::optional<std::string> instantiate_template(const HintTemplate& t, const PlanEdge& edge,
                                                const HierarchicalProofPlan& plan,
                                                const Theory& theory) {
  if (!applies(t, edge)) return std::nullopt;
  if (!edge.strategy && !edge.app) return std::nullopt;
  auto values = slots(edge, plan, theory);
  static const std::regex slot_re(R"(\{([a-z]+)\})");
  std::string out;
  auto begin = std::sregex_iterator(t.text.begin(), t.text.end(), slot_re);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    auto v = values.find((*it)[1]);
    if (v == values.end()) return std::nullopt;
    out += t.text.substr(last, static_cast<std::size_t>(it->position()) - last) + v->second;
    last = static_cast<std::size_t>(it->position() + it->length());
  }
  return out + t.text.substr(last);
}

std::vector<Hint> hint_ladder(const HierarchicalProofPlan& plan, const TemplateSet& templates,
                              const Theory& theory) {
  std::vector<const PlanEdge*> chain{&plan.top};
  while (!chain.back()->children.empty()) chain.push_back(&chain.back()->children.front());
  std::vector<Hint> out;
  for (std::size_t level = chain.size() > 1 ? 1 : 0; level < chain.size(); ++level) {
    const PlanEdge& edge = *chain[level];
    for (int category = 1; category <= 8; ++category) {
      // Named-strategy templates take precedence over generic ones.
      std::vector<const HintTemplate*> candidates;
      for (const auto& t : templates.templates)
        if (t.category == category && !(t.for_strategy && t.strategy.empty()))
          candidates.push_back(&t);
      for (const auto& t : templates.templates)
        if (t.category == category && t.for_strategy && t.strategy.empty())
          candidates.push_back(&t);
      for (const HintTemplate* t : candidates) {
        if (auto text = instantiate_template(*t, edge, plan, theory)) {
          out.push_back(Hint{category, *text, edge.label, static_cast<int>(level), true});
          break;
        }
      }
    }
  }
  return out;
}

Hint generate_hint(const std::optional<HierarchicalProofPlan>& plan, std::size_t position,
                   const TemplateSet& templates, const Theory& theory) {
  std::vector<Hint> ladder;
  if (plan) ladder = hint_ladder(*plan, templates, theory);
  if (ladder.empty()) {
    Hint h;
    h.text = "Look again at the goal and the assumptions: which definitions do their symbols have?";
    h.strategic = false;
    return h;
  }
  return ladder[std::min(position, ladder.size() - 1)];
}

}  // namespace prooftutor
