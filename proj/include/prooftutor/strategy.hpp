#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prooftutor/engine.hpp"
#include "prooftutor/reconstruction.hpp"
#include "prooftutor/theory.hpp"

namespace prooftutor {

struct StrategyExpr {
  enum class Kind { Call, Seq, Try, Repeat, First, UseSelect, Builtin };

  Kind kind = Kind::Builtin;
  std::string name;  // strategy or builtin name; rule set for use-select
  Direction direction = Direction::Backward;
  std::vector<StrategyExpr> children;

  friend bool operator==(const StrategyExpr&, const StrategyExpr&) = default;
};

using StrategyTable = std::map<std::string, StrategyExpr>;

class StrategyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses `strategy <name> <expr>` blocks. `then` is right-associative and
/// binds looser than `try`, `repeat` and `first`.
StrategyTable parse_strategies(std::string_view text);
std::string render(const StrategyExpr& e);

bool is_builtin_strategy(const std::string& name);

/// Edge of a plan: a strategy invocation refined by its children, or one
/// rule application.
struct PlanEdge {
  bool strategy = false;
  std::string label;
  std::string source;
  std::vector<std::string> targets;
  std::optional<RuleApplication> app;
  std::vector<PlanEdge> children;
};

struct HierarchicalProofPlan {
  std::string root;
  std::map<std::string, Sequent> tasks;
  Supply supply;  // the supply the run started from, for replay
  PlanEdge top;
  std::vector<std::string> open;

  bool closed() const { return open.empty(); }
};

struct StrategyRun {
  std::optional<HierarchicalProofPlan> plan;
  bool budget_exhausted = false;
  std::size_t expansions = 0;
  // Hypotheses of every task the run produced, solved or not.
  std::vector<Formula> hypotheses;
};

/// Runs a named strategy of `theory` (or a builtin) on one task. Labels come
/// from `supply`; by default they continue after the task's own number.
StrategyRun run_strategy(const std::string& name, const Sequent& task, const Theory& theory,
                         std::size_t budget = 5000, std::optional<Supply> supply = std::nullopt);
StrategyRun run_strategy(const std::string& name, const Sequent& task, const Theory& theory,
                         const RuleBase& rules, const StrategyTable& table, std::size_t budget,
                         std::optional<Supply> supply = std::nullopt);

/// Edges at nesting depth `level` (root strategy = 0); inference edges above
/// that depth are kept as they are. Throws std::invalid_argument for level < 0.
std::vector<PlanEdge> flatten_at_level(const HierarchicalProofPlan& plan, int level);
/// Edges whose label is selected, descending through unselected strategy edges.
std::vector<PlanEdge> flatten_selecting(const HierarchicalProofPlan& plan,
                                        const std::set<std::string>& labels);
/// All inference edges, in execution order.
std::vector<PlanEdge> flatten_fully(const HierarchicalProofPlan& plan);

/// Deepest nesting level in the plan.
int plan_depth(const HierarchicalProofPlan& plan);

/// Replays the fully flattened plan from its root task.
MentalProofState replay_plan(const HierarchicalProofPlan& plan);

std::string render(const HierarchicalProofPlan& plan);

enum class Relevance { Relevant, Irrelevant, Unknown };

const char* to_string(Relevance r);

/// Whether every hypothesis unifies with one occurring in the strategy's
/// (partial) solution from `state`'s marked task. Names the step introduced
/// are generalised to meta-variables first.
Relevance check_relevance(const MentalProofState& state, const std::vector<Formula>& hyps,
                          const std::string& strategy, const Theory& theory,
                          std::size_t budget = 5000);

}  // namespace prooftutor
