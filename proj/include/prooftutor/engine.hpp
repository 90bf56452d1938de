#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "prooftutor/logic.hpp"
#include "prooftutor/theory.hpp"

namespace prooftutor {

enum class Direction { Forward, Backward, Close };

const char* to_string(Direction d);

/// A goal sequent a backward rule leaves behind: fresh eigenvariables, new
/// hypotheses and the goal itself, all over the rule's pattern variables.
struct GoalSpec {
  std::vector<std::string> eigen;  // pattern metas replaced by fresh constants
  std::vector<Formula> hyps;
  Formula goal;
};

/// Assertion-level rule. Pattern variables are meta-variables named `%...`,
/// which the lexer can never produce, so they never meet a session's metas.
struct InferenceRule {
  std::string name;
  std::string concept_name;
  AssertionKind kind = AssertionKind::Definition;
  Direction direction = Direction::Forward;
  bool is_buggy = false;

  // Forward: hypothesis patterns. Backward/close: empty.
  std::vector<Formula> premises;
  // Forward: the implication's right side; backward/close: the goal pattern.
  Formula conclusion;
  // Forward: hypotheses added, and metas to bind to fresh witnesses.
  std::vector<Formula> produced;
  std::vector<std::string> witnesses;
  // Backward: one entry per new goal sequent, plus metas that become fresh
  // session meta-variables.
  std::vector<GoalSpec> goals;
  std::vector<std::string> new_metas;
  int hyp_intro = 0;
  // The assertion the rule came from, for hints.
  Formula source;
};

/// Synthesised rules of a theory, in theory order.
struct RuleBase {
  std::vector<InferenceRule> rules;
  std::vector<std::string> diagnostics;

  static RuleBase from(const Theory& theory);
  const InferenceRule* find(const std::string& name) const;
};

/// Rules for one assertion; unsupported shapes yield none plus a diagnostic.
std::vector<InferenceRule> synthesize_inferences(const Assertion& a,
                                                 std::vector<std::string>* diagnostics = nullptr);

/// Fresh labels and meta-variable names for one proof state.
struct Supply {
  int next_task = 1;
  int next_meta = 1;

  std::string task_label() { return "T" + std::to_string(next_task++); }

  friend bool operator==(const Supply&, const Supply&) = default;
};

struct RuleApplication {
  std::string rule;
  std::string concept_name;
  Direction direction = Direction::Forward;
  bool is_buggy = false;
  std::string task;         // label of the sequent acted on
  Substitution subst;       // pattern metas -> terms, including fresh names
  std::vector<std::string> consumed;     // hypothesis labels matched
  std::vector<Formula> produced_hyps;    // forward: hypotheses added
  std::vector<Sequent> produced;         // backward/or-l: new goal sequents (unlabelled)
  std::vector<std::string> fresh;        // eigenvariables or witnesses introduced
  std::vector<std::string> new_metas;    // session metas introduced
  int hyp_intro = 0;
  std::string fingerprint;  // sequent_key of the source sequent
  Substitution closing;     // Ax: extension of the global substitution
  std::vector<std::string> produced_labels;  // filled in by apply()

  /// Sequent count this application produces (forward: 1, close: 0).
  std::size_t arity() const;
};

std::string render(const RuleApplication& app);

class StaleApplication : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RuleFilter {
  bool forward = true;
  bool backward = true;
  bool close = true;
  bool normal = true;  // non-buggy rules
  bool buggy = false;  // buggy rules only when asked
  std::optional<AssertionKind> kind;
};

/// Picks fresh names x, y, z, x1, y1, z1, x2, ... not in `avoid`, adding them.
std::string fresh_name(std::set<std::string>& avoid);

/// Every way a rule of `rules` applies to `s`: backward/close rules whose goal
/// pattern matches the goal, forward rules whose premises all match
/// hypotheses. Order: rule order, then hypothesis order.
std::vector<RuleApplication> applicable_rules(const Sequent& s, const RuleBase& rules,
                                              const RuleFilter& filter, const Supply& supply);

/// Instantiates one forward rule for a given premise match.
RuleApplication forward_application(const InferenceRule& rule, const Sequent& s,
                                    const std::vector<std::string>& consumed,
                                    const Substitution& match);

/// Ax: the goal unifies with a hypothesis. One application per hypothesis;
/// metas listed in `scope` may only be bound to terms over their allowed names.
std::vector<RuleApplication> axiom_closures(
    const Sequent& s, const std::map<std::string, std::set<std::string>>* scope = nullptr);

/// or-l on the first disjunctive hypothesis, if any.
std::optional<RuleApplication> or_split(const Sequent& s);

/// Produces the successor sequents and assigns labels (forward: one sequent
/// extended with the new hypotheses; backward: new goals; close: none).
std::vector<Sequent> apply(RuleApplication& app, const Sequent& s, Supply& supply);

/// Nothing new: all produced hypotheses already present, or (with witnesses)
/// some existing terms already play the witnesses' role.
bool is_redundant(const RuleApplication& app, const Sequent& s);

/// No compound function term outside `universe` appears in the output.
/// Buggy applications are exempt.
bool is_admissible(const RuleApplication& app, const std::set<std::string>& universe);

std::set<std::string> compound_universe(const Sequent& s);

}  // namespace prooftutor
