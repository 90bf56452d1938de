#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "prooftutor/logic.hpp"

namespace prooftutor {

struct ProofStep;

/// `.<op> <rhs>`: chained onto the right-hand side of the previous fact.
struct Continuation {
  std::string op;  // =, subset, supset, in, ->, <->
  std::variant<Term, Formula> rhs;

  friend bool operator==(const Continuation&, const Continuation&) = default;
};

struct AssumeStep {
  std::vector<Formula> hyps;
  std::vector<std::string> from;
  std::optional<Formula> thus;

  friend bool operator==(const AssumeStep&, const AssumeStep&) = default;
};

struct FactStep {
  std::variant<Formula, Continuation> form;
  std::optional<std::string> by;  // "" is a bare `by`
  std::vector<std::string> from;

  friend bool operator==(const FactStep&, const FactStep&) = default;
};

struct SubgoalStep {
  Formula goal;
  std::vector<Formula> using_;
  std::optional<std::string> by;

  friend bool operator==(const SubgoalStep&, const SubgoalStep&) = default;
};

/// Inner goals never carry their own `by`; a trailing `by` belongs to the group.
struct SubgoalsStep {
  std::vector<SubgoalStep> goals;
  std::optional<std::string> by;

  friend bool operator==(const SubgoalsStep&, const SubgoalsStep&) = default;
};

struct CaseBranch {
  Formula hyp;
  std::vector<ProofStep> steps;

  friend bool operator==(const CaseBranch&, const CaseBranch&);
};

struct CasesStep {
  std::vector<CaseBranch> branches;
  std::optional<std::string> by;
  std::vector<std::string> from;

  friend bool operator==(const CasesStep&, const CasesStep&) = default;
};

struct SetStep {
  std::vector<std::pair<std::string, std::variant<Term, Formula>>> bindings;

  friend bool operator==(const SetStep&, const SetStep&) = default;
};

struct TrivialStep {
  std::optional<std::string> by;
  std::vector<std::string> from;

  friend bool operator==(const TrivialStep&, const TrivialStep&) = default;
};

struct QedStep {
  friend bool operator==(const QedStep&, const QedStep&) = default;
};

struct ProofStep {
  std::variant<AssumeStep, FactStep, SubgoalStep, SubgoalsStep, CasesStep, SetStep,
               TrivialStep, QedStep>
      node;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }

  friend bool operator==(const ProofStep&, const ProofStep&) = default;
};

inline bool operator==(const CaseBranch& a, const CaseBranch& b) {
  return a.hyp == b.hyp && a.steps == b.steps;
}

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct ProofScript {
  std::vector<ProofStep> steps;
  std::vector<Span> spans;
};

ProofStep parse_step(std::string_view text, const ArityTable& arities);
/// Steps separated by `;` or newlines, optionally wrapped in `proof ... qed`.
/// Syntax errors carry the byte offset; see line_column() for display.
ProofScript parse_script(std::string_view text, const ArityTable& arities);

std::string render(const ProofStep& step);
std::string render(const ProofScript& script);

/// Short command name: assume, fact, subgoal, subgoals, cases, set, trivial, qed.
const char* step_kind(const ProofStep& step);
/// The `by` justification, if the step carries a non-empty one.
std::optional<std::string> step_by(const ProofStep& step);

}  // namespace prooftutor
