#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prooftutor/logic.hpp"

namespace prooftutor {

struct Hypothesis {
  std::string label;  // h1, h2, ...
  Formula formula;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

/// One proof task: hypotheses |- goal.
struct Sequent {
  std::string label;  // T0, T1, ...
  std::vector<Hypothesis> hyps;
  Formula goal;

  const Hypothesis* find(const std::string& hyp_label) const;
  /// Alpha-equal hypothesis present?
  bool has_hypothesis(const Formula& f) const;
  /// Next free hypothesis label (one past the largest hN in use).
  std::string next_hyp_label() const;

  friend bool operator==(const Sequent&, const Sequent&) = default;
};

std::string render(const Sequent& s);
/// Label-independent canonical text (hypotheses sorted, alpha keys).
std::string sequent_key(const Sequent& s);
/// Free identifiers of goal and hypotheses.
std::set<std::string> sequent_names(const Sequent& s);

enum class AssertionKind { Definition, Theorem, Buggy };

const char* to_string(AssertionKind kind);

struct Assertion {
  std::string label;
  Formula formula;
  AssertionKind kind = AssertionKind::Definition;
  std::string message;  // required for buggy assertions
  std::string concept_name;  // defaults to label

  friend bool operator==(const Assertion&, const Assertion&) = default;
};

struct Theory {
  std::string name;
  ArityTable arities;
  std::vector<Assertion> assertions;
  std::string strategies;  // verbatim `strategy` blocks

  const Assertion* find(const std::string& label) const;

  friend bool operator==(const Theory&, const Theory&) = default;
};

/// Raised for semantic problems in theory or exercise files (duplicate labels,
/// missing messages, unknown theories).
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Theory parse_theory(std::string_view text);
Theory load_theory(const std::string& path);
std::string render(const Theory& t);

enum class HintStyle { Socratic, Didactic };

struct Exercise {
  std::string id;
  std::string theory;
  Formula goal;
  int depth_limit = 4;
  std::string strategy = "close-by-definition";
  std::string classifier = "paper-fig";
  HintStyle hints = HintStyle::Socratic;
  int mastery_threshold = 3;
};

/// Parses exercise text; `theories` resolves the theory name to its arities.
Exercise parse_exercise(std::string_view text, const std::vector<Theory>& theories);

/// Bundled data layout: <dir>/theories/*.thy, <dir>/exercises/*.ex, ...
struct DataDir {
  std::string root;

  static DataDir bundled();

  std::string theory_path(const std::string& name) const;
  std::string exercise_path(const std::string& id) const;
  std::string classifier_path(const std::string& name) const;
  std::string template_path(const std::string& name) const;
  std::string corpus_path(const std::string& name) const;

  Theory theory(const std::string& name) const;
  /// Loads an exercise and its theory (or `theory_override` when non-empty).
  std::pair<Exercise, Theory> exercise(const std::string& id,
                                       const std::string& theory_override = "") const;
  std::vector<std::string> exercise_ids() const;
  std::vector<std::string> theory_names() const;
};

std::string read_file(const std::string& path);

}  // namespace prooftutor
