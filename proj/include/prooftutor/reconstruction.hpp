#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "prooftutor/engine.hpp"
#include "prooftutor/script.hpp"
#include "prooftutor/theory.hpp"

namespace prooftutor {

/// Where the student might be: open sequents, one of them marked, and the
/// global substitution for meta-variables.
struct MentalProofState {
  std::vector<Sequent> open;
  std::size_t marked = 0;
  Substitution sigma;
  std::vector<RuleApplication> history;
  Supply supply;
  // Names each session meta may be instantiated with (eigenvariable condition).
  std::map<std::string, std::set<std::string>> meta_scope;
  // `set` abbreviations.
  std::map<std::string, std::variant<Term, Formula>> abbreviations;
  // Last stated fact, for `.op rhs` continuations.
  std::optional<Formula> last_fact;

  const Sequent* marked_sequent() const {
    return marked < open.size() ? &open[marked] : nullptr;
  }
  std::size_t index_of(const std::string& label) const;
};

/// Label-independent identity: sequent keys in order, marked index, sigma.
std::string state_key(const MentalProofState& s);
/// Multi-line rendering; the marked sequent is prefixed with `*`.
std::string render(const MentalProofState& s);

/// Applies one rule application in place. Close applications remove the
/// sequent and extend sigma. Throws StaleApplication.
void apply_to_state(MentalProofState& state, RuleApplication& app);

/// Applies a trace then renames constants; the replay check of a reconstruction.
MentalProofState replay(const MentalProofState& from, std::vector<RuleApplication> trace,
                        const std::map<std::string, std::string>& renaming = {});

/// Renames constants in all open sequents and the last fact.
void rename_state(MentalProofState& state, const std::map<std::string, std::string>& renaming);

struct SearchLimits {
  int depth = 4;
  std::size_t width = 16;
  std::size_t node_budget = 20000;
};

enum class Verdict { Verified, Rejected, Buggy, ResourceExhausted };

const char* to_string(Verdict v);

struct ReconstructionResult {
  Verdict verdict = Verdict::Rejected;
  std::string buggy_rule;
  std::string buggy_message;
  std::vector<MentalProofState> successors;
  std::vector<std::vector<RuleApplication>> traces;
  // Student names given to search-introduced constants, per successor.
  std::vector<std::map<std::string, std::string>> renamings;
  // Which reading of the step produced each successor (assume, fact, subgoal, ...).
  std::vector<std::string> interpretations;
  // Index into `successors` whose state the successor came from.
  std::vector<std::size_t> origins;
  bool proof_complete = false;
  std::size_t nodes = 0;
  std::string diagnostic;
};

std::vector<MentalProofState> initial_states(const Exercise& ex);

ReconstructionResult reconstruct_step(const std::vector<MentalProofState>& states,
                                      const ProofStep& step, const Theory& theory,
                                      const SearchLimits& limits = {});
/// Same, reusing synthesised rules.
ReconstructionResult reconstruct_step(const std::vector<MentalProofState>& states,
                                      const ProofStep& step, const Theory& theory,
                                      const RuleBase& rules, const SearchLimits& limits);

bool close_check(const MentalProofState& state);

/// Renders a trace as `rule {subst} -> labels` lines.
std::string render_trace(const std::vector<RuleApplication>& trace);

}  // namespace prooftutor
