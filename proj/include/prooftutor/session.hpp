#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prooftutor/granularity.hpp"
#include "prooftutor/hinting.hpp"
#include "prooftutor/reconstruction.hpp"
#include "prooftutor/strategy.hpp"

namespace prooftutor {

enum class Soundness { Correct, Incorrect, Buggy, Unknown };

const char* to_string(Soundness s);

struct FeedbackVector {
  Soundness soundness = Soundness::Unknown;
  std::string buggy_message;
  std::optional<Granularity> granularity;  // nullopt: not applicable
  Relevance relevance = Relevance::Unknown;

  friend bool operator==(const FeedbackVector&, const FeedbackVector&) = default;
};

std::string granularity_text(const std::optional<Granularity>& g);

struct StepFeedback {
  FeedbackVector feedback;
  std::vector<std::string> messages;
  bool proof_complete = false;
  std::size_t interpretations = 0;
  std::string diagnostic;  // parse error position, search outcome
  std::vector<RuleApplication> trace;  // shortest verified trace
  GranularityFeatures features;
};

struct TranscriptEntry {
  std::string text;                     // the step as entered; empty for hints
  std::optional<StepFeedback> step;
  std::optional<Hint> hint;
};

struct SessionOptions {
  std::optional<int> depth;   // overrides the exercise's depth limit
  std::size_t node_budget = 20000;
  std::size_t relevance_budget = 5000;
  bool check_relevance = true;
};

class Session {
 public:
  /// Loads classifier and hint templates named by the exercise from `data`.
  Session(std::string id, Exercise exercise, Theory theory, const DataDir& data,
          SessionOptions options = {});
  Session(std::string id, Exercise exercise, Theory theory, GranularityClassifier classifier,
          TemplateSet templates, SessionOptions options = {});

  StepFeedback submit_step(const std::string& text);
  /// Throws std::logic_error once the proof is complete.
  Hint request_hint();

  const std::string& id() const { return id_; }
  const Exercise& exercise() const { return exercise_; }
  const Theory& theory() const { return theory_; }
  const std::vector<MentalProofState>& states() const { return states_; }
  const StudentModel& student() const { return student_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  std::size_t hint_position() const { return hint_position_; }
  bool complete() const { return complete_; }

 private:
  Relevance relevance_of(const ProofStep& step);

  std::string id_;
  Exercise exercise_;
  Theory theory_;
  RuleBase rules_;
  StrategyTable strategies_;
  GranularityClassifier classifier_;
  TemplateSet templates_;
  SessionOptions options_;

  std::vector<MentalProofState> states_;
  StudentModel student_;
  bool complete_ = false;
  std::vector<TranscriptEntry> transcript_;

  std::size_t hint_position_ = 0;
  std::optional<std::optional<HierarchicalProofPlan>> plan_;  // outer: computed yet
  std::map<std::string, Relevance> relevance_cache_;
};

// Corpus evaluation.

struct CorpusStep {
  std::string exercise;
  std::string dialog;
  bool gold_correct = true;
  std::string text;
  std::size_t line = 0;
};

struct Corpus {
  std::vector<CorpusStep> steps;
  std::vector<std::string> malformed;  // "line N: reason"
};

/// `== exercise <id>` headers, `:<dialog> <correct|incorrect> <step>` lines, `#` comments.
Corpus parse_corpus(std::string_view text);

struct EvalRow {
  CorpusStep step;
  FeedbackVector feedback;
  bool verified = false;
};

struct EvalReport {
  int correct_verified = 0;
  int correct_rejected = 0;
  int incorrect_verified = 0;
  int incorrect_rejected = 0;
  std::vector<EvalRow> rows;
  std::vector<std::string> malformed;
  std::optional<int> depth;  // nullopt: each exercise's own limit
};

/// Replays each dialog in a fresh session (relevance checking off) and
/// compares soundness verdicts to the gold labels.
EvalReport evaluate_corpus(const Corpus& corpus, const DataDir& data,
                           std::optional<int> depth = std::nullopt,
                           const std::string& theory_override = "");

/// Confusion table with row percentages.
std::string render_table(const EvalReport& report);

}  // namespace prooftutor
