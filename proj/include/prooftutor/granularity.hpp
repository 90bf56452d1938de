#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prooftutor/engine.hpp"
#include "prooftutor/script.hpp"

namespace prooftutor {

struct GranularityFeatures {
  int total = 0;       // inferences in the trace
  int mcu = 0;         // applications whose concept is mastered
  int unmastered = 0;  // distinct concepts used that are not mastered
  int hypintro = 0;    // hypotheses introduced by backward steps
  int relations = 0;   // distinct concepts used
  bool verbalized = false;

  /// Value by feature name; throws std::out_of_range for unknown names.
  int get(const std::string& feature) const;
  static bool known(const std::string& feature);

  friend bool operator==(const GranularityFeatures&, const GranularityFeatures&) = default;
};

enum class Granularity { Appropriate, TooSmall, TooBig };

const char* to_string(Granularity g);
Granularity granularity_from_string(const std::string& s);

class ClassifierError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer interval [lo, hi]; hi < 0 means unbounded.
struct Guard {
  int lo = 0;
  int hi = -1;
  bool contains(int v) const { return v >= lo && (hi < 0 || v <= hi); }
};

/// Decision tree, ordered rule list or linear one-vs-rest scorer.
class GranularityClassifier {
 public:
  /// S-expression text: `(node <feature> (<guard> <subtree>) ...)`, `(leaf <verdict>)`,
  /// `(rules (rule ((<feature> <guard>) ...) <verdict>) ... (default <verdict>))`,
  /// or `(linear (class <verdict> (bias <w>) (<feature> <w>) ...) ...)`.
  static GranularityClassifier parse(std::string_view text);
  static GranularityClassifier load(const std::string& path);

  Granularity classify(const GranularityFeatures& f) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

struct ConceptState {
  bool mastered = false;
  int correct_uses = 0;

  friend bool operator==(const ConceptState&, const ConceptState&) = default;
};

/// Overlay model: concepts the student has used correctly, mastered at a threshold.
struct StudentModel {
  std::map<std::string, ConceptState> concepts;
  int threshold = 3;

  bool mastered(const std::string& concept_name) const;

  friend bool operator==(const StudentModel&, const StudentModel&) = default;
};

GranularityFeatures extract_features(const std::vector<RuleApplication>& trace,
                                     const StudentModel& model, const ProofStep& step);

/// One correct use per distinct concept of the trace; mastery never reverts.
StudentModel update_student_model(StudentModel model, const std::vector<RuleApplication>& trace);

}  // namespace prooftutor
