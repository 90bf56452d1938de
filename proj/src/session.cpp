#include "prooftutor/session.hpp"

#include <iomanip>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace prooftutor {

const char* to_string(Soundness s) {
  switch (s) {
    case Soundness::Correct: return "correct";
    case Soundness::Incorrect: return "incorrect";
    case Soundness::Buggy: return "buggy";
    case Soundness::Unknown: return "unknown";
  }
  return "?";
}

std::string granularity_text(const std::optional<Granularity>& g) {
  return g ? to_string(*g) : "not_applicable";
}

namespace {

TemplateSet templates_for(const Exercise& ex, const DataDir& data) {
  return TemplateSet::load(
      data.template_path(ex.hints == HintStyle::Didactic ? "didactic" : "socratic"));
}

}  // namespace

Session::Session(std::string id, Exercise exercise, Theory theory, const DataDir& data,
                 SessionOptions options)
    : Session(std::move(id), exercise, theory,
              GranularityClassifier::load(data.classifier_path(exercise.classifier)),
              templates_for(exercise, data), options) {}

Session::Session(std::string id, Exercise exercise, Theory theory,
                 GranularityClassifier classifier, TemplateSet templates, SessionOptions options)
    : id_(std::move(id)),
      exercise_(std::move(exercise)),
      theory_(std::move(theory)),
      rules_(RuleBase::from(theory_)),
      strategies_(parse_strategies(theory_.strategies)),
      classifier_(std::move(classifier)),
      templates_(std::move(templates)),
      options_(options),
      states_(initial_states(exercise_)) {
  student_.threshold = exercise_.mastery_threshold;
}

Relevance Session::relevance_of(const ProofStep& step) {
  std::vector<Formula> hyps;
  if (const auto* a = step.as<AssumeStep>()) {
    hyps = a->hyps;
  } else if (const auto* f = step.as<FactStep>()) {
    if (const auto* formula = std::get_if<Formula>(&f->form)) hyps.push_back(*formula);
  }
  if (hyps.empty() || states_.empty()) return Relevance::Unknown;
  std::string key = state_key(states_.front());
  for (const auto& h : hyps) key += "|" + render(h);
  auto hit = relevance_cache_.find(key);
  if (hit != relevance_cache_.end()) return hit->second;
  Relevance r = check_relevance(states_.front(), hyps, exercise_.strategy, theory_,
                                options_.relevance_budget);
  relevance_cache_.emplace(key, r);
  return r;
}

StepFeedback Session::submit_step(const std::string& text) {
  if (complete_) throw std::logic_error("proof already complete");
  StepFeedback out;
  ProofStep step;
  try {
    step = parse_step(text, theory_.arities);
  } catch (const ParseError& e) {
    out.feedback.soundness = Soundness::Unknown;
    out.diagnostic = e.what();
    out.messages.push_back(std::string("I could not read this step: ") + e.what());
    transcript_.push_back({text, out, std::nullopt});
    return out;
  }

  SearchLimits limits;
  limits.depth = options_.depth.value_or(exercise_.depth_limit);
  limits.node_budget = options_.node_budget;
  ReconstructionResult r = reconstruct_step(states_, step, theory_, rules_, limits);
  out.diagnostic = r.diagnostic;
  out.interpretations = r.successors.size();

  switch (r.verdict) {
    case Verdict::Rejected:
      out.feedback.soundness = Soundness::Incorrect;
      out.messages.push_back("incorrect");
      break;
    case Verdict::Buggy:
      out.feedback.soundness = Soundness::Buggy;
      out.feedback.buggy_message = r.buggy_message;
      out.messages.push_back("incorrect: " + r.buggy_message);
      break;
    case Verdict::ResourceExhausted:
      out.feedback.soundness = Soundness::Unknown;
      out.messages.push_back("I could not check this step within the search budget");
      break;
    case Verdict::Verified: {
      out.feedback.soundness = Soundness::Correct;
      out.messages.push_back("correct");
      out.trace = r.traces.front();
      out.features = extract_features(out.trace, student_, step);
      out.feedback.granularity = classifier_.classify(out.features);
      if (options_.check_relevance) out.feedback.relevance = relevance_of(step);

      if (*out.feedback.granularity == Granularity::TooBig)
        out.messages.push_back("What does this follow from? Please show the intermediate steps.");
      else if (*out.feedback.granularity == Granularity::TooSmall)
        out.messages.push_back("This step is smaller than necessary; you may combine it with the next one.");
      if (out.feedback.relevance == Relevance::Irrelevant)
        out.messages.push_back("This step does not seem to help with the current goal.");

      student_ = update_student_model(std::move(student_), out.trace);
      states_ = std::move(r.successors);
      complete_ = r.proof_complete;
      out.proof_complete = complete_;
      if (complete_) out.messages.push_back("The proof is complete.");
      hint_position_ = 0;
      plan_.reset();
      break;
    }
  }
  transcript_.push_back({text, out, std::nullopt});
  return out;
}

Hint Session::request_hint() {
  if (complete_) throw std::logic_error("proof already complete");
  if (!plan_) {
    const MentalProofState& st = states_.front();
    std::optional<HierarchicalProofPlan> plan;
    if (const Sequent* task = st.marked_sequent()) {
      StrategyRun run = run_strategy(exercise_.strategy, *task, theory_, rules_, strategies_,
                                     options_.relevance_budget, st.supply);
      plan = std::move(run.plan);
    }
    plan_ = std::move(plan);
  }
  Hint h = generate_hint(*plan_, hint_position_++, templates_, theory_);
  transcript_.push_back({"", std::nullopt, h});
  return h;
}

Corpus parse_corpus(std::string_view text) {
  static const std::regex header_re(R"(^==\s*exercise\s+(\S+)\s*$)");
  static const std::regex step_re(R"(^:(\S+)\s+(correct|incorrect)\s+(.+?)\s*$)");
  Corpus out;
  std::istringstream in{std::string(text)};
  std::string line, exercise;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    line = line.substr(first);
    std::smatch m;
    if (std::regex_match(line, m, header_re)) {
      exercise = m[1];
    } else if (std::regex_match(line, m, step_re)) {
      if (exercise.empty()) {
        out.malformed.push_back("line " + std::to_string(n) + ": step before any exercise header");
        continue;
      }
      out.steps.push_back({exercise, m[1], m[2] == "correct", m[3], n});
    } else {
      out.malformed.push_back("line " + std::to_string(n) + ": unrecognised line");
    }
  }
  return out;
}

EvalReport evaluate_corpus(const Corpus& corpus, const DataDir& data, std::optional<int> depth,
                           const std::string& theory_override) {
  EvalReport report;
  report.depth = depth;
  report.malformed = corpus.malformed;
  SessionOptions opts;
  opts.depth = depth;
  opts.check_relevance = false;

  std::optional<Session> session;
  std::string current;
  for (const CorpusStep& cs : corpus.steps) {
    std::string key = cs.exercise + "/" + cs.dialog;
    if (!session || key != current) {
      auto [ex, th] = data.exercise(cs.exercise, theory_override);
      session.emplace(cs.dialog, ex, th, data, opts);
      current = key;
    }
    EvalRow row{cs, {}, false};
    if (session->complete()) {
      row.feedback.soundness = Soundness::Unknown;
    } else {
      row.feedback = session->submit_step(cs.text).feedback;
    }
    row.verified = row.feedback.soundness == Soundness::Correct;
    if (cs.gold_correct)
      ++(row.verified ? report.correct_verified : report.correct_rejected);
    else
      ++(row.verified ? report.incorrect_verified : report.incorrect_rejected);
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string cell(int n, int total) {
  std::ostringstream os;
  os << n;
  if (total > 0 && n > 0) os << " (" << (100 * n + total / 2) / total << "%)";
  return os.str();
}

}  // namespace

std::string render_table(const EvalReport& r) {
  int correct = r.correct_verified + r.correct_rejected;
  int incorrect = r.incorrect_verified + r.incorrect_rejected;
  std::ostringstream os;
  os << std::left << std::setw(16) << "" << std::setw(14) << "Verified" << "Rejected\n";
  os << std::setw(16) << "Step correct" << std::setw(14) << cell(r.correct_verified, correct)
     << cell(r.correct_rejected, correct) << "\n";
  os << std::setw(16) << "Step incorrect" << std::setw(14) << cell(r.incorrect_verified, incorrect)
     << cell(r.incorrect_rejected, incorrect) << "\n";
  return os.str();
}

}  // namespace prooftutor
