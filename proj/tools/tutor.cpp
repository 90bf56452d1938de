// tutor: command-line front end for the proof tutor.

#include <CLI11.hpp>
#include <httplib.h>

#include <fstream>
#include <iostream>

#include "prooftutor/service.hpp"

namespace pt = prooftutor;
using pt::json;

namespace {

struct Globals {
  std::string data_dir;
  std::string format = "text";
  bool as_json() const { return format == "json"; }
  pt::DataDir data() const { return data_dir.empty() ? pt::DataDir::bundled() : pt::DataDir{data_dir}; }
};

void print_state(const pt::Session& s, std::ostream& os) {
  if (s.states().empty()) return;
  os << pt::render(s.states().front());
  if (s.states().size() > 1) os << "(" << s.states().size() << " readings)\n";
}

void print_feedback(const pt::StepFeedback& f, std::ostream& os) {
  os << to_string(f.feedback.soundness);
  if (f.feedback.soundness == pt::Soundness::Correct)
    os << "  granularity: " << pt::granularity_text(f.feedback.granularity)
       << "  relevance: " << to_string(f.feedback.relevance);
  os << "\n";
  for (std::size_t i = 1; i < f.messages.size(); ++i) os << "  " << f.messages[i] << "\n";
  if (f.feedback.soundness == pt::Soundness::Unknown && !f.diagnostic.empty())
    os << "  " << f.diagnostic << "\n";
}

int run_repl(const Globals& g, const std::string& exercise, const std::string& theory) {
  pt::DataDir data = g.data();
  auto [ex, th] = data.exercise(exercise, theory);
  pt::Session s("repl", ex, th, data);
  if (!g.as_json()) {
    std::cout << "Show " << pt::render(ex.goal) << "\n"
              << "Enter proof steps; `hint`, `state`, `quit`.\n";
  }
  std::string line;
  while (!s.complete() && (g.as_json() || std::cout << "> " << std::flush) &&
         std::getline(std::cin, line)) {
    if (line.empty()) continue;
    if (line == "quit" || line == "exit") break;
    if (line == "state") {
      if (g.as_json())
        std::cout << pt::session_json(s)["state"].dump() << "\n";
      else
        print_state(s, std::cout);
    } else if (line == "hint") {
      pt::Hint h = s.request_hint();
      if (g.as_json())
        std::cout << pt::to_json(h).dump() << "\n";
      else
        std::cout << "hint: " << h.text << "\n";
    } else {
      auto f = s.submit_step(line);
      if (g.as_json())
        std::cout << pt::to_json(f).dump() << "\n";
      else
        print_feedback(f, std::cout);
    }
  }
  return 0;
}

int run_check(const Globals& g, const std::string& exercise, const std::string& script_path,
              const std::string& theory) {
  pt::DataDir data = g.data();
  auto [ex, th] = data.exercise(exercise, theory);
  std::string text = pt::read_file(script_path);
  pt::ProofScript script = pt::parse_script(text, th.arities);
  pt::Session s("check", ex, th, data);
  bool all_correct = true;
  json out = json::array();
  for (const auto& span : script.spans) {
    std::string step = text.substr(span.begin, span.end - span.begin);
    if (s.complete()) {
      all_correct = false;
      if (!g.as_json()) std::cout << step << "\n  step after the proof was complete\n";
      continue;
    }
    auto f = s.submit_step(step);
    all_correct = all_correct && f.feedback.soundness == pt::Soundness::Correct;
    if (g.as_json()) {
      json j = pt::to_json(f);
      j["step"] = step;
      out.push_back(j);
    } else {
      std::cout << step << "\n  ";
      print_feedback(f, std::cout);
    }
  }
  if (g.as_json())
    std::cout << json{{"steps", out}, {"proof_complete", s.complete()}}.dump(2) << "\n";
  else
    std::cout << (s.complete() ? "proof complete\n" : "proof incomplete\n");
  return all_correct ? 0 : 1;
}

int run_eval(const Globals& g, const std::string& corpus_path, std::optional<int> depth,
             const std::string& theory) {
  pt::DataDir data = g.data();
  std::string path = corpus_path.empty() ? data.corpus_path("mini") : corpus_path;
  pt::EvalReport r = pt::evaluate_corpus(pt::parse_corpus(pt::read_file(path)), data, depth, theory);
  if (g.as_json()) {
    json rows = json::array();
    for (const auto& row : r.rows)
      rows.push_back({{"exercise", row.step.exercise},
                      {"dialog", row.step.dialog},
                      {"gold", row.step.gold_correct ? "correct" : "incorrect"},
                      {"step", row.step.text},
                      {"feedback", pt::to_json(row.feedback)}});
    std::cout << json{{"correct_verified", r.correct_verified},
                      {"correct_rejected", r.correct_rejected},
                      {"incorrect_verified", r.incorrect_verified},
                      {"incorrect_rejected", r.incorrect_rejected},
                      {"depth", depth ? json(*depth) : json(nullptr)},
                      {"malformed", r.malformed},
                      {"rows", rows}}
                     .dump(2)
              << "\n";
    return 0;
  }
  for (const auto& row : r.rows)
    std::cout << row.step.exercise << " " << row.step.dialog << "  gold "
              << (row.step.gold_correct ? "correct  " : "incorrect") << "  "
              << (row.verified ? "verified" : "rejected") << "  " << row.step.text << "\n";
  for (const auto& m : r.malformed) std::cout << "skipped " << m << "\n";
  std::cout << "\n" << pt::render_table(r);
  std::cout << "depth limit: " << (depth ? std::to_string(*depth) : std::string("per exercise"))
            << "\n";
  return 0;
}

void print_edges(const std::vector<pt::PlanEdge>& edges, std::ostream& os) {
  for (const auto& e : edges) {
    os << e.label << ": " << e.source << " ->";
    if (e.targets.empty()) os << " closed";
    for (const auto& t : e.targets) os << " " << t;
    os << "\n";
  }
}

int run_prove(const Globals& g, const std::string& exercise, const std::string& strategy,
              std::optional<int> level, const std::string& theory) {
  pt::DataDir data = g.data();
  auto [ex, th] = data.exercise(exercise, theory);
  auto states = pt::initial_states(ex);
  const pt::Sequent& task = *states.front().marked_sequent();
  auto run = pt::run_strategy(strategy.empty() ? ex.strategy : strategy, task, th, 5000,
                              states.front().supply);
  if (!run.plan) {
    std::cout << (g.as_json() ? json{{"plan", nullptr}}.dump() : std::string("no plan")) << "\n";
    return 1;
  }
  auto edges = level ? pt::flatten_at_level(*run.plan, *level) : pt::flatten_fully(*run.plan);
  if (g.as_json()) {
    json out = json::array();
    for (const auto& e : edges)
      out.push_back({{"label", e.label}, {"source", e.source}, {"targets", e.targets},
                     {"strategy", e.strategy}});
    std::cout << json{{"edges", out}, {"closed", run.plan->closed()}, {"open", run.plan->open}}
                     .dump(2)
              << "\n";
  } else {
    print_edges(edges, std::cout);
    std::cout << (run.plan->closed() ? "plan closes the task\n" : "plan leaves open tasks:");
    for (const auto& o : run.plan->open) std::cout << " " << o;
    if (!run.plan->closed()) std::cout << "\n";
  }
  return 0;
}

int run_serve(const Globals& g, const std::string& host, int port) {
  pt::Service service(g.data());
  httplib::Server server;
  service.mount(server);
  std::cerr << "listening on " << host << ":" << port << "\n";
  return server.listen(host, port) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proof tutor for assertion-level proofs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--theory-dir", g.data_dir, "Data directory with theories/, exercises/, ...");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string exercise, theory, script, corpus, strategy, host = "127.0.0.1";
  std::optional<int> depth, level;
  int port = 8080;

  auto* repl = app.add_subcommand("repl", "Interactive step and hint loop");
  repl->add_option("--exercise", exercise)->required();
  repl->add_option("--theory", theory, "Theory replacing the exercise's own");

  auto* check = app.add_subcommand("check", "Verdicts for a whole script; exit 0 iff all correct");
  check->add_option("--exercise", exercise)->required();
  check->add_option("--script", script)->required()->check(CLI::ExistingFile);
  check->add_option("--theory", theory);

  auto* eval = app.add_subcommand("eval", "Evaluate a labelled corpus");
  eval->add_option("--corpus", corpus, "Corpus file (default: bundled mini corpus)");
  eval->add_option("--depth", depth)->check(CLI::NonNegativeNumber);
  eval->add_option("--theory", theory);

  auto* prove = app.add_subcommand("prove", "Print the flattened strategy plan");
  prove->add_option("--exercise", exercise)->required();
  prove->add_option("--strategy", strategy);
  prove->add_option("--level", level)->check(CLI::NonNegativeNumber);
  prove->add_option("--theory", theory);

  auto* serve = app.add_subcommand("serve", "HTTP JSON service");
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*repl) return run_repl(g, exercise, theory);
    if (*check) return run_check(g, exercise, script, theory);
    if (*eval) return run_eval(g, corpus, depth, theory);
    if (*prove) return run_prove(g, exercise, strategy, level, theory);
    if (*serve) return run_serve(g, host, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
