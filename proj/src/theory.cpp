#include "prooftutor/theory.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prooftutor/lexer.hpp"

namespace prooftutor {

// ---------------------------------------------------------------------------
// Sequents

const Hypothesis* Sequent::find(const std::string& hyp_label) const {
  for (const auto& h : hyps)
    if (h.label == hyp_label) return &h;
  return nullptr;
}

bool Sequent::has_hypothesis(const Formula& f) const {
  const std::string key = alpha_key(f);
  return std::any_of(hyps.begin(), hyps.end(),
                     [&](const Hypothesis& h) { return alpha_key(h.formula) == key; });
}

std::string Sequent::next_hyp_label() const {
  int best = 0;
  for (const auto& h : hyps) {
    if (h.label.size() > 1 && h.label[0] == 'h') {
      try {
        best = std::max(best, std::stoi(h.label.substr(1)));
      } catch (const std::exception&) {
      }
    }
  }
  return "h" + std::to_string(best + 1);
}

std::string render(const Sequent& s) {
  std::string out;
  for (std::size_t i = 0; i < s.hyps.size(); ++i) {
    if (i) out += ", ";
    out += render(s.hyps[i].formula);
  }
  if (!out.empty()) out += " ";
  return out + "|- " + render(s.goal);
}

std::string sequent_key(const Sequent& s) {
  std::vector<std::string> keys;
  for (const auto& h : s.hyps) keys.push_back(alpha_key(h.formula));
  std::sort(keys.begin(), keys.end());
  std::string out;
  for (const auto& k : keys) out += k + ";";
  return out + "|-" + alpha_key(s.goal);
}

std::set<std::string> sequent_names(const Sequent& s) {
  std::set<std::string> out;
  collect_free_names(s.goal, out);
  for (const auto& h : s.hyps) collect_free_names(h.formula, out);
  return out;
}

// ---------------------------------------------------------------------------
// Theories

const char* to_string(AssertionKind kind) {
  switch (kind) {
    case AssertionKind::Definition: return "definition";
    case AssertionKind::Theorem: return "theorem";
    case AssertionKind::Buggy: return "buggy";
  }
  return "?";
}

const Assertion* Theory::find(const std::string& label) const {
  for (const auto& a : assertions)
    if (a.label == label) return &a;
  return nullptr;
}

namespace {

struct Directive {
  std::string text;
  std::size_t offset;
};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Logical lines: indented lines continue the previous directive.
std::vector<Directive> directives(std::string_view text) {
  std::vector<Directive> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    std::string body = trim(line);
    if (!body.empty() && body[0] != '#') {
      bool continued = !out.empty() && (line[0] == ' ' || line[0] == '\t');
      if (continued) {
        out.back().text += "\n" + std::string(line);
      } else {
        out.push_back({std::string(line), pos});
      }
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

std::string first_word(const std::string& s) {
  std::size_t e = s.find_first_of(" \t\n");
  return s.substr(0, e);
}

Formula parse_at(const std::string& text, std::size_t base, const ArityTable& arities,
                 ParseOptions options) {
  try {
    return parse_formula(text, arities, options);
  } catch (const ParseError& e) {
    std::string what = e.what();
    auto cut = what.rfind(" at offset ");
    throw ParseError(what.substr(0, cut), base + e.offset());
  }
}

}  // namespace

Theory parse_theory(std::string_view text) {
  Theory theory;
  ParseOptions closed{.closed = true, .allow_meta = false};
  for (const auto& d : directives(text)) {
    const std::string keyword = first_word(d.text);
    std::string rest = trim(std::string_view(d.text).substr(keyword.size()));
    std::size_t rest_offset = d.offset + d.text.find(rest, keyword.size());
    if (keyword == "theory") {
      if (!is_identifier(rest)) throw ParseError("expected theory name", rest_offset);
      theory.name = rest;
    } else if (keyword == "symbol") {
      auto slash = rest.find('/');
      if (slash == std::string::npos) throw ParseError("expected <name>/<arity>", rest_offset);
      std::string name = trim(rest.substr(0, slash));
      std::string arity = trim(rest.substr(slash + 1));
      if (!is_identifier(name) || arity.empty() ||
          !std::all_of(arity.begin(), arity.end(), ::isdigit))
        throw ParseError("expected <name>/<arity>", rest_offset);
      theory.arities.declare(name, std::stoi(arity));
    } else if (keyword == "definition" || keyword == "theorem" || keyword == "buggy") {
      Assertion a;
      a.kind = keyword == "definition" ? AssertionKind::Definition
               : keyword == "theorem"  ? AssertionKind::Theorem
                                       : AssertionKind::Buggy;
      std::size_t colon;
      if (a.kind == AssertionKind::Buggy) {
        auto q1 = rest.find('"');
        auto q2 = q1 == std::string::npos ? q1 : rest.find('"', q1 + 1);
        if (q2 == std::string::npos)
          throw LoadError("buggy assertion '" + trim(rest.substr(0, rest.find(':'))) +
                          "' needs a quoted message");
        a.label = trim(rest.substr(0, q1));
        a.message = rest.substr(q1 + 1, q2 - q1 - 1);
        colon = rest.find(':', q2);
        if (trim(a.message).empty())
          throw LoadError("buggy assertion '" + a.label + "' has an empty message");
      } else {
        colon = rest.find(':');
        a.label = trim(rest.substr(0, colon == std::string::npos ? rest.size() : colon));
      }
      if (colon == std::string::npos) throw ParseError("expected ':'", rest_offset);
      if (!is_identifier(a.label)) throw ParseError("expected assertion label", rest_offset);
      if (theory.find(a.label)) throw LoadError("duplicate label '" + a.label + "'");
      a.concept_name = a.label;
      a.formula = parse_at(rest.substr(colon + 1), rest_offset + colon + 1, theory.arities, closed);
      theory.assertions.push_back(std::move(a));
    } else if (keyword == "strategy") {
      theory.strategies += d.text + "\n";
    } else {
      throw ParseError("unknown directive '" + keyword + "'", d.offset);
    }
  }
  if (theory.name.empty()) throw LoadError("theory file lacks a `theory <name>` line");
  return theory;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Theory load_theory(const std::string& path) { return parse_theory(read_file(path)); }

std::string render(const Theory& t) {
  std::ostringstream out;
  out << "theory " << t.name << "\n";
  for (const auto& [name, arity] : t.arities.symbols()) out << "symbol " << name << "/" << arity << "\n";
  for (const auto& a : t.assertions) {
    out << to_string(a.kind) << " " << a.label;
    if (a.kind == AssertionKind::Buggy) out << " \"" << a.message << "\"";
    out << ": " << render(a.formula) << "\n";
  }
  out << t.strategies;
  return out.str();
}

// ---------------------------------------------------------------------------
// Exercises

Exercise parse_exercise(std::string_view text, const std::vector<Theory>& theories) {
  Exercise ex;
  const Theory* theory = nullptr;
  std::string goal_text;
  std::size_t goal_offset = 0;
  for (const auto& d : directives(text)) {
    const std::string keyword = first_word(d.text);
    if (keyword == "exercise") {
      std::istringstream in(d.text.substr(keyword.size()));
      std::string in_kw;
      in >> ex.id >> in_kw >> ex.theory;
      if (ex.id.empty() || in_kw != "in" || ex.theory.empty())
        throw ParseError("expected `exercise <id> in <theory>`", d.offset);
      for (const auto& t : theories)
        if (t.name == ex.theory) theory = &t;
      if (!theory) throw LoadError("exercise '" + ex.id + "' references unknown theory '" + ex.theory + "'");
      continue;
    }
    auto colon = d.text.find(':');
    if (colon == std::string::npos) throw ParseError("expected '<field>: <value>'", d.offset);
    std::string field = trim(d.text.substr(0, colon));
    std::string value = trim(d.text.substr(colon + 1));
    auto number = [&]() {
      if (value.empty() || !std::all_of(value.begin(), value.end(), ::isdigit))
        throw ParseError("expected a number for '" + field + "'", d.offset + colon + 1);
      return std::stoi(value);
    };
    if (field == "goal") {
      goal_text = d.text.substr(colon + 1);
      goal_offset = d.offset + colon + 1;
    } else if (field == "depth") {
      ex.depth_limit = number();
      if (ex.depth_limit < 1) throw LoadError("depth must be at least 1");
    } else if (field == "strategy") {
      ex.strategy = value;
    } else if (field == "classifier") {
      ex.classifier = value;
    } else if (field == "mastery") {
      ex.mastery_threshold = number();
      if (ex.mastery_threshold < 1) throw LoadError("mastery threshold must be at least 1");
    } else if (field == "hints") {
      if (value == "socratic") ex.hints = HintStyle::Socratic;
      else if (value == "didactic") ex.hints = HintStyle::Didactic;
      else throw ParseError("hints must be socratic or didactic", d.offset + colon + 1);
    } else {
      throw ParseError("unknown exercise field '" + field + "'", d.offset);
    }
  }
  if (!theory) throw LoadError("exercise file lacks an `exercise <id> in <theory>` line");
  if (goal_text.empty()) throw LoadError("exercise '" + ex.id + "' has no goal");
  ex.goal = parse_at(goal_text, goal_offset, theory->arities, {.closed = false, .allow_meta = false});
  return ex;
}

// ---------------------------------------------------------------------------
// Data directory

DataDir DataDir::bundled() {
  if (const char* env = std::getenv("PROOFTUTOR_DATA")) return DataDir{env};
#ifdef PROOFTUTOR_DATA_DIR
  return DataDir{PROOFTUTOR_DATA_DIR};
#else
  return DataDir{"data"};
#endif
}

std::string DataDir::theory_path(const std::string& name) const {
  return root + "/theories/" + name + ".thy";
}
std::string DataDir::exercise_path(const std::string& id) const {
  return root + "/exercises/" + id + ".ex";
}
std::string DataDir::classifier_path(const std::string& name) const {
  // Trees are the common case; rule lists and linear scorers use their own suffix.
  for (const char* ext : {".tree", ".rules", ".linear"}) {
    std::string p = root + "/classifiers/" + name + ext;
    if (std::filesystem::exists(p)) return p;
  }
  return root + "/classifiers/" + name + ".tree";
}
std::string DataDir::template_path(const std::string& name) const {
  return root + "/templates/" + name + ".tpl";
}
std::string DataDir::corpus_path(const std::string& name) const {
  return root + "/corpus/" + name + ".corpus";
}

Theory DataDir::theory(const std::string& name) const {
  Theory t = load_theory(theory_path(name));
  if (t.name != name) throw LoadError("theory file " + theory_path(name) + " declares '" + t.name + "'");
  return t;
}

std::pair<Exercise, Theory> DataDir::exercise(const std::string& id,
                                              const std::string& theory_override) const {
  const std::string text = read_file(exercise_path(id));
  // Peek at the header to find the theory before parsing the goal.
  std::string theory_name;
  for (const auto& d : directives(text)) {
    if (first_word(d.text) == "exercise") {
      std::istringstream in(d.text);
      std::string kw, ex_id, in_kw;
      in >> kw >> ex_id >> in_kw >> theory_name;
    }
  }
  if (theory_name.empty()) throw LoadError("exercise file lacks an `exercise <id> in <theory>` line");
  if (!std::filesystem::exists(theory_path(theory_name)))
    throw LoadError("exercise '" + id + "' references unknown theory '" + theory_name + "'");
  Theory base = theory(theory_name);
  Exercise ex = parse_exercise(text, {base});
  if (!theory_override.empty() && theory_override != theory_name) {
    Theory over = theory(theory_override);
    return {ex, over};
  }
  return {ex, base};
}

namespace {

std::vector<std::string> stems(const std::string& dir, const std::string& ext) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
    if (entry.path().extension() == ext) out.push_back(entry.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::string> DataDir::exercise_ids() const { return stems(root + "/exercises", ".ex"); }
std::vector<std::string> DataDir::theory_names() const { return stems(root + "/theories", ".thy"); }

}  // namespace prooftutor
