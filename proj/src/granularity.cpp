#include "prooftutor/granularity.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <variant>

#include "prooftutor/theory.hpp"

namespace prooftutor {

namespace {

constexpr const char* kFeatures[] = {"total", "mcu", "unmastered", "hypintro", "relations",
                                     "verbalized"};

}  // namespace

bool GranularityFeatures::known(const std::string& feature) {
  return std::find(std::begin(kFeatures), std::end(kFeatures), feature) != std::end(kFeatures);
}

int GranularityFeatures::get(const std::string& feature) const {
  if (feature == "total") return total;
  if (feature == "mcu") return mcu;
  if (feature == "unmastered") return unmastered;
  if (feature == "hypintro") return hypintro;
  if (feature == "relations") return relations;
  if (feature == "verbalized") return verbalized ? 1 : 0;
  throw std::out_of_range("unknown granularity feature '" + feature + "'");
}

const char* to_string(Granularity g) {
  switch (g) {
    case Granularity::Appropriate: return "appropriate";
    case Granularity::TooSmall: return "too_small";
    case Granularity::TooBig: return "too_big";
  }
  return "?";
}

Granularity granularity_from_string(const std::string& s) {
  if (s == "appropriate") return Granularity::Appropriate;
  if (s == "too_small") return Granularity::TooSmall;
  if (s == "too_big") return Granularity::TooBig;
  throw ClassifierError("unknown verdict '" + s + "'");
}

// ---------------------------------------------------------------------------
// S-expressions

namespace {

struct Sexp {
  std::string atom;  // empty for lists
  std::vector<Sexp> items;
  bool is_list() const { return atom.empty(); }
  const std::string& head() const {
    static const std::string none;
    return items.empty() || items[0].is_list() ? none : items[0].atom;
  }
};

class SexpReader {
 public:
  explicit SexpReader(std::string_view text) : text_(text) {}

  Sexp read() {
    skip();
    if (pos_ >= text_.size()) throw ClassifierError("unexpected end of classifier");
    if (text_[pos_] == ')') throw ClassifierError("unexpected ')'");
    if (text_[pos_] == '(') {
      ++pos_;
      Sexp list;
      for (;;) {
        skip();
        if (pos_ >= text_.size()) throw ClassifierError("missing ')'");
        if (text_[pos_] == ')') {
          ++pos_;
          return list;
        }
        list.items.push_back(read());
      }
    }
    std::size_t b = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    return Sexp{std::string(text_.substr(b, pos_ - b)), {}};
  }

  void finish() {
    skip();
    if (pos_ < text_.size()) throw ClassifierError("trailing input after classifier");
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == '#' || text_[pos_] == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

int integer(const Sexp& s) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s.atom, &used);
    if (used != s.atom.size()) throw std::invalid_argument(s.atom);
    return v;
  } catch (const std::exception&) {
    throw ClassifierError("expected an integer, found '" + s.atom + "'");
  }
}

double real(const Sexp& s) {
  try {
    return std::stod(s.atom);
  } catch (const std::exception&) {
    throw ClassifierError("expected a number, found '" + s.atom + "'");
  }
}

std::string feature_name(const Sexp& s) {
  if (s.is_list() || !GranularityFeatures::known(s.atom))
    throw ClassifierError("unknown feature '" + s.atom + "'");
  return s.atom;
}

Guard guard(const Sexp& s) {
  if (!s.is_list() || s.items.empty()) throw ClassifierError("malformed guard");
  const std::string& op = s.head();
  if (op == "and") {
    Guard g{0, -1};
    for (std::size_t i = 1; i < s.items.size(); ++i) {
      Guard h = guard(s.items[i]);
      g.lo = std::max(g.lo, h.lo);
      if (h.hi >= 0) g.hi = g.hi < 0 ? h.hi : std::min(g.hi, h.hi);
    }
    return g;
  }
  if (op == "any" && s.items.size() == 1) return Guard{0, -1};
  if (s.items.size() != 2) throw ClassifierError("malformed guard '" + op + "'");
  int n = integer(s.items[1]);
  if (op == "<=") return Guard{0, n};
  if (op == "<") return Guard{0, n - 1};
  if (op == ">=") return Guard{n, -1};
  if (op == ">") return Guard{n + 1, -1};
  if (op == "=") return Guard{n, n};
  throw ClassifierError("unknown guard operator '" + op + "'");
}

bool empty(const Guard& g) { return g.lo < 0 || (g.hi >= 0 && g.hi < g.lo); }

/// Every non-negative integer satisfies exactly one guard.
void check_total(const std::vector<Guard>& guards, const std::string& feature) {
  int top = 0;
  for (const auto& g : guards) top = std::max({top, g.lo, g.hi});
  for (int v = 0; v <= top + 1; ++v) {
    int hits = 0;
    for (const auto& g : guards) hits += g.contains(v) ? 1 : 0;
    if (hits == 0)
      throw ClassifierError("guards on '" + feature + "' leave " + std::to_string(v) +
                            " uncovered");
    if (hits > 1)
      throw ClassifierError("guards on '" + feature + "' overlap at " + std::to_string(v));
  }
}

struct TreeNode {
  std::string feature;  // empty for leaves
  Granularity verdict = Granularity::Appropriate;
  std::vector<std::pair<Guard, TreeNode>> branches;
};

struct Rule {
  std::vector<std::pair<std::string, Guard>> conditions;
  Granularity verdict = Granularity::Appropriate;
};

struct RuleList {
  std::vector<Rule> rules;
  Granularity fallback = Granularity::Appropriate;
};

struct LinearClass {
  Granularity verdict = Granularity::Appropriate;
  double bias = 0;
  std::vector<std::pair<std::string, double>> weights;
};

TreeNode tree(const Sexp& s) {
  if (!s.is_list()) throw ClassifierError("expected (node ...) or (leaf ...)");
  if (s.head() == "leaf") {
    if (s.items.size() != 2) throw ClassifierError("malformed leaf");
    TreeNode n;
    n.verdict = granularity_from_string(s.items[1].atom);
    return n;
  }
  if (s.head() != "node" || s.items.size() < 3) throw ClassifierError("malformed node");
  TreeNode n;
  n.feature = feature_name(s.items[1]);
  std::vector<Guard> guards;
  for (std::size_t i = 2; i < s.items.size(); ++i) {
    const Sexp& b = s.items[i];
    if (!b.is_list() || b.items.size() != 2) throw ClassifierError("malformed branch");
    Guard g = guard(b.items[0]);
    if (empty(g)) throw ClassifierError("empty guard on '" + n.feature + "'");
    guards.push_back(g);
    n.branches.emplace_back(g, tree(b.items[1]));
  }
  check_total(guards, n.feature);
  return n;
}

RuleList rule_list(const Sexp& s) {
  RuleList out;
  bool has_default = false;
  for (std::size_t i = 1; i < s.items.size(); ++i) {
    const Sexp& r = s.items[i];
    if (r.head() == "default" && r.items.size() == 2) {
      if (i + 1 != s.items.size()) throw ClassifierError("default must be the last rule");
      out.fallback = granularity_from_string(r.items[1].atom);
      has_default = true;
      continue;
    }
    if (r.head() != "rule" || r.items.size() != 3 || !r.items[1].is_list())
      throw ClassifierError("malformed rule");
    Rule rule;
    for (const auto& c : r.items[1].items) {
      if (!c.is_list() || c.items.size() != 2) throw ClassifierError("malformed condition");
      rule.conditions.emplace_back(feature_name(c.items[0]), guard(c.items[1]));
    }
    rule.verdict = granularity_from_string(r.items[2].atom);
    out.rules.push_back(std::move(rule));
  }
  if (!has_default) throw ClassifierError("rule list needs a (default <verdict>)");
  return out;
}

std::vector<LinearClass> linear(const Sexp& s) {
  std::vector<LinearClass> out;
  for (std::size_t i = 1; i < s.items.size(); ++i) {
    const Sexp& c = s.items[i];
    if (c.head() != "class" || c.items.size() < 2) throw ClassifierError("malformed class");
    LinearClass lc;
    lc.verdict = granularity_from_string(c.items[1].atom);
    for (std::size_t j = 2; j < c.items.size(); ++j) {
      const Sexp& w = c.items[j];
      if (!w.is_list() || w.items.size() != 2) throw ClassifierError("malformed weight");
      if (w.head() == "bias")
        lc.bias = real(w.items[1]);
      else
        lc.weights.emplace_back(feature_name(w.items[0]), real(w.items[1]));
    }
    out.push_back(std::move(lc));
  }
  if (out.empty()) throw ClassifierError("linear classifier without classes");
  return out;
}

}  // namespace

struct GranularityClassifier::Impl {
  std::variant<TreeNode, RuleList, std::vector<LinearClass>> model;
};

GranularityClassifier GranularityClassifier::parse(std::string_view text) {
  SexpReader reader(text);
  Sexp s = reader.read();
  reader.finish();
  auto impl = std::make_shared<Impl>();
  if (s.head() == "rules")
    impl->model = rule_list(s);
  else if (s.head() == "linear")
    impl->model = linear(s);
  else
    impl->model = tree(s);
  GranularityClassifier c;
  c.impl_ = std::move(impl);
  return c;
}

GranularityClassifier GranularityClassifier::load(const std::string& path) {
  try {
    return parse(read_file(path));
  } catch (const ClassifierError& e) {
    throw ClassifierError(path + ": " + e.what());
  }
}

Granularity GranularityClassifier::classify(const GranularityFeatures& f) const {
  if (const auto* t = std::get_if<TreeNode>(&impl_->model)) {
    const TreeNode* n = t;
    while (!n->feature.empty()) {
      int v = std::max(0, f.get(n->feature));
      const TreeNode* next = nullptr;
      for (const auto& [g, child] : n->branches)
        if (g.contains(v)) {
          next = &child;
          break;
        }
      n = next;  // totality is checked at load time
    }
    return n->verdict;
  }
  if (const auto* r = std::get_if<RuleList>(&impl_->model)) {
    for (const auto& rule : r->rules)
      if (std::all_of(rule.conditions.begin(), rule.conditions.end(), [&](const auto& c) {
            return c.second.contains(f.get(c.first));
          }))
        return rule.verdict;
    return r->fallback;
  }
  const auto& classes = std::get<std::vector<LinearClass>>(impl_->model);
  const LinearClass* best = nullptr;
  double best_score = 0;
  for (const auto& c : classes) {
    double score = c.bias;
    for (const auto& [name, w] : c.weights) score += w * f.get(name);
    if (!best || score > best_score) {
      best = &c;
      best_score = score;
    }
  }
  return best->verdict;
}

// ---------------------------------------------------------------------------
// Features and the student model

bool StudentModel::mastered(const std::string& concept_name) const {
  auto it = concepts.find(concept_name);
  return it != concepts.end() && it->second.mastered;
}

GranularityFeatures extract_features(const std::vector<RuleApplication>& trace,
                                     const StudentModel& model, const ProofStep& step) {
  GranularityFeatures f;
  std::set<std::string> concepts;
  for (const auto& app : trace) {
    ++f.total;
    if (model.mastered(app.concept_name)) ++f.mcu;
    f.hypintro += app.hyp_intro;
    concepts.insert(app.concept_name);
  }
  f.relations = static_cast<int>(concepts.size());
  for (const auto& c : concepts)
    if (!model.mastered(c)) ++f.unmastered;
  if (auto by = step_by(step)) {
    for (const auto& app : trace)
      if (app.concept_name == *by || app.rule == *by) f.verbalized = true;
  }
  return f;
}

StudentModel update_student_model(StudentModel model, const std::vector<RuleApplication>& trace) {
  std::set<std::string> concepts;
  for (const auto& app : trace) concepts.insert(app.concept_name);
  for (const auto& c : concepts) {
    ConceptState& s = model.concepts[c];
    ++s.correct_uses;
    if (s.correct_uses >= model.threshold) s.mastered = true;
  }
  return model;
}

}  // namespace prooftutor
