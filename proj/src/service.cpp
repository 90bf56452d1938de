#include "prooftutor/service.hpp"

#include <httplib.h>

#include <regex>

namespace prooftutor {

json to_json(const FeedbackVector& f) {
  json out{{"soundness", to_string(f.soundness)},
           {"granularity", granularity_text(f.granularity)},
           {"relevance", to_string(f.relevance)}};
  if (f.soundness == Soundness::Buggy) out["buggy_message"] = f.buggy_message;
  return out;
}

json trace_json(const std::vector<RuleApplication>& trace) {
  json out = json::array();
  for (const auto& app : trace)
    out.push_back({{"rule", app.rule},
                   {"substitution", render(app.subst)},
                   {"produced", app.produced_labels}});
  return out;
}

json to_json(const StepFeedback& f) {
  return {{"feedback", to_json(f.feedback)},
          {"messages", f.messages},
          {"proof_complete", f.proof_complete},
          {"interpretations", f.interpretations},
          {"trace", trace_json(f.trace)}};
}

json to_json(const Hint& h) {
  return {{"category", h.category}, {"text", h.text}};
}

json to_json(const MentalProofState& s) {
  json open = json::array();
  for (const auto& q : s.open) open.push_back(render(q));
  return {{"open", open}, {"marked", s.marked}};
}

json session_json(const Session& s) {
  json transcript = json::array();
  for (const auto& e : s.transcript()) {
    if (e.step)
      transcript.push_back({{"kind", "step"}, {"text", e.text}, {"result", to_json(*e.step)}});
    else if (e.hint)
      transcript.push_back({{"kind", "hint"}, {"hint", to_json(*e.hint)}});
  }
  json state = s.states().empty() ? json{{"open", json::array()}, {"marked", 0}}
                                  : to_json(s.states().front());
  state["interpretations"] = s.states().size();
  return {{"session_id", s.id()},
          {"exercise", s.exercise().id},
          {"state", state},
          {"transcript", transcript},
          {"proof_complete", s.complete()}};
}

namespace {

ServiceResponse error(int status, const std::string& message) {
  return {status, json{{"error", message}}};
}

}  // namespace

Service::Service(DataDir data, SessionOptions options)
    : data_(std::move(data)), options_(options) {}

std::size_t Service::session_count() const {
  std::lock_guard lock(registry_mutex_);
  return sessions_.size();
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

ServiceResponse Service::create_session(const json& request) {
  if (!request.contains("exercise") || !request["exercise"].is_string())
    return error(400, "missing field: exercise");
  std::string theory = request.value("theory", "");
  auto entry = std::make_shared<Entry>();
  std::string id;
  {
    std::lock_guard lock(registry_mutex_);
    id = "s" + std::to_string(next_id_++);
  }
  try {
    auto [ex, th] = data_.exercise(request["exercise"].get<std::string>(), theory);
    entry->session = std::make_unique<Session>(id, ex, th, data_, options_);
  } catch (const std::exception& e) {
    return error(404, e.what());
  }
  json body{{"session_id", id}, {"state", session_json(*entry->session)["state"]}};
  {
    std::lock_guard lock(registry_mutex_);
    sessions_.emplace(id, entry);
  }
  return {201, body};
}

ServiceResponse Service::handle(const std::string& method, const std::string& path,
                                const std::string& body) {
  static const std::regex session_re(R"(^/sessions/([A-Za-z0-9_-]+)(/steps|/hint)?$)");
  static const std::regex theory_re(R"(^/theories/([A-Za-z0-9_-]+)$)");

  json request = json::object();
  if (method == "POST" && !body.empty()) {
    request = json::parse(body, nullptr, false);
    if (request.is_discarded() || !request.is_object()) return error(400, "malformed JSON body");
  }

  std::smatch m;
  if (path == "/sessions") {
    if (method != "POST") return error(405, "method not allowed");
    return create_session(request);
  }
  if (path == "/exercises") {
    if (method != "GET") return error(405, "method not allowed");
    json out = json::array();
    for (const auto& id : data_.exercise_ids()) {
      try {
        auto [ex, th] = data_.exercise(id);
        out.push_back({{"id", ex.id}, {"theory", ex.theory}, {"goal", render(ex.goal)}});
      } catch (const std::exception&) {
        // unloadable exercises are not offered
      }
    }
    return {200, out};
  }
  if (std::regex_match(path, m, theory_re)) {
    if (method != "GET") return error(405, "method not allowed");
    try {
      Theory th = data_.theory(m[1]);
      json assertions = json::array();
      for (const auto& a : th.assertions)
        assertions.push_back(
            {{"label", a.label}, {"kind", to_string(a.kind)}, {"formula", render(a.formula)}});
      return {200, {{"name", th.name}, {"assertions", assertions}, {"text", render(th)}}};
    } catch (const std::exception& e) {
      return error(404, e.what());
    }
  }
  if (std::regex_match(path, m, session_re)) {
    auto entry = find(m[1]);
    if (!entry) return error(404, "unknown session " + m[1].str());
    std::string action = m[2];
    std::lock_guard lock(entry->mutex);
    Session& s = *entry->session;
    if (action.empty()) {
      if (method != "GET") return error(405, "method not allowed");
      return {200, session_json(s)};
    }
    if (method != "POST") return error(405, "method not allowed");
    if (s.complete()) return error(409, "proof already complete");
    if (action == "/steps") {
      if (!request.contains("text") || !request["text"].is_string())
        return error(400, "missing field: text");
      return {200, to_json(s.submit_step(request["text"].get<std::string>()))};
    }
    return {200, to_json(s.request_hint())};
  }
  return error(404, "no route for " + path);
}

void Service::mount(httplib::Server& server) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    ServiceResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(R"(/.*)", route);
  server.Post(R"(/.*)", route);
  server.Put(R"(/.*)", route);
  server.Delete(R"(/.*)", route);
}

}  // namespace prooftutor
