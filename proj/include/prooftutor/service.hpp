#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "prooftutor/session.hpp"

namespace httplib {
class Server;
}

namespace prooftutor {

using json = nlohmann::json;

json to_json(const FeedbackVector& f);
json to_json(const StepFeedback& f);
json to_json(const Hint& h);
json to_json(const MentalProofState& s);
json trace_json(const std::vector<RuleApplication>& trace);
/// Open sequents, marked index, transcript, completion flag.
json session_json(const Session& s);

struct ServiceResponse {
  int status = 200;
  json body;
};

/// In-memory session registry behind the JSON routes. Sessions are
/// independent; calls on one session are serialized by its own mutex.
class Service {
 public:
  explicit Service(DataDir data, SessionOptions options = {});

  /// POST /sessions, GET /sessions/{id}, POST /sessions/{id}/steps,
  /// POST /sessions/{id}/hint, GET /exercises, GET /theories/{name}.
  ServiceResponse handle(const std::string& method, const std::string& path,
                         const std::string& body);

  std::size_t session_count() const;

  /// Routes every request of `server` through handle().
  void mount(httplib::Server& server);

 private:
  struct Entry {
    std::mutex mutex;
    std::unique_ptr<Session> session;
  };

  ServiceResponse create_session(const json& request);
  std::shared_ptr<Entry> find(const std::string& id) const;

  DataDir data_;
  SessionOptions options_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t next_id_ = 1;
};

}  // namespace prooftutor
