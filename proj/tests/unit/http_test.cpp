#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "prooftutor/service.hpp"

namespace pt = prooftutor;
using pt::json;

namespace {

std::string create(pt::Service& svc, const std::string& exercise = "rel-inv-comp") {
  auto r = svc.handle("POST", "/sessions", json{{"exercise", exercise}}.dump());
  EXPECT_EQ(r.status, 201);
  return r.body["session_id"].get<std::string>();
}

}  // namespace

TEST(Service, CreateAndInspect) {
  pt::Service svc(pt::DataDir::bundled());
  auto id = create(svc);
  auto r = svc.handle("GET", "/sessions/" + id, "");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["state"]["open"], json::array({"|- inv(comp(R,S)) = comp(inv(S),inv(R))"}));
  EXPECT_EQ(r.body["state"]["marked"], 0);
  EXPECT_TRUE(r.body["transcript"].empty());
  EXPECT_FALSE(r.body["proof_complete"].get<bool>());
}

TEST(Service, StepsAndHints) {
  pt::Service svc(pt::DataDir::bundled());
  auto id = create(svc);
  auto r = svc.handle("POST", "/sessions/" + id + "/steps",
                      json{{"text", "let (x,y) in inv(comp(R,S))"}}.dump());
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["feedback"],
            (json{{"soundness", "correct"}, {"granularity", "appropriate"}, {"relevance", "relevant"}}));
  EXPECT_EQ(r.body["interpretations"], 1);
  EXPECT_EQ(r.body["trace"].size(), 2u);
  EXPECT_EQ(r.body["trace"][0]["rule"], "Def-eq-bwd");

  r = svc.handle("POST", "/sessions/" + id + "/steps", json{{"text", "hence (y,x) in comp(S,R)"}}.dump());
  EXPECT_EQ(r.body["feedback"]["soundness"], "incorrect");
  EXPECT_EQ(r.body["feedback"]["granularity"], "not_applicable");

  r = svc.handle("POST", "/sessions/" + id + "/hint", "");
  ASSERT_EQ(r.status, 200);
  EXPECT_TRUE(r.body.contains("category"));
  EXPECT_FALSE(r.body["text"].get<std::string>().empty());

  auto state = svc.handle("GET", "/sessions/" + id, "").body;
  ASSERT_EQ(state["transcript"].size(), 3u);
  EXPECT_EQ(state["transcript"][2]["kind"], "hint");
  EXPECT_EQ(state["state"]["open"].size(), 2u);
}

TEST(Service, Errors) {
  pt::Service svc(pt::DataDir::bundled());
  EXPECT_EQ(svc.handle("POST", "/sessions", "{not json").status, 400);
  EXPECT_EQ(svc.handle("POST", "/sessions", "{}").status, 400);
  EXPECT_EQ(svc.handle("POST", "/sessions", json{{"exercise", "nope"}}.dump()).status, 404);
  EXPECT_EQ(svc.handle("GET", "/sessions/s999", "").status, 404);
  EXPECT_EQ(svc.handle("GET", "/nowhere", "").status, 404);
  auto id = create(svc);
  EXPECT_EQ(svc.handle("POST", "/sessions/" + id + "/steps", "{}").status, 400);
  EXPECT_EQ(svc.handle("GET", "/sessions/" + id + "/steps", "").status, 405);
  auto parse = svc.handle("POST", "/sessions/" + id + "/steps", json{{"text", "let ("}}.dump());
  EXPECT_EQ(parse.status, 200);
  EXPECT_EQ(parse.body["feedback"]["soundness"], "unknown");
}

TEST(Service, Catalogue) {
  pt::Service svc(pt::DataDir::bundled());
  auto ex = svc.handle("GET", "/exercises", "");
  ASSERT_EQ(ex.status, 200);
  ASSERT_EQ(ex.body.size(), 2u);
  EXPECT_EQ(ex.body[0]["id"], "rel-inv-comp");
  EXPECT_EQ(ex.body[0]["goal"], "inv(comp(R,S)) = comp(inv(S),inv(R))");
  auto th = svc.handle("GET", "/theories/relations", "");
  ASSERT_EQ(th.status, 200);
  EXPECT_EQ(th.body["assertions"][0]["label"], "Def-eq");
  EXPECT_EQ(svc.handle("GET", "/theories/none", "").status, 404);
}

TEST(Service, ConcurrentSessionsStayIndependent) {
  pt::Service svc(pt::DataDir::bundled());
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(create(svc));
  std::vector<std::thread> threads;
  std::vector<std::string> results(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    threads.emplace_back([&, i] {
      svc.handle("POST", "/sessions/" + ids[i] + "/steps",
                 json{{"text", "let (x,y) in inv(comp(R,S))"}}.dump());
      results[i] = svc.handle("GET", "/sessions/" + ids[i], "").body["state"].dump();
    });
  for (auto& t : threads) t.join();
  for (const auto& r : results) EXPECT_EQ(r, results[0]);
  EXPECT_EQ(svc.session_count(), 4u);
}

TEST(Http, RoundTripOverSocket) {
  pt::Service svc(pt::DataDir::bundled());
  httplib::Server server;
  svc.mount(server);
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto created = client.Post("/sessions", json{{"exercise", "rel-inv-comp"}}.dump(), "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  auto id = json::parse(created->body)["session_id"].get<std::string>();
  auto step = client.Post("/sessions/" + id + "/steps",
                          json{{"text", "let (x,y) in inv(comp(R,S))"}}.dump(), "application/json");
  ASSERT_TRUE(step);
  EXPECT_EQ(json::parse(step->body)["feedback"]["soundness"], "correct");
  auto got = client.Get("/sessions/" + id);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->get_header_value("Content-Type"), "application/json");
  EXPECT_EQ(json::parse(got->body)["transcript"].size(), 1u);

  server.stop();
  worker.join();
}
