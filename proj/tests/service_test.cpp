#include <gtest/gtest.h>

#include <unistd.h>

#include "http_support.hpp"
#include "simlab/labcli.hpp"
#include "support.hpp"

namespace simlab {
namespace {

using testing::fetch_events;
using testing::join_lines;
using testing::LiveServer;

json post(httplib::Client& c, const std::string& path, const std::string& body, int want) {
  auto res = c.Post(path, body, "application/json");
  EXPECT_TRUE(res);
  if (!res) return {};
  EXPECT_EQ(res->status, want) << path << " " << res->body;
  return json::parse(res->body);
}

json get(httplib::Client& c, const std::string& path, int want) {
  auto res = c.Get(path);
  EXPECT_TRUE(res);
  if (!res) return {};
  EXPECT_EQ(res->status, want) << path << " " << res->body;
  return json::parse(res->body);
}

std::string create(httplib::Client& c, const std::string& scenario) {
  return post(c, "/sessions", testing::read_file(testing::bundled_path(scenario)), 201)["id"];
}

TEST(Service, EventsStreamMatchesHeadlessRun) {
  LiveServer srv;
  auto c = srv.client();
  const std::string id = create(c, "arp-basic");
  post(c, "/sessions/" + id + "/control", R"({"cmd": "run", "speed": 1e12})", 200);
  const auto lines = fetch_events(c, id);
  EXPECT_EQ(join_lines(lines), run_scenario_trace(testing::bundled("arp-basic"), {}));
  EXPECT_EQ(get(c, "/sessions/" + id, 200)["mode"], "finished");
}

TEST(Service, StepAndResumeFromSeq) {
  LiveServer srv;
  auto c = srv.client();
  const std::string id = create(c, "ping-wan");
  const json st = post(c, "/sessions/" + id + "/control", R"({"cmd": "step", "n": 5})", 200);
  EXPECT_EQ(st["dispatched"], 5);
  const auto head = fetch_events(c, id, 0, false);
  ASSERT_FALSE(head.empty());
  post(c, "/sessions/" + id + "/control", R"({"cmd": "run", "speed": 1e12})", 200);
  const auto tail = fetch_events(c, id, head.size());
  std::vector<std::string> all = head;
  all.insert(all.end(), tail.begin(), tail.end());
  EXPECT_EQ(join_lines(all), run_scenario_trace(testing::bundled("ping-wan"), {}));
}

TEST(Service, StepWhileRunningConflicts) {
  LiveServer srv;
  auto c = srv.client();
  const std::string id = create(c, "rip-line-3");
  post(c, "/sessions/" + id + "/control", R"({"cmd": "run", "speed": 1})", 200);
  const json err = post(c, "/sessions/" + id + "/control", R"({"cmd": "step"})", 409);
  EXPECT_EQ(err["code"], "bad_state");
  post(c, "/sessions/" + id + "/control", R"({"cmd": "pause"})", 200);
  post(c, "/sessions/" + id + "/control", R"({"cmd": "step"})", 200);
}

TEST(Service, ErrorsMapToStatusCodes) {
  LiveServer srv;
  auto c = srv.client();
  EXPECT_EQ(get(c, "/sessions/nope", 404)["code"], "unknown_session");
  const json bad = post(c, "/sessions", R"({"meta": {"name": "x"}})", 400);
  EXPECT_EQ(bad["code"], "missing_field");
  EXPECT_FALSE(bad["path"].get<std::string>().empty());
  EXPECT_EQ(post(c, "/sessions", "{", 400)["code"], "syntax_error");
  const std::string id = create(c, "arp-basic");
  EXPECT_EQ(post(c, "/sessions/" + id + "/control", R"({"cmd": "fly"})", 400)["code"], "out_of_range");
  EXPECT_EQ(post(c, "/sessions/" + id + "/inject", R"({"action": "power", "node": "ZZ", "state": "off"})", 400)["code"],
            "unknown_ref");
  auto del = c.Delete("/sessions/" + id);
  ASSERT_TRUE(del);
  EXPECT_EQ(del->status, 200);
  EXPECT_EQ(get(c, "/sessions/" + id, 404)["code"], "unknown_session");
}

TEST(Service, InjectionsReplayThroughTheAddendum) {
  LiveServer srv;
  auto c = srv.client();
  const std::string id = create(c, "rip-line-3");
  const Scenario s = testing::bundled("rip-line-3");
  const std::string base = "/sessions/" + id;
  post(c, base + "/control", R"({"cmd": "step", "n": 40})", 200);
  post(c, base + "/inject", json{{"action", "break_link"}, {"segment", s.segments[0].name}}.dump(), 200);
  post(c, base + "/control", R"({"cmd": "step", "n": 25})", 200);
  post(c, base + "/inject", json{{"action", "restore_link"}, {"segment", s.segments[0].name}}.dump(), 200);
  post(c, base + "/control", R"({"cmd": "step", "n": 3})", 200);
  post(c, base + "/inject", json{{"action", "power"}, {"node", s.nodes[0].name}, {"state", "off"}}.dump(), 200);
  post(c, base + "/control", R"({"cmd": "run", "speed": 1e12})", 200);
  const auto lines = fetch_events(c, id);
  const json add = get(c, base + "/addendum", 200);
  ASSERT_EQ(add["injections"].size(), 3u);
  EXPECT_EQ(join_lines(lines), run_scenario_trace(s, {}, &add));
}

TEST(Service, SnapshotReportsState) {
  LiveServer srv;
  auto c = srv.client();
  const std::string id = create(c, "arp-basic");
  post(c, "/sessions/" + id + "/control", R"({"cmd": "step", "n": 3})", 200);
  const json snap = get(c, "/sessions/" + id + "/snapshot", 200);
  EXPECT_EQ(snap["session"], id);
  EXPECT_EQ(snap["mode"], "paused");
  EXPECT_EQ(snap["next_seq"].get<std::size_t>(), fetch_events(c, id, 0, false).size());
  EXPECT_TRUE(snap.contains("nodes"));
}

TEST(Service, EvictedRecordsAreGone) {
  LiveServer srv(20);
  auto c = srv.client();
  const std::string id = create(c, "rip-line-3");
  post(c, "/sessions/" + id + "/control", R"({"cmd": "step", "n": 200})", 200);
  auto res = c.Get("/sessions/" + id + "/events?from_seq=0&follow=0");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 410);
  EXPECT_EQ(json::parse(res->body)["code"], "seq_too_old");
}

TEST(Service, ResetRestartsTheRun) {
  LiveServer srv;
  auto c = srv.client();
  const std::string id = create(c, "arp-basic");
  post(c, "/sessions/" + id + "/control", R"({"cmd": "step", "n": 10})", 200);
  const json r = post(c, "/sessions/" + id + "/control", R"({"cmd": "reset"})", 200);
  EXPECT_EQ(r["at"], 0);
  EXPECT_EQ(r["mode"], "paused");
  post(c, "/sessions/" + id + "/control", R"({"cmd": "run", "speed": 1e12})", 200);
  EXPECT_EQ(join_lines(fetch_events(c, id)), run_scenario_trace(testing::bundled("arp-basic"), {}));
}

TEST(Service, ScenarioStore) {
  LiveServer srv;
  auto c = srv.client();
  EXPECT_EQ(get(c, "/scenarios", 200)["scenarios"], json::array());
  const std::string text = testing::read_file(testing::bundled_path("arp-basic"));
  auto put = c.Put("/scenarios/mine", text, "application/json");
  ASSERT_TRUE(put);
  EXPECT_EQ(put->status, 200);
  auto bad = c.Put("/scenarios/broken", R"({"nodes": []})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(get(c, "/scenarios", 200)["scenarios"], json::array({"mine"}));
  auto back = c.Get("/scenarios/mine");
  ASSERT_TRUE(back);
  EXPECT_EQ(back->body, text);
  EXPECT_EQ(get(c, "/scenarios/other", 404)["code"], "unknown_ref");
}

}  // namespace
}  // namespace simlab
