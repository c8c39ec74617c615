#include <gtest/gtest.h>

#include "simlab/error.hpp"
#include "support.hpp"

namespace simlab {
namespace {

json minimal() {
  return json::parse(R"({
    "meta": {"name": "m", "seed": 3},
    "nodes": [{"name": "A"}, {"name": "B"}],
    "segments": [{"name": "lan"}],
    "interfaces": [
      {"node": "A", "segment": "lan", "ip": "10.0.0.1/24"},
      {"node": "B", "segment": "lan", "ip": "10.0.0.2/24"}
    ],
    "script": [{"at": "1s", "action": "ping", "node": "A", "dst": "10.0.0.2"}]
  })");
}

struct Bad {
  const char* label;
  std::function<void(json&)> mutate;
  Errc code;
  std::string path;
};

TEST(Scenario, ValidationReportsCodeAndPath) {
  const std::vector<Bad> cases{
      {"missing nodes", [](json& d) { d.erase("nodes"); }, Errc::missing_field, "/nodes"},
      {"seed type", [](json& d) { d["meta"]["seed"] = "x"; }, Errc::bad_type, "/meta/seed"},
      {"dup node", [](json& d) { d["nodes"][1]["name"] = "A"; }, Errc::duplicate_name, "/nodes/1/name"},
      {"dup ip", [](json& d) { d["interfaces"][1]["ip"] = "10.0.0.1/24"; }, Errc::duplicate_ip,
       "/interfaces/1/ip"},
      {"unknown segment", [](json& d) { d["interfaces"][0]["segment"] = "wan"; }, Errc::unknown_ref,
       "/interfaces/0/segment"},
      {"noise range", [](json& d) { d["segments"][0]["noise"] = 1.5; }, Errc::out_of_range, "/segments/0/noise"},
      {"time order",
       [](json& d) { d["script"].push_back({{"at", "500ms"}, {"action", "power"}, {"node", "B"}, {"state", "off"}}); },
       Errc::bad_time_order, "/script/1/at"},
      {"unknown action", [](json& d) { d["script"][0]["action"] = "teleport"; }, Errc::out_of_range,
       "/script/0/action"},
      {"action node", [](json& d) { d["script"][0]["node"] = "Z"; }, Errc::unknown_ref, "/script/0/node"},
      {"rip on host", [](json& d) { d["nodes"][0]["rip"] = true; }, Errc::out_of_range, "/nodes/0/rip"},
  };
  for (const Bad& c : cases) {
    json doc = minimal();
    c.mutate(doc);
    try {
      scenario_from_json(doc);
      ADD_FAILURE() << c.label << ": accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), c.code) << c.label << ": " << e.what();
      EXPECT_EQ(e.path(), c.path) << c.label;
    }
  }
}

TEST(Scenario, SyntaxErrorNamesTheLine) {
  try {
    parse_scenario("{\n  \"meta\": ,\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::syntax_error);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Scenario, BundledScenariosRoundTrip) {
  for (const auto& name : testing::bundled_names()) {
    const Scenario s = testing::bundled(name);
    EXPECT_EQ(s.meta.name, name);
    const Scenario again = parse_scenario(serialize_scenario(s));
    EXPECT_EQ(again, s) << name;
  }
}

TEST(Scenario, DurationsAcceptTicksAndSuffixes) {
  EXPECT_EQ(parse_time(json(1500), "/x"), SimTime{1500});
  EXPECT_EQ(parse_time(json("2ms"), "/x"), SimTime::ms(2));
  EXPECT_EQ(parse_time(json("3s"), "/x"), SimTime::sec(3));
  EXPECT_THROW(parse_time(json("3 parsecs"), "/x"), Error);
  EXPECT_THROW(parse_time(json(-1), "/x"), Error);
}

}  // namespace
}  // namespace simlab
