#include <gtest/gtest.h>

#include "simlab/error.hpp"
#include "support.hpp"

namespace simlab {
namespace {

using testing::only;

json lan_doc() {
  return json::parse(R"({
    "meta": {"name": "lan", "seed": 5},
    "nodes": [{"name": "A"}, {"name": "B"}, {"name": "C"}],
    "segments": [{"name": "lan", "latency": "1ms"}],
    "interfaces": [
      {"node": "A", "segment": "lan", "ip": "10.0.0.1/24"},
      {"node": "B", "segment": "lan", "ip": "10.0.0.2/24"},
      {"node": "C", "segment": "lan", "ip": "10.0.0.3/24"}
    ],
    "script": []
  })");
}

std::vector<Observation> run_doc(const json& doc, SimTime until) {
  return testing::run_all(scenario_from_json(doc), std::nullopt, until);
}

bool arp_request(const json& d) { return d["proto"] == "arp" && d["op"] == "request"; }
bool arp_frame(const json& d) { return d["proto"] == "arp"; }

TEST(Arp, FirstContactBroadcastsOnceThenHitsCache) {
  json doc = lan_doc();
  doc["script"] = json::parse(R"([
    {"at": "1s", "action": "ping", "node": "A", "dst": "10.0.0.2", "count": 3},
    {"at": "10s", "action": "ping", "node": "A", "dst": "10.0.0.2", "count": 3}
  ])");
  auto obs = run_doc(doc, SimTime::sec(20));
  auto requests = only(obs, ObsKind::frame_sent, arp_request);
  ASSERT_EQ(requests.size(), 1u);
  EXPECT_EQ(requests[0].detail["dst_hw"], "ff:ff:ff:ff:ff:ff");
  EXPECT_EQ(requests[0].at, SimTime::sec(1));
  // B learned A from the request, so its replies need no ARP either.
  EXPECT_EQ(only(obs, ObsKind::frame_sent, arp_frame).size(), 2u);
  auto late = only(obs, ObsKind::frame_sent, arp_frame);
  for (const auto& o : late) EXPECT_LT(o.at, SimTime::sec(10));
  // C heard the broadcast but had no entry for A, so it learns nothing.
  EXPECT_TRUE(only(obs, ObsKind::cache_changed, [](const json& d) { return d["node"] == "C"; }).empty());
}

TEST(Arp, UnansweredTargetRetriesThenFails) {
  json doc = lan_doc();
  doc["nodes"][1]["power"] = "off";
  doc["script"] = json::parse(R"([{"at": "2s", "action": "send", "node": "A", "dst": "10.0.0.2", "text": "x"}])");
  auto obs = run_doc(doc, SimTime::sec(20));
  auto requests = only(obs, ObsKind::frame_sent, arp_request);
  ASSERT_EQ(requests.size(), 3u);
  EXPECT_EQ(requests[0].at, SimTime::sec(2));
  EXPECT_EQ(requests[1].at, SimTime::sec(3));
  EXPECT_EQ(requests[2].at, SimTime::sec(4));
  auto failed = only(obs, ObsKind::resolution_failed);
  ASSERT_EQ(failed.size(), 1u);
  EXPECT_EQ(failed[0].at, SimTime::sec(5));
  EXPECT_EQ(failed[0].detail["ip"], "10.0.0.2");
  EXPECT_EQ(failed[0].detail["dropped"], 1);
}

TEST(Arp, ReplyReleasesEveryQueuedPacket) {
  json doc = lan_doc();
  doc["script"] = json::parse(R"([
    {"at": "1s", "action": "send", "node": "A", "dst": "10.0.0.2", "text": "one"},
    {"at": "1s", "action": "send", "node": "A", "dst": "10.0.0.2", "text": "two"}
  ])");
  auto obs = run_doc(doc, SimTime::sec(5));
  EXPECT_EQ(only(obs, ObsKind::frame_sent, arp_request).size(), 1u);
  auto reply = only(obs, ObsKind::frame_delivered, [](const json& d) { return d["proto"] == "arp" && d["node"] == "A"; });
  ASSERT_EQ(reply.size(), 1u);
  auto ip_out = only(obs, ObsKind::frame_sent, [](const json& d) { return d["proto"] == "ip" && d["node"] == "A"; });
  ASSERT_EQ(ip_out.size(), 2u);
  for (const auto& o : ip_out) EXPECT_EQ(o.at, reply[0].at);
  auto got = only(obs, ObsKind::packet_delivered, [](const json& d) { return d["node"] == "B"; });
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].detail["data"], "one");
  EXPECT_EQ(got[1].detail["data"], "two");
}

TEST(Arp, CorruptedReplyLeavesCacheAlone) {
  json doc = lan_doc();
  doc["nodes"] = json::parse(R"([{"name": "A"}, {"name": "B"}])");
  doc["interfaces"].erase(2);
  // Frame 0 is A's request, frame 1 B's reply.
  doc["script"] = json::parse(R"([
    {"at": 0, "action": "force_corrupt", "segment": "lan", "n": 2},
    {"at": "1s", "action": "send", "node": "A", "dst": "10.0.0.2", "text": "x"}
  ])");
  Runner r(scenario_from_json(doc));
  r.set_until(SimTime::sec(1) + SimTime::ms(5));
  auto obs = r.run_to_end();
  ASSERT_EQ(only(obs, ObsKind::frame_corrupted).size(), 1u);
  const NodeId a = *r.sim().net().find_node("A");
  EXPECT_FALSE(r.sim().arp().cache(a).contains(*Ipv4::parse("10.0.0.2")));
  EXPECT_TRUE(only(obs, ObsKind::cache_changed, [](const json& d) { return d["node"] == "A"; }).empty());
  // The retry a second later succeeds.
  r.set_until(SimTime::sec(3));
  r.run_to_end();
  EXPECT_TRUE(r.sim().arp().cache(a).contains(*Ipv4::parse("10.0.0.2")));
}

TEST(Arp, EntryExpiresAfterTtl) {
  json doc = lan_doc();
  doc["config"] = {{"arp", {{"ttl", "5s"}, {"sweep_interval", "1s"}}}};
  doc["script"] = json::parse(R"([
    {"at": "1s", "action": "send", "node": "A", "dst": "10.0.0.2", "text": "a"},
    {"at": "20s", "action": "send", "node": "A", "dst": "10.0.0.2", "text": "b"}
  ])");
  auto obs = run_doc(doc, SimTime::sec(30));
  auto removed = only(obs, ObsKind::cache_changed,
                      [](const json& d) { return d["node"] == "A" && d["action"] == "remove"; });
  ASSERT_EQ(removed.size(), 2u);  // one per learned entry
  EXPECT_EQ(removed[0].detail["reason"], "expired");
  EXPECT_GT(removed[0].at, SimTime::sec(6));
  EXPECT_LE(removed[0].at, SimTime::sec(8));
  EXPECT_EQ(only(obs, ObsKind::frame_sent, [](const json& d) { return arp_request(d) && d["node"] == "A"; }).size(), 2u);
}

TEST(Arp, OffSubnetResolveThrows) {
  Runner r(scenario_from_json(lan_doc()));
  const NodeId a = *r.sim().net().find_node("A");
  const InterfaceId ia = r.sim().net().node(a).interfaces[0];
  try {
    r.sim().arp().resolve(ia, *Ipv4::parse("10.9.0.1"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::off_subnet);
  }
}

json rarp_doc() {
  return json::parse(R"({
    "meta": {"name": "rarp", "seed": 9},
    "nodes": [{"name": "S"}, {"name": "C1", "boot": "rarp"}, {"name": "C2", "boot": "rarp"}],
    "segments": [{"name": "lan", "latency": "2ms"}],
    "interfaces": [
      {"node": "S", "segment": "lan", "ip": "192.168.1.1/24"},
      {"node": "C1", "segment": "lan", "ip": null},
      {"node": "C2", "segment": "lan", "ip": null}
    ],
    "rarp": [{"server": "S", "entries": [{"node": "C1", "ip": "192.168.1.21"}, {"node": "C2", "ip": "192.168.1.22"}]}],
    "script": []
  })");
}

TEST(Rarp, RacingBootsEachGetTheirOwnAddress) {
  Runner r(scenario_from_json(rarp_doc()));
  r.set_until(SimTime::sec(2));
  auto obs = r.run_to_end();
  auto assigned = only(obs, ObsKind::cache_changed, [](const json& d) { return d["action"] == "assign"; });
  ASSERT_EQ(assigned.size(), 2u);
  std::map<std::string, std::string> got;
  for (const auto& o : assigned) got[o.detail["node"]] = o.detail["ip"];
  EXPECT_EQ(got["C1"], "192.168.1.21");
  EXPECT_EQ(got["C2"], "192.168.1.22");
  for (const auto& o : assigned) EXPECT_EQ(o.at, SimTime::ms(4));
}

TEST(Rarp, PowerCycleAsksAgainWithinOneLatency) {
  json doc = rarp_doc();
  doc["script"] = json::parse(R"([
    {"at": "5s", "action": "power", "node": "C1", "state": "off"},
    {"at": "7s", "action": "power", "node": "C1", "state": "on"}
  ])");
  Runner r(scenario_from_json(doc));
  r.set_until(SimTime::sec(10));
  auto obs = r.run_to_end();
  auto requests = only(obs, ObsKind::frame_sent,
                       [](const json& d) { return d["proto"] == "rarp" && d["node"] == "C1" && d["op"] == "request"; });
  ASSERT_EQ(requests.size(), 2u);
  EXPECT_GE(requests[1].at, SimTime::sec(7));
  EXPECT_LE(requests[1].at, SimTime::sec(7) + SimTime::ms(2));
  const NodeId c1 = *r.sim().net().find_node("C1");
  EXPECT_EQ(r.sim().net().iface(r.sim().net().node(c1).interfaces[0]).ip, Ipv4::parse("192.168.1.21"));
}

TEST(Rarp, NoServerMappingFailsAfterRetries) {
  json doc = rarp_doc();
  doc["rarp"][0]["entries"].erase(1);
  auto obs = run_doc(doc, SimTime::sec(10));
  auto failed = only(obs, ObsKind::resolution_failed, [](const json& d) { return d["proto"] == "rarp"; });
  ASSERT_EQ(failed.size(), 1u);
  EXPECT_EQ(failed[0].detail["node"], "C2");
  EXPECT_EQ(failed[0].at, SimTime::sec(3));
}

TEST(Rarp, BootOnConfiguredHostIsRejected) {
  Runner r(scenario_from_json(rarp_doc()));
  try {
    r.sim().arp().rarp_boot(*r.sim().net().find_node("S"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::already_configured);
  }
}

}  // namespace
}  // namespace simlab
