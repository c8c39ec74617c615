#include <gtest/gtest.h>

#include "support.hpp"

namespace simlab {
namespace {

using testing::Chain;
using testing::chain_doc;
using testing::only;

Ipv4 ip(const std::string& text) { return *Ipv4::parse(text); }

struct Run {
  std::unique_ptr<Runner> runner;
  std::vector<Observation> obs;

  const Ip& ip() const { return runner->sim().ip(); }
};

Run run(json doc, json script, SimTime until) {
  doc["script"] = std::move(script);
  Run r;
  r.runner = std::make_unique<Runner>(scenario_from_json(doc));
  r.runner->set_until(until);
  r.obs = r.runner->run_to_end();
  return r;
}

TEST(Ping, RttIsTwiceThePathLatency) {
  const Chain c{{"H", "R1", "S"}, {2, 2}, false};
  auto r = run(chain_doc(c), json::array({{{"at", "1s"}, {"action", "ping"}, {"node", "H"}, {"dst", "10.0.1.2"}}}),
               SimTime::sec(10));
  ASSERT_EQ(r.ip().ping_reports().size(), 1u);
  const PingReport& rep = r.ip().ping_reports()[0];
  EXPECT_EQ(rep.sent, 4);
  EXPECT_EQ(rep.received, 4);
  for (const ProbeResult& p : rep.probes) {
    EXPECT_EQ(p.outcome, ProbeOutcome::reply);
    EXPECT_EQ(p.rtt, SimTime::ms(8));
    EXPECT_EQ(p.responder, ip("10.0.1.2"));
  }
  // Only the first probe waits on address resolution (both hops).
  EXPECT_EQ(rep.probes[0].arp_wait, SimTime::ms(8));
  EXPECT_EQ(rep.probes[1].arp_wait, SimTime{});
  EXPECT_EQ(rep.min_rtt, SimTime::ms(8));
  EXPECT_EQ(rep.max_rtt, SimTime::ms(8));

  auto reports = only(r.obs, ObsKind::report);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].detail["procedure"], "ping");
  EXPECT_EQ(reports[0].detail["avg_rtt"], 8000);
}

TEST(Ping, ProbesLeaveAtTheConfiguredInterval) {
  const Chain c{{"H", "R1", "S"}, {1, 1}, false};
  auto r = run(chain_doc(c),
               json::array({{{"at", "1s"}, {"action", "ping"}, {"node", "H"}, {"dst", "10.0.1.2"}, {"count", 3},
                             {"interval", "250ms"}}}),
               SimTime::sec(10));
  const PingReport& rep = r.ip().ping_reports().at(0);
  ASSERT_EQ(rep.probes.size(), 3u);
  EXPECT_EQ(rep.probes[0].sent_at, SimTime::sec(1));
  EXPECT_EQ(rep.probes[1].sent_at, SimTime::ms(1250));
  EXPECT_EQ(rep.probes[2].sent_at, SimTime::ms(1500));
}

TEST(Ping, LostRepliesTimeOut) {
  const Chain c{{"H", "R1", "S"}, {1, 1}, false};
  auto r = run(chain_doc(c),
               json::array({{{"at", "1s"}, {"action", "ping"}, {"node", "H"}, {"dst", "10.0.1.2"}, {"count", 2}},
                            {{"at", "1500ms"}, {"action", "break_link"}, {"segment", "s1"}}}),
               SimTime::sec(10));
  const PingReport& rep = r.ip().ping_reports().at(0);
  EXPECT_EQ(rep.probes[0].outcome, ProbeOutcome::reply);
  EXPECT_EQ(rep.probes[1].outcome, ProbeOutcome::timeout);
  EXPECT_EQ(rep.received, 1);
}

TEST(Ping, NoRouteGivesDestinationUnreachable) {
  const Chain c{{"H", "R1", "S"}, {1, 1}, false};
  auto r = run(chain_doc(c),
               json::array({{{"at", "1s"}, {"action", "ping"}, {"node", "H"}, {"dst", "10.99.0.1"}, {"count", 1}}}),
               SimTime::sec(10));
  const PingReport& rep = r.ip().ping_reports().at(0);
  EXPECT_EQ(rep.probes[0].outcome, ProbeOutcome::unreachable);
  EXPECT_EQ(rep.probes[0].responder, ip("10.0.0.2"));
  EXPECT_EQ(only(r.obs, ObsKind::icmp_emitted, [](const json& d) { return d["type"] == "dest_unreachable"; }).size(),
            1u);
}

TEST(Ip, TtlExpiryAtFirstRouter) {
  const Chain c{{"H", "R1", "R2", "S"}, {1, 1, 1}, false};
  auto r = run(chain_doc(c),
               json::array({{{"at", "1s"}, {"action", "send"}, {"node", "H"}, {"dst", "10.0.2.2"}, {"ttl", 1},
                             {"text", "short"}}}),
               SimTime::sec(5));
  auto dropped = only(r.obs, ObsKind::packet_dropped, [](const json& d) { return d["reason"] == "ttl_expired"; });
  ASSERT_EQ(dropped.size(), 1u);
  EXPECT_EQ(dropped[0].detail["node"], "R1");
  auto icmp = only(r.obs, ObsKind::icmp_emitted, [](const json& d) { return d["type"] == "time_exceeded"; });
  ASSERT_EQ(icmp.size(), 1u);
  EXPECT_EQ(icmp[0].detail["node"], "R1");
  EXPECT_TRUE(only(r.obs, ObsKind::packet_delivered, [](const json& d) { return d["node"] == "S"; }).empty());
}

TEST(Ip, DataReachesFarHostWithTtlDecrementedPerRouter) {
  const Chain c{{"H", "R1", "R2", "S"}, {1, 1, 1}, false};
  auto r = run(chain_doc(c),
               json::array({{{"at", "1s"}, {"action", "send"}, {"node", "H"}, {"dst", "10.0.2.2"}, {"text", "hi"}}}),
               SimTime::sec(5));
  auto got = only(r.obs, ObsKind::packet_delivered, [](const json& d) { return d["node"] == "S"; });
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].detail["data"], "hi");
  EXPECT_EQ(got[0].detail["ttl"], 62);
}

std::vector<std::optional<Ipv4>> responders(const TracerouteReport& rep) {
  std::vector<std::optional<Ipv4>> out;
  for (const auto& h : rep.hops) out.push_back(h.responder);
  return out;
}

TEST(Traceroute, ListsEachRouterThenTheDestination) {
  const Chain c{{"H", "R1", "R2", "R3", "D"}, {1, 3, 4, 1}, false};
  auto r = run(chain_doc(c),
               json::array({{{"at", "1s"}, {"action", "traceroute"}, {"node", "H"}, {"dst", "10.0.3.2"}}}),
               SimTime::sec(60));
  ASSERT_EQ(r.ip().traceroute_reports().size(), 1u);
  const TracerouteReport& rep = r.ip().traceroute_reports()[0];
  EXPECT_TRUE(rep.reached);
  EXPECT_EQ(responders(rep), (std::vector<std::optional<Ipv4>>{ip("10.0.0.2"), ip("10.0.1.2"), ip("10.0.2.2"),
                                                                 ip("10.0.3.2")}));
  for (const auto& h : rep.hops) EXPECT_EQ(h.probes.size(), 3u);
  EXPECT_EQ(rep.hops.back().probes.back().outcome, ProbeOutcome::reply);
  EXPECT_EQ(rep.hops[1].probes[1].rtt, SimTime::ms(8));
}

TEST(Traceroute, HopsPastABreakTimeOut) {
  const Chain c{{"H", "R1", "R2", "R3", "D"}, {1, 1, 1, 1}, false};
  auto r = run(chain_doc(c),
               json::array({{{"at", 0}, {"action", "break_link"}, {"segment", "s1"}},
                            {{"at", "1s"},
                             {"action", "traceroute"},
                             {"node", "H"},
                             {"dst", "10.0.3.2"},
                             {"max_ttl", 5},
                             {"probes", 1}}}),
               SimTime::sec(60));
  const TracerouteReport& rep = r.ip().traceroute_reports().at(0);
  EXPECT_FALSE(rep.reached);
  ASSERT_EQ(rep.hops.size(), 5u);
  EXPECT_EQ(rep.hops[0].responder, ip("10.0.0.2"));
  for (std::size_t i = 1; i < rep.hops.size(); ++i) {
    EXPECT_FALSE(rep.hops[i].responder) << "ttl " << rep.hops[i].ttl;
    EXPECT_EQ(rep.hops[i].probes.at(0).outcome, ProbeOutcome::timeout);
  }
}

TEST(Traceroute, StopsAtMaxTtl) {
  const Chain c{{"H", "R1", "R2", "R3", "D"}, {1, 1, 1, 1}, false};
  auto r = run(chain_doc(c),
               json::array({{{"at", "1s"},
                             {"action", "traceroute"},
                             {"node", "H"},
                             {"dst", "10.0.3.2"},
                             {"max_ttl", 2},
                             {"probes", 2}}}),
               SimTime::sec(60));
  const TracerouteReport& rep = r.ip().traceroute_reports().at(0);
  EXPECT_FALSE(rep.reached);
  EXPECT_EQ(rep.hops.size(), 2u);
}

TEST(Power, OffNodeAbandonsItsProcedures) {
  const Chain c{{"H", "R1", "S"}, {1, 1}, false};
  auto r = run(chain_doc(c),
               json::array({{{"at", "1s"}, {"action", "ping"}, {"node", "H"}, {"dst", "10.0.1.2"}, {"count", 10}},
                            {{"at", "3500ms"}, {"action", "power"}, {"node", "H"}, {"state", "off"}}}),
               SimTime::sec(20));
  EXPECT_TRUE(r.ip().ping_reports().empty());
  auto sent = only(r.obs, ObsKind::frame_sent, [](const json& d) { return d["node"] == "H"; });
  for (const auto& o : sent) EXPECT_LT(o.at, SimTime::ms(3500));
}

}  // namespace
}  // namespace simlab
