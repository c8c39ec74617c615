#include <gtest/gtest.h>

#include "simlab/error.hpp"
#include "support.hpp"

namespace simlab {
namespace {

TEST(Runner, SameSeedSameTrace) {
  for (const auto& name : testing::bundled_names()) {
    const Scenario s = testing::bundled(name);
    EXPECT_EQ(write_trace(testing::run_all(s)), write_trace(testing::run_all(s))) << name;
  }
}

TEST(Runner, SeedOverrideChangesNoisyRuns) {
  const Scenario s = testing::bundled("x25-noisy-link");
  EXPECT_NE(write_trace(testing::run_all(s, 1)), write_trace(testing::run_all(s, 2)));
}

TEST(Runner, AdvanceToLeavesClockAtTarget) {
  Runner r(testing::bundled("arp-basic"));
  r.set_until(SimTime::sec(100));
  r.advance_to(SimTime::ms(2500));
  EXPECT_EQ(r.sim().engine().now(), SimTime::ms(2500));
  auto next = r.next_due();
  if (next) EXPECT_GT(*next, SimTime::ms(2500));
}

// Drive a run in uneven slices with injections in between, then replay the
// addendum headlessly.
std::vector<Observation> live_run(const Scenario& s, const std::vector<std::pair<SimTime, json>>& plan, SimTime until,
                                  json* addendum) {
  Runner r(s);
  r.set_until(until);
  std::vector<Observation> out = r.initial();
  for (const auto& [t, action] : plan) {
    for (auto& o : r.advance_to(t)) out.push_back(std::move(o));
    r.inject(action);
  }
  while (auto st = r.step()) {
    for (auto& o : st->observations) out.push_back(std::move(o));
  }
  *addendum = r.addendum();
  return out;
}

TEST(Runner, AddendumReplayReproducesLiveRun) {
  const Scenario s = testing::bundled("rip-line-3");
  const std::vector<std::pair<SimTime, json>> plan{
      {SimTime::sec(40), {{"action", "break_link"}, {"segment", s.segments[1].name}}},
      {SimTime::sec(45) + SimTime{7}, {{"action", "set_noise"}, {"segment", s.segments[0].name}, {"p", 0.2}}},
      {SimTime::sec(200), {{"action", "restore_link"}, {"segment", s.segments[1].name}}},
  };
  json add;
  const auto live = live_run(s, plan, SimTime::sec(300), &add);
  ASSERT_EQ(add["injections"].size(), 3u);

  Runner replay(s);
  replay.set_until(SimTime::sec(300));
  replay.replay(add);
  EXPECT_EQ(write_trace(replay.run_to_end()), write_trace(live));
}

TEST(Runner, InvalidInjectionHasNoEffect) {
  Runner r(testing::bundled("arp-basic"));
  try {
    r.inject({{"action", "power"}, {"node", "nobody"}, {"state", "off"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_ref);
  }
  EXPECT_TRUE(r.injections().empty());
}

TEST(Runner, ReplayMustPrecedeFirstStep) {
  Runner r(testing::bundled("arp-basic"));
  r.set_until(SimTime::sec(10));
  ASSERT_TRUE(r.step());
  try {
    r.replay({{"injections", json::array()}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bad_state);
  }
}

TEST(Runner, FailingActionBecomesEventDropped) {
  json doc = json::parse(R"({
    "meta": {"name": "f"},
    "nodes": [{"name": "A"}, {"name": "B"}],
    "segments": [{"name": "l"}],
    "interfaces": [{"node": "A", "segment": "l", "ip": "10.0.0.1/24"}, {"node": "B", "segment": "l", "ip": "10.0.0.2/24"}],
    "script": [{"at": "1s", "action": "algo", "algo": "heap", "name": "h", "op": "extract"}]
  })");
  auto obs = testing::run_all(scenario_from_json(doc), std::nullopt, SimTime::sec(2));
  auto dropped = testing::only(obs, ObsKind::event_dropped);
  ASSERT_EQ(dropped.size(), 1u);
  EXPECT_EQ(dropped[0].detail["code"], "empty_heap");
  EXPECT_EQ(dropped[0].detail["action"], "algo");
}

}  // namespace
}  // namespace simlab
