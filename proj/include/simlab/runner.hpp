#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "simlab/algokit.hpp"
#include "simlab/scenario.hpp"
#include "simlab/simulation.hpp"

namespace simlab {

/// A live action recorded so the run can be reproduced headlessly. It is
/// re-applied once the engine has dispatched `after_events` events and is
/// scheduled at `at`.
struct Injection {
  std::uint64_t after_events = 0;
  SimTime at;
  json action;

  bool operator==(const Injection&) const = default;
};

json to_json(const Injection& inj);

/// Builds a Simulation from a scenario, schedules its script and drives it,
/// optionally replaying an addendum of earlier live injections.
class Runner {
 public:
  explicit Runner(Scenario scenario, std::optional<std::uint64_t> seed = std::nullopt);

  const Scenario& scenario() const { return scenario_; }
  std::uint64_t seed() const { return seed_; }
  Simulation& sim() { return *sim_; }
  const Simulation& sim() const { return *sim_; }

  /// Observations emitted while building the topology, all at t=0.
  const std::vector<Observation>& initial() const { return initial_; }

  /// Events past the horizon are never dispatched.
  void set_until(std::optional<SimTime> until) { until_ = until; }
  std::optional<SimTime> until() const { return until_; }

  /// Dispatches one event; nullopt once finished().
  std::optional<StepResult> step();
  /// Dispatches every event at or before t (clipped to the horizon) and
  /// leaves the clock at t.
  std::vector<Observation> advance_to(SimTime t);
  /// initial() followed by every observation up to the horizon or until
  /// the queue drains. Throws Errc::out_of_range if no horizon is set and
  /// more than `max_events` events fire.
  std::vector<Observation> run_to_end(std::uint64_t max_events = 20'000'000);
  bool finished() const;
  /// Time of the next event inside the horizon.
  std::optional<SimTime> next_due() const;

  /// Validates a live action and schedules it at the current time.
  /// Throws Error (unknown_ref, out_of_range, ...) without side effects.
  const Injection& inject(const json& action);
  const std::vector<Injection>& injections() const { return journal_; }
  json addendum() const;

  /// Loads an addendum document for replay. Must be called before any step.
  void replay(const json& addendum);

  void perform(const Action& action);

 private:
  void build();
  void schedule_action(SimTime at, const Action& action);
  void apply_due_replays();

  Scenario scenario_;
  std::uint64_t seed_;
  std::optional<SimTime> until_;
  std::unique_ptr<Simulation> sim_;
  AlgoWorkspace algo_;
  std::vector<Observation> initial_;
  std::vector<Injection> journal_;
  std::vector<Injection> replay_;
  std::size_t replay_next_ = 0;
};

/// Parses an addendum document, checking each action against the scenario.
std::vector<Injection> parse_addendum(const Scenario& scenario, const json& doc);

}  // namespace simlab
