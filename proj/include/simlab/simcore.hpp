#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace simlab {

using json = nlohmann::json;

/// Virtual time. One tick is one microsecond. Used both for instants and
/// for deltas (latency, timer intervals).
struct SimTime {
  std::uint64_t ticks = 0;

  constexpr auto operator<=>(const SimTime&) const = default;

  static constexpr SimTime us(std::uint64_t n) { return {n}; }
  static constexpr SimTime ms(std::uint64_t n) { return {n * 1000}; }
  static constexpr SimTime sec(std::uint64_t n) { return {n * 1000000}; }

  constexpr SimTime& operator+=(SimTime d) {
    ticks += d.ticks;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return {a.ticks + b.ticks}; }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return {a.ticks - b.ticks}; }
  friend constexpr SimTime operator*(SimTime a, std::uint64_t k) { return {a.ticks * k}; }
};

/// Parses "120s", "500ms", "250us" or a bare tick count.
std::optional<SimTime> parse_duration(std::string_view text);

/// xorshift64* generator, seeded through one splitmix64 step.
/// The update equations are written out in docs/rng.md.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform in [0, bound). Throws Errc::zero_bound for bound == 0.
  std::uint64_t draw(std::uint64_t bound);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

enum class ObsKind {
  frame_sent,
  frame_delivered,
  frame_corrupted,
  frame_dropped,
  route_changed,
  cache_changed,
  icmp_emitted,
  state_transition,
  algo_step,
  fault_applied,
  packet_delivered,
  packet_dropped,
  resolution_failed,
  report,
  connect_failed,
  link_reset,
  event_dropped,
};

std::string_view to_string(ObsKind kind);
std::optional<ObsKind> obs_kind_from_string(std::string_view name);

struct Observation {
  SimTime at;
  std::uint64_t seq = 0;
  ObsKind kind = ObsKind::event_dropped;
  json detail = json::object();
};

enum class EventKind { delivery, timer, script, algo };

struct Target {
  std::optional<std::uint32_t> node;  // unset: engine-internal
  EventKind kind = EventKind::script;
};

using EventId = std::uint64_t;

struct Event {
  SimTime fire_at;
  EventId seq = 0;
  Target target;
  std::function<void()> fire;
};

struct StepResult {
  SimTime at;
  std::vector<Observation> observations;
};

/// Single-threaded discrete-event engine. Dispatch order is (fire_at, seq).
/// Observations produced while dispatching are buffered and handed back by
/// step()/run_until(); ones emitted outside a dispatch wait for drain().
class Engine {
 public:
  explicit Engine(std::uint64_t seed);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  SimTime now() const { return now_; }

  EventId schedule(SimTime at, Target target, std::function<void()> fire);
  EventId schedule_in(SimTime delay, Target target, std::function<void()> fire) {
    return schedule(now_ + delay, target, std::move(fire));
  }

  bool cancel(EventId id);
  std::size_t cancel_if(const std::function<bool(const Event&)>& pred);

  /// nullopt when the queue is empty; the clock is left untouched then.
  std::optional<StepResult> step();
  std::vector<Observation> run_until(SimTime t);

  std::optional<SimTime> next_time() const;
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t dispatched() const { return dispatched_; }
  std::uint64_t next_seq() const { return next_seq_; }

  std::uint64_t rng_draw(std::uint64_t bound) { return rng_.draw(bound); }
  const Rng& rng() const { return rng_; }

  void observe(ObsKind kind, json detail);
  std::vector<Observation> drain();
  std::uint64_t observations_emitted() const { return next_obs_seq_; }

  /// Called before each dispatch; returning false drops the event with an
  /// event_dropped observation.
  void set_guard(std::function<bool(const Event&)> guard) { guard_ = std::move(guard); }

 private:
  using Key = std::pair<std::uint64_t, EventId>;

  SimTime now_;
  EventId next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::uint64_t next_obs_seq_ = 0;
  std::map<Key, Event> queue_;
  std::unordered_map<EventId, std::uint64_t> fire_at_;
  std::vector<Observation> outbox_;
  std::function<bool(const Event&)> guard_;
  Rng rng_;
};

}  // namespace simlab
