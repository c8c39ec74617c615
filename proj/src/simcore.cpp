#include "simlab/simcore.hpp"

#include <array>
#include <charconv>
#include <limits>

#include "simlab/error.hpp"

namespace simlab {

std::optional<SimTime> parse_duration(std::string_view text) {
  std::uint64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr == first) return std::nullopt;
  std::string_view unit(ptr, static_cast<std::size_t>(last - ptr));
  std::uint64_t scale = 1;
  if (unit.empty() || unit == "us") {
    scale = 1;
  } else if (unit == "ms") {
    scale = 1000;
  } else if (unit == "s") {
    scale = 1000000;
  } else {
    return std::nullopt;
  }
  if (value > std::numeric_limits<std::uint64_t>::max() / scale) return std::nullopt;
  return SimTime{value * scale};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), state_(splitmix64(seed)) {
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;  // xorshift state must be non-zero
}

std::uint64_t Rng::next() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1DULL;
}

std::uint64_t Rng::draw(std::uint64_t bound) {
  if (bound == 0) throw Error(Errc::zero_bound, "rng_draw bound must be >= 1");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

namespace {

constexpr std::array<std::pair<ObsKind, std::string_view>, 17> kObsNames{{
    {ObsKind::frame_sent, "frame_sent"},
    {ObsKind::frame_delivered, "frame_delivered"},
    {ObsKind::frame_corrupted, "frame_corrupted"},
    {ObsKind::frame_dropped, "frame_dropped"},
    {ObsKind::route_changed, "route_changed"},
    {ObsKind::cache_changed, "cache_changed"},
    {ObsKind::icmp_emitted, "icmp_emitted"},
    {ObsKind::state_transition, "state_transition"},
    {ObsKind::algo_step, "algo_step"},
    {ObsKind::fault_applied, "fault_applied"},
    {ObsKind::packet_delivered, "packet_delivered"},
    {ObsKind::packet_dropped, "packet_dropped"},
    {ObsKind::resolution_failed, "resolution_failed"},
    {ObsKind::report, "report"},
    {ObsKind::connect_failed, "connect_failed"},
    {ObsKind::link_reset, "link_reset"},
    {ObsKind::event_dropped, "event_dropped"},
}};

}  // namespace

std::string_view to_string(ObsKind kind) {
  for (const auto& [k, name] : kObsNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ObsKind> obs_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kObsNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

Engine::Engine(std::uint64_t seed) : rng_(seed) {}

EventId Engine::schedule(SimTime at, Target target, std::function<void()> fire) {
  if (at < now_) {
    throw Error(Errc::past_time, "cannot schedule at t=" + std::to_string(at.ticks) +
                                     " before now=" + std::to_string(now_.ticks));
  }
  const EventId id = next_seq_++;
  queue_.emplace(Key{at.ticks, id}, Event{at, id, target, std::move(fire)});
  fire_at_.emplace(id, at.ticks);
  return id;
}

bool Engine::cancel(EventId id) {
  auto it = fire_at_.find(id);
  if (it == fire_at_.end()) return false;
  queue_.erase(Key{it->second, id});
  fire_at_.erase(it);
  return true;
}

std::size_t Engine::cancel_if(const std::function<bool(const Event&)>& pred) {
  return std::erase_if(queue_, [&](const auto& entry) {
    if (!pred(entry.second)) return false;
    fire_at_.erase(entry.first.second);
    return true;
  });
}

std::optional<StepResult> Engine::step() {
  if (queue_.empty()) return std::nullopt;
  auto node = queue_.extract(queue_.begin());
  Event& ev = node.mapped();
  fire_at_.erase(ev.seq);
  now_ = ev.fire_at;
  ++dispatched_;
  if (guard_ && !guard_(ev)) {
    json detail{{"event", ev.seq}};
    if (ev.target.node) detail["target_node"] = *ev.target.node;
    observe(ObsKind::event_dropped, std::move(detail));
  } else if (ev.fire) {
    ev.fire();
  }
  return StepResult{now_, drain()};
}

std::vector<Observation> Engine::run_until(SimTime t) {
  if (t < now_) {
    throw Error(Errc::past_time, "run_until target precedes current time");
  }
  std::vector<Observation> out = drain();
  while (!queue_.empty() && SimTime{queue_.begin()->first.first} <= t) {
    auto r = step();
    for (auto& o : r->observations) out.push_back(std::move(o));
  }
  now_ = t;
  return out;
}

std::optional<SimTime> Engine::next_time() const {
  if (queue_.empty()) return std::nullopt;
  return SimTime{queue_.begin()->first.first};
}

void Engine::observe(ObsKind kind, json detail) {
  outbox_.push_back(Observation{now_, next_obs_seq_++, kind, std::move(detail)});
}

std::vector<Observation> Engine::drain() {
  std::vector<Observation> out;
  out.swap(outbox_);
  return out;
}

}  // namespace simlab
