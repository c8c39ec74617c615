#pragma once

#include <optional>
#include <string_view>
#include <unordered_map>

#include "simlab/ids.hpp"
#include "simlab/packets.hpp"
#include "simlab/simcore.hpp"

namespace simlab {

class Simulation;

enum class SplitHorizon { off, simple, poisoned_reverse };

std::string_view to_string(SplitHorizon mode);
std::optional<SplitHorizon> split_horizon_from_string(std::string_view name);

struct RipConfig {
  SimTime update_interval = SimTime::sec(30);
  SimTime route_timeout = SimTime::sec(180);
  SimTime gc_timeout = SimTime::sec(120);
  SimTime hold_down = SimTime::sec(1);
  SimTime sweep_interval = SimTime::sec(1);
  SplitHorizon split_horizon = SplitHorizon::poisoned_reverse;
  bool triggered_updates = true;

  bool operator==(const RipConfig&) const = default;
};

/// Distance-vector routing over the node routing tables (source = rip).
class Rip {
 public:
  explicit Rip(Simulation& sim) : sim_(sim) {}

  void enable(NodeId router);
  void disable(NodeId router);
  bool enabled(NodeId router) const;

  /// Starts timers; called on enable and on power-on.
  void start(NodeId router);
  void tick(NodeId router);
  void process(InterfaceId in, const RipUpdate& update);
  void sweep(NodeId router);
  /// Power-off: drop learned routes and timer bookkeeping.
  void flush(NodeId router, std::string_view reason = "power_off");

  RipUpdate build_update(NodeId router, InterfaceId out) const;

 private:
  struct RouterState {
    bool enabled = false;
    std::optional<EventId> tick_timer;
    std::optional<EventId> sweep_timer;
    std::optional<EventId> triggered_timer;
    std::optional<SimTime> last_triggered;
  };

  void advertise(NodeId router);
  void schedule_triggered(NodeId router);
  void schedule_sweep(NodeId router);

  Simulation& sim_;
  std::unordered_map<NodeId, RouterState> routers_;
};

}  // namespace simlab
