#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "simlab/addr.hpp"
#include "simlab/ids.hpp"
#include "simlab/simcore.hpp"

namespace simlab {

// Declaration order is the preference order at equal prefix length and metric.
enum class RouteSource { connected, static_route, rip };

std::string_view to_string(RouteSource source);

inline constexpr int kRipInfinity = 16;

struct Route {
  Prefix prefix;
  std::optional<Ipv4> next_hop;  // unset: directly reachable
  InterfaceId out_if;
  int metric = 1;
  RouteSource source = RouteSource::connected;
  SimTime installed_at;
  // RIP bookkeeping; ignored for other sources.
  SimTime last_heard;
  std::optional<SimTime> gc_deadline;

  bool usable() const { return metric < kRipInfinity; }
};

class RoutingTable {
 public:
  /// Longest prefix wins; then lowest metric; then connected < static < rip.
  /// Routes at metric 16 are never returned.
  std::optional<Route> lookup(Ipv4 dst) const;

  Route* find(const Prefix& prefix, RouteSource source);
  const Route* find(const Prefix& prefix, RouteSource source) const;
  bool has(const Prefix& prefix, RouteSource source) const { return find(prefix, source) != nullptr; }

  /// Inserts or replaces the entry with the same (prefix, source).
  void upsert(const Route& route);
  bool erase(const Prefix& prefix, RouteSource source);

  std::span<const Route> entries() const { return entries_; }
  std::span<Route> entries() { return entries_; }

 private:
  std::vector<Route> entries_;
};

}  // namespace simlab
