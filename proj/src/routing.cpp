#include "simlab/routing.hpp"

#include <algorithm>

namespace simlab {

std::string_view to_string(RouteSource source) {
  switch (source) {
    case RouteSource::connected: return "connected";
    case RouteSource::static_route: return "static";
    case RouteSource::rip: return "rip";
  }
  return "?";
}

std::optional<Route> RoutingTable::lookup(Ipv4 dst) const {
  const Route* best = nullptr;
  for (const auto& r : entries_) {
    if (!r.usable() || !r.prefix.contains(dst)) continue;
    if (best == nullptr) {
      best = &r;
      continue;
    }
    if (r.prefix.length != best->prefix.length) {
      if (r.prefix.length > best->prefix.length) best = &r;
    } else if (r.metric != best->metric) {
      if (r.metric < best->metric) best = &r;
    } else if (r.source < best->source) {
      best = &r;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

Route* RoutingTable::find(const Prefix& prefix, RouteSource source) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const Route& r) { return r.prefix == prefix && r.source == source; });
  return it == entries_.end() ? nullptr : &*it;
}

const Route* RoutingTable::find(const Prefix& prefix, RouteSource source) const {
  return const_cast<RoutingTable*>(this)->find(prefix, source);
}

void RoutingTable::upsert(const Route& route) {
  if (Route* existing = find(route.prefix, route.source)) {
    *existing = route;
  } else {
    entries_.push_back(route);
  }
}

bool RoutingTable::erase(const Prefix& prefix, RouteSource source) {
  return std::erase_if(entries_, [&](const Route& r) { return r.prefix == prefix && r.source == source; }) > 0;
}

}  // namespace simlab
