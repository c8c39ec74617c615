#include "simlab/proto_rip.hpp"

#include <algorithm>
#include <map>

#include "simlab/simulation.hpp"

namespace simlab {

std::string_view to_string(SplitHorizon mode) {
  switch (mode) {
    case SplitHorizon::off: return "off";
    case SplitHorizon::simple: return "simple";
    case SplitHorizon::poisoned_reverse: return "poisoned_reverse";
  }
  return "?";
}

std::optional<SplitHorizon> split_horizon_from_string(std::string_view name) {
  if (name == "off") return SplitHorizon::off;
  if (name == "simple") return SplitHorizon::simple;
  if (name == "poisoned_reverse") return SplitHorizon::poisoned_reverse;
  return std::nullopt;
}

void Rip::enable(NodeId router) {
  RouterState& st = routers_[router];
  if (st.enabled) return;
  st.enabled = true;
  if (sim_.net().powered(router)) start(router);
}

void Rip::disable(NodeId router) {
  auto it = routers_.find(router);
  if (it == routers_.end() || !it->second.enabled) return;
  Engine& eng = sim_.engine();
  for (auto t : {it->second.tick_timer, it->second.sweep_timer, it->second.triggered_timer}) {
    if (t) eng.cancel(*t);
  }
  routers_.erase(it);
  flush(router, "rip_disabled");
}

bool Rip::enabled(NodeId router) const {
  auto it = routers_.find(router);
  return it != routers_.end() && it->second.enabled;
}

void Rip::start(NodeId router) {
  RouterState& st = routers_[router];
  if (!st.enabled) return;
  st.triggered_timer.reset();
  st.last_triggered.reset();
  tick(router);
  schedule_sweep(router);
}

void Rip::tick(NodeId router) {
  RouterState& st = routers_[router];
  advertise(router);
  st.tick_timer = sim_.engine().schedule_in(sim_.config().rip.update_interval, Simulation::timer(router),
                                            [this, router] { tick(router); });
}

void Rip::schedule_sweep(NodeId router) {
  routers_[router].sweep_timer = sim_.engine().schedule_in(sim_.config().rip.sweep_interval, Simulation::timer(router),
                                                           [this, router] {
                                                             sweep(router);
                                                             schedule_sweep(router);
                                                           });
}

RipUpdate Rip::build_update(NodeId router, InterfaceId out) const {
  const Network& net = sim_.net();
  RipUpdate upd;
  upd.sender = net.iface(out).ip.value_or(Ipv4{});
  std::map<Prefix, int> advertised;
  for (const Route& r : net.node(router).routes.entries()) {
    if (r.source == RouteSource::connected) {
      advertised[r.prefix] = 1;
    }
  }
  for (const Route& r : net.node(router).routes.entries()) {
    if (r.source != RouteSource::rip || advertised.contains(r.prefix)) continue;
    int metric = r.metric;
    if (r.out_if == out) {
      if (sim_.config().rip.split_horizon == SplitHorizon::simple) continue;
      if (sim_.config().rip.split_horizon == SplitHorizon::poisoned_reverse) metric = kRipInfinity;
    }
    advertised[r.prefix] = metric;
  }
  for (const auto& [prefix, metric] : advertised) upd.entries.push_back({prefix, metric});
  return upd;
}

void Rip::advertise(NodeId router) {
  Network& net = sim_.net();
  if (!net.powered(router)) return;
  for (InterfaceId out : net.node(router).interfaces) {
    const Interface& itf = net.iface(out);
    if (!itf.ip) continue;
    IpPacket pkt;
    pkt.src = *itf.ip;
    pkt.dst = Ipv4::broadcast();
    pkt.ttl = 1;
    pkt.proto = IpProto::rip_udp;
    pkt.ident = sim_.ip().next_ident();
    pkt.payload = build_update(router, out);
    sim_.ip().send_broadcast(out, std::move(pkt));
  }
}

void Rip::schedule_triggered(NodeId router) {
  if (!sim_.config().rip.triggered_updates) return;
  RouterState& st = routers_[router];
  if (st.triggered_timer) return;
  SimTime at = sim_.engine().now();
  if (st.last_triggered) at = std::max(at, *st.last_triggered + sim_.config().rip.hold_down);
  st.triggered_timer = sim_.engine().schedule(at, Simulation::timer(router), [this, router] {
    RouterState& s = routers_[router];
    s.triggered_timer.reset();
    s.last_triggered = sim_.engine().now();
    advertise(router);
  });
}

void Rip::process(InterfaceId in, const RipUpdate& update) {
  Network& net = sim_.net();
  const Interface& itf = net.iface(in);
  const NodeId router = itf.owner;
  if (!enabled(router)) return;
  if (!itf.subnet() || !itf.subnet()->contains(update.sender) || update.sender == *itf.ip) {
    sim_.engine().observe(ObsKind::packet_dropped, {{"node", net.name(router)},
                                                    {"ip_proto", "rip_udp"},
                                                    {"src", update.sender.str()},
                                                    {"reason", "sender_not_on_link"}});
    return;
  }
  const SimTime now = sim_.engine().now();
  RoutingTable& table = net.node(router).routes;
  bool changed = false;
  for (const RipEntry& entry : update.entries) {
    if (entry.metric < 1 || entry.metric > kRipInfinity) {
      sim_.engine().observe(ObsKind::packet_dropped, {{"node", net.name(router)},
                                                      {"ip_proto", "rip_udp"},
                                                      {"src", update.sender.str()},
                                                      {"prefix", entry.prefix.str()},
                                                      {"metric", entry.metric},
                                                      {"reason", "malformed_entry"}});
      continue;
    }
    if (table.has(entry.prefix, RouteSource::connected)) continue;
    const int candidate = std::min(entry.metric + 1, kRipInfinity);
    const Route* existing = table.find(entry.prefix, RouteSource::rip);

    Route next;
    next.prefix = entry.prefix;
    next.next_hop = update.sender;
    next.out_if = in;
    next.metric = candidate;
    next.source = RouteSource::rip;
    next.installed_at = now;
    next.last_heard = now;

    if (existing == nullptr) {
      if (candidate >= kRipInfinity) continue;
      net.install_route(router, next);
      changed = true;
      continue;
    }
    const bool from_next_hop = existing->next_hop == update.sender && existing->out_if == in;
    if (from_next_hop) {
      if (candidate == existing->metric) {
        if (candidate < kRipInfinity) table.find(entry.prefix, RouteSource::rip)->last_heard = now;
        continue;
      }
      next.installed_at = existing->installed_at;
      if (candidate >= kRipInfinity) {
        next.last_heard = existing->last_heard;
        next.gc_deadline = now + sim_.config().rip.gc_timeout;
      }
      net.install_route(router, next);
      changed = true;
    } else if (candidate < existing->metric) {
      net.install_route(router, next);
      changed = true;
    }
  }
  if (changed) schedule_triggered(router);
}

void Rip::sweep(NodeId router) {
  Network& net = sim_.net();
  const SimTime now = sim_.engine().now();
  const RipConfig& cfg = sim_.config().rip;
  std::vector<Prefix> expired;
  std::vector<Route> poisoned;
  for (const Route& r : net.node(router).routes.entries()) {
    if (r.source != RouteSource::rip) continue;
    if (r.metric < kRipInfinity && now - r.last_heard > cfg.route_timeout) {
      Route p = r;
      p.metric = kRipInfinity;
      p.gc_deadline = now + cfg.gc_timeout;
      poisoned.push_back(p);
    } else if (r.metric >= kRipInfinity && r.gc_deadline && now >= *r.gc_deadline) {
      expired.push_back(r.prefix);
    }
  }
  for (const Route& p : poisoned) net.install_route(router, p);
  for (const Prefix& p : expired) net.remove_route(router, p, RouteSource::rip, "garbage_collected");
  if (!poisoned.empty()) schedule_triggered(router);
}

void Rip::flush(NodeId router, std::string_view reason) {
  Network& net = sim_.net();
  std::vector<Prefix> learned;
  for (const Route& r : net.node(router).routes.entries()) {
    if (r.source == RouteSource::rip) learned.push_back(r.prefix);
  }
  for (const Prefix& p : learned) net.remove_route(router, p, RouteSource::rip, reason);
  if (auto it = routers_.find(router); it != routers_.end()) {
    it->second.tick_timer.reset();
    it->second.sweep_timer.reset();
    it->second.triggered_timer.reset();
    it->second.last_triggered.reset();
  }
}

}  // namespace simlab
