#include "simlab/netmodel.hpp"

#include <algorithm>
#include <cmath>

#include "simlab/error.hpp"

namespace simlab {

std::string_view to_string(NodeKind kind) { return kind == NodeKind::host ? "host" : "router"; }
std::string_view to_string(Power power) { return power == Power::on ? "on" : "off"; }
std::string_view to_string(LinkStatus status) { return status == LinkStatus::up ? "up" : "broken"; }

json describe(const Route& route) {
  return json{{"prefix", route.prefix.str()},
              {"metric", route.metric},
              {"next_hop", route.next_hop ? route.next_hop->str() : std::string("direct")},
              {"source", to_string(route.source)}};
}

NodeId Network::add_node(NodeKind kind, std::string name) {
  if (find_node(name)) throw Error(Errc::duplicate_name, "node name already in use: " + name);
  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  Node n;
  n.id = id;
  n.name = std::move(name);
  n.kind = kind;
  nodes_.push_back(std::move(n));
  return id;
}

SegmentId Network::add_segment(std::string name, SimTime latency) {
  if (find_segment(name)) throw Error(Errc::duplicate_name, "segment name already in use: " + name);
  if (latency.ticks < 1) throw Error(Errc::out_of_range, "segment latency must be >= 1 tick");
  const SegmentId id{static_cast<std::uint32_t>(segments_.size())};
  Segment s;
  s.id = id;
  s.name = std::move(name);
  s.latency = latency;
  segments_.push_back(std::move(s));
  return id;
}

InterfaceId Network::attach(NodeId node_id, SegmentId seg_id, std::optional<IfAddr> addr) {
  if (!valid(node_id)) throw Error(Errc::unknown_node, "unknown node");
  if (seg_id.value >= segments_.size()) throw Error(Errc::unknown_segment, "unknown segment");
  if (interface_on(node_id, seg_id)) {
    throw Error(Errc::bad_state, name(node_id) + " is already attached to " + segment(seg_id).name);
  }
  if (addr) {
    if (addr->length < 0 || addr->length > 32) throw Error(Errc::out_of_range, "prefix length out of range");
    for (InterfaceId other : segment(seg_id).attached) {
      if (iface(other).ip == addr->ip) {
        throw Error(Errc::duplicate_ip, addr->ip.str() + " already present on " + segment(seg_id).name);
      }
    }
  }
  const InterfaceId id{static_cast<std::uint32_t>(interfaces_.size())};
  Interface itf;
  itf.id = id;
  itf.owner = node_id;
  itf.hw = HwAddr{0x020000000000ull | next_hw_++};
  itf.segment = seg_id;
  if (addr) itf.prefix_len = addr->length;
  interfaces_.push_back(itf);
  node(node_id).interfaces.push_back(id);
  segment(seg_id).attached.push_back(id);
  if (addr) assign_address(id, addr->ip, addr->length);
  return id;
}

void Network::assign_address(InterfaceId id, Ipv4 ip, int prefix_len) {
  Interface& itf = iface(id);
  itf.ip = ip;
  itf.prefix_len = prefix_len;
  Route r;
  r.prefix = Prefix::of(ip, prefix_len);
  r.out_if = id;
  r.metric = 1;
  r.source = RouteSource::connected;
  r.installed_at = engine_.now();
  install_route(itf.owner, r);
}

void Network::clear_address(InterfaceId id) {
  Interface& itf = iface(id);
  if (auto subnet = itf.subnet()) remove_route(itf.owner, *subnet, RouteSource::connected, "address_cleared");
  itf.ip.reset();
}

std::vector<EventId> Network::transmit(InterfaceId from, Frame frame) {
  const Interface& src = iface(from);
  const Node& owner = node(src.owner);
  if (owner.power == Power::off) throw Error(Errc::powered_off, owner.name + " is powered off");
  Segment& seg = segment(src.segment);

  const std::uint64_t frame_id = next_frame_++;
  json sent = describe(frame);
  sent["frame"] = frame_id;
  sent["node"] = owner.name;
  sent["if"] = label(from);
  sent["segment"] = seg.name;

  if (seg.status == LinkStatus::broken) {
    sent["reason"] = "link_broken";
    engine_.observe(ObsKind::frame_dropped, std::move(sent));
    return {};
  }
  engine_.observe(ObsKind::frame_sent, std::move(sent));

  bool forced = false;
  for (int& countdown : seg.forced) {
    if (--countdown == 0) forced = true;
  }
  std::erase_if(seg.forced, [](int c) { return c <= 0; });

  const auto threshold = static_cast<std::uint64_t>(std::ldexp(seg.noise_p, 32));
  const SimTime sent_at = engine_.now();
  std::vector<EventId> ids;
  std::vector<InterfaceId> receivers = seg.attached;
  std::sort(receivers.begin(), receivers.end());
  for (InterfaceId to : receivers) {
    if (to == from || !powered(iface(to).owner)) continue;
    Frame copy = frame;
    const std::uint64_t draw = engine_.rng_draw(std::uint64_t{1} << 32);
    copy.corrupted = forced || draw < threshold;
    const Target target{iface(to).owner.value, EventKind::delivery};
    ids.push_back(engine_.schedule(sent_at + seg.latency, target,
                                   [this, to, copy = std::move(copy), frame_id, sent_at] {
                                     deliver(to, copy, frame_id, sent_at);
                                   }));
  }
  return ids;
}

void Network::deliver(InterfaceId to, const Frame& frame, std::uint64_t frame_id, SimTime sent_at) {
  const Interface& itf = iface(to);
  if (!powered(itf.owner)) return;
  json d{{"frame", frame_id},
         {"node", name(itf.owner)},
         {"if", label(to)},
         {"segment", segment(itf.segment).name},
         {"proto", to_string(frame.proto)}};
  if (frame.corrupted) {
    engine_.observe(ObsKind::frame_corrupted, std::move(d));
    // LAPB sees the damaged frame and recovers by REJ/timer; others just lose it.
    if (frame.proto == FrameProto::lapb && on_frame_) on_frame_(to, frame);
    return;
  }
  if (!frame.dst_hw.is_broadcast() && frame.dst_hw != itf.hw) return;
  d["sent_at"] = sent_at.ticks;
  engine_.observe(ObsKind::frame_delivered, std::move(d));
  if (on_frame_) on_frame_(to, frame);
}

void Network::break_link(SegmentId id) {
  Segment& seg = segment(id);
  seg.status = LinkStatus::broken;
  engine_.observe(ObsKind::fault_applied, {{"fault", "break_link"}, {"segment", seg.name}});
}

void Network::restore_link(SegmentId id) {
  Segment& seg = segment(id);
  seg.status = LinkStatus::up;
  engine_.observe(ObsKind::fault_applied, {{"fault", "restore_link"}, {"segment", seg.name}});
}

void Network::set_noise(SegmentId id, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::out_of_range, "noise probability must be in [0,1]");
  Segment& seg = segment(id);
  seg.noise_p = p;
  engine_.observe(ObsKind::fault_applied, {{"fault", "set_noise"}, {"segment", seg.name}, {"p", p}});
}

void Network::force_corrupt_next(SegmentId id, int n) {
  if (n < 1) throw Error(Errc::out_of_range, "force_corrupt_next needs n >= 1");
  Segment& seg = segment(id);
  seg.forced.push_back(n);
  engine_.observe(ObsKind::fault_applied, {{"fault", "force_corrupt"}, {"segment", seg.name}, {"n", n}});
}

void Network::set_power(NodeId id, Power power) {
  if (!valid(id)) throw Error(Errc::unknown_node, "unknown node");
  Node& n = node(id);
  if (n.power == power) return;
  if (power == Power::off) {
    if (on_power_) on_power_(id, power);
    n.power = Power::off;
    engine_.observe(ObsKind::fault_applied, {{"fault", "power"}, {"node", n.name}, {"power", "off"}});
  } else {
    n.power = Power::on;
    engine_.observe(ObsKind::fault_applied, {{"fault", "power"}, {"node", n.name}, {"power", "on"}});
    if (on_power_) on_power_(id, power);
  }
}

void Network::install_route(NodeId id, const Route& route) {
  RoutingTable& table = node(id).routes;
  const Route* old = table.find(route.prefix, route.source);
  const bool changed = old == nullptr || old->metric != route.metric || old->next_hop != route.next_hop ||
                       old->out_if != route.out_if;
  const char* action = old == nullptr ? "add" : "update";
  table.upsert(route);
  if (!changed) return;
  json d = describe(route);
  d["node"] = name(id);
  d["if"] = label(route.out_if);
  d["action"] = action;
  engine_.observe(ObsKind::route_changed, std::move(d));
}

bool Network::remove_route(NodeId id, const Prefix& prefix, RouteSource source, std::string_view reason) {
  RoutingTable& table = node(id).routes;
  const Route* old = table.find(prefix, source);
  if (old == nullptr) return false;
  json d = describe(*old);
  d["node"] = name(id);
  d["if"] = label(old->out_if);
  d["action"] = "delete";
  d["reason"] = reason;
  table.erase(prefix, source);
  engine_.observe(ObsKind::route_changed, std::move(d));
  return true;
}

Node& Network::node(NodeId id) {
  if (!valid(id)) throw Error(Errc::unknown_node, "unknown node id " + std::to_string(id.value));
  return nodes_[id.value];
}
const Node& Network::node(NodeId id) const { return const_cast<Network*>(this)->node(id); }

Interface& Network::iface(InterfaceId id) {
  if (id.value >= interfaces_.size()) throw Error(Errc::unknown_interface, "unknown interface");
  return interfaces_[id.value];
}
const Interface& Network::iface(InterfaceId id) const { return const_cast<Network*>(this)->iface(id); }

Segment& Network::segment(SegmentId id) {
  if (id.value >= segments_.size()) throw Error(Errc::unknown_segment, "unknown segment");
  return segments_[id.value];
}
const Segment& Network::segment(SegmentId id) const { return const_cast<Network*>(this)->segment(id); }

std::optional<NodeId> Network::find_node(std::string_view name) const {
  for (const auto& n : nodes_) {
    if (n.name == name) return n.id;
  }
  return std::nullopt;
}

std::optional<SegmentId> Network::find_segment(std::string_view name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s.id;
  }
  return std::nullopt;
}

std::optional<InterfaceId> Network::interface_on(NodeId node_id, SegmentId seg) const {
  for (InterfaceId i : node(node_id).interfaces) {
    if (iface(i).segment == seg) return i;
  }
  return std::nullopt;
}

std::optional<InterfaceId> Network::interface_with_ip(NodeId node_id, Ipv4 ip) const {
  for (InterfaceId i : node(node_id).interfaces) {
    if (iface(i).ip == ip) return i;
  }
  return std::nullopt;
}

std::optional<InterfaceId> Network::interface_with_hw(HwAddr hw) const {
  for (const auto& i : interfaces_) {
    if (i.hw == hw) return i.id;
  }
  return std::nullopt;
}

std::optional<InterfaceId> Network::peer_of(InterfaceId id) const {
  const Segment& seg = segment(iface(id).segment);
  if (seg.attached.size() != 2) return std::nullopt;
  return seg.attached[0] == id ? seg.attached[1] : seg.attached[0];
}

bool Network::is_local_address(NodeId node_id, Ipv4 ip) const {
  if (ip == Ipv4::broadcast()) return true;
  for (InterfaceId i : node(node_id).interfaces) {
    const Interface& itf = iface(i);
    if (!itf.ip) continue;
    if (*itf.ip == ip) return true;
    if (itf.prefix_len < 31 && itf.subnet()->directed_broadcast() == ip) return true;
  }
  return false;
}

std::string Network::label(InterfaceId id) const {
  const Interface& itf = iface(id);
  return name(itf.owner) + ":" + segment(itf.segment).name;
}

}  // namespace simlab
