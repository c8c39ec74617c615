#include "simlab/proto_arp.hpp"

#include "simlab/error.hpp"
#include "simlab/simulation.hpp"

namespace simlab {

std::optional<HwAddr> ArpCache::lookup(Ipv4 ip, SimTime now, SimTime ttl) const {
  const ArpEntry* e = find(ip);
  if (e == nullptr || now - e->learned_at > ttl) return std::nullopt;
  return e->hw;
}

const ArpEntry* ArpCache::find(Ipv4 ip) const {
  auto it = entries_.find(ip);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<HwAddr> Arp::resolve(InterfaceId iface, Ipv4 target) {
  Network& net = sim_.net();
  const Interface& itf = net.iface(iface);
  if (!itf.subnet() || !itf.subnet()->contains(target)) {
    throw Error(Errc::off_subnet, target.str() + " is not on the subnet of " + net.label(iface));
  }
  const ArpConfig& cfg = sim_.config().arp;
  NodeState& st = state(itf.owner);
  if (auto hw = st.cache.lookup(target, sim_.engine().now(), cfg.ttl)) return hw;

  const auto key = std::make_pair(iface.value, target);
  if (st.pending.contains(key)) return std::nullopt;

  PendingResolution p;
  p.target_ip = target;
  p.iface = iface;
  p.retries_left = cfg.retries - 1;
  p.timer = sim_.engine().schedule_in(cfg.retry_interval, Simulation::timer(itf.owner),
                                      [this, iface, target] { on_retry(iface, target); });
  st.pending.emplace(key, std::move(p));
  send_request(iface, target);
  return std::nullopt;
}

void Arp::hold(InterfaceId iface, Ipv4 target, IpPacket packet) {
  NodeState& st = state(sim_.net().iface(iface).owner);
  auto it = st.pending.find({iface.value, target});
  if (it == st.pending.end()) {
    if (auto hw = resolve(iface, target)) {
      flush_pending(iface, target, *hw);
      return;
    }
    it = st.pending.find({iface.value, target});
  }
  it->second.queued.emplace_back(std::move(packet), sim_.engine().now());
}

void Arp::send_request(InterfaceId iface, Ipv4 target) {
  const Interface& itf = sim_.net().iface(iface);
  Frame f;
  f.src_hw = itf.hw;
  f.dst_hw = HwAddr::broadcast();
  f.proto = FrameProto::arp;
  f.payload = ArpPacket{ArpOp::request, itf.hw, itf.ip.value_or(Ipv4{}), std::nullopt, target};
  sim_.net().transmit(iface, std::move(f));
}

void Arp::on_retry(InterfaceId iface, Ipv4 target) {
  const NodeId owner = sim_.net().iface(iface).owner;
  NodeState& st = state(owner);
  auto it = st.pending.find({iface.value, target});
  if (it == st.pending.end()) return;
  PendingResolution& p = it->second;
  if (p.retries_left > 0) {
    --p.retries_left;
    p.timer = sim_.engine().schedule_in(sim_.config().arp.retry_interval, Simulation::timer(owner),
                                        [this, iface, target] { on_retry(iface, target); });
    send_request(iface, target);
    return;
  }
  sim_.engine().observe(ObsKind::resolution_failed, {{"node", sim_.net().name(owner)},
                                                     {"if", sim_.net().label(iface)},
                                                     {"proto", "arp"},
                                                     {"ip", target.str()},
                                                     {"dropped", p.queued.size()}});
  st.pending.erase(it);
}

void Arp::learn(InterfaceId iface, Ipv4 ip, HwAddr hw) {
  const NodeId owner = sim_.net().iface(iface).owner;
  NodeState& st = state(owner);
  const SimTime now = sim_.engine().now();
  auto it = st.cache.entries_.find(ip);
  const char* action = nullptr;
  if (it == st.cache.entries_.end()) {
    st.cache.entries_.emplace(ip, ArpEntry{hw, now, iface});
    action = "add";
  } else {
    const bool expired = now - it->second.learned_at > sim_.config().arp.ttl;
    if (it->second.hw != hw || it->second.iface != iface || expired) action = "update";
    it->second = ArpEntry{hw, now, iface};
  }
  if (action != nullptr) {
    sim_.engine().observe(ObsKind::cache_changed, {{"node", sim_.net().name(owner)},
                                                   {"if", sim_.net().label(iface)},
                                                   {"ip", ip.str()},
                                                   {"hw", hw.str()},
                                                   {"learned_at", now.ticks},
                                                   {"action", action}});
  }
  arm_sweep(owner);
  if (st.pending.contains({iface.value, ip})) flush_pending(iface, ip, hw);
}

void Arp::flush_pending(InterfaceId iface, Ipv4 target, HwAddr hw) {
  NodeState& st = state(sim_.net().iface(iface).owner);
  auto it = st.pending.find({iface.value, target});
  std::vector<std::pair<IpPacket, SimTime>> queued;
  if (it != st.pending.end()) {
    sim_.engine().cancel(it->second.timer);
    queued = std::move(it->second.queued);
    st.pending.erase(it);
  }
  const Interface& itf = sim_.net().iface(iface);
  const SimTime now = sim_.engine().now();
  for (auto& [pkt, queued_at] : queued) {
    pkt.resolution_wait += now - queued_at;
    Frame f;
    f.src_hw = itf.hw;
    f.dst_hw = hw;
    f.proto = FrameProto::ip;
    f.payload = std::move(pkt);
    sim_.net().transmit(iface, std::move(f));
  }
}

void Arp::handle(InterfaceId in, const ArpPacket& pkt) {
  const Interface& itf = sim_.net().iface(in);
  const bool for_me = itf.ip && pkt.target_ip == *itf.ip;
  if (pkt.op == ArpOp::request) {
    if (for_me) {
      learn(in, pkt.sender_ip, pkt.sender_hw);
      Frame f;
      f.src_hw = itf.hw;
      f.dst_hw = pkt.sender_hw;
      f.proto = FrameProto::arp;
      f.payload = ArpPacket{ArpOp::reply, itf.hw, *itf.ip, pkt.sender_hw, pkt.sender_ip};
      sim_.net().transmit(in, std::move(f));
    } else if (state(itf.owner).cache.contains(pkt.sender_ip)) {
      learn(in, pkt.sender_ip, pkt.sender_hw);
    }
    return;
  }
  if (for_me) learn(in, pkt.sender_ip, pkt.sender_hw);
}

void Arp::arm_sweep(NodeId node) {
  NodeState& st = state(node);
  if (st.sweep_timer) return;
  st.sweep_timer = sim_.engine().schedule_in(sim_.config().arp.sweep_interval, Simulation::timer(node), [this, node] {
    state(node).sweep_timer.reset();
    sweep(node);
  });
}

void Arp::sweep(NodeId node) {
  NodeState& st = state(node);
  const SimTime now = sim_.engine().now();
  const SimTime ttl = sim_.config().arp.ttl;
  for (auto it = st.cache.entries_.begin(); it != st.cache.entries_.end();) {
    if (now - it->second.learned_at > ttl) {
      sim_.engine().observe(ObsKind::cache_changed, {{"node", sim_.net().name(node)},
                                                     {"if", sim_.net().label(it->second.iface)},
                                                     {"ip", it->first.str()},
                                                     {"hw", it->second.hw.str()},
                                                     {"action", "remove"},
                                                     {"reason", "expired"}});
      it = st.cache.entries_.erase(it);
    } else {
      ++it;
    }
  }
  if (st.cache.size() > 0) arm_sweep(node);
}

void Arp::flush(NodeId node) {
  NodeState& st = state(node);
  for (const auto& [ip, e] : st.cache.entries_) {
    sim_.engine().observe(ObsKind::cache_changed, {{"node", sim_.net().name(node)},
                                                   {"if", sim_.net().label(e.iface)},
                                                   {"ip", ip.str()},
                                                   {"hw", e.hw.str()},
                                                   {"action", "remove"},
                                                   {"reason", "power_off"}});
  }
  st.cache.entries_.clear();
  st.pending.clear();
  st.sweep_timer.reset();
  for (InterfaceId i : sim_.net().node(node).interfaces) rarp_pending_.erase(i.value);
}

const ArpCache& Arp::cache(NodeId node) const {
  auto it = nodes_.find(node);
  return it == nodes_.end() ? empty_ : it->second.cache;
}

const PendingResolution* Arp::pending(InterfaceId iface, Ipv4 target) const {
  auto it = nodes_.find(sim_.net().iface(iface).owner);
  if (it == nodes_.end()) return nullptr;
  auto p = it->second.pending.find({iface.value, target});
  return p == it->second.pending.end() ? nullptr : &p->second;
}

// RARP

void Arp::add_rarp_mapping(NodeId server, HwAddr hw, Ipv4 ip) { rarp_servers_[server][hw] = ip; }

const std::map<HwAddr, Ipv4>* Arp::rarp_table(NodeId server) const {
  auto it = rarp_servers_.find(server);
  return it == rarp_servers_.end() ? nullptr : &it->second;
}

void Arp::rarp_boot(NodeId node) {
  Network& net = sim_.net();
  std::vector<InterfaceId> unconfigured;
  for (InterfaceId i : net.node(node).interfaces) {
    if (!net.iface(i).ip) unconfigured.push_back(i);
  }
  if (unconfigured.empty()) throw Error(Errc::already_configured, net.name(node) + " has no unconfigured interface");
  for (InterfaceId i : unconfigured) {
    if (rarp_pending_.contains(i.value)) continue;
    RarpPending p;
    p.retries_left = sim_.config().arp.retries - 1;
    p.timer = sim_.engine().schedule_in(sim_.config().arp.retry_interval, Simulation::timer(node),
                                        [this, i] { on_rarp_retry(i); });
    rarp_pending_.emplace(i.value, p);
    send_rarp_request(i);
  }
}

void Arp::send_rarp_request(InterfaceId iface) {
  const Interface& itf = sim_.net().iface(iface);
  Frame f;
  f.src_hw = itf.hw;
  f.dst_hw = HwAddr::broadcast();
  f.proto = FrameProto::rarp;
  f.payload = ArpPacket{ArpOp::request, itf.hw, Ipv4{}, itf.hw, Ipv4{}};
  sim_.net().transmit(iface, std::move(f));
}

void Arp::on_rarp_retry(InterfaceId iface) {
  auto it = rarp_pending_.find(iface.value);
  if (it == rarp_pending_.end()) return;
  const NodeId owner = sim_.net().iface(iface).owner;
  if (it->second.retries_left > 0) {
    --it->second.retries_left;
    it->second.timer = sim_.engine().schedule_in(sim_.config().arp.retry_interval, Simulation::timer(owner),
                                                 [this, iface] { on_rarp_retry(iface); });
    send_rarp_request(iface);
    return;
  }
  sim_.engine().observe(ObsKind::resolution_failed, {{"node", sim_.net().name(owner)},
                                                     {"if", sim_.net().label(iface)},
                                                     {"proto", "rarp"},
                                                     {"hw", sim_.net().iface(iface).hw.str()}});
  rarp_pending_.erase(it);
}

void Arp::handle_rarp(InterfaceId in, const ArpPacket& pkt) {
  Network& net = sim_.net();
  const Interface& itf = net.iface(in);
  if (pkt.op == ArpOp::request) {
    auto server = rarp_servers_.find(itf.owner);
    if (server == rarp_servers_.end() || !itf.ip || !pkt.target_hw) return;
    auto mapping = server->second.find(*pkt.target_hw);
    if (mapping == server->second.end()) return;
    Frame f;
    f.src_hw = itf.hw;
    f.dst_hw = *pkt.target_hw;
    f.proto = FrameProto::rarp;
    f.payload = ArpPacket{ArpOp::reply, itf.hw, *itf.ip, *pkt.target_hw, mapping->second};
    net.transmit(in, std::move(f));
    return;
  }
  if (pkt.target_hw != itf.hw || itf.ip) return;
  auto it = rarp_pending_.find(in.value);
  if (it == rarp_pending_.end()) return;
  sim_.engine().cancel(it->second.timer);
  rarp_pending_.erase(it);
  net.assign_address(in, pkt.target_ip, itf.prefix_len);
  sim_.engine().observe(ObsKind::cache_changed, {{"node", net.name(itf.owner)},
                                                 {"if", net.label(in)},
                                                 {"ip", pkt.target_ip.str()},
                                                 {"hw", itf.hw.str()},
                                                 {"action", "assign"},
                                                 {"server", pkt.sender_ip.str()}});
}

}  // namespace simlab
