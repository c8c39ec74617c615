#include "simlab/proto_ip.hpp"

#include <algorithm>

#include "simlab/error.hpp"
#include "simlab/simulation.hpp"

namespace simlab {

std::string_view to_string(ProbeOutcome outcome) {
  switch (outcome) {
    case ProbeOutcome::pending: return "pending";
    case ProbeOutcome::reply: return "reply";
    case ProbeOutcome::time_exceeded: return "time_exceeded";
    case ProbeOutcome::unreachable: return "unreachable";
    case ProbeOutcome::timeout: return "timeout";
  }
  return "?";
}

namespace {

json probe_json(const ProbeResult& p) {
  json j{{"seq", p.seq}, {"sent_at", p.sent_at.ticks}, {"outcome", to_string(p.outcome)}};
  if (p.ttl > 0) j["ttl"] = p.ttl;
  if (p.responder) j["responder"] = p.responder->str();
  if (p.rtt) j["rtt"] = p.rtt->ticks;
  if (p.arp_wait.ticks > 0) j["arp_wait"] = p.arp_wait.ticks;
  return j;
}

bool is_icmp_error(const IpPacket& pkt) {
  const auto* icmp = std::get_if<IcmpMessage>(&pkt.payload);
  return pkt.proto == IpProto::icmp && icmp != nullptr && icmp->is_error();
}

}  // namespace

json to_json(const PingReport& r) {
  json probes = json::array();
  for (const auto& p : r.probes) probes.push_back(probe_json(p));
  json j{{"procedure", "ping"},
         {"id", r.id},
         {"dst", r.dst.str()},
         {"sent", r.sent},
         {"received", r.received},
         {"probes", probes}};
  if (r.min_rtt) {
    j["min_rtt"] = r.min_rtt->ticks;
    j["avg_rtt"] = r.avg_rtt->ticks;
    j["max_rtt"] = r.max_rtt->ticks;
  }
  return j;
}

json to_json(const TracerouteReport& r) {
  json hops = json::array();
  for (const auto& h : r.hops) {
    json probes = json::array();
    for (const auto& p : h.probes) probes.push_back(probe_json(p));
    hops.push_back({{"ttl", h.ttl},
                    {"responder", h.responder ? json(h.responder->str()) : json(nullptr)},
                    {"probes", probes}});
  }
  return {{"procedure", "traceroute"}, {"id", r.id}, {"dst", r.dst.str()}, {"reached", r.reached}, {"hops", hops}};
}

std::optional<Route> Ip::lookup(NodeId node, Ipv4 dst) const { return sim_.net().node(node).routes.lookup(dst); }

void Ip::send(NodeId node, IpPacket pkt) {
  Network& net = sim_.net();
  if (!net.powered(node)) return;
  if (pkt.dst != Ipv4::broadcast() && net.is_local_address(node, pkt.dst)) {
    const InterfaceId in = net.interface_with_ip(node, pkt.dst).value_or(net.node(node).interfaces.front());
    sim_.engine().schedule_in(SimTime{}, {node.value, EventKind::delivery}, [this, node, in, pkt] {
      if (sim_.net().powered(node)) deliver_local(node, in, pkt);
    });
    return;
  }
  route_out(node, std::move(pkt), std::nullopt);
}

void Ip::send_broadcast(InterfaceId out, IpPacket pkt) {
  const Interface& itf = sim_.net().iface(out);
  Frame f;
  f.src_hw = itf.hw;
  f.dst_hw = HwAddr::broadcast();
  f.proto = FrameProto::ip;
  f.payload = std::move(pkt);
  sim_.net().transmit(out, std::move(f));
}

void Ip::route_out(NodeId node, IpPacket pkt, std::optional<InterfaceId> in_if) {
  Network& net = sim_.net();
  const auto route = lookup(node, pkt.dst);
  if (!route) {
    drop(node, pkt, "no_route");
    if (in_if) {
      emit_icmp_error(node, *in_if, pkt, IcmpType::dest_unreachable);
    } else if (const auto* icmp = std::get_if<IcmpMessage>(&pkt.payload);
               icmp != nullptr && icmp->type == IcmpType::echo_request) {
      if (pings_.contains(icmp->ident)) {
        ping_resolve(icmp->ident, icmp->seq, ProbeOutcome::unreachable, std::nullopt, {});
      } else if (traces_.contains(icmp->ident)) {
        trace_resolve(icmp->ident, icmp->seq, ProbeOutcome::unreachable, std::nullopt, {});
      }
    }
    return;
  }
  const Ipv4 next = route->next_hop.value_or(pkt.dst);
  std::optional<HwAddr> hw;
  try {
    hw = sim_.arp().resolve(route->out_if, next);
  } catch (const Error& e) {
    if (e.code() != Errc::off_subnet) throw;
    drop(node, pkt, "next_hop_off_subnet");
    return;
  }
  if (!hw) {
    sim_.arp().hold(route->out_if, next, std::move(pkt));
    return;
  }
  Frame f;
  f.src_hw = net.iface(route->out_if).hw;
  f.dst_hw = *hw;
  f.proto = FrameProto::ip;
  f.payload = std::move(pkt);
  net.transmit(route->out_if, std::move(f));
}

void Ip::drop(NodeId node, const IpPacket& pkt, std::string_view reason) {
  sim_.engine().observe(ObsKind::packet_dropped, {{"node", sim_.net().name(node)},
                                                  {"src", pkt.src.str()},
                                                  {"dst", pkt.dst.str()},
                                                  {"ip_proto", to_string(pkt.proto)},
                                                  {"reason", reason}});
}

void Ip::receive(InterfaceId in, const IpPacket& pkt) {
  Network& net = sim_.net();
  const NodeId node = net.iface(in).owner;
  if (net.is_local_address(node, pkt.dst)) {
    deliver_local(node, in, pkt);
    return;
  }
  if (net.node(node).kind != NodeKind::router) return;  // hosts never forward
  if (pkt.ttl <= 1) {
    drop(node, pkt, "ttl_expired");
    emit_icmp_error(node, in, pkt, IcmpType::time_exceeded);
    return;
  }
  IpPacket fwd = pkt;
  --fwd.ttl;
  route_out(node, std::move(fwd), in);
}

void Ip::emit_icmp_error(NodeId node, InterfaceId in_if, const IpPacket& original, IcmpType type) {
  if (is_icmp_error(original)) return;
  const auto src = sim_.net().iface(in_if).ip;
  if (!src) return;
  QuotedHeader q{original.src, original.dst, original.ttl, original.proto, original.ident, std::nullopt, 0, 0};
  if (const auto* icmp = std::get_if<IcmpMessage>(&original.payload)) {
    q.icmp_type = icmp->type;
    q.icmp_ident = icmp->ident;
    q.icmp_seq = icmp->seq;
  }
  IpPacket err;
  err.src = *src;
  err.dst = original.src;
  err.ttl = sim_.config().ip.default_ttl;
  err.proto = IpProto::icmp;
  err.ident = next_ident();
  err.payload = IcmpMessage{type, 0, 0, q};
  err.resolution_wait = original.resolution_wait;
  sim_.engine().observe(ObsKind::icmp_emitted, {{"node", sim_.net().name(node)},
                                                {"type", to_string(type)},
                                                {"src", err.src.str()},
                                                {"dst", err.dst.str()},
                                                {"icmp_seq", q.icmp_seq}});
  send(node, std::move(err));
}

void Ip::deliver_local(NodeId node, InterfaceId in, const IpPacket& pkt) {
  switch (pkt.proto) {
    case IpProto::icmp:
      if (const auto* icmp = std::get_if<IcmpMessage>(&pkt.payload)) handle_icmp(node, in, pkt, *icmp);
      break;
    case IpProto::rip_udp:
      if (const auto* upd = std::get_if<RipUpdate>(&pkt.payload);
          upd != nullptr && sim_.net().node(node).kind == NodeKind::router && sim_.rip().enabled(node)) {
        sim_.rip().process(in, *upd);
      }
      break;
    case IpProto::data: {
      const auto* data = std::get_if<DataPayload>(&pkt.payload);
      sim_.engine().observe(ObsKind::packet_delivered, {{"node", sim_.net().name(node)},
                                                        {"layer", "ip"},
                                                        {"src", pkt.src.str()},
                                                        {"dst", pkt.dst.str()},
                                                        {"ttl", pkt.ttl},
                                                        {"data", data ? data->text : std::string()}});
      break;
    }
  }
}

void Ip::handle_icmp(NodeId node, InterfaceId in, const IpPacket& pkt, const IcmpMessage& msg) {
  switch (msg.type) {
    case IcmpType::echo_request: {
      IpPacket reply;
      reply.src = pkt.dst;
      if (pkt.dst == Ipv4::broadcast() || !sim_.net().interface_with_ip(node, pkt.dst)) {
        reply.src = sim_.net().iface(in).ip.value_or(Ipv4{});
      }
      reply.dst = pkt.src;
      reply.ttl = sim_.config().ip.default_ttl;
      reply.proto = IpProto::icmp;
      reply.ident = next_ident();
      reply.payload = IcmpMessage{IcmpType::echo_reply, msg.ident, msg.seq, std::nullopt};
      reply.resolution_wait = pkt.resolution_wait;
      sim_.engine().observe(ObsKind::icmp_emitted, {{"node", sim_.net().name(node)},
                                                    {"type", "echo_reply"},
                                                    {"src", reply.src.str()},
                                                    {"dst", reply.dst.str()},
                                                    {"icmp_seq", msg.seq}});
      send(node, std::move(reply));
      break;
    }
    case IcmpType::echo_reply: {
      if (auto it = pings_.find(msg.ident); it != pings_.end() && it->second.report.node == node) {
        ping_resolve(msg.ident, msg.seq, ProbeOutcome::reply, pkt.src, pkt.resolution_wait);
      } else if (auto t = traces_.find(msg.ident); t != traces_.end() && t->second.report.node == node) {
        trace_resolve(msg.ident, msg.seq, ProbeOutcome::reply, pkt.src, pkt.resolution_wait);
      }
      break;
    }
    case IcmpType::time_exceeded:
    case IcmpType::dest_unreachable: {
      if (!msg.original || msg.original->icmp_type != IcmpType::echo_request) break;
      const auto outcome =
          msg.type == IcmpType::time_exceeded ? ProbeOutcome::time_exceeded : ProbeOutcome::unreachable;
      const std::uint32_t ident = msg.original->icmp_ident;
      if (auto it = pings_.find(ident); it != pings_.end() && it->second.report.node == node) {
        ping_resolve(ident, msg.original->icmp_seq, outcome, pkt.src, pkt.resolution_wait);
      } else if (auto t = traces_.find(ident); t != traces_.end() && t->second.report.node == node) {
        trace_resolve(ident, msg.original->icmp_seq, outcome, pkt.src, pkt.resolution_wait);
      }
      break;
    }
  }
}

// ping

std::uint32_t Ip::ping(NodeId node, Ipv4 dst, int count, SimTime interval) {
  if (count < 1) throw Error(Errc::out_of_range, "ping count must be >= 1");
  sim_.net().node(node);
  const std::uint32_t ident = next_ident();
  PingProc proc;
  proc.report.id = ++next_proc_;
  proc.report.node = node;
  proc.report.dst = dst;
  proc.count = count;
  proc.interval = interval;
  proc.icmp_ident = ident;
  for (int i = 0; i < count; ++i) proc.report.probes.push_back(ProbeResult{static_cast<std::uint32_t>(i + 1)});
  pings_.emplace(ident, std::move(proc));
  for (int i = 1; i < count; ++i) {
    sim_.engine().schedule_in(interval * static_cast<std::uint64_t>(i), Simulation::timer(node),
                              [this, ident, i] { ping_send(ident, i); });
  }
  const std::uint32_t id = next_proc_;
  ping_send(ident, 0);
  return id;
}

void Ip::ping_send(std::uint32_t ident, int index) {
  auto it = pings_.find(ident);
  if (it == pings_.end()) return;
  PingProc& proc = it->second;
  const NodeId node = proc.report.node;
  ProbeResult& probe = proc.report.probes[static_cast<std::size_t>(index)];
  probe.sent_at = sim_.engine().now();
  ++proc.report.sent;
  const std::uint32_t seq = probe.seq;
  sim_.engine().schedule_in(sim_.config().ip.probe_timeout, Simulation::timer(node), [this, ident, seq] {
    ping_resolve(ident, seq, ProbeOutcome::timeout, std::nullopt, {});
  });

  IpPacket pkt;
  pkt.dst = proc.report.dst;
  if (auto route = lookup(node, pkt.dst); route && sim_.net().iface(route->out_if).ip) {
    pkt.src = *sim_.net().iface(route->out_if).ip;
  }
  pkt.ttl = sim_.config().ip.default_ttl;
  pkt.proto = IpProto::icmp;
  pkt.ident = next_ident();
  pkt.payload = IcmpMessage{IcmpType::echo_request, ident, seq, std::nullopt};
  send(node, std::move(pkt));
}

void Ip::ping_resolve(std::uint32_t ident, std::uint32_t seq, ProbeOutcome outcome, std::optional<Ipv4> responder,
                      SimTime wait) {
  auto it = pings_.find(ident);
  if (it == pings_.end()) return;
  PingProc& proc = it->second;
  if (seq < 1 || seq > proc.report.probes.size()) return;
  ProbeResult& probe = proc.report.probes[seq - 1];
  if (probe.outcome != ProbeOutcome::pending || proc.report.sent < static_cast<int>(seq)) return;
  const SimTime now = sim_.engine().now();
  probe.outcome = outcome;
  probe.responder = responder;
  probe.arp_wait = wait;
  if (outcome == ProbeOutcome::reply) {
    probe.rtt = now - probe.sent_at - wait;
    ++proc.report.received;
  }
  const bool done = std::none_of(proc.report.probes.begin(), proc.report.probes.end(),
                                 [](const ProbeResult& p) { return p.outcome == ProbeOutcome::pending; });
  if (!done) return;

  PingReport report = std::move(proc.report);
  pings_.erase(it);
  std::uint64_t total = 0;
  for (const auto& p : report.probes) {
    if (!p.rtt) continue;
    total += p.rtt->ticks;
    if (!report.min_rtt || *p.rtt < *report.min_rtt) report.min_rtt = p.rtt;
    if (!report.max_rtt || *p.rtt > *report.max_rtt) report.max_rtt = p.rtt;
  }
  if (report.received > 0) report.avg_rtt = SimTime{total / static_cast<std::uint64_t>(report.received)};
  json detail = to_json(report);
  detail["node"] = sim_.net().name(report.node);
  sim_.engine().observe(ObsKind::report, std::move(detail));
  ping_done_.push_back(std::move(report));
}

// traceroute

std::uint32_t Ip::traceroute(NodeId node, Ipv4 dst, int max_ttl, int probes_per_ttl) {
  if (max_ttl < 1 || max_ttl > 255) throw Error(Errc::out_of_range, "max_ttl must be in 1..255");
  if (probes_per_ttl < 1) throw Error(Errc::out_of_range, "probes per ttl must be >= 1");
  sim_.net().node(node);
  const std::uint32_t ident = next_ident();
  TraceProc proc;
  proc.report.id = ++next_proc_;
  proc.report.node = node;
  proc.report.dst = dst;
  proc.max_ttl = max_ttl;
  proc.probes_per_ttl = probes_per_ttl;
  proc.icmp_ident = ident;
  traces_.emplace(ident, std::move(proc));
  const std::uint32_t id = next_proc_;
  trace_send(ident);
  return id;
}

void Ip::trace_send(std::uint32_t ident) {
  auto it = traces_.find(ident);
  if (it == traces_.end()) return;
  TraceProc& proc = it->second;
  const NodeId node = proc.report.node;
  if (proc.report.hops.size() < static_cast<std::size_t>(proc.cur_ttl)) {
    proc.report.hops.push_back(TracerouteHop{proc.cur_ttl, std::nullopt, {}});
  }
  ProbeResult probe;
  probe.seq = ++proc.next_seq;
  probe.ttl = proc.cur_ttl;
  probe.sent_at = sim_.engine().now();
  proc.report.hops.back().probes.push_back(probe);
  const std::uint32_t seq = probe.seq;
  proc.timeout = sim_.engine().schedule_in(sim_.config().ip.probe_timeout, Simulation::timer(node), [this, ident, seq] {
    trace_resolve(ident, seq, ProbeOutcome::timeout, std::nullopt, {});
  });

  IpPacket pkt;
  pkt.dst = proc.report.dst;
  if (auto route = lookup(node, pkt.dst); route && sim_.net().iface(route->out_if).ip) {
    pkt.src = *sim_.net().iface(route->out_if).ip;
  }
  pkt.ttl = proc.cur_ttl;
  pkt.proto = IpProto::icmp;
  pkt.ident = next_ident();
  pkt.payload = IcmpMessage{IcmpType::echo_request, ident, seq, std::nullopt};
  send(node, std::move(pkt));
}

void Ip::trace_resolve(std::uint32_t ident, std::uint32_t seq, ProbeOutcome outcome, std::optional<Ipv4> responder,
                       SimTime wait) {
  auto it = traces_.find(ident);
  if (it == traces_.end()) return;
  TraceProc& proc = it->second;
  TracerouteHop& hop = proc.report.hops.back();
  ProbeResult& probe = hop.probes.back();
  if (probe.seq != seq || probe.outcome != ProbeOutcome::pending) return;
  if (proc.timeout && outcome != ProbeOutcome::timeout) sim_.engine().cancel(*proc.timeout);
  proc.timeout.reset();
  probe.outcome = outcome;
  probe.responder = responder;
  probe.arp_wait = wait;
  if (outcome == ProbeOutcome::reply || outcome == ProbeOutcome::time_exceeded ||
      outcome == ProbeOutcome::unreachable) {
    if (responder) probe.rtt = sim_.engine().now() - probe.sent_at - wait;
  }
  if (!hop.responder && responder) hop.responder = responder;
  if (outcome == ProbeOutcome::reply && responder == proc.report.dst) proc.report.reached = true;
  trace_advance(ident);
}

void Ip::trace_advance(std::uint32_t ident) {
  auto it = traces_.find(ident);
  if (it == traces_.end()) return;
  TraceProc& proc = it->second;
  if (++proc.cur_probe < proc.probes_per_ttl) {
    trace_send(ident);
    return;
  }
  if (!proc.report.reached && proc.cur_ttl < proc.max_ttl) {
    ++proc.cur_ttl;
    proc.cur_probe = 0;
    trace_send(ident);
    return;
  }
  TracerouteReport report = std::move(proc.report);
  traces_.erase(it);
  json detail = to_json(report);
  detail["node"] = sim_.net().name(report.node);
  sim_.engine().observe(ObsKind::report, std::move(detail));
  trace_done_.push_back(std::move(report));
}

void Ip::flush(NodeId node) {
  std::erase_if(pings_, [&](const auto& e) { return e.second.report.node == node; });
  std::erase_if(traces_, [&](const auto& e) { return e.second.report.node == node; });
}

}  // namespace simlab
