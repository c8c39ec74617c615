#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simlab/addr.hpp"
#include "simlab/ids.hpp"
#include "simlab/packets.hpp"
#include "simlab/routing.hpp"
#include "simlab/simcore.hpp"

namespace simlab {

class Simulation;

struct IpConfig {
  SimTime probe_timeout = SimTime::sec(2);
  int default_ttl = 64;

  bool operator==(const IpConfig&) const = default;
};

enum class ProbeOutcome { pending, reply, time_exceeded, unreachable, timeout };

std::string_view to_string(ProbeOutcome outcome);

struct ProbeResult {
  std::uint32_t seq = 0;
  int ttl = 0;
  SimTime sent_at;
  ProbeOutcome outcome = ProbeOutcome::pending;
  std::optional<Ipv4> responder;
  std::optional<SimTime> rtt;
  SimTime arp_wait;
};

struct PingReport {
  std::uint32_t id = 0;
  NodeId node;
  Ipv4 dst;
  std::vector<ProbeResult> probes;
  int sent = 0;
  int received = 0;
  std::optional<SimTime> min_rtt, avg_rtt, max_rtt;
};

struct TracerouteHop {
  int ttl = 0;
  std::optional<Ipv4> responder;  // first answering probe at this ttl
  std::vector<ProbeResult> probes;
};

struct TracerouteReport {
  std::uint32_t id = 0;
  NodeId node;
  Ipv4 dst;
  std::vector<TracerouteHop> hops;
  bool reached = false;
};

json to_json(const PingReport& report);
json to_json(const TracerouteReport& report);

/// IP forwarding, ICMP, and the ping / traceroute procedures.
class Ip {
 public:
  explicit Ip(Simulation& sim) : sim_(sim) {}

  std::optional<Route> lookup(NodeId node, Ipv4 dst) const;

  /// Originates a packet from `node`. Failures become observations.
  void send(NodeId node, IpPacket pkt);
  /// Link-level broadcast out of one interface (RIP advertisements).
  void send_broadcast(InterfaceId out, IpPacket pkt);
  void receive(InterfaceId in, const IpPacket& pkt);

  std::uint32_t ping(NodeId node, Ipv4 dst, int count, SimTime interval);
  std::uint32_t traceroute(NodeId node, Ipv4 dst, int max_ttl, int probes_per_ttl);

  /// Power-off: abandon running procedures of the node.
  void flush(NodeId node);

  std::uint32_t next_ident() { return ++ident_; }

  const std::vector<PingReport>& ping_reports() const { return ping_done_; }
  const std::vector<TracerouteReport>& traceroute_reports() const { return trace_done_; }

 private:
  struct PingProc {
    PingReport report;
    int count = 0;
    SimTime interval;
    std::uint32_t icmp_ident = 0;
  };
  struct TraceProc {
    TracerouteReport report;
    int max_ttl = 0;
    int probes_per_ttl = 0;
    std::uint32_t icmp_ident = 0;
    std::uint32_t next_seq = 0;
    int cur_ttl = 1;
    int cur_probe = 0;
    std::optional<EventId> timeout;
  };

  void route_out(NodeId node, IpPacket pkt, std::optional<InterfaceId> in_if);
  void emit_icmp_error(NodeId node, InterfaceId in_if, const IpPacket& original, IcmpType type);
  void deliver_local(NodeId node, InterfaceId in, const IpPacket& pkt);
  void handle_icmp(NodeId node, InterfaceId in, const IpPacket& pkt, const IcmpMessage& msg);
  void drop(NodeId node, const IpPacket& pkt, std::string_view reason);

  void ping_send(std::uint32_t id, int index);
  void ping_resolve(std::uint32_t id, std::uint32_t seq, ProbeOutcome outcome, std::optional<Ipv4> responder,
                    SimTime wait);
  void trace_send(std::uint32_t id);
  void trace_resolve(std::uint32_t id, std::uint32_t seq, ProbeOutcome outcome, std::optional<Ipv4> responder,
                     SimTime wait);
  void trace_advance(std::uint32_t id);

  Simulation& sim_;
  std::uint32_t ident_ = 0;
  std::uint32_t next_proc_ = 0;
  std::map<std::uint32_t, PingProc> pings_;   // by icmp ident
  std::map<std::uint32_t, TraceProc> traces_;  // by icmp ident
  std::vector<PingReport> ping_done_;
  std::vector<TracerouteReport> trace_done_;
};

}  // namespace simlab
