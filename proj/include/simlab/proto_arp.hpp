#pragma once

#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "simlab/addr.hpp"
#include "simlab/ids.hpp"
#include "simlab/packets.hpp"
#include "simlab/simcore.hpp"

namespace simlab {

class Simulation;

struct ArpConfig {
  SimTime ttl = SimTime::sec(600);
  int retries = 3;  // request transmissions per miss episode
  SimTime retry_interval = SimTime::sec(1);
  SimTime sweep_interval = SimTime::sec(60);

  bool operator==(const ArpConfig&) const = default;
};

struct ArpEntry {
  HwAddr hw;
  SimTime learned_at;
  InterfaceId iface;
};

class ArpCache {
 public:
  /// Entries older than ttl are treated as absent.
  std::optional<HwAddr> lookup(Ipv4 ip, SimTime now, SimTime ttl) const;
  const ArpEntry* find(Ipv4 ip) const;
  bool contains(Ipv4 ip) const { return find(ip) != nullptr; }
  std::size_t size() const { return entries_.size(); }
  const std::map<Ipv4, ArpEntry>& entries() const { return entries_; }

 private:
  friend class Arp;
  std::map<Ipv4, ArpEntry> entries_;
};

struct PendingResolution {
  Ipv4 target_ip;
  InterfaceId iface;
  std::vector<std::pair<IpPacket, SimTime>> queued;  // packet, queued_at
  int retries_left = 0;
  EventId timer = 0;
};

/// ARP resolution with caching, plus RARP address acquisition.
class Arp {
 public:
  explicit Arp(Simulation& sim) : sim_(sim) {}

  /// Cache hit returns the hardware address. A miss broadcasts a request
  /// (unless one is already pending) and returns nullopt. Throws
  /// Errc::off_subnet when target is outside the interface's subnet.
  std::optional<HwAddr> resolve(InterfaceId iface, Ipv4 target);
  /// Parks a packet until `target` resolves; sent as soon as it does.
  void hold(InterfaceId iface, Ipv4 target, IpPacket packet);

  void handle(InterfaceId in, const ArpPacket& pkt);
  void handle_rarp(InterfaceId in, const ArpPacket& pkt);

  void rarp_boot(NodeId node);
  void add_rarp_mapping(NodeId server, HwAddr hw, Ipv4 ip);
  const std::map<HwAddr, Ipv4>* rarp_table(NodeId server) const;

  void sweep(NodeId node);
  /// Power-off: drop cache and pending work.
  void flush(NodeId node);

  const ArpCache& cache(NodeId node) const;
  const PendingResolution* pending(InterfaceId iface, Ipv4 target) const;

 private:
  struct NodeState {
    ArpCache cache;
    std::map<std::pair<std::uint32_t, Ipv4>, PendingResolution> pending;
    std::optional<EventId> sweep_timer;
  };
  struct RarpPending {
    int retries_left = 0;
    EventId timer = 0;
  };

  NodeState& state(NodeId node) { return nodes_[node]; }
  void learn(InterfaceId iface, Ipv4 ip, HwAddr hw);
  void send_request(InterfaceId iface, Ipv4 target);
  void on_retry(InterfaceId iface, Ipv4 target);
  void flush_pending(InterfaceId iface, Ipv4 target, HwAddr hw);
  void arm_sweep(NodeId node);
  void send_rarp_request(InterfaceId iface);
  void on_rarp_retry(InterfaceId iface);

  Simulation& sim_;
  std::unordered_map<NodeId, NodeState> nodes_;
  std::unordered_map<NodeId, std::map<HwAddr, Ipv4>> rarp_servers_;
  std::map<std::uint32_t, RarpPending> rarp_pending_;
  ArpCache empty_;
};

}  // namespace simlab
