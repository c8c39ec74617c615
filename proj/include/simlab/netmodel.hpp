#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simlab/addr.hpp"
#include "simlab/ids.hpp"
#include "simlab/packets.hpp"
#include "simlab/routing.hpp"
#include "simlab/simcore.hpp"

namespace simlab {

enum class NodeKind { host, router };
enum class Power { on, off };
enum class LinkStatus { up, broken };
enum class BootMode { configured, rarp };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Power power);
std::string_view to_string(LinkStatus status);

struct Interface {
  InterfaceId id;
  NodeId owner;
  HwAddr hw;
  std::optional<Ipv4> ip;
  int prefix_len = 24;
  SegmentId segment;

  std::optional<Prefix> subnet() const {
    if (!ip) return std::nullopt;
    return Prefix::of(*ip, prefix_len);
  }
};

struct Segment {
  SegmentId id;
  std::string name;
  std::vector<InterfaceId> attached;
  SimTime latency = SimTime::ms(1);
  LinkStatus status = LinkStatus::up;
  double noise_p = 0.0;
  std::vector<int> forced;  // countdowns armed by force_corrupt_next
};

struct Node {
  NodeId id;
  std::string name;
  NodeKind kind = NodeKind::host;
  Power power = Power::on;
  BootMode boot = BootMode::configured;
  std::vector<InterfaceId> interfaces;
  RoutingTable routes;
};

/// Topology, shared-medium frame transmission and the fault-injection
/// actions. Delivery to protocol handlers goes through the frame handler.
class Network {
 public:
  using FrameHandler = std::function<void(InterfaceId, const Frame&)>;
  using PowerHook = std::function<void(NodeId, Power)>;

  explicit Network(Engine& engine) : engine_(engine) {}
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  NodeId add_node(NodeKind kind, std::string name);
  SegmentId add_segment(std::string name, SimTime latency = SimTime::ms(1));
  InterfaceId attach(NodeId node, SegmentId segment, std::optional<IfAddr> addr);

  /// Sets the address and installs the connected route.
  void assign_address(InterfaceId iface, Ipv4 ip, int prefix_len);
  void clear_address(InterfaceId iface);

  std::vector<EventId> transmit(InterfaceId from, Frame frame);

  void break_link(SegmentId segment);
  void restore_link(SegmentId segment);
  void set_noise(SegmentId segment, double p);
  void set_power(NodeId node, Power power);
  /// Test hook: the n-th next frame sent on the segment arrives corrupted at
  /// every receiver, independent of noise.
  void force_corrupt_next(SegmentId segment, int n);

  /// Upsert with a route_changed observation when anything but timestamps changed.
  void install_route(NodeId node, const Route& route);
  bool remove_route(NodeId node, const Prefix& prefix, RouteSource source, std::string_view reason);

  Node& node(NodeId id);
  const Node& node(NodeId id) const;
  Interface& iface(InterfaceId id);
  const Interface& iface(InterfaceId id) const;
  Segment& segment(SegmentId id);
  const Segment& segment(SegmentId id) const;

  bool valid(NodeId id) const { return id.value < nodes_.size(); }
  std::optional<NodeId> find_node(std::string_view name) const;
  std::optional<SegmentId> find_segment(std::string_view name) const;
  std::optional<InterfaceId> interface_on(NodeId node, SegmentId segment) const;
  std::optional<InterfaceId> interface_with_ip(NodeId node, Ipv4 ip) const;
  std::optional<InterfaceId> interface_with_hw(HwAddr hw) const;
  /// Other end of a two-interface segment.
  std::optional<InterfaceId> peer_of(InterfaceId iface) const;
  bool is_local_address(NodeId node, Ipv4 ip) const;
  bool powered(NodeId id) const { return node(id).power == Power::on; }

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Interface> interfaces() const { return interfaces_; }
  std::span<const Segment> segments() const { return segments_; }

  std::string label(InterfaceId iface) const;
  const std::string& name(NodeId id) const { return node(id).name; }

  void set_frame_handler(FrameHandler handler) { on_frame_ = std::move(handler); }
  void set_power_hook(PowerHook hook) { on_power_ = std::move(hook); }

  Engine& engine() { return engine_; }

 private:
  void deliver(InterfaceId to, const Frame& frame, std::uint64_t frame_id, SimTime sent_at);

  Engine& engine_;
  std::vector<Node> nodes_;
  std::vector<Interface> interfaces_;
  std::vector<Segment> segments_;
  std::uint64_t next_hw_ = 1;
  std::uint64_t next_frame_ = 0;
  FrameHandler on_frame_;
  PowerHook on_power_;
};

json describe(const Route& route);

}  // namespace simlab
