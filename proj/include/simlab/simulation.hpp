#pragma once

#include <cstdint>
#include <string_view>

#include "simlab/netmodel.hpp"
#include "simlab/proto_arp.hpp"
#include "simlab/proto_ip.hpp"
#include "simlab/proto_rip.hpp"
#include "simlab/proto_x25.hpp"
#include "simlab/simcore.hpp"

namespace simlab {

struct ProtocolConfig {
  ArpConfig arp;
  IpConfig ip;
  RipConfig rip;
  LapbConfig lapb;
  X25Config x25;

  bool operator==(const ProtocolConfig&) const = default;
};

json to_json(const ProtocolConfig& config);
/// Applies one "section.field" assignment. Throws Errc::out_of_range or
/// Errc::unknown_ref.
void apply_param(ProtocolConfig& config, std::string_view path, const json& value);

/// One simulated world: engine, topology and every protocol stack.
class Simulation {
 public:
  explicit Simulation(std::uint64_t seed, ProtocolConfig config = {});
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  Engine& engine() { return engine_; }
  const Engine& engine() const { return engine_; }
  Network& net() { return net_; }
  const Network& net() const { return net_; }
  Arp& arp() { return arp_; }
  const Arp& arp() const { return arp_; }
  Ip& ip() { return ip_; }
  const Ip& ip() const { return ip_; }
  Rip& rip() { return rip_; }
  const Rip& rip() const { return rip_; }
  Lapb& lapb() { return lapb_; }
  const Lapb& lapb() const { return lapb_; }
  X25& x25() { return x25_; }
  const X25& x25() const { return x25_; }

  ProtocolConfig& config() { return config_; }
  const ProtocolConfig& config() const { return config_; }

  /// Live parameter change, recorded as a fault_applied observation.
  void set_param(std::string_view path, const json& value);

  /// Timer target for a node; cancelled when the node powers off.
  static Target timer(NodeId node) { return {node.value, EventKind::timer}; }

  json snapshot() const;

 private:
  void on_frame(InterfaceId in, const Frame& frame);
  void on_power(NodeId node, Power power);

  ProtocolConfig config_;
  Engine engine_;
  Network net_;
  Arp arp_;
  Ip ip_;
  Rip rip_;
  Lapb lapb_;
  X25 x25_;
};

}  // namespace simlab
