#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "simlab/addr.hpp"
#include "simlab/simcore.hpp"

namespace simlab {

enum class ArpOp { request, reply };

/// Shared by ARP and RARP. For ARP requests target_hw is unset; RARP
/// requests carry the asking host's own address there.
struct ArpPacket {
  ArpOp op = ArpOp::request;
  HwAddr sender_hw;
  Ipv4 sender_ip;
  std::optional<HwAddr> target_hw;
  Ipv4 target_ip;
};

enum class IpProto { icmp, rip_udp, data };
enum class IcmpType { echo_request, echo_reply, time_exceeded, dest_unreachable };

/// Header fields quoted back inside ICMP error messages.
struct QuotedHeader {
  Ipv4 src, dst;
  int ttl = 0;
  IpProto proto = IpProto::data;
  std::uint32_t ident = 0;
  std::optional<IcmpType> icmp_type;
  std::uint32_t icmp_ident = 0;
  std::uint32_t icmp_seq = 0;
};

struct IcmpMessage {
  IcmpType type = IcmpType::echo_request;
  std::uint32_t ident = 0;
  std::uint32_t seq = 0;
  std::optional<QuotedHeader> original;

  bool is_error() const { return type == IcmpType::time_exceeded || type == IcmpType::dest_unreachable; }
};

struct RipEntry {
  Prefix prefix;
  int metric = 0;
};

struct RipUpdate {
  Ipv4 sender;
  std::vector<RipEntry> entries;
};

struct DataPayload {
  std::string text;
};

struct IpPacket {
  Ipv4 src, dst;
  int ttl = 64;
  IpProto proto = IpProto::data;
  std::uint32_t ident = 0;
  std::variant<IcmpMessage, RipUpdate, DataPayload> payload;
  // Time spent parked behind address resolution, summed along the path.
  SimTime resolution_wait;
};

enum class X25Kind { call_request, call_accepted, clear_request, clear_confirm, data, rr };

struct X25Packet {
  X25Kind kind = X25Kind::data;
  int lci = 0;
  int ps = 0;
  int pr = 0;
  std::string called;
  std::string calling;
  std::string data;
};

enum class LapbKind { sabm, ua, disc, i, rr, rej };

using LapbPayload = std::variant<std::string, X25Packet>;

struct LapbFrame {
  LapbKind kind = LapbKind::i;
  int ns = 0;
  int nr = 0;
  bool poll = false;
  std::optional<LapbPayload> payload;  // I-frames only
};

enum class FrameProto { arp, rarp, ip, lapb };

struct Frame {
  HwAddr src_hw;
  HwAddr dst_hw;
  FrameProto proto = FrameProto::ip;
  std::variant<ArpPacket, IpPacket, LapbFrame> payload;
  bool corrupted = false;
};

std::string_view to_string(ArpOp op);
std::string_view to_string(IpProto proto);
std::string_view to_string(IcmpType type);
std::string_view to_string(X25Kind kind);
std::string_view to_string(LapbKind kind);
std::string_view to_string(FrameProto proto);

/// Flattened description of a frame's headers for trace records.
json describe(const Frame& frame);
json describe(const X25Packet& pkt);

}  // namespace simlab
