#include "simlab/packets.hpp"

namespace simlab {

std::string_view to_string(ArpOp op) { return op == ArpOp::request ? "request" : "reply"; }

std::string_view to_string(IpProto proto) {
  switch (proto) {
    case IpProto::icmp: return "icmp";
    case IpProto::rip_udp: return "rip_udp";
    case IpProto::data: return "data";
  }
  return "?";
}

std::string_view to_string(IcmpType type) {
  switch (type) {
    case IcmpType::echo_request: return "echo_request";
    case IcmpType::echo_reply: return "echo_reply";
    case IcmpType::time_exceeded: return "time_exceeded";
    case IcmpType::dest_unreachable: return "dest_unreachable";
  }
  return "?";
}

std::string_view to_string(X25Kind kind) {
  switch (kind) {
    case X25Kind::call_request: return "call_request";
    case X25Kind::call_accepted: return "call_accepted";
    case X25Kind::clear_request: return "clear_request";
    case X25Kind::clear_confirm: return "clear_confirm";
    case X25Kind::data: return "data";
    case X25Kind::rr: return "rr";
  }
  return "?";
}

std::string_view to_string(LapbKind kind) {
  switch (kind) {
    case LapbKind::sabm: return "SABM";
    case LapbKind::ua: return "UA";
    case LapbKind::disc: return "DISC";
    case LapbKind::i: return "I";
    case LapbKind::rr: return "RR";
    case LapbKind::rej: return "REJ";
  }
  return "?";
}

std::string_view to_string(FrameProto proto) {
  switch (proto) {
    case FrameProto::arp: return "arp";
    case FrameProto::rarp: return "rarp";
    case FrameProto::ip: return "ip";
    case FrameProto::lapb: return "lapb";
  }
  return "?";
}

json describe(const X25Packet& pkt) {
  json d{{"x25", to_string(pkt.kind)}, {"lci", pkt.lci}};
  if (pkt.kind == X25Kind::data || pkt.kind == X25Kind::rr) {
    d["ps"] = pkt.ps;
    d["pr"] = pkt.pr;
  }
  if (pkt.kind == X25Kind::data) d["data"] = pkt.data;
  if (pkt.kind == X25Kind::call_request) {
    d["called"] = pkt.called;
    d["calling"] = pkt.calling;
  }
  return d;
}

json describe(const Frame& frame) {
  json d{{"proto", to_string(frame.proto)},
         {"src_hw", frame.src_hw.str()},
         {"dst_hw", frame.dst_hw.str()}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ArpPacket>) {
          d["op"] = to_string(p.op);
          d["sender_ip"] = p.sender_ip.str();
          d["target_ip"] = p.target_ip.str();
          if (p.target_hw) d["target_hw"] = p.target_hw->str();
        } else if constexpr (std::is_same_v<T, IpPacket>) {
          d["src"] = p.src.str();
          d["dst"] = p.dst.str();
          d["ttl"] = p.ttl;
          d["ip_proto"] = to_string(p.proto);
          if (const auto* icmp = std::get_if<IcmpMessage>(&p.payload)) {
            d["icmp"] = to_string(icmp->type);
            d["icmp_seq"] = icmp->seq;
          }
        } else {
          d["lapb"] = to_string(p.kind);
          if (p.kind == LapbKind::i) d["ns"] = p.ns;
          if (p.kind == LapbKind::i || p.kind == LapbKind::rr || p.kind == LapbKind::rej) d["nr"] = p.nr;
          if (p.poll) d["poll"] = true;
          if (p.payload) {
            if (const auto* x = std::get_if<X25Packet>(&*p.payload)) {
              d["x25"] = to_string(x->kind);
              d["lci"] = x->lci;
            } else {
              d["payload"] = std::get<std::string>(*p.payload);
            }
          }
        }
      },
      frame.payload);
  return d;
}

}  // namespace simlab
