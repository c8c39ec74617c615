#include "simlab/proto_x25.hpp"

#include "simlab/error.hpp"
#include "simlab/simulation.hpp"

namespace simlab {

std::string_view to_string(LapbState state) {
  switch (state) {
    case LapbState::disconnected: return "disconnected";
    case LapbState::setup: return "setup";
    case LapbState::connected: return "connected";
    case LapbState::disconnecting: return "disconnecting";
  }
  return "?";
}

std::string_view to_string(CircuitState state) {
  switch (state) {
    case CircuitState::ready: return "ready";
    case CircuitState::call_sent: return "call_sent";
    case CircuitState::call_received: return "call_received";
    case CircuitState::data_transfer: return "data_transfer";
    case CircuitState::clearing: return "clearing";
  }
  return "?";
}

namespace {

constexpr int mod8(int v) { return ((v % 8) + 8) % 8; }

}  // namespace

// LAPB

LapbEndpoint& Lapb::ep(InterfaceId iface) {
  auto [it, inserted] = endpoints_.try_emplace(iface.value);
  if (inserted) it->second.iface = iface;
  return it->second;
}

const LapbEndpoint* Lapb::endpoint(InterfaceId iface) const {
  auto it = endpoints_.find(iface.value);
  return it == endpoints_.end() ? nullptr : &it->second;
}

void Lapb::set_state(LapbEndpoint& e, LapbState next, std::string_view reason) {
  if (e.state == next) return;
  json d{{"layer", "lapb"},
         {"node", sim_.net().name(sim_.net().iface(e.iface).owner)},
         {"if", sim_.net().label(e.iface)},
         {"from", to_string(e.state)},
         {"to", to_string(next)}};
  if (!reason.empty()) d["reason"] = reason;
  e.state = next;
  sim_.engine().observe(ObsKind::state_transition, std::move(d));
}

void Lapb::transmit(LapbEndpoint& e, LapbFrame frame) {
  Network& net = sim_.net();
  const auto peer = net.peer_of(e.iface);
  Frame f;
  f.src_hw = net.iface(e.iface).hw;
  f.dst_hw = peer ? net.iface(*peer).hw : HwAddr::broadcast();
  f.proto = FrameProto::lapb;
  f.payload = std::move(frame);
  net.transmit(e.iface, std::move(f));
}

void Lapb::send_i(LapbEndpoint& e, int ns, const LapbPayload& payload, bool poll) {
  transmit(e, LapbFrame{LapbKind::i, ns, e.vr, poll, payload});
}

void Lapb::connect(InterfaceId iface) {
  if (!sim_.net().peer_of(iface)) {
    throw Error(Errc::not_point_to_point, sim_.net().label(iface) + " is not on a point-to-point segment");
  }
  LapbEndpoint& e = ep(iface);
  if (e.state != LapbState::disconnected) {
    throw Error(Errc::bad_state, "lapb_connect needs a disconnected endpoint");
  }
  if (!sim_.net().powered(sim_.net().iface(iface).owner)) throw Error(Errc::powered_off, "node is powered off");
  reset(e);
  set_state(e, LapbState::setup);
  e.transmissions = 1;
  transmit(e, LapbFrame{LapbKind::sabm});
  arm_t1(e);
}

void Lapb::disconnect(InterfaceId iface) {
  LapbEndpoint& e = ep(iface);
  if (e.state != LapbState::connected) throw Error(Errc::bad_state, "lapb_disconnect needs a connected endpoint");
  sim_.x25().link_down(iface);
  reset(e);
  set_state(e, LapbState::disconnecting);
  e.transmissions = 1;
  transmit(e, LapbFrame{LapbKind::disc});
  arm_t1(e);
}

void Lapb::send(InterfaceId iface, LapbPayload payload) {
  LapbEndpoint& e = ep(iface);
  if (e.state != LapbState::connected) throw Error(Errc::bad_state, "lapb_send needs a connected endpoint");
  e.send_queue.push_back(std::move(payload));
  pump(e);
}

void Lapb::pump(LapbEndpoint& e) {
  const int k = sim_.config().lapb.window;
  while (e.state == LapbState::connected && e.outstanding() < k && !e.send_queue.empty()) {
    LapbPayload payload = std::move(e.send_queue.front());
    e.send_queue.pop_front();
    const int ns = e.vs;
    e.vs = mod8(e.vs + 1);
    e.unacked.emplace_back(ns, payload);
    send_i(e, ns, payload, false);
    if (!e.t1) {
      e.transmissions = 1;
      arm_t1(e);
    }
  }
}

void Lapb::acknowledge(LapbEndpoint& e, int nr) {
  const int count = mod8(nr - e.va);
  if (count > e.outstanding()) return;  // not a valid N(R)
  for (int i = 0; i < count; ++i) e.unacked.pop_front();
  e.va = nr;
  if (count > 0) {
    if (e.unacked.empty()) {
      stop_t1(e);
    } else {
      e.transmissions = 1;
      arm_t1(e);
    }
  }
  pump(e);
}

void Lapb::arm_t1(LapbEndpoint& e) {
  stop_t1(e);
  const InterfaceId iface = e.iface;
  e.t1 = sim_.engine().schedule_in(sim_.config().lapb.t1, Simulation::timer(sim_.net().iface(iface).owner),
                                   [this, iface] { on_t1(iface); });
}

void Lapb::stop_t1(LapbEndpoint& e) {
  if (e.t1) sim_.engine().cancel(*e.t1);
  e.t1.reset();
}

void Lapb::reset(LapbEndpoint& e) {
  e.vs = e.vr = e.va = 0;
  e.send_queue.clear();
  e.unacked.clear();
  e.rej_outstanding = false;
  e.transmissions = 0;
  stop_t1(e);
}

void Lapb::on_t1(InterfaceId iface) {
  LapbEndpoint& e = ep(iface);
  e.t1.reset();
  const int n2 = sim_.config().lapb.n2;
  const std::string node = sim_.net().name(sim_.net().iface(iface).owner);
  switch (e.state) {
    case LapbState::setup:
      if (e.transmissions < n2) {
        ++e.transmissions;
        transmit(e, LapbFrame{LapbKind::sabm});
        arm_t1(e);
      } else {
        sim_.engine().observe(ObsKind::connect_failed,
                              {{"node", node}, {"if", sim_.net().label(iface)}, {"attempts", e.transmissions}});
        reset(e);
        set_state(e, LapbState::disconnected, "connect_failed");
      }
      break;
    case LapbState::connected:
      if (e.unacked.empty()) break;
      if (e.transmissions < n2) {
        ++e.transmissions;
        send_i(e, e.unacked.front().first, e.unacked.front().second, true);
        arm_t1(e);
      } else {
        sim_.engine().observe(ObsKind::link_reset, {{"node", node},
                                                    {"if", sim_.net().label(iface)},
                                                    {"ns", e.unacked.front().first},
                                                    {"attempts", e.transmissions}});
        sim_.x25().link_down(iface);
        reset(e);
        set_state(e, LapbState::disconnected, "n2_exhausted");
      }
      break;
    case LapbState::disconnecting:
      if (e.transmissions < n2) {
        ++e.transmissions;
        transmit(e, LapbFrame{LapbKind::disc});
        arm_t1(e);
      } else {
        set_state(e, LapbState::disconnected, "n2_exhausted");
      }
      break;
    case LapbState::disconnected:
      break;
  }
}

void Lapb::deliver_up(LapbEndpoint& e, const LapbPayload& payload) {
  if (const auto* pkt = std::get_if<X25Packet>(&payload)) {
    sim_.x25().handle(e.iface, *pkt);
    return;
  }
  sim_.engine().observe(ObsKind::packet_delivered, {{"layer", "lapb"},
                                                    {"node", sim_.net().name(sim_.net().iface(e.iface).owner)},
                                                    {"if", sim_.net().label(e.iface)},
                                                    {"data", std::get<std::string>(payload)}});
}

void Lapb::handle(InterfaceId iface, const LapbFrame& frame, bool corrupted) {
  if (corrupted) return;  // checksum failure: recovery is REJ / t1 driven
  LapbEndpoint& e = ep(iface);
  switch (frame.kind) {
    case LapbKind::sabm: {
      const bool had_link = e.state == LapbState::connected;
      if (had_link) sim_.x25().link_down(iface);
      reset(e);
      transmit(e, LapbFrame{LapbKind::ua});
      set_state(e, LapbState::connected, had_link ? "peer_reset" : "");
      break;
    }
    case LapbKind::ua:
      if (e.state == LapbState::setup) {
        reset(e);
        set_state(e, LapbState::connected);
      } else if (e.state == LapbState::disconnecting) {
        stop_t1(e);
        set_state(e, LapbState::disconnected);
      }
      break;
    case LapbKind::disc:
      transmit(e, LapbFrame{LapbKind::ua});
      if (e.state != LapbState::disconnected) {
        sim_.x25().link_down(iface);
        reset(e);
        set_state(e, LapbState::disconnected, "peer_disc");
      }
      break;
    case LapbKind::i: {
      if (e.state != LapbState::connected) break;
      acknowledge(e, frame.nr);
      if (frame.ns == e.vr) {
        e.vr = mod8(e.vr + 1);
        e.rej_outstanding = false;
        transmit(e, LapbFrame{LapbKind::rr, 0, e.vr});
        if (frame.payload) deliver_up(e, *frame.payload);
      } else if (frame.ns == mod8(e.vr - 1)) {
        transmit(e, LapbFrame{LapbKind::rr, 0, e.vr});
      } else if (!e.rej_outstanding) {
        e.rej_outstanding = true;
        transmit(e, LapbFrame{LapbKind::rej, 0, e.vr});
      } else if (frame.poll) {
        transmit(e, LapbFrame{LapbKind::rr, 0, e.vr});
      }
      break;
    }
    case LapbKind::rr:
      if (e.state == LapbState::connected) acknowledge(e, frame.nr);
      break;
    case LapbKind::rej:
      if (e.state != LapbState::connected) break;
      acknowledge(e, frame.nr);
      if (e.va == frame.nr && !e.unacked.empty()) {
        for (const auto& [ns, payload] : e.unacked) send_i(e, ns, payload, false);
        e.transmissions = 1;
        arm_t1(e);
      }
      break;
  }
}

void Lapb::flush(NodeId node) {
  for (InterfaceId i : sim_.net().node(node).interfaces) {
    auto it = endpoints_.find(i.value);
    if (it == endpoints_.end()) continue;
    it->second.t1.reset();  // timers already cancelled with the node
    reset(it->second);
    it->second.state = LapbState::disconnected;
  }
}

// X.25 packet layer

const std::map<int, VirtualCircuit>& X25::circuits(InterfaceId dte) const {
  auto it = dtes_.find(dte.value);
  return it == dtes_.end() ? none_ : it->second;
}

const VirtualCircuit* X25::circuit(InterfaceId dte, int lci) const {
  const auto& all = circuits(dte);
  auto it = all.find(lci);
  return it == all.end() ? nullptr : &it->second;
}

void X25::transition(InterfaceId dte, VirtualCircuit& vc, CircuitState next) {
  sim_.engine().observe(ObsKind::state_transition, {{"layer", "x25"},
                                                    {"node", sim_.net().name(sim_.net().iface(dte).owner)},
                                                    {"if", sim_.net().label(dte)},
                                                    {"lci", vc.lci},
                                                    {"from", to_string(vc.state)},
                                                    {"to", to_string(next)}});
  vc.state = next;
}

void X25::release(InterfaceId dte, int lci) { dtes_[dte.value].erase(lci); }

void X25::emit(InterfaceId dte, X25Packet pkt) { sim_.lapb().send(dte, std::move(pkt)); }

void X25::discard(InterfaceId dte, const X25Packet& pkt, std::string_view reason) {
  json d = describe(pkt);
  d["layer"] = "x25";
  d["node"] = sim_.net().name(sim_.net().iface(dte).owner);
  d["if"] = sim_.net().label(dte);
  d["reason"] = reason;
  sim_.engine().observe(ObsKind::packet_dropped, std::move(d));
}

int X25::call(InterfaceId dte, std::string remote) {
  const LapbEndpoint* link = sim_.lapb().endpoint(dte);
  if (link == nullptr || link->state != LapbState::connected) throw Error(Errc::link_down, "LAPB link is not up");
  auto& vcs = dtes_[dte.value];
  int lci = 1;
  while (lci <= kMaxLci && vcs.contains(lci)) ++lci;
  if (lci > kMaxLci) throw Error(Errc::no_free_lci, "no free logical channel");
  VirtualCircuit& vc = vcs[lci];
  vc.lci = lci;
  vc.remote = remote;
  transition(dte, vc, CircuitState::call_sent);
  X25Packet pkt;
  pkt.kind = X25Kind::call_request;
  pkt.lci = lci;
  pkt.called = std::move(remote);
  pkt.calling = sim_.net().name(sim_.net().iface(dte).owner);
  emit(dte, std::move(pkt));
  return lci;
}

void X25::send(InterfaceId dte, int lci, std::string data) {
  auto& vcs = dtes_[dte.value];
  auto it = vcs.find(lci);
  if (it == vcs.end()) throw Error(Errc::unknown_lci, "unknown lci " + std::to_string(lci));
  if (it->second.state != CircuitState::data_transfer) {
    throw Error(Errc::bad_circuit_state, "circuit " + std::to_string(lci) + " is not in data_transfer");
  }
  it->second.queue.push_back(std::move(data));
  pump(dte, it->second);
}

void X25::pump(InterfaceId dte, VirtualCircuit& vc) {
  const int window = sim_.config().x25.window;
  while (vc.state == CircuitState::data_transfer && vc.outstanding() < window && !vc.queue.empty()) {
    X25Packet pkt;
    pkt.kind = X25Kind::data;
    pkt.lci = vc.lci;
    pkt.ps = vc.ps;
    pkt.pr = vc.pr;
    pkt.data = std::move(vc.queue.front());
    vc.queue.pop_front();
    vc.ps = mod8(vc.ps + 1);
    emit(dte, std::move(pkt));
  }
}

void X25::clear(InterfaceId dte, int lci) {
  auto& vcs = dtes_[dte.value];
  auto it = vcs.find(lci);
  if (it == vcs.end()) throw Error(Errc::unknown_lci, "unknown lci " + std::to_string(lci));
  if (it->second.state == CircuitState::clearing || it->second.state == CircuitState::ready) {
    throw Error(Errc::bad_circuit_state, "circuit " + std::to_string(lci) + " is already clearing");
  }
  transition(dte, it->second, CircuitState::clearing);
  emit(dte, X25Packet{X25Kind::clear_request, lci});
}

void X25::handle(InterfaceId dte, const X25Packet& pkt) {
  auto& vcs = dtes_[dte.value];
  auto it = vcs.find(pkt.lci);
  VirtualCircuit* vc = it == vcs.end() ? nullptr : &it->second;

  switch (pkt.kind) {
    case X25Kind::call_request: {
      if (vc != nullptr) {
        discard(dte, pkt, "call_collision");
        return;
      }
      if (pkt.lci < 1 || pkt.lci > kMaxLci) {
        discard(dte, pkt, "lci_out_of_range");
        return;
      }
      VirtualCircuit& fresh = vcs[pkt.lci];
      fresh.lci = pkt.lci;
      fresh.remote = pkt.calling;
      transition(dte, fresh, CircuitState::call_received);
      emit(dte, X25Packet{X25Kind::call_accepted, pkt.lci});
      transition(dte, fresh, CircuitState::data_transfer);
      return;
    }
    case X25Kind::call_accepted:
      if (vc == nullptr || vc->state != CircuitState::call_sent) {
        discard(dte, pkt, vc == nullptr ? "unknown_lci" : "unexpected_in_state");
        return;
      }
      vc->ps = vc->pr = vc->acked = 0;
      transition(dte, *vc, CircuitState::data_transfer);
      pump(dte, *vc);
      return;
    case X25Kind::clear_request:
      if (vc == nullptr) {
        discard(dte, pkt, "unknown_lci");
        return;
      }
      emit(dte, X25Packet{X25Kind::clear_confirm, pkt.lci});
      transition(dte, *vc, CircuitState::ready);
      release(dte, pkt.lci);
      return;
    case X25Kind::clear_confirm:
      if (vc == nullptr || vc->state != CircuitState::clearing) {
        discard(dte, pkt, vc == nullptr ? "unknown_lci" : "unexpected_in_state");
        return;
      }
      transition(dte, *vc, CircuitState::ready);
      release(dte, pkt.lci);
      return;
    case X25Kind::data: {
      if (vc == nullptr) {
        discard(dte, pkt, "unknown_lci");
        return;
      }
      if (vc->state != CircuitState::data_transfer) {
        discard(dte, pkt, "unexpected_in_state");
        return;
      }
      if (pkt.ps != vc->pr) {
        discard(dte, pkt, "out_of_sequence");
        return;
      }
      if (mod8(pkt.pr - vc->acked) <= vc->outstanding()) vc->acked = pkt.pr;
      vc->pr = mod8(vc->pr + 1);
      sim_.engine().observe(ObsKind::packet_delivered, {{"layer", "x25"},
                                                        {"node", sim_.net().name(sim_.net().iface(dte).owner)},
                                                        {"if", sim_.net().label(dte)},
                                                        {"lci", pkt.lci},
                                                        {"ps", pkt.ps},
                                                        {"data", pkt.data}});
      X25Packet ack{X25Kind::rr, pkt.lci};
      ack.pr = vc->pr;
      emit(dte, std::move(ack));
      pump(dte, *vc);
      return;
    }
    case X25Kind::rr:
      if (vc == nullptr || vc->state != CircuitState::data_transfer) {
        discard(dte, pkt, vc == nullptr ? "unknown_lci" : "unexpected_in_state");
        return;
      }
      if (mod8(pkt.pr - vc->acked) <= vc->outstanding()) vc->acked = pkt.pr;
      pump(dte, *vc);
      return;
  }
}

void X25::link_down(InterfaceId dte) {
  auto it = dtes_.find(dte.value);
  if (it == dtes_.end()) return;
  for (auto& [lci, vc] : it->second) transition(dte, vc, CircuitState::ready);
  dtes_.erase(it);
}

}  // namespace simlab
