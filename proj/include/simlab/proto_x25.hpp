#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

#include "simlab/ids.hpp"
#include "simlab/packets.hpp"
#include "simlab/simcore.hpp"

namespace simlab {

class Simulation;

struct LapbConfig {
  int window = 7;  // k
  SimTime t1 = SimTime::sec(3);
  int n2 = 10;

  bool operator==(const LapbConfig&) const = default;
};

struct X25Config {
  int window = 2;

  bool operator==(const X25Config&) const = default;
};

enum class LapbState { disconnected, setup, connected, disconnecting };
enum class CircuitState { ready, call_sent, call_received, data_transfer, clearing };

std::string_view to_string(LapbState state);
std::string_view to_string(CircuitState state);

struct LapbEndpoint {
  InterfaceId iface;
  LapbState state = LapbState::disconnected;
  int vs = 0;  // next ns to assign
  int vr = 0;  // next ns expected
  int va = 0;  // oldest unacknowledged ns
  std::deque<LapbPayload> send_queue;
  std::deque<std::pair<int, LapbPayload>> unacked;
  bool rej_outstanding = false;
  int transmissions = 0;  // of the frame t1 is guarding
  std::optional<EventId> t1;

  int outstanding() const { return static_cast<int>(unacked.size()); }
};

/// LAPB-style link layer: modulo-8 go-back-N with REJ and t1 recovery.
class Lapb {
 public:
  explicit Lapb(Simulation& sim) : sim_(sim) {}

  void connect(InterfaceId iface);
  void disconnect(InterfaceId iface);
  void send(InterfaceId iface, LapbPayload payload);
  void handle(InterfaceId iface, const LapbFrame& frame, bool corrupted);
  void flush(NodeId node);

  const LapbEndpoint* endpoint(InterfaceId iface) const;

 private:
  LapbEndpoint& ep(InterfaceId iface);
  void set_state(LapbEndpoint& e, LapbState next, std::string_view reason = {});
  void transmit(LapbEndpoint& e, LapbFrame frame);
  void send_i(LapbEndpoint& e, int ns, const LapbPayload& payload, bool poll);
  void pump(LapbEndpoint& e);
  void acknowledge(LapbEndpoint& e, int nr);
  void arm_t1(LapbEndpoint& e);
  void stop_t1(LapbEndpoint& e);
  void on_t1(InterfaceId iface);
  void reset(LapbEndpoint& e);
  void deliver_up(LapbEndpoint& e, const LapbPayload& payload);

  Simulation& sim_;
  std::map<std::uint32_t, LapbEndpoint> endpoints_;
};

struct VirtualCircuit {
  int lci = 0;
  CircuitState state = CircuitState::ready;
  int ps = 0;     // next packet send number
  int pr = 0;     // next packet expected
  int acked = 0;  // oldest unacknowledged ps
  std::deque<std::string> queue;
  std::string remote;

  int outstanding() const { return (ps - acked + 8) % 8; }
};

/// X.25 packet layer: virtual circuits carried in LAPB I-frames.
class X25 {
 public:
  static constexpr int kMaxLci = 4095;

  explicit X25(Simulation& sim) : sim_(sim) {}

  int call(InterfaceId dte, std::string remote);
  void send(InterfaceId dte, int lci, std::string data);
  void clear(InterfaceId dte, int lci);
  void handle(InterfaceId dte, const X25Packet& pkt);
  /// Link lost: every circuit on the DTE returns to ready.
  void link_down(InterfaceId dte);

  const VirtualCircuit* circuit(InterfaceId dte, int lci) const;
  const std::map<int, VirtualCircuit>& circuits(InterfaceId dte) const;

 private:
  void transition(InterfaceId dte, VirtualCircuit& vc, CircuitState next);
  void release(InterfaceId dte, int lci);
  void emit(InterfaceId dte, X25Packet pkt);
  void pump(InterfaceId dte, VirtualCircuit& vc);
  void discard(InterfaceId dte, const X25Packet& pkt, std::string_view reason);

  Simulation& sim_;
  std::map<std::uint32_t, std::map<int, VirtualCircuit>> dtes_;
  std::map<int, VirtualCircuit> none_;
};

}  // namespace simlab
