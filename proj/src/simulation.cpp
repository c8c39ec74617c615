#include "simlab/simulation.hpp"

#include <string>

#include "simlab/error.hpp"

namespace simlab {

namespace {

SimTime duration_value(std::string_view path, const json& v) {
  if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    return SimTime{v.get<std::uint64_t>()};
  }
  if (v.is_string()) {
    if (auto d = parse_duration(v.get<std::string>())) return *d;
  }
  throw Error(Errc::bad_type, std::string(path) + " expects a duration");
}

SimTime positive_duration(std::string_view path, const json& v) {
  SimTime d = duration_value(path, v);
  if (d.ticks == 0) throw Error(Errc::out_of_range, std::string(path) + " must be positive");
  return d;
}

int int_in(std::string_view path, const json& v, int lo, int hi) {
  if (!v.is_number_integer()) throw Error(Errc::bad_type, std::string(path) + " expects an integer");
  const auto n = v.get<std::int64_t>();
  if (n < lo || n > hi) {
    throw Error(Errc::out_of_range,
                std::string(path) + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(n);
}

}  // namespace

json to_json(const ProtocolConfig& c) {
  return {
      {"arp",
       {{"ttl", c.arp.ttl.ticks},
        {"retries", c.arp.retries},
        {"retry_interval", c.arp.retry_interval.ticks},
        {"sweep_interval", c.arp.sweep_interval.ticks}}},
      {"ip", {{"probe_timeout", c.ip.probe_timeout.ticks}, {"default_ttl", c.ip.default_ttl}}},
      {"rip",
       {{"update_interval", c.rip.update_interval.ticks},
        {"route_timeout", c.rip.route_timeout.ticks},
        {"gc_timeout", c.rip.gc_timeout.ticks},
        {"hold_down", c.rip.hold_down.ticks},
        {"sweep_interval", c.rip.sweep_interval.ticks},
        {"split_horizon", to_string(c.rip.split_horizon)},
        {"triggered_updates", c.rip.triggered_updates}}},
      {"lapb", {{"window", c.lapb.window}, {"t1", c.lapb.t1.ticks}, {"n2", c.lapb.n2}}},
      {"x25", {{"window", c.x25.window}}},
  };
}

void apply_param(ProtocolConfig& c, std::string_view path, const json& v) {
  if (path == "arp.ttl") c.arp.ttl = positive_duration(path, v);
  else if (path == "arp.retries") c.arp.retries = int_in(path, v, 1, 100);
  else if (path == "arp.retry_interval") c.arp.retry_interval = positive_duration(path, v);
  else if (path == "arp.sweep_interval") c.arp.sweep_interval = positive_duration(path, v);
  else if (path == "ip.probe_timeout") c.ip.probe_timeout = positive_duration(path, v);
  else if (path == "ip.default_ttl") c.ip.default_ttl = int_in(path, v, 1, 255);
  else if (path == "rip.update_interval") c.rip.update_interval = positive_duration(path, v);
  else if (path == "rip.route_timeout") c.rip.route_timeout = positive_duration(path, v);
  else if (path == "rip.gc_timeout") c.rip.gc_timeout = positive_duration(path, v);
  else if (path == "rip.hold_down") c.rip.hold_down = duration_value(path, v);
  else if (path == "rip.sweep_interval") c.rip.sweep_interval = positive_duration(path, v);
  else if (path == "rip.split_horizon") {
    auto mode = v.is_string() ? split_horizon_from_string(v.get<std::string>()) : std::nullopt;
    if (!mode) throw Error(Errc::out_of_range, "rip.split_horizon must be off, simple or poisoned_reverse");
    c.rip.split_horizon = *mode;
  } else if (path == "rip.triggered_updates") {
    if (!v.is_boolean()) throw Error(Errc::bad_type, "rip.triggered_updates expects a boolean");
    c.rip.triggered_updates = v.get<bool>();
  } else if (path == "lapb.window") c.lapb.window = int_in(path, v, 1, 7);
  else if (path == "lapb.t1") c.lapb.t1 = positive_duration(path, v);
  else if (path == "lapb.n2") c.lapb.n2 = int_in(path, v, 1, 1000);
  else if (path == "x25.window") c.x25.window = int_in(path, v, 1, 7);
  else throw Error(Errc::unknown_ref, "unknown parameter " + std::string(path));
}

Simulation::Simulation(std::uint64_t seed, ProtocolConfig config)
    : config_(config), engine_(seed), net_(engine_), arp_(*this), ip_(*this), rip_(*this), lapb_(*this), x25_(*this) {
  engine_.set_guard([this](const Event& ev) {
    if (!ev.target.node || ev.target.kind == EventKind::delivery) return true;
    NodeId n{*ev.target.node};
    return !net_.valid(n) || net_.powered(n);
  });
  net_.set_frame_handler([this](InterfaceId in, const Frame& f) { on_frame(in, f); });
  net_.set_power_hook([this](NodeId n, Power p) { on_power(n, p); });
}

void Simulation::set_param(std::string_view path, const json& value) {
  apply_param(config_, path, value);
  engine_.observe(ObsKind::fault_applied, {{"fault", "set_param"}, {"param", path}, {"value", value}});
}

void Simulation::on_frame(InterfaceId in, const Frame& frame) {
  if (frame.proto == FrameProto::lapb) {
    lapb_.handle(in, std::get<LapbFrame>(frame.payload), frame.corrupted);
    return;
  }
  if (frame.corrupted) return;
  switch (frame.proto) {
    case FrameProto::arp: arp_.handle(in, std::get<ArpPacket>(frame.payload)); break;
    case FrameProto::rarp: arp_.handle_rarp(in, std::get<ArpPacket>(frame.payload)); break;
    case FrameProto::ip: ip_.receive(in, std::get<IpPacket>(frame.payload)); break;
    case FrameProto::lapb: break;
  }
}

void Simulation::on_power(NodeId node, Power power) {
  if (power == Power::off) {
    engine_.cancel_if([node](const Event& ev) {
      return ev.target.kind == EventKind::timer && ev.target.node == node.value;
    });
    arp_.flush(node);
    rip_.flush(node);
    ip_.flush(node);
    for (InterfaceId i : net_.node(node).interfaces) x25_.link_down(i);
    lapb_.flush(node);
    if (net_.node(node).boot == BootMode::rarp) {
      for (InterfaceId i : net_.node(node).interfaces) {
        if (net_.iface(i).ip) net_.clear_address(i);
      }
    }
    return;
  }
  if (rip_.enabled(node)) rip_.start(node);
  if (net_.node(node).boot == BootMode::rarp) arp_.rarp_boot(node);
}

json Simulation::snapshot() const {
  json nodes = json::array();
  for (const Node& n : net_.nodes()) {
    json ifs = json::array();
    for (InterfaceId i : n.interfaces) {
      const Interface& itf = net_.iface(i);
      json j{{"label", net_.label(i)},
             {"hw", itf.hw.str()},
             {"segment", net_.segment(itf.segment).name},
             {"ip", itf.ip ? json(itf.ip->str() + "/" + std::to_string(itf.prefix_len)) : json(nullptr)}};
      if (const LapbEndpoint* e = lapb_.endpoint(i)) {
        j["lapb"] = {{"state", to_string(e->state)},
                     {"vs", e->vs},
                     {"vr", e->vr},
                     {"va", e->va},
                     {"unacked", e->outstanding()},
                     {"queued", e->send_queue.size()}};
      }
      json vcs = json::array();
      for (const auto& [lci, vc] : x25_.circuits(i)) {
        vcs.push_back({{"lci", lci}, {"state", to_string(vc.state)}, {"remote", vc.remote}, {"ps", vc.ps},
                       {"pr", vc.pr}});
      }
      if (!vcs.empty()) j["circuits"] = std::move(vcs);
      ifs.push_back(std::move(j));
    }
    json routes = json::array();
    for (const Route& r : n.routes.entries()) routes.push_back(describe(r));
    json cache = json::array();
    for (const auto& [ip, e] : arp_.cache(n.id).entries()) {
      cache.push_back({{"ip", ip.str()}, {"hw", e.hw.str()}, {"learned_at", e.learned_at.ticks}});
    }
    nodes.push_back({{"name", n.name},
                     {"kind", to_string(n.kind)},
                     {"power", to_string(n.power)},
                     {"rip", rip_.enabled(n.id)},
                     {"interfaces", std::move(ifs)},
                     {"routes", std::move(routes)},
                     {"arp_cache", std::move(cache)}});
  }
  json segs = json::array();
  for (const Segment& s : net_.segments()) {
    segs.push_back({{"name", s.name},
                    {"status", to_string(s.status)},
                    {"noise", s.noise_p},
                    {"latency", s.latency.ticks},
                    {"attached", s.attached.size()}});
  }
  return {{"now", engine_.now().ticks},
          {"dispatched", engine_.dispatched()},
          {"pending", engine_.pending()},
          {"config", to_json(config_)},
          {"nodes", std::move(nodes)},
          {"segments", std::move(segs)}};
}

}  // namespace simlab
