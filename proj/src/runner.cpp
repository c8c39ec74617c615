#include "simlab/runner.hpp"

#include "simlab/error.hpp"

namespace simlab {

json to_json(const Injection& inj) {
  return {{"after_events", inj.after_events}, {"at", inj.at.ticks}, {"action", inj.action}};
}

namespace {

bool node_origin(const std::string& kind) {
  return kind == "ping" || kind == "traceroute" || kind == "send" || kind == "rarp_boot" ||
         kind.starts_with("lapb_") || kind.starts_with("x25_");
}

std::vector<std::string> data_items(const json& args) {
  const json& d = args.at("data");
  if (d.is_string()) return {d.get<std::string>()};
  return d.get<std::vector<std::string>>();
}

}  // namespace

std::vector<Injection> parse_addendum(const Scenario& scenario, const json& doc) {
  if (!doc.is_object()) throw Error(Errc::bad_type, "addendum must be an object", "");
  if (!doc.contains("injections") || !doc["injections"].is_array()) {
    throw Error(Errc::missing_field, "addendum needs an 'injections' array", "/injections");
  }
  std::vector<Injection> out;
  const json& list = doc["injections"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = "/injections/" + std::to_string(i);
    const json& j = list[i];
    if (!j.is_object() || !j.contains("after_events") || !j["after_events"].is_number_unsigned() ||
        !j.contains("at") || !j.contains("action")) {
      throw Error(Errc::missing_field, "injection needs after_events, at and action", p);
    }
    Injection inj;
    inj.after_events = j["after_events"].get<std::uint64_t>();
    inj.at = parse_time(j["at"], p + "/at");
    inj.action = j["action"];
    parse_action(scenario, inj.action, p + "/action", false);
    if (!out.empty() && (inj.after_events < out.back().after_events || inj.at < out.back().at)) {
      throw Error(Errc::bad_time_order, "injections must be in dispatch order", p);
    }
    out.push_back(std::move(inj));
  }
  return out;
}

Runner::Runner(Scenario scenario, std::optional<std::uint64_t> seed)
    : scenario_(std::move(scenario)), seed_(seed.value_or(scenario_.meta.seed)), until_(scenario_.meta.until) {
  build();
}

void Runner::build() {
  sim_ = std::make_unique<Simulation>(seed_, scenario_.config);
  Network& net = sim_->net();

  for (const NodeSpec& n : scenario_.nodes) {
    const NodeId id = net.add_node(n.kind, n.name);
    net.node(id).boot = n.boot;
    net.node(id).power = n.power;
  }
  for (const SegmentSpec& g : scenario_.segments) {
    const SegmentId id = net.add_segment(g.name, g.latency);
    net.segment(id).noise_p = g.noise;
    net.segment(id).status = g.status;
  }
  for (const InterfaceSpec& i : scenario_.interfaces) {
    const InterfaceId id = net.attach(*net.find_node(i.node), *net.find_segment(i.segment), i.addr);
    net.iface(id).prefix_len = i.prefix_len;
  }
  for (const RouteSpec& r : scenario_.routes) {
    const NodeId node = *net.find_node(r.node);
    Route route;
    route.prefix = r.prefix;
    route.next_hop = r.via;
    route.metric = 1;
    route.source = RouteSource::static_route;
    for (InterfaceId i : net.node(node).interfaces) {
      if (auto subnet = net.iface(i).subnet(); subnet && subnet->contains(r.via)) {
        route.out_if = i;
        break;
      }
    }
    net.install_route(node, route);
  }
  for (const RarpSpec& r : scenario_.rarp) {
    const NodeId server = *net.find_node(r.server);
    for (const RarpEntrySpec& e : r.entries) {
      const NodeId client = *net.find_node(e.node);
      sim_->arp().add_rarp_mapping(server, net.iface(net.node(client).interfaces.front()).hw, e.ip);
    }
  }
  for (const NodeSpec& n : scenario_.nodes) {
    const NodeId id = *net.find_node(n.name);
    if (n.rip) sim_->rip().enable(id);
    if (n.boot == BootMode::rarp && n.power == Power::on) sim_->arp().rarp_boot(id);
  }
  for (const Action& a : scenario_.script) schedule_action(a.at, a);
  initial_ = sim_->engine().drain();
}

void Runner::schedule_action(SimTime at, const Action& action) {
  Target target{std::nullopt, action.kind == "algo" ? EventKind::algo : EventKind::script};
  if (node_origin(action.kind)) target.node = sim_->net().find_node(action.args.at("node").get<std::string>())->value;
  sim_->engine().schedule(at, target, [this, action] { perform(action); });
}

void Runner::perform(const Action& action) {
  Simulation& sim = *sim_;
  Network& net = sim.net();
  const json& a = action.args;
  auto node = [&] { return *net.find_node(a.at("node").get<std::string>()); };
  auto segment = [&] { return *net.find_segment(a.at("segment").get<std::string>()); };
  auto iface = [&] { return *net.interface_on(node(), segment()); };
  auto ip = [&](const char* key) { return *Ipv4::parse(a.at(key).get<std::string>()); };
  const std::string& k = action.kind;

  try {
    if (k == "power") {
      net.set_power(node(), a.at("state") == "on" ? Power::on : Power::off);
    } else if (k == "break_link") {
      net.break_link(segment());
    } else if (k == "restore_link") {
      net.restore_link(segment());
    } else if (k == "set_noise") {
      net.set_noise(segment(), a.at("p").get<double>());
    } else if (k == "force_corrupt") {
      net.force_corrupt_next(segment(), a.value("n", 1));
    } else if (k == "set_param") {
      sim.set_param(a.at("param").get<std::string>(), a.at("value"));
    } else if (k == "ping") {
      const SimTime interval = a.contains("interval") ? parse_time(a.at("interval"), "interval") : SimTime::sec(1);
      sim.ip().ping(node(), ip("dst"), a.value("count", 4), interval);
    } else if (k == "traceroute") {
      sim.ip().traceroute(node(), ip("dst"), a.value("max_ttl", 30), a.value("probes", 3));
    } else if (k == "rip_enable") {
      if (a.value("enabled", true)) {
        sim.rip().enable(node());
      } else {
        sim.rip().disable(node());
      }
    } else if (k == "lapb_connect") {
      sim.lapb().connect(iface());
    } else if (k == "lapb_disconnect") {
      sim.lapb().disconnect(iface());
    } else if (k == "lapb_send") {
      const InterfaceId i = iface();
      for (std::string& d : data_items(a)) sim.lapb().send(i, std::move(d));
    } else if (k == "x25_call") {
      sim.x25().call(iface(), a.value("remote", std::string{}));
    } else if (k == "x25_send") {
      const InterfaceId i = iface();
      for (std::string& d : data_items(a)) sim.x25().send(i, a.at("lci").get<int>(), std::move(d));
    } else if (k == "x25_clear") {
      sim.x25().clear(iface(), a.at("lci").get<int>());
    } else if (k == "rarp_boot") {
      sim.arp().rarp_boot(node());
    } else if (k == "send") {
      const NodeId n = node();
      IpPacket pkt;
      pkt.dst = ip("dst");
      pkt.ttl = a.value("ttl", sim.config().ip.default_ttl);
      pkt.proto = IpProto::data;
      pkt.ident = sim.ip().next_ident();
      pkt.payload = DataPayload{a.value("text", std::string{})};
      if (auto route = sim.ip().lookup(n, pkt.dst)) pkt.src = net.iface(route->out_if).ip.value_or(Ipv4{});
      sim.ip().send(n, std::move(pkt));
    } else if (k == "algo") {
      for (json& d : algo_.apply(a)) sim.engine().observe(ObsKind::algo_step, std::move(d));
    }
  } catch (const Error& e) {
    sim.engine().observe(ObsKind::event_dropped, {{"reason", "action_failed"},
                                                  {"action", k},
                                                  {"code", to_string(e.code())},
                                                  {"message", e.what()}});
  }
}

std::optional<SimTime> Runner::next_due() const {
  auto t = sim_->engine().next_time();
  if (!t || (until_ && *t > *until_)) return std::nullopt;
  return t;
}

void Runner::apply_due_replays() {
  Engine& eng = sim_->engine();
  while (replay_next_ < replay_.size() && replay_[replay_next_].after_events == eng.dispatched()) {
    const Injection& inj = replay_[replay_next_++];
    Action a = parse_action(scenario_, inj.action, "", false);
    schedule_action(inj.at, a);
    journal_.push_back(inj);
  }
}

std::optional<StepResult> Runner::step() {
  apply_due_replays();
  if (!next_due()) return std::nullopt;
  return sim_->engine().step();
}

std::vector<Observation> Runner::advance_to(SimTime t) {
  if (until_ && t > *until_) t = *until_;
  std::vector<Observation> out;
  while (true) {
    apply_due_replays();
    auto next = next_due();
    if (!next || *next > t) break;
    auto r = sim_->engine().step();
    for (Observation& o : r->observations) out.push_back(std::move(o));
  }
  if (t > sim_->engine().now()) sim_->engine().run_until(t);
  return out;
}

std::vector<Observation> Runner::run_to_end(std::uint64_t max_events) {
  std::vector<Observation> out = initial_;
  std::uint64_t n = 0;
  while (auto r = step()) {
    for (Observation& o : r->observations) out.push_back(std::move(o));
    if (!until_ && ++n > max_events) {
      throw Error(Errc::out_of_range, "no horizon set and the event queue does not drain; pass --until");
    }
  }
  return out;
}

bool Runner::finished() const {
  const bool replay_due =
      replay_next_ < replay_.size() && replay_[replay_next_].after_events == sim_->engine().dispatched();
  return !next_due() && !replay_due;
}

const Injection& Runner::inject(const json& action) {
  Action a = parse_action(scenario_, action, "", false);
  Engine& eng = sim_->engine();
  Injection inj{eng.dispatched(), eng.now(), action};
  inj.action.erase("at");
  schedule_action(inj.at, a);
  journal_.push_back(std::move(inj));
  return journal_.back();
}

json Runner::addendum() const {
  json list = json::array();
  for (const Injection& i : journal_) list.push_back(to_json(i));
  return {{"scenario", scenario_.meta.name}, {"seed", seed_}, {"injections", std::move(list)}};
}

void Runner::replay(const json& addendum) {
  if (sim_->engine().dispatched() != 0) throw Error(Errc::bad_state, "replay must be loaded before the first step");
  replay_ = parse_addendum(scenario_, addendum);
  replay_next_ = 0;
}

}  // namespace simlab
