#include "simlab/scenario.hpp"

#include <set>

#include "simlab/algokit.hpp"
#include "simlab/error.hpp"

namespace simlab {

const NodeSpec* Scenario::find_node(std::string_view name) const {
  for (const NodeSpec& n : nodes) {
    if (n.name == name) return &n;
  }
  return nullptr;
}

const SegmentSpec* Scenario::find_segment(std::string_view name) const {
  for (const SegmentSpec& s : segments) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

namespace {

std::string at(const std::string& base, std::string_view key) { return base + "/" + std::string(key); }
std::string at(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

const json& require(const json& obj, std::string_view key, const std::string& path) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw Error(Errc::missing_field, "missing field '" + std::string(key) + "'", at(path, key));
  return *it;
}

void expect_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw Error(Errc::bad_type, "expected an object", path);
}

const json& require_array(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_array()) throw Error(Errc::bad_type, "'" + std::string(key) + "' must be an array", at(path, key));
  return v;
}

std::string get_string(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw Error(Errc::bad_type, "'" + std::string(key) + "' must be a string", at(path, key));
  return v.get<std::string>();
}

std::string opt_string(const json& obj, std::string_view key, const std::string& path, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  return get_string(obj, key, path);
}

bool opt_bool(const json& obj, std::string_view key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(std::string(key));
  if (!v.is_boolean()) throw Error(Errc::bad_type, "'" + std::string(key) + "' must be a boolean", at(path, key));
  return v.get<bool>();
}

std::int64_t get_int(const json& obj, std::string_view key, const std::string& path, std::int64_t lo,
                     std::int64_t hi) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) {
    throw Error(Errc::bad_type, "'" + std::string(key) + "' must be an integer", at(path, key));
  }
  const auto n = v.get<std::int64_t>();
  if (n < lo || n > hi) {
    throw Error(Errc::out_of_range,
                "'" + std::string(key) + "' must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]",
                at(path, key));
  }
  return n;
}

double get_probability(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw Error(Errc::bad_type, "'" + std::string(key) + "' must be a number", at(path, key));
  const double p = v.get<double>();
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::out_of_range, "probability must be in [0, 1]", at(path, key));
  return p;
}

Ipv4 get_ip(const json& obj, std::string_view key, const std::string& path) {
  const std::string text = get_string(obj, key, path);
  auto ip = Ipv4::parse(text);
  if (!ip) throw Error(Errc::out_of_range, "'" + text + "' is not a dotted-quad address", at(path, key));
  return *ip;
}

const NodeSpec& node_ref(const Scenario& s, const json& obj, const std::string& path) {
  const std::string name = get_string(obj, "node", path);
  const NodeSpec* n = s.find_node(name);
  if (n == nullptr) throw Error(Errc::unknown_ref, "unknown node '" + name + "'", at(path, "node"));
  return *n;
}

const SegmentSpec& segment_ref(const Scenario& s, const json& obj, const std::string& path) {
  const std::string name = get_string(obj, "segment", path);
  const SegmentSpec* seg = s.find_segment(name);
  if (seg == nullptr) throw Error(Errc::unknown_ref, "unknown segment '" + name + "'", at(path, "segment"));
  return *seg;
}

void interface_ref(const Scenario& s, const json& obj, const std::string& path) {
  const NodeSpec& n = node_ref(s, obj, path);
  const SegmentSpec& seg = segment_ref(s, obj, path);
  for (const InterfaceSpec& i : s.interfaces) {
    if (i.node == n.name && i.segment == seg.name) return;
  }
  throw Error(Errc::unknown_ref, n.name + " has no interface on " + seg.name, path);
}

void payloads(const json& obj, const std::string& path) {
  const json& v = require(obj, "data", path);
  if (v.is_string()) return;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) throw Error(Errc::bad_type, "data items must be strings", at(at(path, "data"), i));
    }
    return;
  }
  throw Error(Errc::bad_type, "'data' must be a string or an array of strings", at(path, "data"));
}

template <class T>
T enum_field(const json& obj, std::string_view key, const std::string& path, T fallback,
             std::initializer_list<std::pair<std::string_view, T>> names) {
  if (!obj.contains(key)) return fallback;
  const std::string text = get_string(obj, key, path);
  for (const auto& [n, v] : names) {
    if (n == text) return v;
  }
  throw Error(Errc::out_of_range, "'" + text + "' is not a valid " + std::string(key), at(path, key));
}

}  // namespace

SimTime parse_time(const json& v, const std::string& path) {
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw Error(Errc::out_of_range, "time must not be negative", path);
    return SimTime{v.get<std::uint64_t>()};
  }
  if (v.is_string()) {
    if (auto d = parse_duration(v.get<std::string>())) return *d;
    throw Error(Errc::out_of_range, "'" + v.get<std::string>() + "' is not a duration", path);
  }
  throw Error(Errc::bad_type, "time must be integer ticks or a suffixed string", path);
}

Action parse_action(const Scenario& s, const json& action, const std::string& path, bool timed) {
  expect_object(action, path);
  Action a;
  if (timed) a.at = parse_time(require(action, "at", path), at(path, "at"));
  a.kind = get_string(action, "action", path);
  a.args = action;
  a.args.erase("at");
  a.args.erase("action");

  const std::string& k = a.kind;
  if (k == "power") {
    node_ref(s, action, path);
    const std::string state = get_string(action, "state", path);
    if (state != "on" && state != "off") throw Error(Errc::out_of_range, "state must be on or off", at(path, "state"));
  } else if (k == "break_link" || k == "restore_link") {
    segment_ref(s, action, path);
  } else if (k == "set_noise") {
    segment_ref(s, action, path);
    get_probability(action, "p", path);
  } else if (k == "force_corrupt") {
    segment_ref(s, action, path);
    if (action.contains("n")) get_int(action, "n", path, 1, 1000000);
  } else if (k == "set_param") {
    const std::string param = get_string(action, "param", path);
    ProtocolConfig scratch = s.config;
    try {
      apply_param(scratch, param, require(action, "value", path));
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), at(path, e.code() == Errc::unknown_ref ? "param" : "value"));
    }
  } else if (k == "ping") {
    node_ref(s, action, path);
    get_ip(action, "dst", path);
    if (action.contains("count")) get_int(action, "count", path, 1, 10000);
    if (action.contains("interval")) {
      if (parse_time(action.at("interval"), at(path, "interval")).ticks == 0) {
        throw Error(Errc::out_of_range, "interval must be positive", at(path, "interval"));
      }
    }
  } else if (k == "traceroute") {
    node_ref(s, action, path);
    get_ip(action, "dst", path);
    if (action.contains("max_ttl")) get_int(action, "max_ttl", path, 1, 255);
    if (action.contains("probes")) get_int(action, "probes", path, 1, 10);
  } else if (k == "rip_enable") {
    const NodeSpec& n = node_ref(s, action, path);
    if (n.kind != NodeKind::router) throw Error(Errc::out_of_range, n.name + " is not a router", at(path, "node"));
    opt_bool(action, "enabled", path, true);
  } else if (k == "lapb_connect" || k == "lapb_disconnect") {
    interface_ref(s, action, path);
  } else if (k == "lapb_send") {
    interface_ref(s, action, path);
    payloads(action, path);
  } else if (k == "x25_call") {
    interface_ref(s, action, path);
    opt_string(action, "remote", path, "");
  } else if (k == "x25_send") {
    interface_ref(s, action, path);
    get_int(action, "lci", path, 1, 4095);
    payloads(action, path);
  } else if (k == "x25_clear") {
    interface_ref(s, action, path);
    get_int(action, "lci", path, 1, 4095);
  } else if (k == "rarp_boot") {
    node_ref(s, action, path);
  } else if (k == "send") {
    node_ref(s, action, path);
    get_ip(action, "dst", path);
    opt_string(action, "text", path, "");
    if (action.contains("ttl")) get_int(action, "ttl", path, 1, 255);
  } else if (k == "algo") {
    try {
      validate_algo_action(action);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), at(path, e.path()));
    }
  } else {
    throw Error(Errc::out_of_range, "unknown action '" + k + "'", at(path, "action"));
  }
  return a;
}

json to_json(const Action& a) {
  json j = a.args;
  j["at"] = a.at.ticks;
  j["action"] = a.kind;
  return j;
}

Scenario scenario_from_json(const json& doc) {
  expect_object(doc, "");
  Scenario s;

  const json& meta = require(doc, "meta", "");
  expect_object(meta, "/meta");
  s.meta.name = get_string(meta, "name", "/meta");
  if (meta.contains("seed")) {
    const json& seed = meta.at("seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
      throw Error(Errc::bad_type, "seed must be a non-negative integer", "/meta/seed");
    }
    s.meta.seed = seed.get<std::uint64_t>();
  }
  s.meta.description = opt_string(meta, "description", "/meta", "");
  if (meta.contains("until")) s.meta.until = parse_time(meta.at("until"), "/meta/until");

  std::set<std::string> names;
  const json& nodes = require_array(doc, "nodes", "");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = at("/nodes", i);
    const json& n = nodes[i];
    expect_object(n, p);
    NodeSpec ns;
    ns.name = get_string(n, "name", p);
    if (ns.name.empty()) throw Error(Errc::out_of_range, "name must not be empty", at(p, "name"));
    if (!names.insert(ns.name).second) {
      throw Error(Errc::duplicate_name, "duplicate node name '" + ns.name + "'", at(p, "name"));
    }
    ns.kind = enum_field(n, "kind", p, NodeKind::host, {{"host", NodeKind::host}, {"router", NodeKind::router}});
    ns.power = enum_field(n, "power", p, Power::on, {{"on", Power::on}, {"off", Power::off}});
    ns.boot = enum_field(n, "boot", p, BootMode::configured,
                         {{"configured", BootMode::configured}, {"rarp", BootMode::rarp}});
    ns.rip = opt_bool(n, "rip", p, false);
    if (ns.rip && ns.kind != NodeKind::router) {
      throw Error(Errc::out_of_range, "rip can only run on routers", at(p, "rip"));
    }
    s.nodes.push_back(std::move(ns));
  }

  std::set<std::string> seg_names;
  const json& segs = require_array(doc, "segments", "");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string p = at("/segments", i);
    const json& g = segs[i];
    expect_object(g, p);
    SegmentSpec ss;
    ss.name = get_string(g, "name", p);
    if (ss.name.empty()) throw Error(Errc::out_of_range, "name must not be empty", at(p, "name"));
    if (!seg_names.insert(ss.name).second) {
      throw Error(Errc::duplicate_name, "duplicate segment name '" + ss.name + "'", at(p, "name"));
    }
    if (g.contains("latency")) {
      ss.latency = parse_time(g.at("latency"), at(p, "latency"));
      if (ss.latency.ticks == 0) throw Error(Errc::out_of_range, "latency must be at least 1 tick", at(p, "latency"));
    }
    if (g.contains("noise")) ss.noise = get_probability(g, "noise", p);
    ss.status = enum_field(g, "status", p, LinkStatus::up, {{"up", LinkStatus::up}, {"broken", LinkStatus::broken}});
    s.segments.push_back(std::move(ss));
  }

  if (doc.contains("interfaces")) {
    const json& ifs = require_array(doc, "interfaces", "");
    std::set<std::pair<std::string, std::string>> attached;
    std::set<std::pair<std::string, Ipv4>> ips;
    for (std::size_t i = 0; i < ifs.size(); ++i) {
      const std::string p = at("/interfaces", i);
      const json& f = ifs[i];
      expect_object(f, p);
      InterfaceSpec is;
      is.node = node_ref(s, f, p).name;
      is.segment = segment_ref(s, f, p).name;
      if (!attached.insert({is.node, is.segment}).second) {
        throw Error(Errc::duplicate_name, is.node + " is attached to " + is.segment + " twice", p);
      }
      if (f.contains("ip") && !f.at("ip").is_null()) {
        const std::string text = get_string(f, "ip", p);
        auto addr = IfAddr::parse(text);
        if (!addr) throw Error(Errc::out_of_range, "'" + text + "' is not an address/length pair", at(p, "ip"));
        if (!ips.insert({is.segment, addr->ip}).second) {
          throw Error(Errc::duplicate_ip, addr->ip.str() + " appears twice on " + is.segment, at(p, "ip"));
        }
        is.addr = addr;
        is.prefix_len = addr->length;
      } else if (f.contains("prefix_len")) {
        is.prefix_len = static_cast<int>(get_int(f, "prefix_len", p, 0, 32));
      }
      s.interfaces.push_back(std::move(is));
    }
  }

  if (doc.contains("routes")) {
    const json& routes = require_array(doc, "routes", "");
    for (std::size_t i = 0; i < routes.size(); ++i) {
      const std::string p = at("/routes", i);
      const json& r = routes[i];
      expect_object(r, p);
      RouteSpec rs;
      rs.node = node_ref(s, r, p).name;
      const std::string text = get_string(r, "prefix", p);
      auto prefix = Prefix::parse(text);
      if (!prefix) throw Error(Errc::out_of_range, "'" + text + "' is not a network prefix", at(p, "prefix"));
      rs.prefix = *prefix;
      rs.via = get_ip(r, "via", p);
      bool on_link = false;
      for (const InterfaceSpec& is : s.interfaces) {
        if (is.node == rs.node && is.addr && Prefix::of(is.addr->ip, is.addr->length).contains(rs.via)) on_link = true;
      }
      if (!on_link) {
        throw Error(Errc::unknown_ref, rs.via.str() + " is not on any subnet of " + rs.node, at(p, "via"));
      }
      s.routes.push_back(std::move(rs));
    }
  }

  if (doc.contains("rarp")) {
    const json& servers = require_array(doc, "rarp", "");
    for (std::size_t i = 0; i < servers.size(); ++i) {
      const std::string p = at("/rarp", i);
      const json& r = servers[i];
      expect_object(r, p);
      RarpSpec rs;
      const std::string server = get_string(r, "server", p);
      if (s.find_node(server) == nullptr) {
        throw Error(Errc::unknown_ref, "unknown node '" + server + "'", at(p, "server"));
      }
      rs.server = server;
      const json& entries = require_array(r, "entries", p);
      for (std::size_t j = 0; j < entries.size(); ++j) {
        const std::string ep = at(at(p, "entries"), j);
        expect_object(entries[j], ep);
        RarpEntrySpec e;
        e.node = node_ref(s, entries[j], ep).name;
        e.ip = get_ip(entries[j], "ip", ep);
        bool has_iface = false;
        for (const InterfaceSpec& is : s.interfaces) has_iface = has_iface || is.node == e.node;
        if (!has_iface) throw Error(Errc::unknown_ref, e.node + " has no interface", at(ep, "node"));
        rs.entries.push_back(std::move(e));
      }
      s.rarp.push_back(std::move(rs));
    }
  }

  if (doc.contains("config")) {
    const json& config = doc.at("config");
    expect_object(config, "/config");
    for (const auto& [section, fields] : config.items()) {
      const std::string sp = at("/config", section);
      expect_object(fields, sp);
      for (const auto& [field, value] : fields.items()) {
        try {
          apply_param(s.config, section + "." + field, value);
        } catch (const Error& e) {
          throw Error(e.code(), e.what(), at(sp, field));
        }
      }
    }
  }

  if (doc.contains("script")) {
    const json& script = require_array(doc, "script", "");
    for (std::size_t i = 0; i < script.size(); ++i) {
      Action a = parse_action(s, script[i], at("/script", i), true);
      if (!s.script.empty() && a.at < s.script.back().at) {
        throw Error(Errc::bad_time_order, "script times must be non-decreasing", at(at("/script", i), "at"));
      }
      s.script.push_back(std::move(a));
    }
  }
  return s;
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(Errc::syntax_error, "line " + std::to_string(line) + " column " + std::to_string(col) + ": " + e.what());
  }
  return scenario_from_json(doc);
}

json to_json(const Scenario& s) {
  json meta{{"name", s.meta.name}, {"seed", s.meta.seed}, {"description", s.meta.description}};
  if (s.meta.until) meta["until"] = s.meta.until->ticks;

  json nodes = json::array();
  for (const NodeSpec& n : s.nodes) {
    nodes.push_back({{"name", n.name},
                     {"kind", to_string(n.kind)},
                     {"power", to_string(n.power)},
                     {"boot", n.boot == BootMode::rarp ? "rarp" : "configured"},
                     {"rip", n.rip}});
  }
  json segs = json::array();
  for (const SegmentSpec& g : s.segments) {
    segs.push_back({{"name", g.name}, {"latency", g.latency.ticks}, {"noise", g.noise}, {"status", to_string(g.status)}});
  }
  json ifs = json::array();
  for (const InterfaceSpec& i : s.interfaces) {
    json j{{"node", i.node}, {"segment", i.segment}};
    if (i.addr) {
      j["ip"] = i.addr->str();
    } else {
      j["ip"] = nullptr;
      j["prefix_len"] = i.prefix_len;
    }
    ifs.push_back(std::move(j));
  }
  json routes = json::array();
  for (const RouteSpec& r : s.routes) routes.push_back({{"node", r.node}, {"prefix", r.prefix.str()}, {"via", r.via.str()}});
  json rarp = json::array();
  for (const RarpSpec& r : s.rarp) {
    json entries = json::array();
    for (const RarpEntrySpec& e : r.entries) entries.push_back({{"node", e.node}, {"ip", e.ip.str()}});
    rarp.push_back({{"server", r.server}, {"entries", std::move(entries)}});
  }
  json script = json::array();
  for (const Action& a : s.script) script.push_back(to_json(a));

  return {{"meta", std::move(meta)},     {"nodes", std::move(nodes)},   {"segments", std::move(segs)},
          {"interfaces", std::move(ifs)}, {"routes", std::move(routes)}, {"rarp", std::move(rarp)},
          {"config", to_json(s.config)}, {"script", std::move(script)}};
}

std::string serialize_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

}  // namespace simlab
