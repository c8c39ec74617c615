#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simlab/addr.hpp"
#include "simlab/netmodel.hpp"
#include "simlab/simcore.hpp"
#include "simlab/simulation.hpp"

namespace simlab {

struct ScenarioMeta {
  std::string name;
  std::uint64_t seed = 1;
  std::string description;
  std::optional<SimTime> until;  // default horizon for headless runs

  bool operator==(const ScenarioMeta&) const = default;
};

struct NodeSpec {
  std::string name;
  NodeKind kind = NodeKind::host;
  Power power = Power::on;
  BootMode boot = BootMode::configured;
  bool rip = false;

  bool operator==(const NodeSpec&) const = default;
};

struct SegmentSpec {
  std::string name;
  SimTime latency = SimTime::ms(1);
  double noise = 0.0;
  LinkStatus status = LinkStatus::up;

  bool operator==(const SegmentSpec&) const = default;
};

struct InterfaceSpec {
  std::string node;
  std::string segment;
  std::optional<IfAddr> addr;
  int prefix_len = 24;  // used when addr is absent (RARP clients)

  bool operator==(const InterfaceSpec&) const = default;
};

struct RouteSpec {
  std::string node;
  Prefix prefix;
  Ipv4 via;

  bool operator==(const RouteSpec&) const = default;
};

struct RarpEntrySpec {
  std::string node;  // client node; its first interface's hw is used
  Ipv4 ip;

  bool operator==(const RarpEntrySpec&) const = default;
};

struct RarpSpec {
  std::string server;
  std::vector<RarpEntrySpec> entries;

  bool operator==(const RarpSpec&) const = default;
};

struct Action {
  SimTime at;
  std::string kind;
  json args = json::object();  // everything except "at" and "action"

  bool operator==(const Action&) const = default;
};

struct Scenario {
  ScenarioMeta meta;
  std::vector<NodeSpec> nodes;
  std::vector<SegmentSpec> segments;
  std::vector<InterfaceSpec> interfaces;
  std::vector<RouteSpec> routes;
  std::vector<RarpSpec> rarp;
  ProtocolConfig config;
  std::vector<Action> script;

  bool operator==(const Scenario&) const = default;

  const NodeSpec* find_node(std::string_view name) const;
  const SegmentSpec* find_segment(std::string_view name) const;
};

/// Parses and validates a scenario document. Failures throw Error with
/// code syntax_error, missing_field, bad_type, duplicate_name, duplicate_ip,
/// unknown_ref, bad_time_order or out_of_range, and a JSON-pointer path.
Scenario parse_scenario(std::string_view text);
Scenario scenario_from_json(const json& doc);
json to_json(const Scenario& s);
std::string serialize_scenario(const Scenario& s);

/// Reads a duration given as integer ticks or a suffixed string.
SimTime parse_time(const json& v, const std::string& path);

/// Validates one script or injection action against the scenario's names.
/// `path` prefixes error locations. When `timed` is false "at" is ignored.
Action parse_action(const Scenario& s, const json& action, const std::string& path, bool timed);
json to_json(const Action& a);

}  // namespace simlab
