#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "simlab/runner.hpp"
#include "simlab/scenario.hpp"
#include "simlab/trace.hpp"

#ifndef SIMLAB_SOURCE_DIR
#define SIMLAB_SOURCE_DIR "."
#endif

namespace simlab::testing {

inline const std::vector<std::string>& bundled_names() {
  static const std::vector<std::string> names{
      "arp-basic",       "arp-two-hosts",        "ping-wan",       "rarp-boot", "rip-line-3",
      "rip-two-variants", "traceroute-buildable", "traceroute-preset", "x25-noisy-link",
  };
  return names;
}

inline std::string source_path(const std::string& rel) { return std::string(SIMLAB_SOURCE_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string bundled_path(const std::string& name) { return source_path("scenarios/" + name + ".scn.json"); }
inline Scenario bundled(const std::string& name) { return parse_scenario(read_file(bundled_path(name))); }

inline std::vector<Observation> run_all(const Scenario& s, std::optional<std::uint64_t> seed = std::nullopt,
                                        std::optional<SimTime> until = std::nullopt) {
  Runner r(s, seed);
  r.set_until(until ? until : s.meta.until);
  return r.run_to_end();
}

inline std::vector<Observation> only(const std::vector<Observation>& obs, ObsKind kind) {
  std::vector<Observation> out;
  std::copy_if(obs.begin(), obs.end(), std::back_inserter(out), [&](const Observation& o) { return o.kind == kind; });
  return out;
}

template <class Pred>
std::vector<Observation> only(const std::vector<Observation>& obs, ObsKind kind, Pred pred) {
  std::vector<Observation> out;
  for (const Observation& o : obs) {
    if (o.kind == kind && pred(o.detail)) out.push_back(o);
  }
  return out;
}

/// Point-to-point line of hosts and routers: names[i] joins segment i-1
/// and i. Host ends get a default route toward their neighbour, routers
/// run RIP unless `statics` is set.
struct Chain {
  std::vector<std::string> names;        // first and last are hosts
  std::vector<std::uint64_t> latency_ms;  // one per segment
  bool rip = true;
};

inline json chain_doc(const Chain& c, std::uint64_t seed = 1) {
  json doc;
  doc["meta"] = {{"name", "chain"}, {"seed", seed}};
  doc["nodes"] = json::array();
  for (std::size_t i = 0; i < c.names.size(); ++i) {
    const bool host = i == 0 || i + 1 == c.names.size();
    json n{{"name", c.names[i]}, {"kind", host ? "host" : "router"}};
    if (!host && c.rip) n["rip"] = true;
    doc["nodes"].push_back(n);
  }
  doc["segments"] = json::array();
  doc["interfaces"] = json::array();
  doc["routes"] = json::array();
  const std::size_t segs = c.names.size() - 1;
  auto addr = [](std::size_t seg, std::size_t host) {
    return "10.0." + std::to_string(seg) + "." + std::to_string(host);
  };
  for (std::size_t s = 0; s < segs; ++s) {
    doc["segments"].push_back({{"name", "s" + std::to_string(s)}, {"latency", std::to_string(c.latency_ms[s]) + "ms"}});
    doc["interfaces"].push_back({{"node", c.names[s]}, {"segment", "s" + std::to_string(s)}, {"ip", addr(s, 1) + "/24"}});
    doc["interfaces"].push_back(
        {{"node", c.names[s + 1]}, {"segment", "s" + std::to_string(s)}, {"ip", addr(s, 2) + "/24"}});
  }
  doc["routes"].push_back({{"node", c.names.front()}, {"prefix", "0.0.0.0/0"}, {"via", addr(0, 2)}});
  doc["routes"].push_back({{"node", c.names.back()}, {"prefix", "0.0.0.0/0"}, {"via", addr(segs - 1, 1)}});
  if (!c.rip) {
    // Routers forward everything toward the far host's side, except what is behind them.
    for (std::size_t r = 1; r + 1 < c.names.size(); ++r) {
      for (std::size_t s = 0; s < segs; ++s) {
        if (s == r - 1 || s == r) continue;
        const std::string via = s > r ? addr(r, 2) : addr(r - 1, 1);
        doc["routes"].push_back({{"node", c.names[r]}, {"prefix", "10.0." + std::to_string(s) + ".0/24"}, {"via", via}});
      }
    }
  }
  doc["script"] = json::array();
  return doc;
}

/// Address of the far host in a chain built by chain_doc.
inline std::string chain_far_host(const Chain& c) { return "10.0." + std::to_string(c.names.size() - 2) + ".2"; }

}  // namespace simlab::testing
