#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simlab/simcore.hpp"

namespace simlab {

/// One line of a .trace.ndjson file: `at`, `seq`, `kind` plus the
/// observation's detail fields, keys in lexicographic order.
struct TraceRecord {
  std::uint64_t at = 0;
  std::uint64_t seq = 0;
  std::string kind;
  json detail = json::object();

  bool operator==(const TraceRecord&) const = default;

  json to_json() const;
  std::string line() const;  // without trailing newline
};

TraceRecord to_record(const Observation& obs);

std::string write_trace(std::span<const Observation> observations);
std::string write_trace(std::span<const TraceRecord> records);

/// Throws Errc::syntax_error naming the 1-based line.
std::vector<TraceRecord> read_trace(std::string_view text);

struct Divergence {
  std::size_t index = 0;
  std::optional<TraceRecord> left;  // nullopt: that trace ended first
  std::optional<TraceRecord> right;
};

/// Positional comparison; nullopt when the traces are equal.
std::optional<Divergence> diff_traces(std::span<const TraceRecord> a, std::span<const TraceRecord> b);

json to_json(const Divergence& d);

}  // namespace simlab
