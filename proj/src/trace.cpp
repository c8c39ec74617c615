#include "simlab/trace.hpp"

#include "simlab/error.hpp"

namespace simlab {

json TraceRecord::to_json() const {
  json j = detail;
  j["at"] = at;
  j["seq"] = seq;
  j["kind"] = kind;
  return j;
}

std::string TraceRecord::line() const { return to_json().dump(); }

TraceRecord to_record(const Observation& obs) {
  return TraceRecord{obs.at.ticks, obs.seq, std::string(to_string(obs.kind)), obs.detail};
}

std::string write_trace(std::span<const Observation> observations) {
  std::string out;
  for (const Observation& o : observations) {
    out += to_record(o).line();
    out += '\n';
  }
  return out;
}

std::string write_trace(std::span<const TraceRecord> records) {
  std::string out;
  for (const TraceRecord& r : records) {
    out += r.line();
    out += '\n';
  }
  return out;
}

std::vector<TraceRecord> read_trace(std::string_view text) {
  std::vector<TraceRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(Errc::syntax_error, where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("at") || !j.contains("seq") || !j.contains("kind") ||
        !j["at"].is_number_unsigned() || !j["seq"].is_number_unsigned() || !j["kind"].is_string()) {
      throw Error(Errc::syntax_error, where + ": record needs unsigned 'at', 'seq' and string 'kind'");
    }
    TraceRecord r;
    r.at = j["at"].get<std::uint64_t>();
    r.seq = j["seq"].get<std::uint64_t>();
    r.kind = j["kind"].get<std::string>();
    j.erase("at");
    j.erase("seq");
    j.erase("kind");
    r.detail = std::move(j);
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<Divergence> diff_traces(std::span<const TraceRecord> a, std::span<const TraceRecord> b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a[i] == b[i])) return Divergence{i, a[i], b[i]};
  }
  if (a.size() == b.size()) return std::nullopt;
  Divergence d{n, std::nullopt, std::nullopt};
  if (n < a.size()) d.left = a[n];
  if (n < b.size()) d.right = b[n];
  return d;
}

json to_json(const Divergence& d) {
  return {{"index", d.index},
          {"left", d.left ? d.left->to_json() : json(nullptr)},
          {"right", d.right ? d.right->to_json() : json(nullptr)}};
}

}  // namespace simlab
