#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "simlab/labcli.hpp"
#include "support.hpp"

#ifndef SIMLAB_BINARY
#define SIMLAB_BINARY "simlab"
#endif

namespace simlab {
namespace {

namespace fs = std::filesystem;

struct Out {
  std::ostringstream out;
  std::ostringstream err;
  CliStreams io(bool as_json = false) { return {out, err, as_json}; }
};

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("simlab-cli-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

TEST(Cli, ValidateAcceptsBundledScenarios) {
  for (const auto& name : testing::bundled_names()) {
    Out o;
    EXPECT_EQ(cmd_validate(testing::bundled_path(name), o.io()), kExitOk) << name << o.err.str();
  }
}

TEST(Cli, ValidateReportsCodeAndPathAsJson) {
  const fs::path p = scratch("bad.scn.json");
  write(p, R"({"meta": {"name": "b"}, "nodes": [{"name": "A"}, {"name": "A"}], "segments": [], "interfaces": []})");
  Out o;
  EXPECT_EQ(cmd_validate(p.string(), o.io(true)), kExitInvalid);
  const json j = json::parse(o.out.str());
  EXPECT_FALSE(j["ok"]);
  EXPECT_EQ(j["error"]["code"], "duplicate_name");
  EXPECT_EQ(j["error"]["path"], "/nodes/1/name");
}

TEST(Cli, MissingFileIsARuntimeError) {
  Out o;
  EXPECT_EQ(cmd_validate("/nonexistent/x.scn.json", o.io()), kExitRuntime);
  EXPECT_NE(o.err.str().find("io_error"), std::string::npos);
}

TEST(Cli, RunWritesTheTraceFile) {
  const fs::path out = scratch("arp.trace.ndjson");
  RunOptions opts;
  opts.trace_path = out.string();
  Out o;
  ASSERT_EQ(cmd_run(testing::bundled_path("arp-basic"), opts, o.io()), kExitOk);
  EXPECT_EQ(testing::read_file(out.string()), run_scenario_trace(testing::bundled("arp-basic"), {}));
}

TEST(Cli, CheckMatchesGoldenTraces) {
  for (const char* name : {"arp-basic", "rip-line-3"}) {
    Out o;
    const std::string golden = testing::source_path(std::string("tests/golden/") + name + ".trace.ndjson");
    EXPECT_EQ(cmd_check(testing::bundled_path(name), golden, {}, o.io()), kExitOk) << o.out.str();
  }
}

TEST(Cli, CheckReportsFirstDivergence) {
  std::string text = testing::read_file(testing::source_path("tests/golden/arp-basic.trace.ndjson"));
  const auto records = read_trace(text);
  std::vector<TraceRecord> edited(records.begin(), records.end());
  edited[7].detail["node"] = "Z";
  const fs::path p = scratch("edited.trace.ndjson");
  write(p, write_trace(edited));
  Out o;
  EXPECT_EQ(cmd_check(testing::bundled_path("arp-basic"), p.string(), {}, o.io(true)), kExitMismatch);
  const json j = json::parse(o.out.str());
  EXPECT_EQ(j["divergence"]["index"], 7);
}

TEST(Cli, BadAddendumIsInvalid) {
  const fs::path p = scratch("bad.addendum.json");
  write(p, R"({"injections": [{"after_events": 1, "at": 0, "action": {"action": "power", "node": "Q", "state": "on"}}]})");
  RunOptions opts;
  opts.addendum_path = p.string();
  Out o;
  EXPECT_EQ(cmd_run(testing::bundled_path("arp-basic"), opts, o.io()), kExitInvalid);
}

int run_binary(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = std::string(SIMLAB_BINARY) + " " + args + " 2>/dev/null";
  FILE* f = ::popen(cmd.c_str(), "r");
  if (f == nullptr) return -1;
  char buf[4096];
  std::string text;
  while (std::size_t n = std::fread(buf, 1, sizeof buf, f)) text.append(buf, n);
  const int st = ::pclose(f);
  if (out) *out = text;
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

TEST(Cli, BinaryExitCodes) {
  std::string out;
  EXPECT_EQ(run_binary("run " + testing::bundled_path("arp-basic"), &out), 0);
  EXPECT_EQ(out, run_scenario_trace(testing::bundled("arp-basic"), {}));
  EXPECT_EQ(run_binary("run --seed 7 --until 5s " + testing::bundled_path("x25-noisy-link"), &out), 0);
  RunOptions o;
  o.seed = 7;
  o.until = SimTime::sec(5);
  EXPECT_EQ(out, run_scenario_trace(testing::bundled("x25-noisy-link"), o));
  const fs::path bad = scratch("broken.scn.json");
  write(bad, "{ nope");
  EXPECT_EQ(run_binary("validate " + bad.string()), 1);
  EXPECT_EQ(run_binary("validate /nonexistent.scn.json"), 3);
  EXPECT_EQ(run_binary("frobnicate"), 3);
}

}  // namespace
}  // namespace simlab
