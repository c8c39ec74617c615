#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "simlab/runner.hpp"
#include "simlab/simcore.hpp"

namespace simlab {

enum ExitStatus : int { kExitOk = 0, kExitInvalid = 1, kExitMismatch = 2, kExitRuntime = 3 };

struct RunOptions {
  std::optional<SimTime> until;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> trace_path;     // stdout when unset
  std::optional<std::string> addendum_path;  // injections to replay
};

struct CliStreams {
  std::ostream& out;
  std::ostream& err;
  bool json = false;
};

/// Full headless run: the trace text exactly as cmd_run writes it.
std::string run_scenario_trace(const Scenario& scenario, const RunOptions& opts, const json* addendum = nullptr);

int cmd_validate(const std::string& path, CliStreams io);
int cmd_run(const std::string& path, const RunOptions& opts, CliStreams io);
int cmd_check(const std::string& path, const std::string& golden, const RunOptions& opts, CliStreams io);
int cmd_serve(int port, const std::string& data_dir, CliStreams io);

int cli_main(int argc, char** argv);

}  // namespace simlab
