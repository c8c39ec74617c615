#include "simlab/labcli.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "simlab/error.hpp"
#include "simlab/labservice.hpp"
#include "simlab/scenario.hpp"
#include "simlab/trace.hpp"

namespace simlab {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  out << text;
  if (!out.flush()) throw Error(Errc::io_error, "write failed for " + path);
}

int report_error(const Error& e, CliStreams io, int code) {
  if (io.json) {
    io.out << json{{"ok", false}, {"error", error_body(e)}}.dump() << "\n";
  } else {
    io.err << "error [" << to_string(e.code()) << "]";
    if (!e.path().empty()) io.err << " at " << e.path();
    io.err << ": " << e.what() << "\n";
  }
  return code;
}

bool is_validation(Errc c) { return c != Errc::io_error; }

}  // namespace

std::string run_scenario_trace(const Scenario& scenario, const RunOptions& opts, const json* addendum) {
  Runner runner(scenario, opts.seed);
  if (opts.until) runner.set_until(opts.until);
  if (addendum != nullptr) runner.replay(*addendum);
  return write_trace(runner.run_to_end());
}

int cmd_validate(const std::string& path, CliStreams io) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    return report_error(e, io, kExitRuntime);
  }
  try {
    const Scenario s = parse_scenario(text);
    if (io.json) {
      io.out << json{{"ok", true},
                     {"name", s.meta.name},
                     {"nodes", s.nodes.size()},
                     {"segments", s.segments.size()},
                     {"script", s.script.size()}}
                    .dump()
             << "\n";
    } else {
      io.out << path << ": ok (" << s.meta.name << ", " << s.nodes.size() << " nodes, " << s.segments.size()
             << " segments, " << s.script.size() << " actions)\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(e, io, kExitInvalid);
  }
}

int cmd_run(const std::string& path, const RunOptions& opts, CliStreams io) {
  Scenario s;
  json addendum;
  try {
    s = parse_scenario(read_file(path));
    if (opts.addendum_path) {
      const std::string text = read_file(*opts.addendum_path);
      try {
        addendum = json::parse(text);
      } catch (const json::parse_error& e) {
        throw Error(Errc::syntax_error, *opts.addendum_path + ": " + e.what());
      }
      parse_addendum(s, addendum);
    }
  } catch (const Error& e) {
    return report_error(e, io, is_validation(e.code()) ? kExitInvalid : kExitRuntime);
  }
  try {
    const std::string trace = run_scenario_trace(s, opts, opts.addendum_path ? &addendum : nullptr);
    if (opts.trace_path) {
      write_file(*opts.trace_path, trace);
      const auto records = std::count(trace.begin(), trace.end(), '\n');
      if (io.json) {
        io.out << json{{"ok", true}, {"trace", *opts.trace_path}, {"records", records}}.dump() << "\n";
      } else {
        io.err << "wrote " << records << " records to " << *opts.trace_path << "\n";
      }
    } else {
      io.out << trace;
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(e, io, kExitRuntime);
  }
}

int cmd_check(const std::string& path, const std::string& golden, const RunOptions& opts, CliStreams io) {
  Scenario s;
  std::string golden_text;
  try {
    golden_text = read_file(golden);
    s = parse_scenario(read_file(path));
  } catch (const Error& e) {
    return report_error(e, io, is_validation(e.code()) ? kExitInvalid : kExitRuntime);
  }
  try {
    const auto expected = read_trace(golden_text);
    RunOptions o = opts;
    o.trace_path.reset();
    const auto actual = read_trace(run_scenario_trace(s, o));
    const auto d = diff_traces(actual, expected);
    if (!d) {
      if (io.json) {
        io.out << json{{"ok", true}, {"records", actual.size()}}.dump() << "\n";
      } else {
        io.out << "match: " << actual.size() << " records\n";
      }
      return kExitOk;
    }
    if (io.json) {
      io.out << json{{"ok", false}, {"divergence", to_json(*d)}}.dump() << "\n";
    } else {
      io.out << "mismatch at record " << d->index << "\n";
      io.out << "  run:    " << (d->left ? d->left->line() : "<end of trace>") << "\n";
      io.out << "  golden: " << (d->right ? d->right->line() : "<end of trace>") << "\n";
    }
    return kExitMismatch;
  } catch (const Error& e) {
    return report_error(e, io, kExitRuntime);
  }
}

namespace {
std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }
}  // namespace

int cmd_serve(int port, const std::string& data_dir, CliStreams io) {
  LabService service(data_dir);
  HttpServer server(service);
  if (!server.bind("0.0.0.0", port)) {
    return report_error(Error(Errc::io_error, "cannot bind port " + std::to_string(port)), io, kExitRuntime);
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread watcher([&server] {
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  io.err << "serving on port " << port << " (scenarios in " << data_dir << ")\n";
  server.listen();
  g_stop = true;
  watcher.join();
  return kExitOk;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"simlab: discrete-event network and algorithm lab"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable output");

  std::string path;
  std::string golden;
  std::string until_text;
  std::uint64_t seed = 0;
  std::string trace_out;
  std::string addendum;
  int port = 8080;
  std::string data_dir;

  auto* validate = app.add_subcommand("validate", "Validate a scenario file");
  validate->add_option("scenario", path, "Scenario (.scn.json)")->required();

  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--until", until_text, "Virtual-time horizon, e.g. 120s, 500ms or ticks");
    cmd->add_option("--seed", seed, "Override the scenario seed");
    cmd->add_option("--addendum", addendum, "Replay live injections from an addendum document");
  };
  auto* run = app.add_subcommand("run", "Run a scenario and write its trace");
  run->add_option("scenario", path, "Scenario (.scn.json)")->required();
  run->add_option("--trace", trace_out, "Trace output file (default: stdout)");
  add_run_options(run);

  auto* check = app.add_subcommand("check", "Run a scenario and compare with a golden trace");
  check->add_option("scenario", path, "Scenario (.scn.json)")->required();
  check->add_option("golden", golden, "Golden trace (.trace.ndjson)")->required();
  add_run_options(check);

  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  serve->add_option("--port", port, "Listening port")->check(CLI::Range(1, 65535));
  serve->add_option("--data-dir", data_dir, "Scenario catalog directory (default $LAB_DATA_DIR or ./scenarios)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitRuntime;
  }

  CliStreams io{std::cout, std::cerr, as_json};
  RunOptions opts;
  if (!until_text.empty()) {
    opts.until = parse_duration(until_text);
    if (!opts.until) {
      std::cerr << "error: --until expects ticks or a suffixed duration\n";
      return kExitRuntime;
    }
  }
  if (run->count("--seed") + check->count("--seed") > 0) opts.seed = seed;
  if (!trace_out.empty()) opts.trace_path = trace_out;
  if (!addendum.empty()) opts.addendum_path = addendum;

  if (*validate) return cmd_validate(path, io);
  if (*run) return cmd_run(path, opts, io);
  if (*check) return cmd_check(path, golden, opts, io);
  if (data_dir.empty()) {
    const char* env = std::getenv("LAB_DATA_DIR");
    data_dir = env != nullptr ? env : "scenarios";
  }
  return cmd_serve(port, data_dir, io);
}

}  // namespace simlab
