#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "simlab/runner.hpp"
#include "simlab/scenario.hpp"

namespace httplib {
class Server;
}

namespace simlab {

enum class SessionMode { paused, running, finished };
std::string_view to_string(SessionMode mode);

/// .scn.json files in one directory; every access holds the store lock.
class ScenarioStore {
 public:
  explicit ScenarioStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::optional<std::string> get(const std::string& name) const;
  /// Validates before writing. Throws Error.
  void put(const std::string& name, const std::string& text);
  std::vector<std::string> list() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path file(const std::string& name) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

/// One simulation plus its run loop, observation buffer and subscribers.
class Session {
 public:
  static constexpr std::size_t kBufferLimit = 100'000;
  static constexpr double kDefaultSpeed = 1e6;  // ticks per real second

  Session(std::string id, Scenario scenario, std::optional<std::uint64_t> seed, std::size_t buffer_limit);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }

  /// {cmd: run|pause|step|reset, speed?, n?}. Throws Error.
  json control(const json& cmd);
  json inject(const json& action);
  json snapshot();
  json addendum();
  json status();

  /// Copies buffered trace lines with seq >= from_seq, waiting up to `wait`
  /// for at least one. `done` is set once the session is finished (or was
  /// reset) and nothing more will follow. Throws Errc::seq_too_old.
  std::vector<std::string> read(std::uint64_t from_seq, std::chrono::milliseconds wait, bool& done,
                                std::uint64_t generation);
  std::uint64_t generation();

 private:
  void rebuild();
  void publish(const std::vector<Observation>& obs);
  void loop();
  void refresh_finished();

  std::string id_;
  Scenario scenario_;
  std::optional<std::uint64_t> seed_;
  std::size_t buffer_limit_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::unique_ptr<Runner> runner_;
  SessionMode mode_ = SessionMode::paused;
  double speed_ = kDefaultSpeed;
  double carry_ = 0.0;
  std::chrono::steady_clock::time_point last_wall_;
  std::deque<std::pair<std::uint64_t, std::string>> buffer_;
  std::uint64_t generation_ = 0;
  bool stopping_ = false;
  std::thread worker_;
};

/// The multi-session model behind the HTTP API.
class LabService {
 public:
  explicit LabService(std::filesystem::path data_dir, std::size_t buffer_limit = Session::kBufferLimit);

  /// Returns {id, mode, seed}. Throws Error on a bad scenario.
  json create_session(const std::string& scenario_text, std::optional<std::uint64_t> seed = std::nullopt);
  std::shared_ptr<Session> session(const std::string& id);
  bool remove_session(const std::string& id);
  ScenarioStore& store() { return store_; }

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_;
  std::size_t buffer_limit_;
  ScenarioStore store_;
};

int http_status(Errc code);
json error_body(const Error& e);

/// HTTP + JSON front end with a server-sent event stream for observations.
class HttpServer {
 public:
  explicit HttpServer(LabService& service);
  ~HttpServer();

  /// Returns false if the port cannot be bound.
  bool bind(const std::string& host, int port);
  /// Binds an ephemeral port and returns it, or -1.
  int bind_any(const std::string& host);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  void routes();

  LabService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace simlab
