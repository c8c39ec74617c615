#include "simlab/labservice.hpp"

#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include <httplib.h>

#include "simlab/error.hpp"
#include "simlab/trace.hpp"

namespace simlab {

std::string_view to_string(SessionMode mode) {
  switch (mode) {
    case SessionMode::paused: return "paused";
    case SessionMode::running: return "running";
    case SessionMode::finished: return "finished";
  }
  return "?";
}

// Scenario store

std::filesystem::path ScenarioStore::file(const std::string& name) const {
  static const std::regex valid("[A-Za-z0-9_-]{1,100}");
  if (!std::regex_match(name, valid)) {
    throw Error(Errc::out_of_range, "scenario names use letters, digits, '-' and '_'", "name");
  }
  return dir_ / (name + ".scn.json");
}

std::optional<std::string> ScenarioStore::get(const std::string& name) const {
  const auto path = file(name);
  std::lock_guard lock(mu_);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ScenarioStore::put(const std::string& name, const std::string& text) {
  const auto path = file(name);
  parse_scenario(text);
  std::lock_guard lock(mu_);
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + tmp);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io_error, "cannot write " + path.string() + ": " + ec.message());
}

std::vector<std::string> ScenarioStore::list() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir_, ec)) {
    const std::string f = entry.path().filename().string();
    const std::string ext = ".scn.json";
    if (f.size() > ext.size() && f.ends_with(ext)) out.push_back(f.substr(0, f.size() - ext.size()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Session

Session::Session(std::string id, Scenario scenario, std::optional<std::uint64_t> seed, std::size_t buffer_limit)
    : id_(std::move(id)), scenario_(std::move(scenario)), seed_(seed), buffer_limit_(buffer_limit) {
  rebuild();
  worker_ = std::thread([this] { loop(); });
}

Session::~Session() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

void Session::rebuild() {
  runner_ = std::make_unique<Runner>(scenario_, seed_);
  buffer_.clear();
  ++generation_;
  mode_ = SessionMode::paused;
  publish(runner_->initial());
  refresh_finished();
}

void Session::publish(const std::vector<Observation>& obs) {
  for (const Observation& o : obs) {
    buffer_.emplace_back(o.seq, to_record(o).line());
    if (buffer_.size() > buffer_limit_) buffer_.pop_front();
  }
  if (!obs.empty()) cv_.notify_all();
}

void Session::refresh_finished() {
  if (runner_->finished() && mode_ != SessionMode::finished) {
    mode_ = SessionMode::finished;
    cv_.notify_all();
  }
}

void Session::loop() {
  constexpr int kBatch = 2048;
  std::unique_lock lock(mu_);
  while (!stopping_) {
    if (mode_ != SessionMode::running) {
      cv_.wait(lock);
      continue;
    }
    const auto wall = std::chrono::steady_clock::now();
    carry_ += speed_ * std::chrono::duration<double>(wall - last_wall_).count();
    last_wall_ = wall;
    const auto budget = static_cast<std::uint64_t>(carry_);
    carry_ -= static_cast<double>(budget);
    const SimTime target = runner_->sim().engine().now() + SimTime{budget};

    bool reached = false;
    for (int i = 0; i < kBatch; ++i) {
      const auto next = runner_->next_due();
      if (!next || *next > target) {
        reached = true;
        break;
      }
      auto r = runner_->step();
      publish(r->observations);
    }
    if (reached) {
      publish(runner_->advance_to(target));
      refresh_finished();
      cv_.wait_for(lock, std::chrono::milliseconds(5));
    } else {
      // Over budget: yield the lock so commands and readers get a turn.
      lock.unlock();
      std::this_thread::yield();
      lock.lock();
    }
  }
}

json Session::control(const json& cmd) {
  if (!cmd.is_object() || !cmd.contains("cmd") || !cmd["cmd"].is_string()) {
    throw Error(Errc::missing_field, "control needs a 'cmd' string", "/cmd");
  }
  const std::string c = cmd["cmd"].get<std::string>();
  std::lock_guard lock(mu_);
  if (c == "run") {
    if (cmd.contains("speed")) {
      if (!cmd["speed"].is_number() || !(cmd["speed"].get<double>() > 0)) {
        throw Error(Errc::out_of_range, "speed must be a positive number of ticks per second", "/speed");
      }
      speed_ = cmd["speed"].get<double>();
    }
    if (mode_ == SessionMode::paused) {
      mode_ = SessionMode::running;
      last_wall_ = std::chrono::steady_clock::now();
      carry_ = 0;
    }
  } else if (c == "pause") {
    if (mode_ == SessionMode::running) mode_ = SessionMode::paused;
  } else if (c == "step") {
    if (mode_ == SessionMode::running) throw Error(Errc::bad_state, "pause the session before stepping");
    std::int64_t n = 1;
    if (cmd.contains("n")) {
      if (!cmd["n"].is_number_integer() || cmd["n"].get<std::int64_t>() < 1) {
        throw Error(Errc::out_of_range, "n must be a positive integer", "/n");
      }
      n = cmd["n"].get<std::int64_t>();
    }
    std::int64_t done = 0;
    for (; done < n; ++done) {
      auto r = runner_->step();
      if (!r) break;
      publish(r->observations);
    }
    refresh_finished();
    cv_.notify_all();
    return {{"mode", to_string(mode_)}, {"dispatched", done}, {"at", runner_->sim().engine().now().ticks}};
  } else if (c == "reset") {
    rebuild();
  } else {
    throw Error(Errc::out_of_range, "cmd must be run, pause, step or reset", "/cmd");
  }
  cv_.notify_all();
  return {{"mode", to_string(mode_)}, {"at", runner_->sim().engine().now().ticks}, {"speed", speed_}};
}

json Session::inject(const json& action) {
  std::lock_guard lock(mu_);
  if (mode_ == SessionMode::finished) throw Error(Errc::bad_state, "session has finished");
  const Injection& inj = runner_->inject(action);
  cv_.notify_all();
  return to_json(inj);
}

json Session::snapshot() {
  std::lock_guard lock(mu_);
  json j = runner_->sim().snapshot();
  j["session"] = id_;
  j["mode"] = to_string(mode_);
  j["next_seq"] = runner_->sim().engine().observations_emitted();
  return j;
}

json Session::addendum() {
  std::lock_guard lock(mu_);
  return runner_->addendum();
}

json Session::status() {
  std::lock_guard lock(mu_);
  return {{"id", id_},
          {"mode", to_string(mode_)},
          {"seed", runner_->seed()},
          {"at", runner_->sim().engine().now().ticks},
          {"speed", speed_}};
}

std::uint64_t Session::generation() {
  std::lock_guard lock(mu_);
  return generation_;
}

std::vector<std::string> Session::read(std::uint64_t from_seq, std::chrono::milliseconds wait, bool& done,
                                       std::uint64_t generation) {
  std::unique_lock lock(mu_);
  auto available = [&] { return !buffer_.empty() && buffer_.back().first >= from_seq; };
  cv_.wait_for(lock, wait, [&] {
    return stopping_ || generation_ != generation || available() || mode_ == SessionMode::finished;
  });
  done = false;
  if (stopping_ || generation_ != generation) {
    done = true;
    return {};
  }
  std::vector<std::string> out;
  if (!buffer_.empty()) {
    if (from_seq < buffer_.front().first) {
      throw Error(Errc::seq_too_old, "records before seq " + std::to_string(buffer_.front().first) +
                                         " have left the buffer; re-run or snapshot");
    }
    for (std::size_t i = static_cast<std::size_t>(from_seq - buffer_.front().first);
         i < buffer_.size() && out.size() < 4096; ++i) {
      out.push_back(buffer_[i].second);
    }
  }
  const std::uint64_t end = buffer_.empty() ? 0 : buffer_.back().first + 1;
  done = mode_ == SessionMode::finished && from_seq + out.size() >= end;
  return out;
}

// Service

LabService::LabService(std::filesystem::path data_dir, std::size_t buffer_limit)
    : salt_(std::random_device{}()), buffer_limit_(buffer_limit), store_(std::move(data_dir)) {}

json LabService::create_session(const std::string& scenario_text, std::optional<std::uint64_t> seed) {
  Scenario s = parse_scenario(scenario_text);
  std::string id;
  {
    std::lock_guard lock(mu_);
    std::ostringstream ss;
    ss << std::hex << (salt_ ^ (++counter_ * 0x9E3779B97F4A7C15ull));
    id = "s" + std::to_string(counter_) + "-" + ss.str().substr(0, 8);
  }
  auto session = std::make_shared<Session>(id, std::move(s), seed, buffer_limit_);
  json status = session->status();
  std::lock_guard lock(mu_);
  sessions_.emplace(id, std::move(session));
  return status;
}

std::shared_ptr<Session> LabService::session(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::unknown_session, "no session " + id);
  return it->second;
}

bool LabService::remove_session(const std::string& id) {
  std::shared_ptr<Session> doomed;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    doomed = std::move(it->second);
    sessions_.erase(it);
  }
  return true;
}

// HTTP

int http_status(Errc code) {
  switch (code) {
    case Errc::unknown_session: return 404;
    case Errc::bad_state: return 409;
    case Errc::seq_too_old: return 410;
    case Errc::io_error: return 500;
    default: return 400;
  }
}

json error_body(const Error& e) { return {{"code", to_string(e.code())}, {"message", e.what()}, {"path", e.path()}}; }

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    reply(res, http_status(e.code()), error_body(e));
  } catch (const json::exception& e) {
    reply(res, 400, {{"code", "syntax_error"}, {"message", e.what()}, {"path", ""}});
  } catch (const std::exception& e) {
    reply(res, 500, {{"code", "internal"}, {"message", e.what()}, {"path", ""}});
  }
}

json body_json(const httplib::Request& req) {
  try {
    return req.body.empty() ? json::object() : json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::syntax_error, e.what());
  }
}

std::optional<std::uint64_t> query_u64(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  const std::string v = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw Error(Errc::bad_type, std::string(key) + " must be an unsigned integer", key);
  }
}

}  // namespace

HttpServer::HttpServer(LabService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::bind(const std::string& host, int port) { return server_->bind_to_port(host, port); }
int HttpServer::bind_any(const std::string& host) { return server_->bind_to_any_port(host); }
void HttpServer::listen() { server_->listen_after_bind(); }
void HttpServer::stop() {
  if (server_) server_->stop();
}

void HttpServer::routes() {
  httplib::Server& srv = *server_;

  srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 201, service_.create_session(req.body, query_u64(req, "seed"))); });
  });

  srv.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, service_.session(req.matches[1])->status()); });
  });

  srv.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!service_.remove_session(req.matches[1])) throw Error(Errc::unknown_session, "no such session");
      reply(res, 200, {{"deleted", std::string(req.matches[1])}});
    });
  });

  srv.Post(R"(/sessions/([^/]+)/control)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = service_.session(req.matches[1]);
      reply(res, 200, s->control(body_json(req)));
    });
  });

  srv.Post(R"(/sessions/([^/]+)/inject)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = service_.session(req.matches[1]);
      reply(res, 200, s->inject(body_json(req)));
    });
  });

  srv.Get(R"(/sessions/([^/]+)/snapshot)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, service_.session(req.matches[1])->snapshot()); });
  });

  srv.Get(R"(/sessions/([^/]+)/addendum)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, service_.session(req.matches[1])->addendum()); });
  });

  srv.Get(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto session = service_.session(req.matches[1]);
      const std::uint64_t from = query_u64(req, "from_seq").value_or(0);
      const bool follow = !req.has_param("follow") || req.get_param_value("follow") != "0";
      const std::uint64_t generation = session->generation();
      // Surface SeqTooOld as a status code before the stream starts.
      bool done = false;
      auto first = session->read(from, std::chrono::milliseconds(0), done, generation);
      auto cursor = std::make_shared<std::uint64_t>(from);
      auto pending = std::make_shared<std::vector<std::string>>(std::move(first));
      auto finished = std::make_shared<bool>(done || (!follow && pending->empty()));
      res.status = 200;
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [session, cursor, pending, finished, follow, generation](std::size_t, httplib::DataSink& sink) {
            try {
              while (true) {
                for (const std::string& line : *pending) {
                  const std::string msg = "data: " + line + "\n\n";
                  if (!sink.write(msg.data(), msg.size())) return false;
                  ++*cursor;
                }
                pending->clear();
                if (*finished) {
                  sink.done();
                  return true;
                }
                if (!sink.is_writable()) return false;
                bool done = false;
                *pending = session->read(*cursor, std::chrono::milliseconds(follow ? 250 : 0), done, generation);
                if (done || (!follow && pending->empty())) *finished = true;
                if (pending->empty() && !*finished) return true;
              }
            } catch (const Error& e) {
              const std::string msg = "event: error\ndata: " + error_body(e).dump() + "\n\n";
              sink.write(msg.data(), msg.size());
              sink.done();
              return true;
            }
          });
    });
  });

  srv.Get("/scenarios", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, {{"scenarios", service_.store().list()}}); });
  });

  srv.Get(R"(/scenarios/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto text = service_.store().get(req.matches[1]);
      if (!text) {
        reply(res, 404, {{"code", "unknown_ref"}, {"message", "no scenario named " + std::string(req.matches[1])},
                         {"path", "name"}});
        return;
      }
      res.status = 200;
      res.set_content(*text, "application/json");
    });
  });

  srv.Put(R"(/scenarios/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      service_.store().put(req.matches[1], req.body);
      reply(res, 200, {{"stored", std::string(req.matches[1])}});
    });
  });
}

}  // namespace simlab
