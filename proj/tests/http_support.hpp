#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "simlab/labservice.hpp"

namespace simlab::testing {

/// A LabService behind an HttpServer on an ephemeral loopback port.
class LiveServer {
 public:
  explicit LiveServer(std::size_t buffer_limit = Session::kBufferLimit)
      : dir_(std::filesystem::temp_directory_path() /
             ("simlab-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++))),
        service_((std::filesystem::create_directories(dir_), dir_), buffer_limit),
        server_(service_) {
    port_ = server_.bind_any("127.0.0.1");
    thread_ = std::thread([this] { server_.listen(); });
  }

  ~LiveServer() {
    server_.stop();
    thread_.join();
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }

  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  int port() const { return port_; }
  LabService& service() { return service_; }
  const std::filesystem::path& dir() const { return dir_; }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }

  std::filesystem::path dir_;
  LabService service_;
  HttpServer server_;
  int port_ = -1;
  std::thread thread_;
};

/// Reads an SSE body into its data payloads. Sets `error` to the payload
/// of an "event: error" record if one arrives.
inline std::vector<std::string> sse_data(const std::string& body, std::string* error = nullptr) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  bool is_error = false;
  while (pos < body.size()) {
    std::size_t end = body.find('\n', pos);
    if (end == std::string::npos) end = body.size();
    const std::string line = body.substr(pos, end - pos);
    pos = end + 1;
    if (line.rfind("event: error", 0) == 0) {
      is_error = true;
    } else if (line.rfind("data: ", 0) == 0) {
      if (is_error) {
        if (error) *error = line.substr(6);
      } else {
        out.push_back(line.substr(6));
      }
    } else if (line.empty()) {
      is_error = false;
    }
  }
  return out;
}

/// Streams /events until the server closes it.
inline std::vector<std::string> fetch_events(httplib::Client& c, const std::string& id, std::uint64_t from = 0,
                                             bool follow = true, std::string* error = nullptr) {
  std::string body;
  const std::string path =
      "/sessions/" + id + "/events?from_seq=" + std::to_string(from) + (follow ? "" : "&follow=0");
  auto res = c.Get(path, [&](const char* data, std::size_t n) {
    body.append(data, n);
    return true;
  });
  if (!res) return {};
  return sse_data(body, error);
}

inline std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

}  // namespace simlab::testing
