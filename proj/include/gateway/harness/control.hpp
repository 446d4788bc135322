#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace gateway::harness {

/// Default socket when neither --socket nor GATEWAY_SOCKET is given.
inline constexpr const char* kDefaultControlSocket = "/tmp/gateway.sock";

/// --socket value if nonempty, else GATEWAY_SOCKET, else the default.
std::filesystem::path control_socket_path(const std::string& flag);

/// Unix-domain socket server speaking newline-delimited JSON: one request
/// object per line, one response object per line. Connections are served
/// concurrently.
class ControlServer {
 public:
  using Handler = std::function<nlohmann::json(const nlohmann::json&)>;

  /// Binds and listens. A stale socket file is replaced; one with a live
  /// listener throws ControlError.
  ControlServer(std::filesystem::path socket, Handler handler);
  ~ControlServer();

  ControlServer(const ControlServer&) = delete;
  ControlServer& operator=(const ControlServer&) = delete;

  /// Stops accepting, closes connections and removes the socket file.
  void stop();
  const std::filesystem::path& socket_path() const noexcept { return path_; }

 private:
  void accept_loop(std::stop_token stop);
  void serve(std::stop_token stop, int fd, std::atomic<bool>& done);

  std::filesystem::path path_;
  Handler handler_;
  int listen_fd_ = -1;
  std::mutex mu_;
  struct Connection {
    std::shared_ptr<std::atomic<bool>> done;
    std::jthread thread;
  };
  std::list<Connection> connections_;
  std::jthread acceptor_;
  bool stopped_ = false;
};

/// One request/response exchange. Throws ControlError when the daemon is
/// unreachable or does not answer within `timeout`.
nlohmann::json control_call(const std::filesystem::path& socket, const nlohmann::json& request,
                            std::chrono::milliseconds timeout = std::chrono::seconds(10));

}  // namespace gateway::harness
