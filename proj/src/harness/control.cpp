#include "gateway/harness/control.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "gateway/error.hpp"

namespace gateway::harness {

using nlohmann::json;

namespace {

constexpr int kPollMs = 100;

[[noreturn]] void control_error(const std::string& what) {
  throw Error(Errc::ControlError, what + ": " + std::strerror(errno));
}

sockaddr_un address_of(const std::filesystem::path& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  const auto s = path.string();
  if (s.empty() || s.size() >= sizeof(addr.sun_path))
    throw Error(Errc::ControlError, "socket path length out of range: " + s);
  std::memcpy(addr.sun_path, s.c_str(), s.size() + 1);
  return addr;
}

bool send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

int connect_to(const std::filesystem::path& path) {
  const auto addr = address_of(path);
  const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) control_error("socket");
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd);
    errno = err;
    control_error("cannot reach daemon at " + path.string());
  }
  return fd;
}

}  // namespace

std::filesystem::path control_socket_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("GATEWAY_SOCKET"); env && *env) return env;
  return kDefaultControlSocket;
}

ControlServer::ControlServer(std::filesystem::path socket, Handler handler)
    : path_(std::move(socket)), handler_(std::move(handler)) {
  const auto addr = address_of(path_);
  if (std::filesystem::exists(path_)) {
    bool live = false;
    try {
      ::close(connect_to(path_));
      live = true;
    } catch (const Error&) {
    }
    if (live) throw Error(Errc::ControlError, "a daemon is already listening on " + path_.string());
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) control_error("socket");
  if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(listen_fd_, 16) != 0) {
    const int err = errno;
    ::close(listen_fd_);
    errno = err;
    control_error("cannot listen on " + path_.string());
  }
  acceptor_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

ControlServer::~ControlServer() { stop(); }

void ControlServer::stop() {
  std::list<Connection> conns;
  {
    std::lock_guard lk(mu_);
    if (stopped_) return;
    stopped_ = true;
  }
  acceptor_.request_stop();
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lk(mu_);
    conns.swap(connections_);
  }
  for (auto& c : conns) c.thread.request_stop();
  conns.clear();
  ::close(listen_fd_);
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

void ControlServer::accept_loop(std::stop_token stop) {
  while (!stop.stop_requested()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, kPollMs) <= 0) continue;
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    std::lock_guard lk(mu_);
    std::erase_if(connections_, [](const Connection& c) { return c.done->load(); });
    auto done = std::make_shared<std::atomic<bool>>(false);
    connections_.push_back(
        {done, std::jthread([this, fd, done](std::stop_token st) { serve(st, fd, *done); })});
  }
}

void ControlServer::serve(std::stop_token stop, int fd, std::atomic<bool>& done) {
  std::string buffer;
  char chunk[4096];
  while (!stop.stop_requested()) {
    pollfd pfd{fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, kPollMs);
    if (ready == 0) continue;
    if (ready < 0 && errno == EINTR) continue;
    if (ready < 0) break;
    const auto n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    bool ok = true;
    while (ok && (nl = buffer.find('\n')) != std::string::npos) {
      const std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      json response;
      try {
        response = handler_(json::parse(line));
      } catch (const json::exception& e) {
        response = {{"ok", false}, {"error", std::string(to_string(Errc::ParseError))}, {"message", e.what()}};
      }
      ok = send_all(fd, response.dump() + "\n");
    }
    if (!ok) break;
  }
  ::close(fd);
  done = true;
}

json control_call(const std::filesystem::path& socket, const json& request, std::chrono::milliseconds timeout) {
  const int fd = connect_to(socket);
  struct Closer {
    int fd;
    ~Closer() { ::close(fd); }
  } closer{fd};
  if (!send_all(fd, request.dump() + "\n")) control_error("send to daemon failed");
  std::string buffer;
  char chunk[4096];
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (buffer.find('\n') == std::string::npos) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(Errc::ControlError, "daemon did not answer in time");
    pollfd pfd{fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    const auto n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) throw Error(Errc::ControlError, "daemon closed the connection");
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
  try {
    return json::parse(buffer.substr(0, buffer.find('\n')));
  } catch (const json::exception& e) {
    throw Error(Errc::ControlError, std::string("bad response: ") + e.what());
  }
}

}  // namespace gateway::harness
