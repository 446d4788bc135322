#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "gateway/exec/serial_executor.hpp"

namespace gateway::exec {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

/// Provider execution state as seen by arbitration and status queries.
enum class ProviderState { Idle, Running, Failed };

std::string_view to_string(ProviderState s) noexcept;

struct RuntimeConfig {
  std::size_t worker_count = 4;
  milliseconds default_timeout{30'000};
  /// Per-provider backlog used by the engine when a provider is busy.
  std::size_t pending_queue_depth = 64;
  milliseconds shutdown_grace{5'000};
  /// Bound on tickets waiting for a worker.
  std::size_t queue_capacity = 1024;

  void validate() const;

  /// Applies GATEWAY_WORKERS and GATEWAY_TIMEOUT_MS on top of `base`.
  static RuntimeConfig from_env(RuntimeConfig base);
};

enum class TicketStatus { Queued, PreHook, Running, PostHook, Done, Failed, TimedOut };

std::string_view to_string(TicketStatus s) noexcept;

constexpr bool is_terminal(TicketStatus s) noexcept {
  return s == TicketStatus::Done || s == TicketStatus::Failed || s == TicketStatus::TimedOut;
}

/// Result handed to the post-hook. `status` is the terminal status the ticket
/// will take unless the post-hook itself throws.
struct Outcome {
  TicketStatus status = TicketStatus::Done;
  std::string error;
};

/// A unit of work. Hooks run on the coordination thread, the body on a worker.
/// The post-hook runs exactly once per ticket, including tickets that never
/// reached a worker (shutdown), so owners can release their bookkeeping.
struct Job {
  std::string provider_key;
  std::uint64_t request_id = 0;
  std::optional<milliseconds> timeout;
  std::function<void()> pre_hook;
  std::function<void(std::stop_token)> body;
  std::function<void(const Outcome&)> post_hook;
};

namespace detail {
struct TicketState;
}

/// Shared view of a submitted job.
class Ticket {
 public:
  Ticket() = default;

  std::uint64_t id() const;
  std::uint64_t request_id() const;
  const std::string& provider_key() const;
  Clock::time_point submitted_at() const;
  milliseconds timeout() const;

  TicketStatus status() const;
  /// Diagnostic for Failed/TimedOut tickets.
  std::string error() const;

  void wait() const;
  bool wait_for(milliseconds d) const;

  explicit operator bool() const { return state_ != nullptr; }

 private:
  friend class Runtime;
  explicit Ticket(std::shared_ptr<detail::TicketState> s) : state_(std::move(s)) {}
  std::shared_ptr<detail::TicketState> state_;
};

/// Worker pool plus a coordination thread. Bodies run in parallel up to
/// worker_count; hooks of every ticket are serialized on the coordinator.
class Runtime {
 public:
  Runtime();
  ~Runtime();

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  void start(RuntimeConfig config);
  void stop(bool drain);
  bool running() const;
  RuntimeConfig config() const;

  Ticket submit(Job job);

  /// Runs `fn` on the coordination thread without waiting.
  void post(std::function<void()> fn);

  /// Blocks until no ticket is queued or in flight. Returns false on timeout.
  bool wait_quiescent(milliseconds timeout) const;

  std::size_t queued() const;
  std::size_t in_flight() const;

 private:
  void worker_loop();
  void execute(const std::shared_ptr<detail::TicketState>& t);
  void finish(const std::shared_ptr<detail::TicketState>& t, Outcome outcome, bool ran_hooks);
  void fail_queued_locked(std::vector<std::shared_ptr<detail::TicketState>>& out);

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;       // workers: queue activity
  mutable std::condition_variable idle_cv_;  // waiters: outstanding count
  RuntimeConfig config_;
  bool running_ = false;
  bool accepting_ = false;
  bool stopping_ = false;
  std::uint64_t next_ticket_ = 1;
  std::size_t in_flight_ = 0;
  std::deque<std::shared_ptr<detail::TicketState>> queue_;
  std::vector<std::shared_ptr<detail::TicketState>> active_;
  std::vector<std::thread> workers_;
  std::unique_ptr<SerialExecutor> coordinator_;

  std::mutex abandoned_mu_;
  std::vector<std::jthread> abandoned_;
};

}  // namespace gateway::exec
