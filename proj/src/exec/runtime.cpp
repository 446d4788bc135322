#include "gateway/exec/runtime.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>

#include "gateway/error.hpp"

namespace gateway::exec {

std::string_view to_string(ProviderState s) noexcept {
  switch (s) {
    case ProviderState::Idle: return "Idle";
    case ProviderState::Running: return "Running";
    case ProviderState::Failed: return "Failed";
  }
  return "?";
}

std::string_view to_string(TicketStatus s) noexcept {
  switch (s) {
    case TicketStatus::Queued: return "Queued";
    case TicketStatus::PreHook: return "PreHook";
    case TicketStatus::Running: return "Running";
    case TicketStatus::PostHook: return "PostHook";
    case TicketStatus::Done: return "Done";
    case TicketStatus::Failed: return "Failed";
    case TicketStatus::TimedOut: return "TimedOut";
  }
  return "?";
}

void RuntimeConfig::validate() const {
  if (worker_count == 0) throw Error(Errc::InvalidArgument, "worker_count must be >= 1");
  if (pending_queue_depth == 0) throw Error(Errc::InvalidArgument, "pending_queue_depth must be >= 1");
  if (queue_capacity == 0) throw Error(Errc::InvalidArgument, "queue_capacity must be >= 1");
  if (default_timeout.count() <= 0) throw Error(Errc::InvalidArgument, "default_timeout must be positive");
  if (shutdown_grace.count() < 0) throw Error(Errc::InvalidArgument, "shutdown_grace must be >= 0");
}

namespace {
std::optional<unsigned long long> env_number(const char* name) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') throw Error(Errc::InvalidArgument, std::string(name) + " is not a number");
  return v;
}
}  // namespace

RuntimeConfig RuntimeConfig::from_env(RuntimeConfig base) {
  if (auto w = env_number("GATEWAY_WORKERS")) base.worker_count = static_cast<std::size_t>(*w);
  if (auto t = env_number("GATEWAY_TIMEOUT_MS")) base.default_timeout = milliseconds(*t);
  base.validate();
  return base;
}

namespace detail {

struct TicketState {
  std::uint64_t id = 0;
  Job job;
  Clock::time_point submitted_at;
  milliseconds timeout{0};

  mutable std::mutex mu;
  mutable std::condition_variable cv;
  TicketStatus status = TicketStatus::Queued;
  std::string error;

  bool body_done = false;
  bool body_failed = false;
  std::string body_error;
  bool abort = false;
  std::string abort_reason;
  std::stop_source stop;

  void set_status(TicketStatus s) {
    {
      std::lock_guard lk(mu);
      status = s;
    }
    cv.notify_all();
  }
};

}  // namespace detail

using detail::TicketState;

// Ticket ---------------------------------------------------------------------

std::uint64_t Ticket::id() const { return state_->id; }
std::uint64_t Ticket::request_id() const { return state_->job.request_id; }
const std::string& Ticket::provider_key() const { return state_->job.provider_key; }
Clock::time_point Ticket::submitted_at() const { return state_->submitted_at; }
milliseconds Ticket::timeout() const { return state_->timeout; }

TicketStatus Ticket::status() const {
  std::lock_guard lk(state_->mu);
  return state_->status;
}

std::string Ticket::error() const {
  std::lock_guard lk(state_->mu);
  return state_->error;
}

void Ticket::wait() const {
  std::unique_lock lk(state_->mu);
  state_->cv.wait(lk, [&] { return is_terminal(state_->status); });
}

bool Ticket::wait_for(milliseconds d) const {
  std::unique_lock lk(state_->mu);
  return state_->cv.wait_for(lk, d, [&] { return is_terminal(state_->status); });
}

// Runtime --------------------------------------------------------------------

Runtime::Runtime() = default;

Runtime::~Runtime() {
  if (running()) {
    try {
      stop(false);
    } catch (...) {
    }
  }
  std::lock_guard lk(abandoned_mu_);
  abandoned_.clear();  // joins bodies that ignored cancellation
}

void Runtime::start(RuntimeConfig config) {
  config.validate();
  std::lock_guard lk(mu_);
  if (running_) throw Error(Errc::AlreadyRunning, "runtime already started");
  config_ = config;
  coordinator_ = std::make_unique<SerialExecutor>();
  running_ = true;
  accepting_ = true;
  stopping_ = false;
  workers_.reserve(config_.worker_count);
  for (std::size_t i = 0; i < config_.worker_count; ++i) workers_.emplace_back([this] { worker_loop(); });
}

bool Runtime::running() const {
  std::lock_guard lk(mu_);
  return running_;
}

RuntimeConfig Runtime::config() const {
  std::lock_guard lk(mu_);
  return config_;
}

Ticket Runtime::submit(Job job) {
  auto t = std::make_shared<TicketState>();
  {
    std::lock_guard lk(mu_);
    if (!accepting_) throw Error(Errc::RuntimeStopped, "runtime is not accepting submissions");
    if (queue_.size() >= config_.queue_capacity) throw Error(Errc::QueueFull, "runtime queue is full");
    t->id = next_ticket_++;
    t->timeout = job.timeout.value_or(config_.default_timeout);
    t->job = std::move(job);
    t->submitted_at = Clock::now();
    queue_.push_back(t);
    ++in_flight_;
  }
  cv_.notify_one();
  return Ticket(t);
}

void Runtime::post(std::function<void()> fn) {
  std::lock_guard lk(mu_);
  if (!coordinator_) throw Error(Errc::RuntimeStopped, "runtime is not running");
  coordinator_->post(std::move(fn));
}

bool Runtime::wait_quiescent(milliseconds timeout) const {
  std::unique_lock lk(mu_);
  return idle_cv_.wait_for(lk, timeout, [&] { return in_flight_ == 0; });
}

std::size_t Runtime::queued() const {
  std::lock_guard lk(mu_);
  return queue_.size();
}

std::size_t Runtime::in_flight() const {
  std::lock_guard lk(mu_);
  return in_flight_;
}

void Runtime::worker_loop() {
  for (;;) {
    std::shared_ptr<TicketState> t;
    {
      std::unique_lock lk(mu_);
      cv_.wait(lk, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      t = std::move(queue_.front());
      queue_.pop_front();
      active_.push_back(t);
    }
    execute(t);
  }
}

namespace {
std::string describe(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown exception";
  }
}
}  // namespace

void Runtime::execute(const std::shared_ptr<TicketState>& t) {
  t->set_status(TicketStatus::PreHook);
  if (t->job.pre_hook) {
    std::exception_ptr failure;
    coordinator_->call([&] {
      try {
        t->job.pre_hook();
      } catch (...) {
        failure = std::current_exception();
      }
    });
    if (failure) {
      finish(t, {TicketStatus::Failed, "pre-hook failed: " + describe(failure)}, true);
      return;
    }
  }

  t->set_status(TicketStatus::Running);
  std::jthread body([t] {
    bool failed = false;
    std::string err;
    try {
      if (t->job.body) t->job.body(t->stop.get_token());
    } catch (...) {
      failed = true;
      err = describe(std::current_exception());
    }
    {
      std::lock_guard lk(t->mu);
      t->body_done = true;
      t->body_failed = failed;
      t->body_error = std::move(err);
    }
    t->cv.notify_all();
  });

  Outcome outcome;
  bool completed = false;
  {
    std::unique_lock lk(t->mu);
    t->cv.wait_until(lk, Clock::now() + t->timeout, [&] { return t->body_done || t->abort; });
    if (t->body_done) {
      completed = true;
      outcome = t->body_failed ? Outcome{TicketStatus::Failed, t->body_error} : Outcome{TicketStatus::Done, {}};
    } else if (t->abort) {
      outcome = {TicketStatus::Failed, t->abort_reason};
    } else {
      outcome = {TicketStatus::TimedOut, Error(Errc::Timeout, "body exceeded " + std::to_string(t->timeout.count()) + " ms").what()};
    }
  }

  if (completed) {
    body.join();
  } else {
    t->stop.request_stop();
    std::lock_guard lk(abandoned_mu_);
    abandoned_.push_back(std::move(body));
  }
  finish(t, std::move(outcome), true);
}

void Runtime::finish(const std::shared_ptr<TicketState>& t, Outcome outcome, bool ran_hooks) {
  if (ran_hooks) t->set_status(TicketStatus::PostHook);
  if (t->job.post_hook) {
    std::exception_ptr failure;
    auto run = [&] {
      try {
        t->job.post_hook(outcome);
      } catch (...) {
        failure = std::current_exception();
      }
    };
    coordinator_->call(run);
    if (failure) outcome = {TicketStatus::Failed, "post-hook failed: " + describe(failure)};
  }
  {
    std::lock_guard lk(t->mu);
    t->status = outcome.status;
    t->error = std::move(outcome.error);
  }
  t->cv.notify_all();
  {
    std::lock_guard lk(mu_);
    std::erase(active_, t);
    --in_flight_;
  }
  idle_cv_.notify_all();
}

void Runtime::fail_queued_locked(std::vector<std::shared_ptr<TicketState>>& out) {
  for (auto& t : queue_) out.push_back(std::move(t));
  queue_.clear();
}

void Runtime::stop(bool drain) {
  std::vector<std::shared_ptr<TicketState>> dropped;
  milliseconds grace;
  {
    std::lock_guard lk(mu_);
    if (!running_) throw Error(Errc::NotRunning, "runtime is not running");
    accepting_ = false;
    grace = config_.shutdown_grace;
  }
  const auto deadline = Clock::now() + grace;

  auto abort_active = [&] {
    std::lock_guard lk(mu_);
    for (auto& t : active_) {
      {
        std::lock_guard tl(t->mu);
        t->abort = true;
        t->abort_reason = "shutdown";
      }
      t->stop.request_stop();
      t->cv.notify_all();
    }
  };

  {
    std::unique_lock lk(mu_);
    if (drain) idle_cv_.wait_until(lk, deadline, [&] { return in_flight_ == 0; });
    fail_queued_locked(dropped);
    if (!drain) {
      for (auto& t : active_) t->stop.request_stop();
    }
  }
  for (auto& t : dropped) finish(t, {TicketStatus::Failed, "shutdown"}, false);

  {
    std::unique_lock lk(mu_);
    idle_cv_.wait_until(lk, deadline, [&] { return in_flight_ == 0; });
  }
  abort_active();
  {
    std::unique_lock lk(mu_);
    idle_cv_.wait(lk, [&] { return in_flight_ == 0; });
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& w : workers_) w.join();
  workers_.clear();

  std::unique_ptr<SerialExecutor> coordinator;
  {
    std::lock_guard lk(mu_);
    coordinator = std::move(coordinator_);
  }
  coordinator.reset();
  {
    std::lock_guard lk(mu_);
    running_ = false;
    stopping_ = false;
  }
}

}  // namespace gateway::exec
