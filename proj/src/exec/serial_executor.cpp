#include "gateway/exec/serial_executor.hpp"

#include <exception>
#include <future>

namespace gateway::exec {

SerialExecutor::SerialExecutor() : thread_([this] { loop(); }) {}

SerialExecutor::~SerialExecutor() {
  {
    std::lock_guard lk(mu_);
    done_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

void SerialExecutor::post(std::function<void()> task) {
  {
    std::lock_guard lk(mu_);
    tasks_.push_back(std::move(task));
  }
  cv_.notify_one();
}

void SerialExecutor::call(const std::function<void()>& task) {
  if (on_executor_thread()) {
    task();
    return;
  }
  std::promise<void> done;
  auto fut = done.get_future();
  post([&] {
    try {
      task();
      done.set_value();
    } catch (...) {
      done.set_exception(std::current_exception());
    }
  });
  fut.get();
}

bool SerialExecutor::on_executor_thread() const noexcept {
  return std::this_thread::get_id() == thread_.get_id();
}

void SerialExecutor::loop() {
  for (;;) {
    std::function<void()> task;
    {
      std::unique_lock lk(mu_);
      cv_.wait(lk, [&] { return done_ || !tasks_.empty(); });
      if (tasks_.empty()) return;  // done_ and drained
      task = std::move(tasks_.front());
      tasks_.pop_front();
    }
    try {
      task();
    } catch (...) {
    }
  }
}

}  // namespace gateway::exec
