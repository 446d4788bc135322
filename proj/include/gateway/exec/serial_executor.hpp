#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>

namespace gateway::exec {

/// One thread draining a FIFO of tasks. Exceptions escaping a task are
/// swallowed; callers that care catch inside the task.
class SerialExecutor {
 public:
  SerialExecutor();
  ~SerialExecutor();

  SerialExecutor(const SerialExecutor&) = delete;
  SerialExecutor& operator=(const SerialExecutor&) = delete;

  void post(std::function<void()> task);

  /// Runs `task` on the executor thread and waits for it. Runs inline when
  /// already on that thread.
  void call(const std::function<void()>& task);

  bool on_executor_thread() const noexcept;

 private:
  void loop();

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> tasks_;
  bool done_ = false;
  std::thread thread_;
};

}  // namespace gateway::exec
