#pragma once

#include <chrono>
#include <atomic>
#include <functional>
#include <thread>

namespace gateway::testing {

using namespace std::chrono_literals;

inline bool eventually(const std::function<bool()>& pred, std::chrono::milliseconds timeout = 5s) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!pred()) {
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(1ms);
  }
  return true;
}

/// Tracks how many callers are inside a region and the highest count seen.
class ConcurrencyProbe {
 public:
  void enter() {
    const int now = ++inside_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
  }
  void leave() { --inside_; }
  int peak() const { return peak_.load(); }

 private:
  std::atomic<int> inside_{0};
  std::atomic<int> peak_{0};
};

}  // namespace gateway::testing
