#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

#include "gateway/core/types.hpp"

namespace gateway::core {

/// Keyed, capacity-bounded log of envelopes. data_id starts at 1 and is never
/// reused; the oldest record is evicted once capacity is exceeded.
class Store {
 public:
  Store(std::string key, std::size_t capacity);

  const std::string& key() const noexcept { return key_; }
  std::size_t capacity() const noexcept { return capacity_; }

  std::size_t size() const;
  /// Highest data_id assigned so far (0 when nothing was stored).
  std::uint64_t last_data_id() const;

  DataEnvelope retrieve(std::uint64_t data_id) const;
  /// Up to n newest envelopes in ascending data_id order.
  std::vector<DataEnvelope> latest(std::size_t n) const;

  std::vector<TriggerRegistration> triggers() const;

  /// Diagnostics: trigger delivery failures and Notify firings (bounded).
  std::vector<std::string> events() const;
  void log_event(std::string line);

 private:
  friend class Engine;

  struct Appended {
    DataEnvelope envelope;
    std::vector<TriggerRegistration> triggers;
  };

  /// Assigns the id, appends, evicts and snapshots triggers atomically.
  Appended append(Payload payload, std::string media_type, std::uint64_t request_id, std::string producer);
  void add_trigger(TriggerRegistration reg);
  bool set_trigger_enabled(std::uint64_t id, bool enabled);

  static constexpr std::size_t kEventLogLimit = 256;

  const std::string key_;
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<DataEnvelope> records_;
  std::uint64_t next_id_ = 1;
  std::vector<TriggerRegistration> triggers_;
  std::deque<std::string> events_;
};

}  // namespace gateway::core
