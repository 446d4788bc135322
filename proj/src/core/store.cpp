#include "gateway/core/store.hpp"

#include <algorithm>
#include <chrono>

#include "gateway/error.hpp"

namespace gateway::core {

Store::Store(std::string key, std::size_t capacity) : key_(std::move(key)), capacity_(capacity) {
  if (key_.empty()) throw Error(Errc::InvalidArgument, "store key must be nonempty");
  if (capacity_ == 0) throw Error(Errc::InvalidCapacity, "store '" + key_ + "' capacity must be positive");
}

std::size_t Store::size() const {
  std::lock_guard lk(mu_);
  return records_.size();
}

std::uint64_t Store::last_data_id() const {
  std::lock_guard lk(mu_);
  return next_id_ - 1;
}

DataEnvelope Store::retrieve(std::uint64_t data_id) const {
  std::lock_guard lk(mu_);
  // ids in records_ are contiguous, so the offset is direct
  if (!records_.empty()) {
    const std::uint64_t first = records_.front().data_id;
    if (data_id >= first && data_id < first + records_.size()) return records_[data_id - first];
  }
  throw Error(Errc::NotFound, "data_id " + std::to_string(data_id) + " not in store '" + key_ + "'");
}

std::vector<DataEnvelope> Store::latest(std::size_t n) const {
  std::lock_guard lk(mu_);
  const std::size_t count = std::min(n, records_.size());
  return {records_.end() - static_cast<std::ptrdiff_t>(count), records_.end()};
}

std::vector<TriggerRegistration> Store::triggers() const {
  std::lock_guard lk(mu_);
  return triggers_;
}

std::vector<std::string> Store::events() const {
  std::lock_guard lk(mu_);
  return {events_.begin(), events_.end()};
}

void Store::log_event(std::string line) {
  std::lock_guard lk(mu_);
  events_.push_back(std::move(line));
  while (events_.size() > kEventLogLimit) events_.pop_front();
}

Store::Appended Store::append(Payload payload, std::string media_type, std::uint64_t request_id,
                              std::string producer) {
  const auto now = std::chrono::steady_clock::now().time_since_epoch();
  std::lock_guard lk(mu_);
  DataEnvelope env;
  env.data_id = next_id_++;
  env.request_id = request_id;
  env.created_at_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(now).count();
  env.payload = std::move(payload);
  env.media_type = std::move(media_type);
  env.producer_key = std::move(producer);
  records_.push_back(env);
  while (records_.size() > capacity_) records_.pop_front();

  Appended out{std::move(env), {}};
  for (const auto& t : triggers_) {
    if (t.enabled) out.triggers.push_back(t);
  }
  return out;
}

void Store::add_trigger(TriggerRegistration reg) {
  std::lock_guard lk(mu_);
  triggers_.push_back(std::move(reg));
}

bool Store::set_trigger_enabled(std::uint64_t id, bool enabled) {
  std::lock_guard lk(mu_);
  for (auto& t : triggers_) {
    if (t.id == id) {
      t.enabled = enabled;
      return true;
    }
  }
  return false;
}

}  // namespace gateway::core
