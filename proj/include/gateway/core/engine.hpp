#pragma once

#include <atomic>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gateway/core/chooser.hpp"
#include "gateway/core/store.hpp"
#include "gateway/core/types.hpp"
#include "gateway/exec/runtime.hpp"

namespace gateway::core {

/// Coordinates stores, providers, triggers and choosers.
///
/// Storing an envelope fires every enabled trigger of the store, in
/// registration order, on the calling thread and outside any store lock.
/// Providers run on the owned execution runtime; a provider executes one
/// request at a time and further requests wait in its pending queue.
class Engine {
 public:
  explicit Engine(exec::RuntimeConfig config = {});
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // lifecycle (forwards to the runtime)
  void start();
  void stop(bool drain);
  bool running() const { return runtime_.running(); }
  exec::Runtime& runtime() noexcept { return runtime_; }
  const exec::RuntimeConfig& config() const noexcept { return config_; }

  /// Waits until no ticket is outstanding and no provider is busy.
  bool wait_idle(std::chrono::milliseconds timeout) const;

  // stores
  Store& register_store(const std::string& key, std::size_t capacity = kDefaultStoreCapacity);
  Store& store_ref(const std::string& key) const;
  bool has_store(const std::string& key) const;
  std::vector<std::string> store_keys() const;

  std::uint64_t store(const std::string& store_key, Payload payload, std::string media_type,
                      const RequestContext& ctx, std::string producer_key = std::string(kExternalProducer));
  DataEnvelope retrieve(const std::string& store_key, std::uint64_t data_id) const;
  std::vector<DataEnvelope> retrieve_latest(const std::string& store_key, std::size_t n) const;

  // providers
  void register_provider(ProviderDescriptor descriptor, ProviderBody body);
  bool has_provider(const std::string& key) const;
  ProviderDescriptor descriptor(const std::string& key) const;
  ProviderStatus provider_state(const std::string& key) const;
  std::vector<std::string> provider_keys() const;
  /// Providers whose output store is `store_key`, in registration order.
  std::vector<std::string> providers_for(const std::string& store_key) const;

  // triggers and sinks
  std::uint64_t attach_trigger(const std::string& store_key, TriggerAction action);
  void set_trigger_enabled(std::uint64_t trigger_id, bool enabled);
  void register_sink(const std::string& sink_id, Sink sink);

  // arbitration
  void set_chooser(ChooserPolicy policy);
  std::optional<ChooserPolicy> chooser(const std::string& store_key) const;

  // execution
  RequestContext new_request(std::string origin);
  std::uint64_t run_provider(const std::string& provider_key, ProviderInput input = {},
                             std::optional<RequestContext> ctx = std::nullopt);
  std::uint64_t produce_data(const std::string& store_key, ProviderInput input = {},
                             std::optional<RequestContext> ctx = std::nullopt);

 private:
  struct PendingRun {
    ProviderInput input;
    RequestContext ctx;
  };

  struct ProviderEntry {
    ProviderDescriptor descriptor;
    ProviderBody body;
    ProviderState state = ProviderState::Idle;
    std::optional<std::string> last_error;
    bool busy = false;
    std::deque<PendingRun> pending;
  };

  ProviderEntry& provider_locked(const std::string& key);
  const ProviderEntry& provider_locked(const std::string& key) const;
  std::uint64_t start_or_queue_locked(ProviderEntry& p, ProviderInput input, RequestContext ctx);
  void dispatch_locked(ProviderEntry& p, PendingRun run);
  void on_finished(const std::string& key, const RequestContext& ctx,
                   const std::shared_ptr<std::optional<ProviderResult>>& result, const exec::Outcome& outcome);
  void fire(const TriggerRegistration& trigger, const DataEnvelope& envelope, const RequestContext& ctx);
  ProviderInput normalize(const ProviderEntry& p, ProviderInput input) const;

  exec::RuntimeConfig config_;
  exec::Runtime runtime_;

  mutable std::mutex stores_mu_;
  std::map<std::string, std::unique_ptr<Store>, std::less<>> stores_;

  mutable std::mutex mu_;
  mutable std::condition_variable idle_cv_;
  std::map<std::string, ProviderEntry, std::less<>> providers_;
  std::vector<std::string> provider_order_;
  std::map<std::string, Chooser, std::less<>> choosers_;
  std::map<std::string, Sink, std::less<>> sinks_;
  std::map<std::uint64_t, std::string> trigger_index_;  // trigger id -> store key
  std::uint64_t next_trigger_id_ = 1;
  std::size_t busy_count_ = 0;

  std::atomic<std::uint64_t> request_counter_{0};
  const std::uint64_t request_salt_;
};

}  // namespace gateway::core
