#include "gateway/core/engine.hpp"

#include <random>

#include "gateway/error.hpp"

namespace gateway::core {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t random_salt() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string hex_id(std::uint64_t id) { return format_request_id(id); }

}  // namespace

Engine::Engine(exec::RuntimeConfig config) : config_(config), request_salt_(random_salt()) { config_.validate(); }

Engine::~Engine() {
  if (runtime_.running()) {
    try {
      runtime_.stop(false);
    } catch (...) {
    }
  }
}

void Engine::start() { runtime_.start(config_); }

void Engine::stop(bool drain) { runtime_.stop(drain); }

bool Engine::wait_idle(std::chrono::milliseconds timeout) const {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::unique_lock lk(mu_);
  for (;;) {
    if (busy_count_ == 0 && runtime_.in_flight() == 0) return true;
    if (std::chrono::steady_clock::now() >= deadline) return false;
    idle_cv_.wait_for(lk, std::chrono::milliseconds(2));
  }
}

// stores ---------------------------------------------------------------------

Store& Engine::register_store(const std::string& key, std::size_t capacity) {
  if (key.empty()) throw Error(Errc::InvalidArgument, "store key must be nonempty");
  if (capacity == 0) throw Error(Errc::InvalidCapacity, "store '" + key + "' capacity must be positive");
  std::lock_guard lk(stores_mu_);
  if (stores_.contains(key)) throw Error(Errc::DuplicateKey, "store '" + key + "' already registered");
  auto [it, _] = stores_.emplace(key, std::make_unique<Store>(key, capacity));
  return *it->second;
}

Store& Engine::store_ref(const std::string& key) const {
  std::lock_guard lk(stores_mu_);
  auto it = stores_.find(key);
  if (it == stores_.end()) throw Error(Errc::UnknownStore, "no store '" + key + "'");
  return *it->second;
}

bool Engine::has_store(const std::string& key) const {
  std::lock_guard lk(stores_mu_);
  return stores_.contains(key);
}

std::vector<std::string> Engine::store_keys() const {
  std::lock_guard lk(stores_mu_);
  std::vector<std::string> out;
  for (const auto& [k, _] : stores_) out.push_back(k);
  return out;
}

std::uint64_t Engine::store(const std::string& store_key, Payload payload, std::string media_type,
                            const RequestContext& ctx, std::string producer_key) {
  Store& s = store_ref(store_key);
  auto appended = s.append(std::move(payload), std::move(media_type), ctx.request_id, std::move(producer_key));
  for (const auto& t : appended.triggers) fire(t, appended.envelope, ctx);
  return appended.envelope.data_id;
}

DataEnvelope Engine::retrieve(const std::string& store_key, std::uint64_t data_id) const {
  return store_ref(store_key).retrieve(data_id);
}

std::vector<DataEnvelope> Engine::retrieve_latest(const std::string& store_key, std::size_t n) const {
  return store_ref(store_key).latest(n);
}

// providers ------------------------------------------------------------------

void Engine::register_provider(ProviderDescriptor descriptor, ProviderBody body) {
  if (descriptor.key.empty()) throw Error(Errc::InvalidArgument, "provider key must be nonempty");
  if (!body) throw Error(Errc::InvalidArgument, "provider '" + descriptor.key + "' has no body");
  if (!has_store(descriptor.output_store))
    throw Error(Errc::UnknownStore, "provider '" + descriptor.key + "' outputs to unknown store '" +
                                        descriptor.output_store + "'");
  std::lock_guard lk(mu_);
  if (providers_.contains(descriptor.key))
    throw Error(Errc::DuplicateKey, "provider '" + descriptor.key + "' already registered");
  const std::string key = descriptor.key;
  ProviderEntry entry;
  entry.descriptor = std::move(descriptor);
  entry.body = std::move(body);
  providers_.emplace(key, std::move(entry));
  provider_order_.push_back(key);
}

Engine::ProviderEntry& Engine::provider_locked(const std::string& key) {
  auto it = providers_.find(key);
  if (it == providers_.end()) throw Error(Errc::UnknownProvider, "no provider '" + key + "'");
  return it->second;
}

const Engine::ProviderEntry& Engine::provider_locked(const std::string& key) const {
  auto it = providers_.find(key);
  if (it == providers_.end()) throw Error(Errc::UnknownProvider, "no provider '" + key + "'");
  return it->second;
}

bool Engine::has_provider(const std::string& key) const {
  std::lock_guard lk(mu_);
  return providers_.contains(key);
}

ProviderDescriptor Engine::descriptor(const std::string& key) const {
  std::lock_guard lk(mu_);
  return provider_locked(key).descriptor;
}

ProviderStatus Engine::provider_state(const std::string& key) const {
  std::lock_guard lk(mu_);
  const auto& p = provider_locked(key);
  return {p.state, p.last_error, p.pending.size()};
}

std::vector<std::string> Engine::provider_keys() const {
  std::lock_guard lk(mu_);
  return provider_order_;
}

std::vector<std::string> Engine::providers_for(const std::string& store_key) const {
  std::lock_guard lk(mu_);
  std::vector<std::string> out;
  for (const auto& k : provider_order_) {
    if (providers_.at(k).descriptor.output_store == store_key) out.push_back(k);
  }
  return out;
}

// triggers -------------------------------------------------------------------

std::uint64_t Engine::attach_trigger(const std::string& store_key, TriggerAction action) {
  Store& s = store_ref(store_key);
  if (const auto* sp = std::get_if<StartProvider>(&action)) {
    if (!has_provider(sp->provider_key))
      throw Error(Errc::UnknownProvider, "trigger targets unknown provider '" + sp->provider_key + "'");
  } else if (const auto* pi = std::get_if<ProduceInto>(&action)) {
    if (!has_store(pi->store_key))
      throw Error(Errc::UnknownStore, "trigger targets unknown store '" + pi->store_key + "'");
  }
  std::uint64_t id;
  {
    std::lock_guard lk(mu_);
    id = next_trigger_id_++;
    trigger_index_.emplace(id, store_key);
  }
  s.add_trigger({id, store_key, std::move(action), true});
  return id;
}

void Engine::set_trigger_enabled(std::uint64_t trigger_id, bool enabled) {
  std::string store_key;
  {
    std::lock_guard lk(mu_);
    auto it = trigger_index_.find(trigger_id);
    if (it == trigger_index_.end()) throw Error(Errc::NotFound, "no trigger " + std::to_string(trigger_id));
    store_key = it->second;
  }
  store_ref(store_key).set_trigger_enabled(trigger_id, enabled);
}

void Engine::register_sink(const std::string& sink_id, Sink sink) {
  std::lock_guard lk(mu_);
  sinks_[sink_id] = std::move(sink);
}

void Engine::fire(const TriggerRegistration& trigger, const DataEnvelope& envelope, const RequestContext& ctx) {
  Store& s = store_ref(trigger.store_key);
  auto delivery_failed = [&](const std::string& target, const std::exception& e) {
    s.log_event("delivery-failed trigger=" + std::to_string(trigger.id) + " target=" + target +
                " data_id=" + std::to_string(envelope.data_id) + " request=" + hex_id(ctx.request_id) + ": " +
                e.what());
  };
  std::visit(overloaded{
                 [&](const StartProvider& a) {
                   try {
                     run_provider(a.provider_key, envelope, ctx);
                   } catch (const std::exception& e) {
                     delivery_failed(a.provider_key, e);
                   }
                 },
                 [&](const ProduceInto& a) {
                   try {
                     produce_data(a.store_key, envelope, ctx);
                   } catch (const std::exception& e) {
                     delivery_failed(a.store_key, e);
                   }
                 },
                 [&](const Notify& a) {
                   Sink sink;
                   {
                     std::lock_guard lk(mu_);
                     if (auto it = sinks_.find(a.sink_id); it != sinks_.end()) sink = it->second;
                   }
                   s.log_event("notify sink=" + a.sink_id + " data_id=" + std::to_string(envelope.data_id));
                   if (!sink) return;
                   try {
                     sink(envelope, ctx);
                   } catch (const std::exception& e) {
                     delivery_failed("sink:" + a.sink_id, e);
                   }
                 },
             },
             trigger.action);
}

// choosers -------------------------------------------------------------------

void Engine::set_chooser(ChooserPolicy policy) {
  if (!has_store(policy.store_key)) throw Error(Errc::UnknownStore, "no store '" + policy.store_key + "'");
  if (policy.candidates.empty())
    throw Error(Errc::InvalidArgument, "chooser for '" + policy.store_key + "' has no candidates");
  std::lock_guard lk(mu_);
  for (const auto& c : policy.candidates) {
    const auto& p = provider_locked(c);
    if (p.descriptor.output_store != policy.store_key)
      throw Error(Errc::OutputMismatch, "candidate '" + c + "' outputs to '" + p.descriptor.output_store +
                                            "', not '" + policy.store_key + "'");
  }
  const std::string key = policy.store_key;
  choosers_.insert_or_assign(key, Chooser(std::move(policy)));
}

std::optional<ChooserPolicy> Engine::chooser(const std::string& store_key) const {
  std::lock_guard lk(mu_);
  if (auto it = choosers_.find(store_key); it != choosers_.end()) return it->second.policy();
  return std::nullopt;
}

// execution ------------------------------------------------------------------

RequestContext Engine::new_request(std::string origin) {
  // odd multiplier makes the map a bijection on 64-bit counters
  const std::uint64_t n = ++request_counter_;
  return {(n * 0x9E3779B97F4A7C15ULL) ^ request_salt_, std::move(origin), std::nullopt};
}

ProviderInput Engine::normalize(const ProviderEntry& p, ProviderInput input) const {
  if (p.descriptor.input_spec == InputSpec::Batch) {
    if (auto* env = std::get_if<DataEnvelope>(&input)) return std::vector<DataEnvelope>{std::move(*env)};
  } else if (p.descriptor.input_spec == InputSpec::Single) {
    if (auto* batch = std::get_if<std::vector<DataEnvelope>>(&input)) {
      if (batch->size() != 1)
        throw Error(Errc::InvalidArgument, "provider '" + p.descriptor.key + "' takes a single envelope");
      return DataEnvelope(std::move(batch->front()));
    }
  }
  return input;
}

std::uint64_t Engine::run_provider(const std::string& provider_key, ProviderInput input,
                                   std::optional<RequestContext> ctx) {
  RequestContext c = ctx ? std::move(*ctx) : new_request("run_provider:" + provider_key);
  std::lock_guard lk(mu_);
  auto& p = provider_locked(provider_key);
  return start_or_queue_locked(p, normalize(p, std::move(input)), std::move(c));
}

std::uint64_t Engine::produce_data(const std::string& store_key, ProviderInput input,
                                   std::optional<RequestContext> ctx) {
  if (!has_store(store_key)) throw Error(Errc::UnknownStore, "no store '" + store_key + "'");
  RequestContext c = ctx ? std::move(*ctx) : new_request("produce_data:" + store_key);

  std::lock_guard lk(mu_);
  std::vector<std::string> candidates;
  for (const auto& k : provider_order_) {
    if (providers_.at(k).descriptor.output_store == store_key) candidates.push_back(k);
  }
  if (candidates.empty()) throw Error(Errc::NoProvider, "no provider produces '" + store_key + "'");

  std::string chosen = candidates.front();
  if (candidates.size() > 1) {
    // without an explicit policy: registration order, busy-skip, retry failed
    Chooser fallback(ChooserPolicy{store_key, candidates});
    auto it = choosers_.find(store_key);
    Chooser& chooser = it != choosers_.end() ? it->second : fallback;
    StateMap states;
    for (const auto& k : chooser.policy().candidates) {
      const auto& p = providers_.at(k);
      states.emplace(k, p.busy ? ProviderState::Running : p.state);
    }
    chosen = chooser.choose(states);
  }
  auto& p = providers_.at(chosen);
  return start_or_queue_locked(p, normalize(p, std::move(input)), std::move(c));
}

std::uint64_t Engine::start_or_queue_locked(ProviderEntry& p, ProviderInput input, RequestContext ctx) {
  const std::uint64_t rid = ctx.request_id;
  if (p.busy) {
    if (p.pending.size() >= config_.pending_queue_depth)
      throw Error(Errc::QueueFull, "pending queue of provider '" + p.descriptor.key + "' is full");
    p.pending.push_back({std::move(input), std::move(ctx)});
    return rid;
  }
  dispatch_locked(p, {std::move(input), std::move(ctx)});
  return rid;
}

void Engine::dispatch_locked(ProviderEntry& p, PendingRun run) {
  auto shared_run = std::make_shared<PendingRun>(std::move(run));
  auto result = std::make_shared<std::optional<ProviderResult>>();
  const std::string key = p.descriptor.key;

  exec::Job job;
  job.provider_key = key;
  job.request_id = shared_run->ctx.request_id;
  job.timeout = p.descriptor.timeout;
  job.pre_hook = [shared_run] {
    if (shared_run->ctx.deadline && std::chrono::steady_clock::now() > *shared_run->ctx.deadline)
      throw Error(Errc::Timeout, "request deadline passed before start");
  };
  job.body = [this, body = p.body, shared_run, result](std::stop_token stop) {
    ExecutionContext ec{shared_run->input, shared_run->ctx, std::move(stop), *this};
    *result = body(ec);
  };
  job.post_hook = [this, key, shared_run, result](const exec::Outcome& outcome) {
    on_finished(key, shared_run->ctx, result, outcome);
  };

  runtime_.submit(std::move(job));
  p.busy = true;
  p.state = ProviderState::Running;
  ++busy_count_;
}

void Engine::on_finished(const std::string& key, const RequestContext& ctx,
                         const std::shared_ptr<std::optional<ProviderResult>>& result,
                         const exec::Outcome& outcome) {
  std::optional<ProviderResult> output;
  std::string output_store;
  std::vector<std::string> dropped;
  {
    std::lock_guard lk(mu_);
    auto& p = provider_locked(key);
    output_store = p.descriptor.output_store;
    if (outcome.status == exec::TicketStatus::Done && result->has_value()) {
      p.state = ProviderState::Idle;
      p.last_error.reset();
      output = std::move(**result);
    } else {
      p.state = ProviderState::Failed;
      p.last_error = outcome.error.empty() ? std::string(exec::to_string(outcome.status)) : outcome.error;
    }
    p.busy = false;
    --busy_count_;
    while (!p.pending.empty()) {
      PendingRun next = std::move(p.pending.front());
      p.pending.pop_front();
      const auto rid = next.ctx.request_id;
      try {
        dispatch_locked(p, std::move(next));
        break;
      } catch (const std::exception& e) {
        dropped.push_back("dropped pending run provider=" + key + " request=" + hex_id(rid) + ": " + e.what());
      }
    }
  }
  Store& out = store_ref(output_store);
  for (auto& line : dropped) out.log_event(std::move(line));
  if (output) store(output_store, Payload(std::move(output->payload)), std::move(output->media_type), ctx, key);
  idle_cv_.notify_all();
}

}  // namespace gateway::core
