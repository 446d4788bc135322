#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stop_token>
#include <string>
#include <variant>
#include <vector>

#include "gateway/bytes.hpp"
#include "gateway/exec/runtime.hpp"

namespace gateway::core {

using exec::ProviderState;

inline constexpr std::string_view kExternalProducer = "external";
inline constexpr std::size_t kDefaultStoreCapacity = 256;

/// One unit of published data. The payload is shared and never mutated.
struct DataEnvelope {
  std::uint64_t data_id = 0;
  std::uint64_t request_id = 0;
  std::int64_t created_at_ns = 0;  // steady clock
  Payload payload;
  std::string media_type;
  std::string producer_key{kExternalProducer};
};

struct RequestContext {
  std::uint64_t request_id = 0;
  std::string origin;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

enum class InputSpec { None, Single, Batch };

using ProviderInput = std::variant<std::monostate, DataEnvelope, std::vector<DataEnvelope>>;

struct ProviderDescriptor {
  std::string key;
  std::string output_store;
  InputSpec input_spec = InputSpec::None;
  /// Overrides the runtime's default timeout when set.
  std::optional<std::chrono::milliseconds> timeout;
};

struct ProviderStatus {
  ProviderState state = ProviderState::Idle;
  std::optional<std::string> last_error;
  std::size_t pending = 0;
};

struct ProviderResult {
  Bytes payload;
  std::string media_type;
};

class Engine;

/// What a provider body sees while it runs on a worker.
struct ExecutionContext {
  const ProviderInput& input;
  const RequestContext& request;
  std::stop_token stop;
  Engine& engine;
};

using ProviderBody = std::function<ProviderResult(ExecutionContext&)>;

struct StartProvider {
  std::string provider_key;
};
/// Runs produce_data on the store, so the store's chooser picks the provider.
struct ProduceInto {
  std::string store_key;
};
struct Notify {
  std::string sink_id;
};
using TriggerAction = std::variant<StartProvider, ProduceInto, Notify>;

struct TriggerRegistration {
  std::uint64_t id = 0;
  std::string store_key;
  TriggerAction action;
  bool enabled = true;
};

using Sink = std::function<void(const DataEnvelope&, const RequestContext&)>;

/// 16 lowercase hex digits; the form used in logs, headers and the CLI.
std::string format_request_id(std::uint64_t request_id);

/// Concatenated payload bytes of whatever the provider received.
Bytes flatten(const ProviderInput& input);

std::string_view to_string(InputSpec s) noexcept;

/// Media type of the first envelope in the input, or octet-stream.
std::string input_media_type(const ProviderInput& input);

}  // namespace gateway::core
