#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stop_token>
#include <string>

#include "gateway/backends/file_store.hpp"
#include "gateway/bytes.hpp"
#include "gateway/core/types.hpp"

namespace gateway::backends {

using std::chrono::milliseconds;

struct BackendEndpointConfig {
  std::string master_url;
  milliseconds poll_interval{250};
  std::size_t poll_limit = 120;
  /// Aneka only.
  FileStoreConfig transfer;
  milliseconds connect_timeout{5000};
  milliseconds read_timeout{30000};

  void validate() const;
};

inline constexpr std::string_view kRequestIdHeader = "X-Request-Id";

/// Single proxied request: POST {master}/analyze. The master forwards to a
/// worker; the client never sees the worker.
Bytes fogbus_analyze(ByteView payload, std::uint64_t request_id, const BackendEndpointConfig& cfg);

/// GET {master}/worker, POST {worker}/upload, POST {worker}/execute/{job},
/// then GET {worker}/result/{job} until 200 (404 means pending).
Bytes edgelens_detect(ByteView image, std::uint64_t request_id, const BackendEndpointConfig& cfg,
                      std::stop_token stop = {});

/// put in/{request_id} on the file store, POST {master}/tasks, poll
/// GET {master}/tasks/{id} until Completed, then get result_ref.
Bytes aneka_detect(ByteView image, std::uint64_t request_id, const BackendEndpointConfig& cfg,
                   std::string_view transform_id, std::stop_token stop = {});

/// Where a batch-input provider takes its input from when started without one.
struct BatchSource {
  std::string store_key;
  std::size_t window = 64;
};

core::ProviderBody fogbus_body(BackendEndpointConfig cfg, std::optional<BatchSource> batch = std::nullopt);
core::ProviderBody edgelens_body(BackendEndpointConfig cfg);
core::ProviderBody aneka_body(BackendEndpointConfig cfg, std::string transform_id);
core::ProviderBody local_body(std::string transform_id, std::optional<BatchSource> batch = std::nullopt);

}  // namespace gateway::backends
