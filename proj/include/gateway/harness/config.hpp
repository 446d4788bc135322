#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gateway/backends/adapters.hpp"
#include "gateway/core/chooser.hpp"
#include "gateway/exec/runtime.hpp"
#include "gateway/sources/camera.hpp"
#include "gateway/sources/oximeter.hpp"
#include "json.hpp"

namespace gateway::harness {

enum class ProviderKind { Camera, OximeterStream, FogBus, EdgeLens, Aneka, Local, BitmapConvert };

std::string_view to_string(ProviderKind k) noexcept;
std::optional<ProviderKind> parse_provider_kind(std::string_view name);

struct StoreConfig {
  std::string key;
  std::size_t capacity = core::kDefaultStoreCapacity;
};

struct ProviderConfig {
  std::string key;
  ProviderKind kind = ProviderKind::Local;
  std::string output_store;
  /// Kind-specific settings, kept verbatim; see the typed readers below.
  nlohmann::json settings = nlohmann::json::object();
  std::optional<std::chrono::milliseconds> timeout;
};

/// Exactly one action is set.
struct TriggerConfig {
  std::string store;
  std::optional<std::string> start_provider;
  std::optional<std::string> produce;
  std::optional<std::string> notify;
};

struct PipelineConfig {
  std::vector<StoreConfig> stores;
  std::vector<ProviderConfig> providers;
  std::vector<TriggerConfig> triggers;
  std::vector<core::ChooserPolicy> choosers;
  exec::RuntimeConfig runtime;
  std::string control_socket;
  bool allow_cycle = false;

  const ProviderConfig* find_provider(std::string_view key) const;
  const StoreConfig* find_store(std::string_view key) const;
};

/// Throws ParseError on unreadable or malformed input, UnknownReference on
/// dangling keys, CycleDetected for trigger cycles unless allow_cycle.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const nlohmann::json& doc);
void validate(const PipelineConfig& config);

nlohmann::json to_json(const PipelineConfig& config);

// Typed settings readers (ParseError on bad fields).
sources::CameraSettings camera_settings(const ProviderConfig& p);
sources::StreamProfile stream_profile(const ProviderConfig& p);
/// oximeter-stream: whether `run` starts the stream (default true).
bool stream_autostart(const ProviderConfig& p);
backends::BackendEndpointConfig endpoint_settings(const ProviderConfig& p);
std::optional<backends::BatchSource> batch_source(const ProviderConfig& p);
/// local: the transform id; aneka: the task transform (default append-marker).
std::string transform_setting(const ProviderConfig& p);
core::InputSpec input_spec_for(const ProviderConfig& p);

}  // namespace gateway::harness
