#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gateway/core/engine.hpp"
#include "gateway/harness/config.hpp"
#include "gateway/sources/oximeter.hpp"
#include "json.hpp"

namespace gateway::harness {

/// Media type guessed from content: PPM images are recognised, anything
/// else is application/octet-stream.
std::string sniff_media_type(ByteView bytes);

/// An engine wired from a PipelineConfig plus the control operations the
/// daemon serves.
///
/// Control requests are {"op": ..., "args": {...}}; responses carry
/// "ok": true, or "ok": false with "error" (an Errc name) and "message".
/// Ops: produce {store, input_hex?, media_type?}, run {provider, input_hex?,
/// media_type?}, tail {store, n}, status, shutdown.
class Gateway {
 public:
  /// Registers everything; throws on the first engine error.
  explicit Gateway(PipelineConfig config);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Starts the runtime and every autostart stream.
  void start();
  void stop(bool drain = true);

  core::Engine& engine() noexcept { return *engine_; }
  const PipelineConfig& config() const noexcept { return config_; }

  nlohmann::json handle(const nlohmann::json& request);

  /// Called once for a shutdown request, after the response is built.
  void on_shutdown(std::function<void()> fn);
  /// Receives one line per notify-sink delivery.
  void on_notify(std::function<void(const std::string&)> fn);

 private:
  nlohmann::json dispatch(const std::string& op, const nlohmann::json& args);

  PipelineConfig config_;
  std::unique_ptr<core::Engine> engine_;
  std::vector<std::pair<std::string, sources::StreamProfile>> autostart_;
  std::vector<std::unique_ptr<sources::OximeterStream>> streams_;
  std::mutex mu_;
  std::function<void()> shutdown_;
  std::function<void(const std::string&)> notify_;
  bool started_ = false;
};

}  // namespace gateway::harness
