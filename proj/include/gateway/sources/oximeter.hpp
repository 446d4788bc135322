#pragma once

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "gateway/bytes.hpp"
#include "gateway/core/engine.hpp"

namespace gateway::sources {

inline constexpr std::string_view kOximeterMediaType = "application/x-oximeter-frame";
inline constexpr std::size_t kFrameSize = 4;
inline constexpr double kMaxStreamRateHz = 100.0;

/// Wire layout: spo2, pulse_bpm, seq (big-endian u16).
struct OximeterFrame {
  std::uint8_t spo2 = 0;
  std::uint8_t pulse_bpm = 0;
  std::uint16_t seq = 0;

  friend bool operator==(const OximeterFrame&, const OximeterFrame&) = default;
};

std::array<std::uint8_t, kFrameSize> encode_frame(const OximeterFrame& f);
/// Throws MalformedFrame on wrong length or spo2 > 100.
OximeterFrame decode_frame(ByteView payload);
/// Splits a concatenation of frames. Throws MalformedFrame if the length is
/// not a multiple of the frame size or any frame is invalid.
std::vector<OximeterFrame> decode_frames(ByteView payload);

struct ConstantWave {
  int spo2 = 98;
  int pulse_bpm = 72;
};

/// Only spo2 and pulse are taken from the frames; seq is assigned on emission.
struct ScriptedWave {
  std::vector<OximeterFrame> frames;
};

/// Baseline frames, then `dip_len` frames at baseline - dip_depth, then
/// baseline frames again. Finite: lead_len + dip_len + tail_len frames.
struct HypopneaEpisode {
  int baseline = 97;
  int dip_depth = 10;
  std::size_t dip_len = 5;
  int pulse_bpm = 72;
  std::size_t lead_len = 5;
  std::size_t tail_len = 5;
};

using Waveform = std::variant<ConstantWave, ScriptedWave, HypopneaEpisode>;

struct StreamProfile {
  double rate_hz = 1.0;
  Waveform waveform = ConstantWave{};
  unsigned jitter_ms = 0;

  /// Throws ProfileInvalid.
  void validate() const;
};

/// Deterministic frame sequence for a waveform. Sequence numbers start at 0
/// and wrap at 65535.
class FrameGenerator {
 public:
  explicit FrameGenerator(Waveform waveform);

  /// nullopt once a finite waveform is exhausted.
  std::optional<OximeterFrame> next();
  std::size_t emitted() const noexcept { return index_; }

 private:
  Waveform waveform_;
  std::size_t index_ = 0;
};

/// Timer-driven push source. Each frame is stored under a fresh request,
/// mirroring independent device notifications.
class OximeterStream {
 public:
  OximeterStream(core::Engine& engine, StreamProfile profile, std::string target_store,
                 std::string producer_key = std::string(core::kExternalProducer));
  ~OximeterStream();

  OximeterStream(const OximeterStream&) = delete;
  OximeterStream& operator=(const OximeterStream&) = delete;

  /// Stops emission and returns the number of frames stored. A second call
  /// throws AlreadyStopped.
  std::size_t stop();

  std::size_t emitted() const noexcept { return emitted_.load(); }
  /// True once a finite waveform has been fully emitted.
  bool finished() const;
  bool wait_finished(std::chrono::milliseconds timeout) const;
  const std::string& target_store() const noexcept { return target_; }

 private:
  void run(std::stop_token stop);

  core::Engine& engine_;
  StreamProfile profile_;
  std::string target_;
  std::string producer_;
  std::atomic<std::size_t> emitted_{0};
  mutable std::mutex mu_;
  mutable std::condition_variable_any cv_;
  bool finished_ = false;
  bool stopped_ = false;
  std::jthread thread_;
};

/// Validates inputs, then starts emitting into `target_store`.
/// Throws UnknownStore or ProfileInvalid.
std::unique_ptr<OximeterStream> start_stream(core::Engine& engine, const StreamProfile& profile,
                                             const std::string& target_store,
                                             std::string producer_key = std::string(core::kExternalProducer));

/// Provider body that reads one frame on demand (a characteristic read
/// rather than a notification). Frames follow the profile's waveform.
core::ProviderBody oximeter_read_body(Waveform waveform);

}  // namespace gateway::sources
