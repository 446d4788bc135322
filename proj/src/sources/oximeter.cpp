#include "gateway/sources/oximeter.hpp"

#include <cmath>
#include <random>

#include "gateway/error.hpp"

namespace gateway::sources {

std::array<std::uint8_t, kFrameSize> encode_frame(const OximeterFrame& f) {
  return {f.spo2, f.pulse_bpm, static_cast<std::uint8_t>(f.seq >> 8), static_cast<std::uint8_t>(f.seq & 0xff)};
}

OximeterFrame decode_frame(ByteView payload) {
  if (payload.size() != kFrameSize)
    throw Error(Errc::MalformedFrame, "frame must be 4 bytes, got " + std::to_string(payload.size()));
  if (payload[0] > 100) throw Error(Errc::MalformedFrame, "spo2 " + std::to_string(payload[0]) + " > 100");
  return {payload[0], payload[1], static_cast<std::uint16_t>(payload[2] << 8 | payload[3])};
}

std::vector<OximeterFrame> decode_frames(ByteView payload) {
  if (payload.size() % kFrameSize != 0)
    throw Error(Errc::MalformedFrame, "batch length " + std::to_string(payload.size()) + " is not a multiple of 4");
  std::vector<OximeterFrame> out;
  out.reserve(payload.size() / kFrameSize);
  for (std::size_t i = 0; i < payload.size(); i += kFrameSize) out.push_back(decode_frame(payload.subspan(i, kFrameSize)));
  return out;
}

namespace {

void check_vitals(int spo2, int pulse, const char* what) {
  if (spo2 < 0 || spo2 > 100)
    throw Error(Errc::ProfileInvalid, std::string(what) + ": spo2 " + std::to_string(spo2) + " outside [0,100]");
  if (pulse < 0 || pulse > 255)
    throw Error(Errc::ProfileInvalid, std::string(what) + ": pulse " + std::to_string(pulse) + " outside [0,255]");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void StreamProfile::validate() const {
  if (!std::isfinite(rate_hz) || rate_hz <= 0.0 || rate_hz > kMaxStreamRateHz)
    throw Error(Errc::ProfileInvalid, "rate_hz must be in (0, 100]");
  std::visit(overloaded{
                 [](const ConstantWave& w) { check_vitals(w.spo2, w.pulse_bpm, "constant"); },
                 [](const ScriptedWave& w) {
                   if (w.frames.empty()) throw Error(Errc::ProfileInvalid, "scripted waveform has no frames");
                   for (const auto& f : w.frames) check_vitals(f.spo2, f.pulse_bpm, "scripted");
                 },
                 [](const HypopneaEpisode& w) {
                   check_vitals(w.baseline, w.pulse_bpm, "hypopnea_episode");
                   if (w.dip_depth < 0 || w.dip_depth > w.baseline)
                     throw Error(Errc::ProfileInvalid, "dip_depth must be in [0, baseline]");
                   if (w.dip_len == 0) throw Error(Errc::ProfileInvalid, "dip_len must be positive");
                 },
             },
             waveform);
}

FrameGenerator::FrameGenerator(Waveform waveform) : waveform_(std::move(waveform)) {}

std::optional<OximeterFrame> FrameGenerator::next() {
  const std::size_t i = index_;
  const auto seq = static_cast<std::uint16_t>(i & 0xffff);
  std::optional<OximeterFrame> out = std::visit(
      overloaded{
          [&](const ConstantWave& w) -> std::optional<OximeterFrame> {
            return OximeterFrame{static_cast<std::uint8_t>(w.spo2), static_cast<std::uint8_t>(w.pulse_bpm), seq};
          },
          [&](const ScriptedWave& w) -> std::optional<OximeterFrame> {
            if (i >= w.frames.size()) return std::nullopt;
            return OximeterFrame{w.frames[i].spo2, w.frames[i].pulse_bpm, seq};
          },
          [&](const HypopneaEpisode& w) -> std::optional<OximeterFrame> {
            if (i >= w.lead_len + w.dip_len + w.tail_len) return std::nullopt;
            const bool dipped = i >= w.lead_len && i < w.lead_len + w.dip_len;
            const int spo2 = dipped ? w.baseline - w.dip_depth : w.baseline;
            return OximeterFrame{static_cast<std::uint8_t>(spo2), static_cast<std::uint8_t>(w.pulse_bpm), seq};
          },
      },
      waveform_);
  if (out) ++index_;
  return out;
}

// OximeterStream ------------------------------------------------------------

OximeterStream::OximeterStream(core::Engine& engine, StreamProfile profile, std::string target_store,
                               std::string producer_key)
    : engine_(engine),
      profile_(std::move(profile)),
      target_(std::move(target_store)),
      producer_(std::move(producer_key)),
      thread_([this](std::stop_token st) { run(st); }) {}

OximeterStream::~OximeterStream() {
  thread_.request_stop();
  cv_.notify_all();
}

void OximeterStream::run(std::stop_token stop) {
  using Clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / profile_.rate_hz));
  std::mt19937 rng(std::random_device{}());
  std::uniform_int_distribution<unsigned> jitter(0, profile_.jitter_ms);

  FrameGenerator gen(profile_.waveform);
  auto next_at = Clock::now();
  while (!stop.stop_requested()) {
    auto frame = gen.next();
    if (!frame) break;
    const auto bytes = encode_frame(*frame);
    try {
      engine_.store(target_, Payload(Bytes(bytes.begin(), bytes.end())), std::string(kOximeterMediaType),
                    engine_.new_request("source:oximeter:" + target_), producer_);
      ++emitted_;
    } catch (const Error&) {
      // store vanished or trigger failure; keep the stream alive
    }
    next_at += period;
    const auto wake = next_at + std::chrono::milliseconds(profile_.jitter_ms ? jitter(rng) : 0);
    std::unique_lock lk(mu_);
    cv_.wait_until(lk, stop, wake, [] { return false; });
  }
  {
    std::lock_guard lk(mu_);
    finished_ = true;
  }
  cv_.notify_all();
}

std::size_t OximeterStream::stop() {
  {
    std::lock_guard lk(mu_);
    if (stopped_) throw Error(Errc::AlreadyStopped, "stream on '" + target_ + "' already stopped");
    stopped_ = true;
  }
  thread_.request_stop();
  if (thread_.joinable()) thread_.join();
  return emitted_.load();
}

bool OximeterStream::finished() const {
  std::lock_guard lk(mu_);
  return finished_;
}

bool OximeterStream::wait_finished(std::chrono::milliseconds timeout) const {
  std::unique_lock lk(mu_);
  return cv_.wait_for(lk, timeout, [&] { return finished_; });
}

std::unique_ptr<OximeterStream> start_stream(core::Engine& engine, const StreamProfile& profile,
                                             const std::string& target_store, std::string producer_key) {
  if (!engine.has_store(target_store)) throw Error(Errc::UnknownStore, "no store '" + target_store + "'");
  profile.validate();
  return std::make_unique<OximeterStream>(engine, profile, target_store, std::move(producer_key));
}

core::ProviderBody oximeter_read_body(Waveform waveform) {
  struct State {
    explicit State(Waveform w) : gen(std::move(w)) {}
    std::mutex mu;
    FrameGenerator gen;
  };
  auto state = std::make_shared<State>(std::move(waveform));
  return [state](core::ExecutionContext&) {
    std::lock_guard lk(state->mu);
    auto frame = state->gen.next();
    if (!frame) throw Error(Errc::NotFound, "waveform exhausted");
    const auto bytes = encode_frame(*frame);
    return core::ProviderResult{Bytes(bytes.begin(), bytes.end()), std::string(kOximeterMediaType)};
  };
}

}  // namespace gateway::sources
