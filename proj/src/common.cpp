#include "gateway/bytes.hpp"
#include "gateway/error.hpp"

namespace gateway {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::InvalidCapacity: return "InvalidCapacity";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::UnknownStore: return "UnknownStore";
    case Errc::UnknownProvider: return "UnknownProvider";
    case Errc::NotFound: return "NotFound";
    case Errc::NoProvider: return "NoProvider";
    case Errc::AllCandidatesUnavailable: return "AllCandidatesUnavailable";
    case Errc::OutputMismatch: return "OutputMismatch";
    case Errc::RuntimeStopped: return "RuntimeStopped";
    case Errc::QueueFull: return "QueueFull";
    case Errc::AlreadyRunning: return "AlreadyRunning";
    case Errc::NotRunning: return "NotRunning";
    case Errc::Cancelled: return "Cancelled";
    case Errc::ProfileInvalid: return "ProfileInvalid";
    case Errc::AlreadyStopped: return "AlreadyStopped";
    case Errc::MalformedFrame: return "MalformedFrame";
    case Errc::BadDimensions: return "BadDimensions";
    case Errc::UnknownPattern: return "UnknownPattern";
    case Errc::BackendUnreachable: return "BackendUnreachable";
    case Errc::BackendError: return "BackendError";
    case Errc::Timeout: return "Timeout";
    case Errc::NoWorkerAssigned: return "NoWorkerAssigned";
    case Errc::PollExhausted: return "PollExhausted";
    case Errc::TransferFailed: return "TransferFailed";
    case Errc::TaskFailed: return "TaskFailed";
    case Errc::UnknownTransform: return "UnknownTransform";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownReference: return "UnknownReference";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::PortInUse: return "PortInUse";
    case Errc::ScenarioFailed: return "ScenarioFailed";
    case Errc::ControlError: return "ControlError";
  }
  return "Unknown";
}

namespace {
std::string compose(Errc code, const std::string& detail) {
  std::string out(to_string(code));
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}
}  // namespace

Error::Error(Errc code, std::string detail, int status)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(std::move(detail)), status_(status) {}

std::string to_hex(ByteView bytes, std::size_t limit) {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t n = (limit == 0 || limit > bytes.size()) ? bytes.size() : limit;
  std::string out;
  out.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kDigits[bytes[i] >> 4]);
    out.push_back(kDigits[bytes[i] & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::InvalidArgument, "odd-length hex string");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]);
    const int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::InvalidArgument, "non-hex character");
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

}  // namespace gateway
