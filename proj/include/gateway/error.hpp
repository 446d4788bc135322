#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gateway {

enum class Errc {
  // engine
  DuplicateKey,
  InvalidCapacity,
  InvalidArgument,
  UnknownStore,
  UnknownProvider,
  NotFound,
  NoProvider,
  AllCandidatesUnavailable,
  OutputMismatch,
  // runtime
  RuntimeStopped,
  QueueFull,
  AlreadyRunning,
  NotRunning,
  Cancelled,
  // sources
  ProfileInvalid,
  AlreadyStopped,
  MalformedFrame,
  BadDimensions,
  UnknownPattern,
  // backends
  BackendUnreachable,
  BackendError,
  Timeout,
  NoWorkerAssigned,
  PollExhausted,
  TransferFailed,
  TaskFailed,
  UnknownTransform,
  // harness
  ParseError,
  UnknownReference,
  CycleDetected,
  PortInUse,
  ScenarioFailed,
  ControlError,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library. The code is stable and is what
/// callers (and the control protocol) switch on; the detail is free text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail, int status = 0);

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  /// HTTP status for BackendError, 0 otherwise.
  int status() const noexcept { return status_; }

 private:
  Errc code_;
  std::string detail_;
  int status_;
};

}  // namespace gateway
