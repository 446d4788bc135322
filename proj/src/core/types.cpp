#include "gateway/core/types.hpp"

#include <cstdio>

namespace gateway::core {

Bytes flatten(const ProviderInput& input) {
  Bytes out;
  if (const auto* env = std::get_if<DataEnvelope>(&input)) {
    out.assign(env->payload.bytes().begin(), env->payload.bytes().end());
  } else if (const auto* batch = std::get_if<std::vector<DataEnvelope>>(&input)) {
    for (const auto& e : *batch) out.insert(out.end(), e.payload.bytes().begin(), e.payload.bytes().end());
  }
  return out;
}

std::string format_request_id(std::uint64_t request_id) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(request_id));
  return buf;
}

std::string input_media_type(const ProviderInput& input) {
  if (const auto* env = std::get_if<DataEnvelope>(&input)) return env->media_type;
  if (const auto* batch = std::get_if<std::vector<DataEnvelope>>(&input); batch && !batch->empty())
    return batch->front().media_type;
  return "application/octet-stream";
}

std::string_view to_string(InputSpec s) noexcept {
  switch (s) {
    case InputSpec::None: return "none";
    case InputSpec::Single: return "single";
    case InputSpec::Batch: return "batch";
  }
  return "?";
}

}  // namespace gateway::core
