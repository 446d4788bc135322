#include "gateway/backends/transforms.hpp"

#include <algorithm>

#include "gateway/error.hpp"
#include "gateway/sources/camera.hpp"
#include "gateway/sources/oximeter.hpp"

namespace gateway::backends {

const std::vector<std::string_view>& transform_ids() {
  static const std::vector<std::string_view> ids{kComplement, kAppendMarker, kHypopneaCount};
  return ids;
}

bool is_known_transform(std::string_view id) {
  const auto& ids = transform_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

Bytes apply_transform(std::string_view id, ByteView input) {
  if (id == kComplement) {
    Bytes out(input.begin(), input.end());
    std::size_t from = 0;
    if (auto ppm = sources::parse_ppm(input)) from = ppm->header_size;
    std::transform(out.begin() + static_cast<std::ptrdiff_t>(from), out.end(),
                   out.begin() + static_cast<std::ptrdiff_t>(from), [](std::uint8_t b) { return std::uint8_t(~b); });
    return out;
  }
  if (id == kAppendMarker) {
    Bytes out(input.begin(), input.end());
    out.insert(out.end(), kDetectionMarker.begin(), kDetectionMarker.end());
    return out;
  }
  if (id == kHypopneaCount) {
    if (input.empty()) throw Error(Errc::InvalidArgument, "empty frame batch");
    const auto frames = sources::decode_frames(input);
    const auto n = std::count_if(frames.begin(), frames.end(),
                                 [](const sources::OximeterFrame& f) { return f.spo2 < kHypopneaThreshold; });
    return to_bytes("HYPOPNEA:" + std::to_string(n));
  }
  throw Error(Errc::UnknownTransform, "unknown transform '" + std::string(id) + "'");
}

Bytes local_execute(const core::ProviderInput& input, std::string_view transform_id) {
  if (!is_known_transform(transform_id))
    throw Error(Errc::UnknownTransform, "unknown transform '" + std::string(transform_id) + "'");
  return apply_transform(transform_id, core::flatten(input));
}

std::string transform_media_type(std::string_view id, std::string_view input_media_type) {
  if (id == kHypopneaCount) return "text/plain";
  return std::string(input_media_type);
}

}  // namespace gateway::backends
