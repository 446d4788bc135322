#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gateway/bytes.hpp"
#include "gateway/core/types.hpp"

namespace gateway::backends {

/// Frames with spo2 strictly below this count as desaturated.
inline constexpr int kHypopneaThreshold = 92;
inline constexpr std::string_view kDetectionMarker = "DETECTED";

/// Transform ids shared by local execution and the mock backends.
inline constexpr std::string_view kComplement = "complement";
inline constexpr std::string_view kAppendMarker = "append-marker";
inline constexpr std::string_view kHypopneaCount = "hypopnea-count";

const std::vector<std::string_view>& transform_ids();
bool is_known_transform(std::string_view id);

/// complement: bitwise NOT of every byte; a P6 image keeps its header and
///   only the pixel bytes are inverted.
/// append-marker: input followed by "DETECTED".
/// hypopnea-count: input is a batch of oximeter frames; output is
///   "HYPOPNEA:<n>" with n the number of frames below the threshold.
///   Empty or malformed input throws InvalidArgument / MalformedFrame.
/// Unknown ids throw UnknownTransform.
Bytes apply_transform(std::string_view id, ByteView input);

/// Runs `transform_id` in-process on the flattened provider input.
Bytes local_execute(const core::ProviderInput& input, std::string_view transform_id);

/// Media type of a transform's output given the input's media type.
std::string transform_media_type(std::string_view id, std::string_view input_media_type);

}  // namespace gateway::backends
