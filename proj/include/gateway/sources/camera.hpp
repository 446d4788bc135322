#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gateway/bytes.hpp"
#include "gateway/core/types.hpp"

namespace gateway::sources {

inline constexpr std::string_view kPpmMediaType = "image/x-portable-pixmap";
inline constexpr std::string_view kBmpMediaType = "image/bmp";
inline constexpr std::uint32_t kMaxImageDimension = 4096;

struct CapturedImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  /// Complete binary PPM (P6) file: header followed by RGB triplets.
  Bytes pixels;
  std::string pattern_id;
};

/// "P6\n<w> <h>\n255\n"
std::string ppm_header(std::uint32_t width, std::uint32_t height);

/// Deterministic test image. Patterns: "checker" (1-pixel cells, black at
/// even x+y), "gradient", "solid:RRGGBB". Throws BadDimensions or
/// UnknownPattern.
CapturedImage capture(std::uint32_t width, std::uint32_t height, const std::string& pattern_id);

struct PpmView {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::size_t header_size = 0;
};

/// Parses a binary 8-bit PPM header; nullopt if `bytes` is not one or the
/// pixel data is short.
std::optional<PpmView> parse_ppm(ByteView bytes);

/// 24-bit uncompressed BMP from a P6 image. Throws InvalidArgument when the
/// input is not a PPM.
Bytes ppm_to_bmp(ByteView ppm);

struct CameraSettings {
  std::uint32_t width = 64;
  std::uint32_t height = 48;
  std::string pattern = "checker";
};

/// Provider body taking a photo on every execution.
core::ProviderBody camera_body(CameraSettings settings);

/// Provider body converting the input image bytes to a displayable bitmap.
core::ProviderBody bitmap_convert_body();

}  // namespace gateway::sources
