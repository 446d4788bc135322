#include "gateway/sources/camera.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "gateway/error.hpp"

namespace gateway::sources {

std::string ppm_header(std::uint32_t width, std::uint32_t height) {
  return "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
}

namespace {

struct Rgb {
  std::uint8_t r, g, b;
};

std::optional<Rgb> parse_solid(std::string_view spec) {
  if (spec.size() != 6) return std::nullopt;
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), value, 16);
  if (ec != std::errc{} || ptr != spec.data() + spec.size()) return std::nullopt;
  return Rgb{static_cast<std::uint8_t>(value >> 16), static_cast<std::uint8_t>(value >> 8),
             static_cast<std::uint8_t>(value)};
}

std::uint8_t ramp(std::uint32_t pos, std::uint32_t span) {
  return static_cast<std::uint8_t>(span == 0 ? 0 : pos * 255u / span);
}

}  // namespace

CapturedImage capture(std::uint32_t width, std::uint32_t height, const std::string& pattern_id) {
  if (width < 1 || width > kMaxImageDimension || height < 1 || height > kMaxImageDimension)
    throw Error(Errc::BadDimensions,
                std::to_string(width) + "x" + std::to_string(height) + " outside [1, 4096]");

  std::function<Rgb(std::uint32_t, std::uint32_t)> pixel;
  if (pattern_id == "checker") {
    pixel = [](std::uint32_t x, std::uint32_t y) {
      const std::uint8_t v = (x + y) % 2 == 0 ? 0x00 : 0xFF;
      return Rgb{v, v, v};
    };
  } else if (pattern_id == "gradient") {
    pixel = [width, height](std::uint32_t x, std::uint32_t y) {
      return Rgb{ramp(x, width - 1), ramp(y, height - 1), ramp(x + y, width + height - 2)};
    };
  } else if (pattern_id.starts_with("solid:")) {
    auto color = parse_solid(std::string_view(pattern_id).substr(6));
    if (!color) throw Error(Errc::UnknownPattern, "bad solid colour in '" + pattern_id + "'");
    pixel = [c = *color](std::uint32_t, std::uint32_t) { return c; };
  } else {
    throw Error(Errc::UnknownPattern, "unknown pattern '" + pattern_id + "'");
  }

  const std::string header = ppm_header(width, height);
  CapturedImage img{width, height, {}, pattern_id};
  img.pixels.reserve(header.size() + std::size_t{3} * width * height);
  img.pixels.assign(header.begin(), header.end());
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      const Rgb p = pixel(x, y);
      img.pixels.push_back(p.r);
      img.pixels.push_back(p.g);
      img.pixels.push_back(p.b);
    }
  }
  return img;
}

std::optional<PpmView> parse_ppm(ByteView bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::optional<std::uint32_t> {
    skip_space();
    std::uint64_t v = 0;
    const std::size_t begin = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && pos - begin < 10) v = v * 10 + (bytes[pos++] - '0');
    if (pos == begin || v > 0xffffffffu) return std::nullopt;
    return static_cast<std::uint32_t>(v);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') return std::nullopt;
  pos = 2;
  auto w = number();
  auto h = number();
  auto maxval = number();
  if (!w || !h || !maxval || *w == 0 || *h == 0 || *maxval != 255) return std::nullopt;
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) return std::nullopt;
  ++pos;
  if (bytes.size() - pos < std::uint64_t{3} * *w * *h) return std::nullopt;
  return PpmView{*w, *h, pos};
}

Bytes ppm_to_bmp(ByteView ppm) {
  auto view = parse_ppm(ppm);
  if (!view) throw Error(Errc::InvalidArgument, "input is not a binary PPM image");
  const std::uint32_t w = view->width;
  const std::uint32_t h = view->height;
  const std::uint32_t row = (3 * w + 3) & ~3u;
  const std::uint32_t image_size = row * h;
  const std::uint32_t file_size = 54 + image_size;

  Bytes out;
  out.reserve(file_size);
  auto put16 = [&](std::uint16_t v) {
    out.push_back(v & 0xff);
    out.push_back(v >> 8);
  };
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
  };
  out.push_back('B');
  out.push_back('M');
  put32(file_size);
  put32(0);
  put32(54);
  put32(40);
  put32(w);
  put32(h);
  put16(1);
  put16(24);
  put32(0);
  put32(image_size);
  put32(2835);
  put32(2835);
  put32(0);
  put32(0);

  const auto pixels = ppm.subspan(view->header_size);
  for (std::uint32_t y = h; y-- > 0;) {
    const auto line = pixels.subspan(std::size_t{3} * w * y, std::size_t{3} * w);
    for (std::uint32_t x = 0; x < w; ++x) {
      out.push_back(line[3 * x + 2]);
      out.push_back(line[3 * x + 1]);
      out.push_back(line[3 * x]);
    }
    for (std::uint32_t pad = 3 * w; pad < row; ++pad) out.push_back(0);
  }
  return out;
}

core::ProviderBody camera_body(CameraSettings settings) {
  // fail at registration rather than on first shot
  (void)capture(1, 1, settings.pattern);
  if (settings.width < 1 || settings.width > kMaxImageDimension || settings.height < 1 ||
      settings.height > kMaxImageDimension)
    throw Error(Errc::BadDimensions, "camera dimensions outside [1, 4096]");
  return [settings](core::ExecutionContext&) {
    auto img = capture(settings.width, settings.height, settings.pattern);
    return core::ProviderResult{std::move(img.pixels), std::string(kPpmMediaType)};
  };
}

core::ProviderBody bitmap_convert_body() {
  return [](core::ExecutionContext& ctx) {
    const Bytes input = core::flatten(ctx.input);
    return core::ProviderResult{ppm_to_bmp(input), std::string(kBmpMediaType)};
  };
}

}  // namespace gateway::sources
