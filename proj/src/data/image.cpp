// Copyright 2026 The NRTW Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "nrtw/data/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include "json.hpp"

#include "nrtw/util/bytes.hpp"

namespace nrtw {
namespace {

constexpr std::string_view kImageMagic = "NRTW-IMG v1";

}  // namespace

Image make_image(std::int64_t height, std::int64_t width, float fill) {
  require(height > 0 && width > 0, ErrorCode::kInvalidArgument,
          "image extent must be positive, got " + std::to_string(height) + "x" +
              std::to_string(width));
  return Image(Shape{1, 1, height, width}, fill);
}

void require_image(const Tensor& image, const std::string& what) {
  const Shape& s = image.shape();
  require(s.n == 1 && s.c == 1 && s.h > 0 && s.w > 0, ErrorCode::kShapeMismatch,
          what + ": expected a (1, 1, H, W) image, got " + s.str());
}

std::string encode_image(const Image& image, const Provenance& provenance) {
  require_image(image, "encode_image");
  nlohmann::json header = {
      {"format", "NRTW-IMG"},
      {"version", 1},
      {"height", image.shape().h},
      {"width", image.shape().w},
      {"units", "HU"},
      {"dtype", "float32-le"},
      {"provenance", provenance},
  };
  std::string out(kImageMagic);
  out += '\n';
  out += header.dump();
  out += '\n';
  util::append_f32_le(out, image.data());
  return out;
}

ImageFile decode_image(std::string_view bytes) {
  const std::size_t magic_end = bytes.find('\n');
  if (magic_end == std::string_view::npos || bytes.substr(0, magic_end) != kImageMagic) {
    fail(ErrorCode::kFormat, "not an NRTW-IMG v1 file (bad magic line)");
  }
  const std::size_t header_end = bytes.find('\n', magic_end + 1);
  if (header_end == std::string_view::npos) fail(ErrorCode::kFormat, "NRTW-IMG: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(magic_end + 1, header_end - magic_end - 1));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("NRTW-IMG: malformed header: ") + e.what());
  }
  ImageFile file;
  try {
    require(header.at("format") == "NRTW-IMG" && header.at("version") == 1, ErrorCode::kFormat,
            "NRTW-IMG: unsupported format/version");
    require(header.at("dtype") == "float32-le", ErrorCode::kFormat, "NRTW-IMG: unsupported dtype");
    const auto h = header.at("height").get<std::int64_t>();
    const auto w = header.at("width").get<std::int64_t>();
    require(h > 0 && w > 0, ErrorCode::kFormat, "NRTW-IMG: non-positive extent");
    file.provenance = header.value("provenance", Provenance{});
    file.image = make_image(h, w);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("NRTW-IMG: bad header field: ") + e.what());
  }
  const std::size_t payload = header_end + 1;
  const std::size_t expected = static_cast<std::size_t>(file.image.numel()) * 4;
  require(bytes.size() - payload == expected, ErrorCode::kFormat,
          "NRTW-IMG: payload has " + std::to_string(bytes.size() - payload) + " bytes, expected " +
              std::to_string(expected));
  util::read_f32_le(bytes, payload, file.image.data());
  return file;
}

void write_image(const std::filesystem::path& path, const Image& image,
                 const Provenance& provenance) {
  util::write_file_atomic(path, encode_image(image, provenance));
}

ImageFile read_image(const std::filesystem::path& path) {
  return decode_image(util::read_file(path));
}

std::vector<std::uint8_t> window_to_bytes(const Image& image, double window_low,
                                          double window_high) {
  require_image(image, "window_to_bytes");
  require(std::isfinite(window_low) && std::isfinite(window_high) && window_low < window_high,
          ErrorCode::kInvalidArgument, "window: low must be strictly below high");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(image.numel()));
  const double span = window_high - window_low;
  for (std::int64_t i = 0; i < image.numel(); ++i) {
    const double level = std::clamp((image[i] - window_low) / span * 255.0, 0.0, 255.0);
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::round(level));
  }
  return out;
}

std::string encode_png_gray8(const std::vector<std::uint8_t>& pixels, std::int64_t height,
                             std::int64_t width) {
  require(height > 0 && width > 0 &&
              static_cast<std::int64_t>(pixels.size()) == height * width,
          ErrorCode::kInvalidArgument, "png: pixel buffer does not match extent");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    fail(ErrorCode::kIo, std::string("png: sizing failed: ") + img.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    fail(ErrorCode::kIo, std::string("png: encoding failed: ") + img.message);
  }
  out.resize(size);
  png_image_free(&img);
  return out;
}

Image hu_to_unit(const Image& hu) {
  Image out(hu.shape());
  const double span = kHuMax - kHuMin;
  for (std::int64_t i = 0; i < hu.numel(); ++i) {
    out[i] = static_cast<float>((hu[i] - kHuMin) / span);
  }
  return out;
}

// Written with the same float helpers a graph uses, so an in-graph HU
// conversion reproduces it bit for bit.
Image unit_to_hu(const Image& unit) {
  return add(scaled(unit, static_cast<float>(kHuMax - kHuMin)),
             Image(unit.shape(), static_cast<float>(kHuMin)));
}

}  // namespace nrtw
