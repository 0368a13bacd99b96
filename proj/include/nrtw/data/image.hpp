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
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nrtw/core/tensor.hpp"

namespace nrtw {

/// A single-slice HU image stored as a (1, 1, H, W) tensor.
using Image = Tensor;

inline constexpr double kHuMin = -1024.0;
inline constexpr double kHuMax = 3071.0;

Image make_image(std::int64_t height, std::int64_t width, float fill = 0.0f);
/// Throws kShapeMismatch unless `image` is (1, 1, H, W) with H, W > 0.
void require_image(const Tensor& image, const std::string& what);

/// Free-form string provenance stored in the image header.
using Provenance = std::map<std::string, std::string>;

struct ImageFile {
  Image image;
  Provenance provenance;
};

/// NRTW-IMG v1: the line "NRTW-IMG v1", one line of JSON header
/// {format, version, height, width, units, dtype, provenance}, then
/// height*width little-endian float32 values in row-major order.
std::string encode_image(const Image& image, const Provenance& provenance = {});
ImageFile decode_image(std::string_view bytes);

void write_image(const std::filesystem::path& path, const Image& image,
                 const Provenance& provenance = {});
ImageFile read_image(const std::filesystem::path& path);

/// Linear HU -> [0, 255] map clamped at the window, rounding half away from
/// zero. Throws kInvalidArgument unless low < high.
std::vector<std::uint8_t> window_to_bytes(const Image& image, double window_low,
                                          double window_high);

/// Lossless 8-bit grayscale PNG of a row-major buffer.
std::string encode_png_gray8(const std::vector<std::uint8_t>& pixels, std::int64_t height,
                             std::int64_t width);

// Network-domain intensity mapping: [kHuMin, kHuMax] -> [0, 1].
Image hu_to_unit(const Image& hu);
Image unit_to_hu(const Image& unit);

}  // namespace nrtw
