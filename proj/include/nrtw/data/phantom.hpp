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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrtw/data/image.hpp"
#include "nrtw/metrics/metrics.hpp"

namespace nrtw::data {

/// Ellipse in fractional canvas coordinates: center and semi-axes are
/// fractions of (width, height); rotation is counter-clockwise in radians.
struct Ellipse {
  double cx = 0.5;
  double cy = 0.5;
  double ax = 0.25;
  double ay = 0.25;
  double rotation = 0.0;
  double hu = 0.0;
  bool additive = false;

  /// Membership of the pixel whose center is (row + 0.5, col + 0.5).
  bool contains(std::int64_t row, std::int64_t col, std::int64_t height,
                std::int64_t width) const;
};

inline constexpr double kMaxLesionContrast = 20.0;
inline constexpr double kDefaultLesionContrast = 15.0;

struct PhantomSpec {
  std::int64_t height = 128;
  std::int64_t width = 128;
  double background_hu = -1000.0;
  std::vector<Ellipse> ellipses;
  /// Low-contrast lesions, always additive; `hu` is the contrast.
  std::vector<Ellipse> lesions;
  /// Pre-registered measurement regions in pixel units.
  std::vector<metrics::Roi> rois;
  /// Seeded perturbation amplitude (fraction of canvas) applied to every
  /// ellipse center and axis; 0 makes the seed irrelevant.
  double jitter = 0.0;

  std::optional<metrics::Roi> find_roi(const std::string& label) const;
};

/// Throws kInvalidArgument on non-positive axes, out-of-range HU, lesion
/// contrast above kMaxLesionContrast or ROIs outside the canvas.
void validate(const PhantomSpec& spec);

/// Rasterizes in list order: opaque ellipses overwrite, additive ones add.
/// Lesions are applied last.
Image generate_phantom(const PhantomSpec& spec, std::uint64_t seed);

/// Abdomen-like slice with organs, bone, small vessels, one low-contrast
/// lesion, and ROIs "flat", "lesion", "lesion_bg", "edge".
PhantomSpec default_phantom_spec(std::int64_t size = 128);

/// The ROIs of default_phantom_spec for square canvases of at least 32
/// pixels; none otherwise.
std::vector<metrics::Roi> default_rois(std::int64_t height, std::int64_t width);

/// Randomized body phantom for building training sets. Carries no ROIs.
PhantomSpec random_phantom_spec(std::int64_t size, std::uint64_t seed);

void to_json(nlohmann::json& j, const PhantomSpec& spec);
void from_json(const nlohmann::json& j, PhantomSpec& spec);

}  // namespace nrtw::data

namespace nrtw::metrics {
void to_json(nlohmann::json& j, const Roi& roi);
void from_json(const nlohmann::json& j, Roi& roi);
}  // namespace nrtw::metrics
