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

// Image-quality measures. All inputs are HU images shaped (1, 1, H, W); all
// standard deviations are population standard deviations.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nrtw/core/tensor.hpp"

namespace nrtw::metrics {

/// Axis-aligned pixel rectangle.
struct Roi {
  std::int64_t row0 = 0;
  std::int64_t col0 = 0;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::string label;

  std::int64_t area() const noexcept { return height * width; }
  bool overlaps(const Roi& other) const noexcept;
  friend bool operator==(const Roi&, const Roi&) = default;
};

/// Throws kInvalidArgument when the ROI leaves the image or covers < 4 pixels.
void validate_roi(const Roi& roi, const Shape& image);

struct RoiStats {
  double mean = 0.0;
  double stddev = 0.0;
};

RoiStats roi_stats(const Tensor& image, const Roi& roi);

double rmse(const Tensor& a, const Tensor& b);
double roi_std(const Tensor& image, const Roi& roi);

/// 2|S - S_b| / (sigma + sigma_b). Throws kDegenerate when the denominator is 0.
double cnr(const Tensor& image, const Roi& foreground, const Roi& background);

/// Mean central-difference gradient magnitude over the ROI, in HU/pixel.
/// Neighbours outside the image are clamped to the border pixel.
double resolution_proxy(const Tensor& image, const Roi& edge_roi);

struct MetricsRecord {
  std::optional<double> rmse;
  std::optional<double> cnr;
  std::map<std::string, double> roi_std;
  std::optional<double> resolution_proxy;
};

inline constexpr const char* kFlatRoi = "flat";
inline constexpr const char* kLesionRoi = "lesion";
inline constexpr const char* kLesionBackgroundRoi = "lesion_bg";
inline constexpr const char* kEdgeRoi = "edge";

/// Metrics selected by ROI label: STD over every ROI, CNR when both "lesion"
/// and "lesion_bg" are present, the resolution proxy over "edge", and RMSE
/// when `clean` is given. A degenerate CNR is left empty.
MetricsRecord measure(const Tensor& image, const Tensor* clean, const std::vector<Roi>& rois);

/// One exported (index, metric, value) row. `value` is empty when the
/// metric is unavailable (for instance RMSE without a clean reference).
struct MetricRow {
  std::int64_t index = 0;
  std::string metric;
  std::optional<double> value;
};

/// Rows in a fixed order: rmse, cnr, std:<label>..., resolution_proxy.
std::vector<MetricRow> to_rows(std::int64_t index, const MetricsRecord& record,
                               bool include_rmse_marker = true);

/// Whitespace-separated text, one row per line, "unavailable" for empty values.
std::string format_rows(const std::vector<MetricRow>& rows);

}  // namespace nrtw::metrics
