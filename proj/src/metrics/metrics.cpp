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
#include "nrtw/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace nrtw::metrics {
namespace {

void require_plane(const Tensor& image, const char* what) {
  require(image.shape().n == 1 && image.shape().c == 1, ErrorCode::kShapeMismatch,
          std::string(what) + ": expected a (1, 1, H, W) image, got " + image.shape().str());
}

}  // namespace

bool Roi::overlaps(const Roi& o) const noexcept {
  return row0 < o.row0 + o.height && o.row0 < row0 + height && col0 < o.col0 + o.width &&
         o.col0 < col0 + width;
}

void validate_roi(const Roi& roi, const Shape& image) {
  const std::string name = roi.label.empty() ? std::string("roi") : "roi '" + roi.label + "'";
  require(roi.height > 0 && roi.width > 0, ErrorCode::kInvalidArgument,
          name + ": extent must be positive");
  require(roi.area() >= 4, ErrorCode::kInvalidArgument,
          name + ": area " + std::to_string(roi.area()) + " is below the 4-pixel minimum");
  require(roi.row0 >= 0 && roi.col0 >= 0 && roi.row0 + roi.height <= image.h &&
              roi.col0 + roi.width <= image.w,
          ErrorCode::kInvalidArgument,
          name + ": rectangle [" + std::to_string(roi.row0) + "+" + std::to_string(roi.height) +
              ", " + std::to_string(roi.col0) + "+" + std::to_string(roi.width) +
              "] exceeds image " + std::to_string(image.h) + "x" + std::to_string(image.w));
}

RoiStats roi_stats(const Tensor& image, const Roi& roi) {
  require_plane(image, "roi_stats");
  validate_roi(roi, image.shape());
  double sum = 0.0;
  for (std::int64_t r = roi.row0; r < roi.row0 + roi.height; ++r) {
    for (std::int64_t c = roi.col0; c < roi.col0 + roi.width; ++c) sum += image.at(0, 0, r, c);
  }
  const double n = static_cast<double>(roi.area());
  const double mean = sum / n;
  double ss = 0.0;
  for (std::int64_t r = roi.row0; r < roi.row0 + roi.height; ++r) {
    for (std::int64_t c = roi.col0; c < roi.col0 + roi.width; ++c) {
      const double d = image.at(0, 0, r, c) - mean;
      ss += d * d;
    }
  }
  return RoiStats{mean, std::sqrt(ss / n)};
}

double rmse(const Tensor& a, const Tensor& b) {
  require_same_shape(a.shape(), b.shape(), "rmse");
  require(a.numel() > 0, ErrorCode::kInvalidArgument, "rmse: empty images");
  return l2_distance(a, b) / std::sqrt(static_cast<double>(a.numel()));
}

double roi_std(const Tensor& image, const Roi& roi) { return roi_stats(image, roi).stddev; }

double cnr(const Tensor& image, const Roi& foreground, const Roi& background) {
  require(!foreground.overlaps(background), ErrorCode::kInvalidArgument,
          "cnr: foreground and background ROIs overlap");
  const RoiStats fg = roi_stats(image, foreground);
  const RoiStats bg = roi_stats(image, background);
  const double denom = fg.stddev + bg.stddev;
  if (!(denom > 0.0)) {
    fail(ErrorCode::kDegenerate,
         "cnr: both ROIs have zero standard deviation, contrast-to-noise is undefined");
  }
  return 2.0 * std::abs(fg.mean - bg.mean) / denom;
}

double resolution_proxy(const Tensor& image, const Roi& edge_roi) {
  require_plane(image, "resolution_proxy");
  validate_roi(edge_roi, image.shape());
  const std::int64_t h = image.shape().h;
  const std::int64_t w = image.shape().w;
  auto px = [&](std::int64_t r, std::int64_t c) -> double {
    return image.at(0, 0, std::clamp<std::int64_t>(r, 0, h - 1),
                    std::clamp<std::int64_t>(c, 0, w - 1));
  };
  double total = 0.0;
  for (std::int64_t r = edge_roi.row0; r < edge_roi.row0 + edge_roi.height; ++r) {
    for (std::int64_t c = edge_roi.col0; c < edge_roi.col0 + edge_roi.width; ++c) {
      const double gx = 0.5 * (px(r, c + 1) - px(r, c - 1));
      const double gy = 0.5 * (px(r + 1, c) - px(r - 1, c));
      total += std::sqrt(gx * gx + gy * gy);
    }
  }
  return total / static_cast<double>(edge_roi.area());
}

MetricsRecord measure(const Tensor& image, const Tensor* clean, const std::vector<Roi>& rois) {
  MetricsRecord record;
  if (clean != nullptr) record.rmse = rmse(image, *clean);
  const Roi* lesion = nullptr;
  const Roi* lesion_bg = nullptr;
  for (const auto& roi : rois) {
    record.roi_std[roi.label] = roi_std(image, roi);
    if (roi.label == kLesionRoi) lesion = &roi;
    if (roi.label == kLesionBackgroundRoi) lesion_bg = &roi;
    if (roi.label == kEdgeRoi) record.resolution_proxy = resolution_proxy(image, roi);
  }
  if (lesion != nullptr && lesion_bg != nullptr) {
    try {
      record.cnr = cnr(image, *lesion, *lesion_bg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate) throw;
    }
  }
  return record;
}

std::vector<MetricRow> to_rows(std::int64_t index, const MetricsRecord& record,
                               bool include_rmse_marker) {
  std::vector<MetricRow> rows;
  if (record.rmse || include_rmse_marker) rows.push_back({index, "rmse", record.rmse});
  if (record.cnr) rows.push_back({index, "cnr", record.cnr});
  for (const auto& [label, value] : record.roi_std) rows.push_back({index, "std:" + label, value});
  if (record.resolution_proxy) {
    rows.push_back({index, "resolution_proxy", record.resolution_proxy});
  }
  return rows;
}

std::string format_rows(const std::vector<MetricRow>& rows) {
  std::ostringstream os;
  os << "index\tmetric\tvalue\n";
  for (const auto& row : rows) {
    os << row.index << '\t' << row.metric << '\t';
    if (row.value) {
      os << std::setprecision(9) << *row.value;
    } else {
      os << "unavailable";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace nrtw::metrics
