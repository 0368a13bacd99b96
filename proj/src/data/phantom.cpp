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
#include "nrtw/data/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace nrtw::data {
namespace {

void validate_ellipse(const Ellipse& e, const std::string& what) {
  require(e.ax > 0.0 && e.ay > 0.0, ErrorCode::kInvalidArgument,
          what + ": semi-axes must be positive");
  require(std::isfinite(e.cx) && std::isfinite(e.cy) && std::isfinite(e.rotation),
          ErrorCode::kInvalidArgument, what + ": non-finite geometry");
}

std::int64_t frac(double f, std::int64_t extent) {
  return static_cast<std::int64_t>(std::lround(f * static_cast<double>(extent)));
}

// Square ROI of side `side` centred on a fractional point.
metrics::Roi centred_roi(double cx, double cy, std::int64_t side, std::int64_t height,
                         std::int64_t width, std::string label) {
  return metrics::Roi{frac(cy, height) - side / 2, frac(cx, width) - side / 2, side, side,
                      std::move(label)};
}

Ellipse jittered(const Ellipse& e, double amount, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-amount, amount);
  Ellipse out = e;
  out.cx += u(rng);
  out.cy += u(rng);
  out.ax *= 1.0 + u(rng);
  out.ay *= 1.0 + u(rng);
  return out;
}

}  // namespace

bool Ellipse::contains(std::int64_t row, std::int64_t col, std::int64_t height,
                       std::int64_t width) const {
  const double px = (static_cast<double>(col) + 0.5) - cx * static_cast<double>(width);
  const double py = (static_cast<double>(row) + 0.5) - cy * static_cast<double>(height);
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  // Rotate the offset into the ellipse frame.
  const double u = c * px + s * py;
  const double v = -s * px + c * py;
  const double a = ax * static_cast<double>(width);
  const double b = ay * static_cast<double>(height);
  return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
}

std::optional<metrics::Roi> PhantomSpec::find_roi(const std::string& label) const {
  for (const auto& r : rois) {
    if (r.label == label) return r;
  }
  return std::nullopt;
}

void validate(const PhantomSpec& spec) {
  require(spec.height > 0 && spec.width > 0, ErrorCode::kInvalidArgument,
          "phantom: canvas extent must be positive");
  auto in_range = [](double hu) { return hu >= kHuMin && hu <= kHuMax; };
  require(in_range(spec.background_hu), ErrorCode::kInvalidArgument,
          "phantom: background HU outside [-1024, 3071]");
  require(spec.jitter >= 0.0 && spec.jitter < 0.5, ErrorCode::kInvalidArgument,
          "phantom: jitter must lie in [0, 0.5)");
  for (std::size_t i = 0; i < spec.ellipses.size(); ++i) {
    const std::string what = "phantom ellipse " + std::to_string(i);
    validate_ellipse(spec.ellipses[i], what);
    require(in_range(spec.ellipses[i].hu) || spec.ellipses[i].additive,
            ErrorCode::kInvalidArgument, what + ": HU outside [-1024, 3071]");
  }
  for (std::size_t i = 0; i < spec.lesions.size(); ++i) {
    const std::string what = "phantom lesion " + std::to_string(i);
    validate_ellipse(spec.lesions[i], what);
    require(std::abs(spec.lesions[i].hu) <= kMaxLesionContrast, ErrorCode::kInvalidArgument,
            what + ": |contrast| exceeds 20 HU");
  }
  const Shape canvas{1, 1, spec.height, spec.width};
  for (const auto& roi : spec.rois) metrics::validate_roi(roi, canvas);
}

Image generate_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  Image img = make_image(spec.height, spec.width, static_cast<float>(spec.background_hu));

  auto paint = [&](const Ellipse& e) {
    for (std::int64_t r = 0; r < spec.height; ++r) {
      for (std::int64_t c = 0; c < spec.width; ++c) {
        if (!e.contains(r, c, spec.height, spec.width)) continue;
        float& px = img.at(0, 0, r, c);
        px = e.additive ? px + static_cast<float>(e.hu) : static_cast<float>(e.hu);
      }
    }
  };
  for (const auto& e : spec.ellipses) paint(spec.jitter > 0.0 ? jittered(e, spec.jitter, rng) : e);
  for (Ellipse lesion : spec.lesions) {
    lesion.additive = true;
    paint(spec.jitter > 0.0 ? jittered(lesion, spec.jitter, rng) : lesion);
  }
  for (auto& px : img.data()) {
    px = static_cast<float>(std::clamp<double>(px, kHuMin, kHuMax));
  }
  return img;
}

PhantomSpec default_phantom_spec(std::int64_t size) {
  require(size >= 32, ErrorCode::kInvalidArgument, "default phantom needs size >= 32");
  PhantomSpec s;
  s.height = size;
  s.width = size;
  s.background_hu = -1000.0;
  s.ellipses = {
      {0.50, 0.50, 0.44, 0.36, 0.0, 40.0, false},    // body, soft tissue
      {0.32, 0.45, 0.15, 0.14, 0.3, 60.0, false},    // liver
      {0.70, 0.58, 0.05, 0.07, -0.2, 150.0, false},  // kidney
      {0.50, 0.76, 0.06, 0.05, 0.0, 700.0, false},   // vertebra
      {0.50, 0.76, 0.025, 0.02, 0.0, 250.0, false},  // cancellous core
      {0.50, 0.55, 0.025, 0.025, 0.0, 200.0, false}, // aorta
      {0.56, 0.60, 0.015, 0.015, 0.0, 220.0, false}, // small vessels
      {0.44, 0.62, 0.012, 0.012, 0.0, 180.0, false},
  };
  s.lesions = {{0.28, 0.42, 0.035, 0.035, 0.0, kDefaultLesionContrast, true}};

  const double k = static_cast<double>(size) / 128.0;
  const auto side = std::max<std::int64_t>(3, std::lround(5.0 * k));
  // Narrow strip across the right body boundary: a window wider than the
  // blurred transition would see the same mean gradient at any sharpness.
  const auto edge_width = std::max<std::int64_t>(2, 2 * std::lround(2.0 * k));
  s.rois = {
      metrics::Roi{frac(0.26, size), frac(0.56, size), frac(0.12, size), frac(0.16, size), "flat"},
      centred_roi(0.28, 0.42, side, size, size, "lesion"),
      centred_roi(0.37, 0.50, side, size, size, "lesion_bg"),
      metrics::Roi{frac(0.44, size), std::lround(0.94 * static_cast<double>(size)) - edge_width / 2,
                   frac(0.12, size), edge_width, "edge"},
  };
  validate(s);
  return s;
}

std::vector<metrics::Roi> default_rois(std::int64_t height, std::int64_t width) {
  if (height != width || height < 32) return {};
  return default_phantom_spec(height).rois;
}

PhantomSpec random_phantom_spec(std::int64_t size, std::uint64_t seed) {
  require(size >= 16, ErrorCode::kInvalidArgument, "random phantom needs size >= 16");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto count = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  PhantomSpec s;
  s.height = size;
  s.width = size;
  s.background_hu = -1000.0;
  const Ellipse body{uni(0.47, 0.53), uni(0.47, 0.53), uni(0.36, 0.46), uni(0.28, 0.42),
                     uni(-0.3, 0.3), uni(-10.0, 50.0), false};
  s.ellipses.push_back(body);

  // Interior point at fractional radius <= rmax of the body ellipse.
  auto inside = [&](double rmax) {
    const double t = uni(0.0, 2.0 * std::numbers::pi);
    const double r = rmax * std::sqrt(uni(0.0, 1.0));
    const double u = r * body.ax * std::cos(t);
    const double v = r * body.ay * std::sin(t);
    const double c = std::cos(body.rotation);
    const double sn = std::sin(body.rotation);
    return std::pair{body.cx + c * u - sn * v, body.cy + sn * u + c * v};
  };

  std::vector<Ellipse> organs;
  for (int i = 0, n = count(2, 5); i < n; ++i) {
    auto [cx, cy] = inside(0.55);
    organs.push_back({cx, cy, uni(0.05, 0.16), uni(0.05, 0.14), uni(0.0, std::numbers::pi),
                      uni(-80.0, 180.0), false});
  }
  s.ellipses.insert(s.ellipses.end(), organs.begin(), organs.end());
  for (int i = 0, n = count(0, 2); i < n; ++i) {
    auto [cx, cy] = inside(0.75);
    s.ellipses.push_back({cx, cy, uni(0.02, 0.06), uni(0.02, 0.06), uni(0.0, std::numbers::pi),
                          uni(300.0, 1200.0), false});
  }
  for (int i = 0, n = count(2, 6); i < n; ++i) {
    auto [cx, cy] = inside(0.8);
    const double r = uni(0.008, 0.025);
    s.ellipses.push_back({cx, cy, r, r * uni(0.8, 1.25), 0.0, uni(100.0, 400.0), false});
  }
  for (int i = 0, n = count(0, 2); i < n && !organs.empty(); ++i) {
    const Ellipse& host = organs[static_cast<std::size_t>(count(0, static_cast<int>(organs.size()) - 1))];
    const double sign = uni(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    const double r = uni(0.015, 0.04);
    s.lesions.push_back({host.cx + uni(-0.3, 0.3) * host.ax, host.cy + uni(-0.3, 0.3) * host.ay, r,
                         r, 0.0, sign * uni(5.0, kMaxLesionContrast), true});
  }
  validate(s);
  return s;
}

void to_json(nlohmann::json& j, const PhantomSpec& spec) {
  auto ellipse_json = [](const Ellipse& e) {
    return nlohmann::json{{"cx", e.cx}, {"cy", e.cy}, {"ax", e.ax},
                          {"ay", e.ay}, {"rotation", e.rotation}, {"hu", e.hu},
                          {"additive", e.additive}};
  };
  j = nlohmann::json{{"height", spec.height},
                     {"width", spec.width},
                     {"background_hu", spec.background_hu},
                     {"jitter", spec.jitter},
                     {"ellipses", nlohmann::json::array()},
                     {"lesions", nlohmann::json::array()},
                     {"rois", spec.rois}};
  for (const auto& e : spec.ellipses) j["ellipses"].push_back(ellipse_json(e));
  for (const auto& e : spec.lesions) j["lesions"].push_back(ellipse_json(e));
}

void from_json(const nlohmann::json& j, PhantomSpec& spec) {
  try {
    spec = PhantomSpec{};
    spec.height = j.value("height", spec.height);
    spec.width = j.value("width", spec.width);
    spec.background_hu = j.value("background_hu", spec.background_hu);
    spec.jitter = j.value("jitter", 0.0);
    auto read_ellipse = [](const nlohmann::json& e, bool additive_default) {
      Ellipse out;
      out.cx = e.at("cx").get<double>();
      out.cy = e.at("cy").get<double>();
      out.ax = e.at("ax").get<double>();
      out.ay = e.at("ay").get<double>();
      out.rotation = e.value("rotation", 0.0);
      out.hu = e.at("hu").get<double>();
      out.additive = e.value("additive", additive_default);
      return out;
    };
    for (const auto& e : j.value("ellipses", nlohmann::json::array())) {
      spec.ellipses.push_back(read_ellipse(e, false));
    }
    for (const auto& e : j.value("lesions", nlohmann::json::array())) {
      spec.lesions.push_back(read_ellipse(e, true));
    }
    spec.rois = j.value("rois", std::vector<metrics::Roi>{});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("phantom spec: ") + e.what());
  }
}

}  // namespace nrtw::data

namespace nrtw::metrics {

void to_json(nlohmann::json& j, const Roi& roi) {
  j = nlohmann::json{{"label", roi.label},
                     {"row0", roi.row0},
                     {"col0", roi.col0},
                     {"height", roi.height},
                     {"width", roi.width}};
}

void from_json(const nlohmann::json& j, Roi& roi) {
  roi.label = j.value("label", std::string());
  roi.row0 = j.at("row0").get<std::int64_t>();
  roi.col0 = j.at("col0").get<std::int64_t>();
  roi.height = j.at("height").get<std::int64_t>();
  roi.width = j.at("width").get<std::int64_t>();
}

}  // namespace nrtw::metrics
