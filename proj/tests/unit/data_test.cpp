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
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "expect_error.hpp"
#include "nrtw/data/image.hpp"
#include "nrtw/data/noise.hpp"
#include "nrtw/data/phantom.hpp"
#include "nrtw/util/bytes.hpp"

namespace nrtw::data {
namespace {

namespace fs = std::filesystem;

double mean(const Tensor& t) {
  double s = 0.0;
  for (float v : t.data()) s += v;
  return s / static_cast<double>(t.numel());
}

double stddev(const Tensor& t) {
  const double m = mean(t);
  double s = 0.0;
  for (float v : t.data()) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(t.numel()));
}

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() /
               ("nrtw_data_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

PhantomSpec blank(std::int64_t size, double background) {
  PhantomSpec s;
  s.height = s.width = size;
  s.background_hu = background;
  return s;
}

TEST(Phantom, EmptySpecIsUniformBackground) {
  const Image img = generate_phantom(blank(32, -1000.0), 1);
  for (float v : img.data()) ASSERT_EQ(v, -1000.0f);
}

TEST(Phantom, CenterInsideCornerOutside) {
  PhantomSpec s = blank(64, 0.0);
  s.ellipses.push_back({0.5, 0.5, 0.3, 0.2, 0.0, 40.0, false});
  const Image img = generate_phantom(s, 0);
  EXPECT_EQ(img.at(0, 0, 32, 32), 40.0f);
  EXPECT_EQ(img.at(0, 0, 0, 0), 0.0f);
  EXPECT_EQ(img.at(0, 0, 63, 63), 0.0f);
}

TEST(Phantom, MembershipMatchesPointInEllipse) {
  PhantomSpec s = blank(48, 0.0);
  const Ellipse e{0.4, 0.55, 0.3, 0.15, 0.6, 100.0, false};
  s.ellipses.push_back(e);
  const Image img = generate_phantom(s, 0);
  for (std::int64_t r = 0; r < 48; ++r) {
    for (std::int64_t c = 0; c < 48; ++c) {
      const double x = (c + 0.5) / 48.0 - e.cx;
      const double y = (r + 0.5) / 48.0 - e.cy;
      const double u = std::cos(e.rotation) * x + std::sin(e.rotation) * y;
      const double v = -std::sin(e.rotation) * x + std::cos(e.rotation) * y;
      const double q = (u * u) / (e.ax * e.ax) + (v * v) / (e.ay * e.ay);
      if (std::abs(q - 1.0) < 1e-9) continue;
      ASSERT_EQ(img.at(0, 0, r, c), q < 1.0 ? 100.0f : 0.0f) << r << "," << c;
    }
  }
}

TEST(Phantom, LaterOpaqueOverwritesAdditiveAdds) {
  PhantomSpec s = blank(32, 0.0);
  s.ellipses.push_back({0.5, 0.5, 0.4, 0.4, 0.0, 50.0, false});
  s.ellipses.push_back({0.5, 0.5, 0.2, 0.2, 0.0, 200.0, false});
  s.ellipses.push_back({0.5, 0.5, 0.1, 0.1, 0.0, 7.0, true});
  const Image img = generate_phantom(s, 0);
  EXPECT_EQ(img.at(0, 0, 16, 16), 207.0f);
  EXPECT_EQ(img.at(0, 0, 16, 6), 50.0f);
}

TEST(Phantom, DeterministicPerSeed) {
  const PhantomSpec s = random_phantom_spec(64, 3);
  EXPECT_EQ(generate_phantom(s, 11), generate_phantom(s, 11));
  EXPECT_EQ(generate_phantom(default_phantom_spec(), 0), generate_phantom(default_phantom_spec(), 0));
}

TEST(Phantom, RandomSpecsDifferBySeed) {
  EXPECT_FALSE(generate_phantom(random_phantom_spec(64, 1), 1) ==
               generate_phantom(random_phantom_spec(64, 2), 2));
}

TEST(Phantom, DefaultSpecCarriesValidRois) {
  const PhantomSpec s = default_phantom_spec(128);
  EXPECT_NO_THROW(validate(s));
  for (const char* label : {metrics::kFlatRoi, metrics::kLesionRoi, metrics::kLesionBackgroundRoi,
                            metrics::kEdgeRoi}) {
    ASSERT_TRUE(s.find_roi(label).has_value()) << label;
  }
  const Image img = generate_phantom(s, 0);
  EXPECT_DOUBLE_EQ(metrics::roi_std(img, *s.find_roi(metrics::kFlatRoi)), 0.0);
  // The edge strip straddles the body boundary, so the soft-tissue to air
  // step of 1040 HU sits inside it.
  const metrics::Roi edge = *s.find_roi(metrics::kEdgeRoi);
  const std::int64_t mid = edge.row0 + edge.height / 2;
  EXPECT_EQ(img.at(0, 0, mid, edge.col0), 40.0f);
  EXPECT_EQ(img.at(0, 0, mid, edge.col0 + edge.width - 1), -1000.0f);
  EXPECT_GT(metrics::resolution_proxy(img, edge), 1040.0 / 2.0 / static_cast<double>(edge.width));
  const double contrast =
      metrics::roi_stats(img, *s.find_roi(metrics::kLesionRoi)).mean -
      metrics::roi_stats(img, *s.find_roi(metrics::kLesionBackgroundRoi)).mean;
  EXPECT_NEAR(contrast, kDefaultLesionContrast, 1e-4);
  for (const auto& lesion : s.lesions) EXPECT_LE(std::abs(lesion.hu), kMaxLesionContrast);
}

TEST(Phantom, ValidationRejectsBadSpecs) {
  PhantomSpec s = blank(32, 0.0);
  s.ellipses.push_back({0.5, 0.5, 0.0, 0.2, 0.0, 10.0, false});
  EXPECT_ERROR_CODE(validate(s), ErrorCode::kInvalidArgument);
  s = blank(32, -2000.0);
  EXPECT_ERROR_CODE(validate(s), ErrorCode::kInvalidArgument);
  s = blank(32, 0.0);
  s.lesions.push_back({0.5, 0.5, 0.05, 0.05, 0.0, 25.0, true});
  EXPECT_ERROR_CODE(validate(s), ErrorCode::kInvalidArgument);
  s = blank(32, 0.0);
  s.rois.push_back({30, 30, 4, 4, "flat"});
  EXPECT_ERROR_CODE(validate(s), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(generate_phantom(s, 0), ErrorCode::kInvalidArgument);
}

TEST(Phantom, JsonRoundTrip) {
  const PhantomSpec s = default_phantom_spec(96);
  const nlohmann::json j = s;
  const PhantomSpec back = j.get<PhantomSpec>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(generate_phantom(back, 4), generate_phantom(s, 4));
}

TEST(Noise, SigmaZeroIsNoiseless) {
  const Image clean = generate_phantom(default_phantom_spec(64), 0);
  NoiseSpec ns;
  ns.sigma = 0.0;
  const PairedSample s = add_noise(clean, ns);
  EXPECT_EQ(s.noisy, clean);
  for (float v : s.noise.data()) ASSERT_EQ(v, 0.0f);
}

TEST(Noise, WhiteNoiseStatistics) {
  const Image clean = generate_phantom(default_phantom_spec(128), 0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NoiseSpec ns;
    ns.sigma = 25.0;
    ns.seed = seed;
    const PairedSample s = add_noise(clean, ns);
    EXPECT_GE(stddev(s.noise), 22.0);
    EXPECT_LE(stddev(s.noise), 28.0);
    EXPECT_LE(std::abs(mean(s.noise)), 1.0);
  }
}

TEST(Noise, CorrelatedNoiseKeepsSigma) {
  const Image clean = make_image(128, 128, 0.0f);
  NoiseSpec ns;
  ns.sigma = 25.0;
  ns.seed = 5;
  ns.kernel = Tensor(Shape{1, 1, 3, 3}, std::vector<float>{0, 0, 0, 1, 2, 1, 0, 0, 0});
  const PairedSample s = add_noise(clean, ns);
  EXPECT_GE(stddev(s.noise), 22.0);
  EXPECT_LE(stddev(s.noise), 28.0);
  // Horizontal smoothing correlates horizontal neighbours (expected 2/3)
  // far more than vertical ones (expected 0).
  double h = 0.0, v = 0.0, e = 0.0;
  for (std::int64_t r = 0; r + 1 < 128; ++r) {
    for (std::int64_t c = 0; c + 1 < 128; ++c) {
      const double a = s.noise.at(0, 0, r, c);
      h += a * s.noise.at(0, 0, r, c + 1);
      v += a * s.noise.at(0, 0, r + 1, c);
      e += a * a;
    }
  }
  EXPECT_NEAR(h / e, 2.0 / 3.0, 0.05);
  EXPECT_NEAR(v / e, 0.0, 0.05);
}

TEST(Noise, ExactAdditiveDecomposition) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Image clean = generate_phantom(random_phantom_spec(64, seed), seed);
    NoiseSpec ns;
    ns.sigma = 40.0;
    ns.seed = seed;
    PairedSample s = add_noise(clean, ns);
    for (double f : {1.0, 0.5, 2.0, 4.0}) {
      const PairedSample r = rescale_noise(s, f);
      for (std::int64_t i = 0; i < clean.numel(); ++i) {
        ASSERT_EQ(r.noisy[i] - r.clean[i], r.noise[i]);
      }
    }
  }
}

TEST(Noise, SeedDeterminism) {
  const Image clean = make_image(32, 32);
  NoiseSpec a;
  a.seed = 9;
  NoiseSpec b = a;
  b.seed = 10;
  EXPECT_EQ(add_noise(clean, a).noise, add_noise(clean, a).noise);
  EXPECT_FALSE(add_noise(clean, a).noise == add_noise(clean, b).noise);
}

TEST(Noise, SpecValidation) {
  const Image clean = make_image(16, 16);
  NoiseSpec ns;
  ns.sigma = -1.0;
  EXPECT_ERROR_CODE(add_noise(clean, ns), ErrorCode::kInvalidArgument);
  ns.sigma = 1.0;
  ns.kernel = Tensor(Shape{1, 1, 2, 2}, 1.0f);
  EXPECT_ERROR_CODE(add_noise(clean, ns), ErrorCode::kInvalidArgument);
  ns.kernel = Tensor(Shape{1, 1, 3, 3}, 0.0f);
  EXPECT_ERROR_CODE(add_noise(clean, ns), ErrorCode::kInvalidArgument);
}

TEST(Rescale, FactorOneIsIdentity) {
  NoiseSpec ns;
  ns.seed = 2;
  const PairedSample s = add_noise(generate_phantom(default_phantom_spec(64), 0), ns);
  const PairedSample r = rescale_noise(s, 1.0);
  EXPECT_EQ(r.clean, s.clean);
  EXPECT_EQ(r.noisy, s.noisy);
  EXPECT_EQ(r.noise, s.noise);
  EXPECT_EQ(r.dose_factor, s.dose_factor);
}

TEST(Rescale, NoiseStdScalesLinearly) {
  NoiseSpec ns;
  ns.seed = 3;
  const PairedSample s = add_noise(generate_phantom(default_phantom_spec(128), 0), ns);
  const double base = stddev(s.noise);
  for (double f : {0.5, 2.0, 4.0}) {
    EXPECT_NEAR(stddev(rescale_noise(s, f).noise) / (f * base), 1.0, 1e-5) << f;
  }
}

TEST(Rescale, DoseTiers) {
  NoiseSpec ns;
  const PairedSample s = add_noise(make_image(16, 16), ns);
  EXPECT_DOUBLE_EQ(s.dose_factor, 0.25);
  EXPECT_DOUBLE_EQ(rescale_noise(s, 0.5).dose_factor, 0.5);
  EXPECT_DOUBLE_EQ(rescale_noise(s, 2.0).dose_factor, 1.0 / 8.0);
  EXPECT_DOUBLE_EQ(rescale_noise(s, 4.0).dose_factor, 1.0 / 16.0);
  EXPECT_ERROR_CODE(rescale_noise(s, 0.0), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(rescale_noise(s, -2.0), ErrorCode::kInvalidArgument);
}

Image row(std::vector<float> v) {
  const auto w = static_cast<std::int64_t>(v.size());
  return Tensor(Shape{1, 1, 1, w}, std::move(v));
}

TEST(Window, DisplayWindowExamples) {
  const auto bytes = window_to_bytes(row({-160.0f, 240.0f, 40.0f, -500.0f, 3000.0f}), -160, 240);
  EXPECT_EQ(bytes, (std::vector<std::uint8_t>{0, 255, 128, 0, 255}));
}

TEST(Window, MonotoneInHu) {
  std::vector<float> v;
  for (float hu = -400.0f; hu <= 400.0f; hu += 0.37f) v.push_back(hu);
  const auto bytes = window_to_bytes(row(v), -160, 240);
  for (std::size_t i = 1; i < bytes.size(); ++i) ASSERT_LE(bytes[i - 1], bytes[i]);
}

TEST(Window, DegenerateWindowRejected) {
  EXPECT_ERROR_CODE(window_to_bytes(row({0.0f}), 10, 10), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(window_to_bytes(row({0.0f}), 20, 10), ErrorCode::kInvalidArgument);
}

TEST(Png, SignatureAndIhdr) {
  const std::vector<std::uint8_t> px(6 * 4, 77);
  const std::string png = encode_png_gray8(px, 4, 6);
  ASSERT_GT(png.size(), 33u);
  EXPECT_EQ(png.substr(0, 8), std::string("\x89PNG\r\n\x1a\n", 8));
  EXPECT_EQ(png.substr(12, 4), "IHDR");
  auto be32 = [&](std::size_t o) {
    return (static_cast<std::uint32_t>(static_cast<unsigned char>(png[o])) << 24) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(png[o + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(png[o + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(png[o + 3]));
  };
  EXPECT_EQ(be32(16), 6u);
  EXPECT_EQ(be32(20), 4u);
  EXPECT_EQ(png[24], 8);  // bit depth
  EXPECT_EQ(png[25], 0);  // grayscale
}

TEST(ImageFormat, WriteReadWriteIsByteIdentical) {
  const fs::path dir = scratch_dir("img");
  NoiseSpec ns;
  ns.seed = 1;
  const Image img = add_noise(generate_phantom(default_phantom_spec(64), 0), ns).noisy;
  const Provenance prov{{"phantom", "default"}, {"seed", "1"}};
  write_image(dir / "a.nrtwimg", img, prov);
  const ImageFile back = read_image(dir / "a.nrtwimg");
  EXPECT_EQ(back.image, img);
  EXPECT_EQ(back.provenance, prov);
  write_image(dir / "b.nrtwimg", back.image, back.provenance);
  EXPECT_EQ(util::read_file(dir / "a.nrtwimg"), util::read_file(dir / "b.nrtwimg"));
  fs::remove_all(dir);
}

TEST(ImageFormat, PreservesSpecialFloats) {
  const Image img = row({-0.0f, 1e-38f, 3071.0f, -1024.0f, 0.1f});
  const ImageFile back = decode_image(encode_image(img));
  for (std::int64_t i = 0; i < img.numel(); ++i) {
    EXPECT_EQ(std::signbit(back.image[i]), std::signbit(img[i]));
    EXPECT_EQ(back.image[i], img[i]);
  }
}

TEST(ImageFormat, RejectsCorruptInput) {
  const std::string good = encode_image(make_image(4, 4, 1.0f));
  EXPECT_ERROR_CODE(decode_image("NRTW-IMG v2\n{}\n"), ErrorCode::kFormat);
  EXPECT_ERROR_CODE(decode_image(good.substr(0, good.size() - 3)), ErrorCode::kFormat);
  EXPECT_ERROR_CODE(decode_image(good + "x"), ErrorCode::kFormat);
  EXPECT_ERROR_CODE(decode_image("garbage"), ErrorCode::kFormat);
}

TEST(ImageFormat, HeaderIsReadableJson) {
  const std::string bytes = encode_image(make_image(3, 5), {{"k", "v"}});
  const auto first = bytes.find('\n');
  const auto second = bytes.find('\n', first + 1);
  EXPECT_EQ(bytes.substr(0, first), "NRTW-IMG v1");
  const auto header = nlohmann::json::parse(bytes.substr(first + 1, second - first - 1));
  EXPECT_EQ(header.at("height"), 3);
  EXPECT_EQ(header.at("width"), 5);
  EXPECT_EQ(header.at("units"), "HU");
  EXPECT_EQ(header.at("dtype"), "float32-le");
  EXPECT_EQ(header.at("provenance").at("k"), "v");
  EXPECT_EQ(bytes.size() - second - 1, 3u * 5u * 4u);
}

TEST(Samples, DirectoryRoundTrip) {
  const fs::path dir = scratch_dir("samples");
  for (std::size_t i = 0; i < 3; ++i) {
    NoiseSpec ns;
    ns.seed = i;
    write_sample(dir, i, add_noise(generate_phantom(random_phantom_spec(32, i), i), ns));
  }
  EXPECT_EQ(count_samples(dir), 3u);
  NoiseSpec ns;
  ns.seed = 1;
  const PairedSample expect = add_noise(generate_phantom(random_phantom_spec(32, 1), 1), ns);
  const PairedSample got = read_sample(dir, 1);
  EXPECT_EQ(got.clean, expect.clean);
  EXPECT_EQ(got.noisy, expect.noisy);
  EXPECT_EQ(got.noise, expect.noise);
  EXPECT_DOUBLE_EQ(got.dose_factor, expect.dose_factor);
  fs::remove_all(dir);
}

TEST(Intensity, UnitMappingEndpointsAndInverse) {
  const Image hu = row({-1024.0f, 3071.0f, 40.0f});
  const Image unit = hu_to_unit(hu);
  EXPECT_FLOAT_EQ(unit[0], 0.0f);
  EXPECT_FLOAT_EQ(unit[1], 1.0f);
  const Image back = unit_to_hu(unit);
  for (std::int64_t i = 0; i < 3; ++i) EXPECT_NEAR(back[i], hu[i], 1e-3);
}

}  // namespace
}  // namespace nrtw::data
