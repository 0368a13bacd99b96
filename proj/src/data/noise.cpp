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
#include "nrtw/data/noise.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace nrtw::data {
namespace {

// Builds the pair so that noisy - clean reproduces noise bit-exactly: the
// stored noise is re-derived from the rounded noisy image.
PairedSample assemble(const Image& clean, const std::vector<double>& noise, double dose) {
  PairedSample s{clean, Image(clean.shape()), Image(clean.shape()), dose};
  for (std::int64_t i = 0; i < clean.numel(); ++i) {
    s.noisy[i] = static_cast<float>(static_cast<double>(clean[i]) + noise[static_cast<std::size_t>(i)]);
    s.noise[i] = s.noisy[i] - clean[i];
  }
  return s;
}

std::string pair_name(std::size_t index, const char* part) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "pair_%04zu.%s.nrtwimg", index, part);
  return buf;
}

}  // namespace

void validate(const NoiseSpec& spec) {
  require(std::isfinite(spec.sigma) && spec.sigma >= 0.0, ErrorCode::kInvalidArgument,
          "noise: sigma must be finite and >= 0");
  require(spec.dose_factor > 0.0, ErrorCode::kInvalidArgument, "noise: dose factor must be > 0");
  if (spec.kernel) {
    const Shape& k = spec.kernel->shape();
    require(k.n == 1 && k.c == 1 && k.h == k.w && k.h % 2 == 1, ErrorCode::kInvalidArgument,
            "noise: correlation kernel must be (1, 1, k, k) with odd k");
    require(l2_norm(*spec.kernel) > 0.0, ErrorCode::kInvalidArgument,
            "noise: correlation kernel is all zero");
    spec.kernel->check_finite("noise kernel");
  }
}

PairedSample add_noise(const Image& clean, const NoiseSpec& spec) {
  require_image(clean, "add_noise");
  validate(spec);
  const std::int64_t h = clean.shape().h;
  const std::int64_t w = clean.shape().w;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(static_cast<std::size_t>(h * w));
  for (auto& v : white) v = normal(rng);

  std::vector<double> field = white;
  if (spec.kernel) {
    const Tensor& k = *spec.kernel;
    const double norm = l2_norm(k);
    const std::int64_t size = k.shape().h;
    const std::int64_t half = size / 2;
    for (std::int64_t r = 0; r < h; ++r) {
      for (std::int64_t c = 0; c < w; ++c) {
        double acc = 0.0;
        for (std::int64_t ky = 0; ky < size; ++ky) {
          for (std::int64_t kx = 0; kx < size; ++kx) {
            const std::int64_t rr = ((r + ky - half) % h + h) % h;
            const std::int64_t cc = ((c + kx - half) % w + w) % w;
            acc += k.at(0, 0, ky, kx) / norm * white[static_cast<std::size_t>(rr * w + cc)];
          }
        }
        field[static_cast<std::size_t>(r * w + c)] = acc;
      }
    }
  }
  for (auto& v : field) v *= spec.sigma;
  return assemble(clean, field, spec.dose_factor);
}

PairedSample rescale_noise(const PairedSample& sample, double factor) {
  require(std::isfinite(factor) && factor > 0.0, ErrorCode::kInvalidArgument,
          "rescale_noise: factor must be > 0");
  if (factor == 1.0) return sample;
  std::vector<double> noise(static_cast<std::size_t>(sample.noise.numel()));
  for (std::int64_t i = 0; i < sample.noise.numel(); ++i) {
    noise[static_cast<std::size_t>(i)] = factor * static_cast<double>(sample.noise[i]);
  }
  return assemble(sample.clean, noise, sample.dose_factor / factor);
}

void write_sample(const std::filesystem::path& dir, std::size_t index,
                  const PairedSample& sample, const Provenance& provenance) {
  Provenance p = provenance;
  p["dose_factor"] = std::to_string(sample.dose_factor);
  p["role"] = "clean";
  write_image(dir / pair_name(index, "clean"), sample.clean, p);
  p["role"] = "noisy";
  write_image(dir / pair_name(index, "noisy"), sample.noisy, p);
  p["role"] = "noise";
  write_image(dir / pair_name(index, "noise"), sample.noise, p);
}

PairedSample read_sample(const std::filesystem::path& dir, std::size_t index) {
  ImageFile clean = read_image(dir / pair_name(index, "clean"));
  ImageFile noisy = read_image(dir / pair_name(index, "noisy"));
  PairedSample s;
  s.clean = std::move(clean.image);
  s.noisy = std::move(noisy.image);
  require_same_shape(s.clean.shape(), s.noisy.shape(), "read_sample");
  s.noise = subtract(s.noisy, s.clean);
  auto it = noisy.provenance.find("dose_factor");
  s.dose_factor = it != noisy.provenance.end() ? std::stod(it->second) : kReferenceDoseFactor;
  return s;
}

std::size_t count_samples(const std::filesystem::path& dir) {
  std::size_t n = 0;
  while (std::filesystem::exists(dir / pair_name(n, "clean")) &&
         std::filesystem::exists(dir / pair_name(n, "noisy"))) {
    ++n;
  }
  return n;
}

}  // namespace nrtw::data
