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
#include <optional>
#include <string>

#include "nrtw/data/image.hpp"

namespace nrtw::data {

/// Quarter dose is the reference tier of a freshly synthesized sample.
inline constexpr double kReferenceDoseFactor = 0.25;

struct NoiseSpec {
  double sigma = 25.0;  // HU
  /// Optional odd-sized correlation kernel (1, 1, k, k); normalized to unit L2
  /// norm by add_noise, applied circularly so the field stays stationary.
  std::optional<Tensor> kernel;
  std::uint64_t seed = 0;
  double dose_factor = kReferenceDoseFactor;
};

void validate(const NoiseSpec& spec);

/// Clean image y, noisy image x and the additive component eps, with
/// noisy - clean == noise holding exactly in float arithmetic.
struct PairedSample {
  Image clean;
  Image noisy;
  Image noise;
  double dose_factor = kReferenceDoseFactor;
};

/// x = y + eps with eps seeded Gaussian white noise of standard deviation
/// sigma (optionally correlated by the kernel).
PairedSample add_noise(const Image& clean, const NoiseSpec& spec);

/// clean + factor * noise. The dose tier follows the ablation convention
/// dose' = dose / factor (0.5 -> half dose, 2 -> 1/8, 4 -> 1/16 from 1/4).
PairedSample rescale_noise(const PairedSample& sample, double factor);

/// Sample directory layout: pair_NNNN.{clean,noisy,noise}.nrtwimg.
void write_sample(const std::filesystem::path& dir, std::size_t index,
                  const PairedSample& sample, const Provenance& provenance = {});
PairedSample read_sample(const std::filesystem::path& dir, std::size_t index);
/// Number of consecutive pair_NNNN files present, starting at 0.
std::size_t count_samples(const std::filesystem::path& dir);

}  // namespace nrtw::data
