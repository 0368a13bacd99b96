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
#include <vector>

#include "json.hpp"
#include "nrtw/data/noise.hpp"
#include "nrtw/data/phantom.hpp"

namespace nrtw::data {

struct DatasetSpec {
  std::int64_t size = 128;
  std::size_t count = 64;
  double sigma = 25.0;
  std::uint64_t seed = 0;
  /// Every sample rasterizes this spec (its jitter varies the anatomy); when
  /// unset each sample draws its own random body phantom.
  std::optional<PhantomSpec> phantom;
  /// Applied to the sigma-level noise after drawing; see rescale_noise.
  double noise_factor = 1.0;
};

void validate(const DatasetSpec& spec);

/// Seeds of sample i, derived from (seed, i) only, so a dataset can be
/// extended or subset without changing earlier samples.
struct SampleSeeds {
  std::uint64_t phantom = 0;
  std::uint64_t noise = 0;
};
SampleSeeds sample_seeds(std::uint64_t seed, std::size_t index);

PairedSample make_sample(const DatasetSpec& spec, std::size_t index);
std::vector<PairedSample> make_dataset(const DatasetSpec& spec);

std::vector<PairedSample> read_dataset(const std::filesystem::path& dir);

void to_json(nlohmann::json& j, const DatasetSpec& spec);
void from_json(const nlohmann::json& j, DatasetSpec& spec);

}  // namespace nrtw::data
