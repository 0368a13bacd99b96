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
#include "nrtw/data/dataset.hpp"

#include <array>
#include <cmath>
#include <random>

namespace nrtw::data {

void validate(const DatasetSpec& spec) {
  require(spec.size >= 16, ErrorCode::kInvalidArgument, "dataset: size must be >= 16");
  require(spec.count >= 1, ErrorCode::kInvalidArgument, "dataset: count must be >= 1");
  require(std::isfinite(spec.sigma) && spec.sigma >= 0.0, ErrorCode::kInvalidArgument,
          "dataset: sigma must be finite and >= 0");
  require(std::isfinite(spec.noise_factor) && spec.noise_factor > 0.0,
          ErrorCode::kInvalidArgument, "dataset: noise_factor must be > 0");
  if (spec.phantom) {
    require(spec.phantom->height == spec.size && spec.phantom->width == spec.size,
            ErrorCode::kInvalidArgument, "dataset: phantom canvas must be size x size");
    validate(*spec.phantom);
  }
}

SampleSeeds sample_seeds(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  std::array<std::uint32_t, 4> words{};
  seq.generate(words.begin(), words.end());
  return {(std::uint64_t{words[0]} << 32) | words[1], (std::uint64_t{words[2]} << 32) | words[3]};
}

PairedSample make_sample(const DatasetSpec& spec, std::size_t index) {
  const SampleSeeds seeds = sample_seeds(spec.seed, index);
  const Image clean =
      spec.phantom ? generate_phantom(*spec.phantom, seeds.phantom)
                   : generate_phantom(random_phantom_spec(spec.size, seeds.phantom), seeds.phantom);
  NoiseSpec noise;
  noise.sigma = spec.sigma;
  noise.seed = seeds.noise;
  return rescale_noise(add_noise(clean, noise), spec.noise_factor);
}

std::vector<PairedSample> make_dataset(const DatasetSpec& spec) {
  validate(spec);
  std::vector<PairedSample> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) out.push_back(make_sample(spec, i));
  return out;
}

std::vector<PairedSample> read_dataset(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorCode::kNotFound,
          "dataset: no directory " + dir.string());
  const std::size_t n = count_samples(dir);
  require(n > 0, ErrorCode::kNotFound, "dataset: no pair_NNNN samples in " + dir.string());
  std::vector<PairedSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(read_sample(dir, i));
  return out;
}

void to_json(nlohmann::json& j, const DatasetSpec& spec) {
  j = nlohmann::json{{"size", spec.size},
                     {"count", spec.count},
                     {"sigma", spec.sigma},
                     {"seed", spec.seed},
                     {"noise_factor", spec.noise_factor},
                     {"phantom", nullptr}};
  if (spec.phantom) j["phantom"] = *spec.phantom;
}

void from_json(const nlohmann::json& j, DatasetSpec& spec) {
  spec = DatasetSpec{};
  spec.size = j.value("size", spec.size);
  spec.count = j.value("count", spec.count);
  spec.sigma = j.value("sigma", spec.sigma);
  spec.seed = j.value("seed", spec.seed);
  spec.noise_factor = j.value("noise_factor", spec.noise_factor);
  if (j.contains("phantom") && !j.at("phantom").is_null()) {
    spec.phantom = j.at("phantom").get<PhantomSpec>();
  }
}

}  // namespace nrtw::data
