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

#include "json.hpp"
#include "nrtw/core/param_set.hpp"
#include "nrtw/denoiser/network.hpp"

namespace nrtw::denoiser {

struct TrainConfig {
  std::int64_t iterations = 10000;
  double learning_rate = 1e-4;
  /// Fractions of `iterations` at which the rate is multiplied by `decay`.
  std::vector<double> milestones = {0.5, 0.75};
  double decay = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batch_size = 1;
  std::uint64_t seed = 0;
  /// Square random crop edge used for training; 0 trains on whole images.
  std::int64_t crop = 0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& config);

/// Learning rate in effect at zero-based iteration `iteration`.
double scheduled_learning_rate(const TrainConfig& config, std::int64_t iteration);

struct Checkpoint {
  NetworkConfig network;
  TrainConfig train;
  ParamSet params;
  std::vector<double> loss_history;
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
  std::map<std::string, std::string> metadata;
};

/// Throws kShapeMismatch unless the parameters match what the config builds.
void validate(const Checkpoint& ckpt);

/// NRTW-CKPT v1: the line "NRTW-CKPT v1", one line of JSON header
/// (architecture, training config, parameter names and shapes, seed,
/// dataset fingerprint, loss history, metadata), then every parameter's
/// little-endian float32 payload in header order.
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

}  // namespace nrtw::denoiser
