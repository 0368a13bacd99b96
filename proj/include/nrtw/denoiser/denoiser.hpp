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
#include <functional>
#include <string>
#include <vector>

#include "nrtw/data/image.hpp"
#include "nrtw/data/noise.hpp"
#include "nrtw/denoiser/checkpoint.hpp"

namespace nrtw::denoiser {

/// Called after every iteration with the zero-based iteration and its loss.
using TrainObserver = std::function<void(std::int64_t iteration, double loss)>;

/// Fits noisy -> clean with Adam on the per-element mean squared error in
/// the network intensity domain. Sample order and crops derive from
/// `train.seed`; the network is initialized from `init_seed`.
Checkpoint train(const std::vector<data::PairedSample>& dataset, const NetworkConfig& network,
                 const TrainConfig& train, std::uint64_t init_seed,
                 const TrainObserver& observer = {});

/// Continues training from the weights of `base` with fresh Adam moments.
Checkpoint fine_tune(const Checkpoint& base, const std::vector<data::PairedSample>& dataset,
                     const TrainConfig& train, const TrainObserver& observer = {});

/// SHA-256 over the encoded clean/noisy images, in dataset order.
std::string dataset_fingerprint(const std::vector<data::PairedSample>& dataset);

/// Default denoised image: phi_{w0}(x), HU in and HU out.
Image infer(const Checkpoint& ckpt, const Image& noisy);
Image infer(const NetworkConfig& network, const ParamSet& params, const Image& noisy);

/// phi applied `k` times (k = 0 returns the input unchanged).
Image recursive_infer(const Checkpoint& ckpt, const Image& noisy, int k);

}  // namespace nrtw::denoiser
