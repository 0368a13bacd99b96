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
#include <string>
#include <vector>

#include "nrtw/core/graph.hpp"
#include "nrtw/core/param_set.hpp"

namespace nrtw::denoiser {

enum class Architecture { kPlain, kUnet };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& name);

/// Both architectures use 3x3 convolutions, instance normalization and ReLU
/// in every hidden block; the output block is a bare convolution to one
/// channel. With `residual`, the network predicts a correction that is added
/// to its input and the output convolution starts at zero.
struct NetworkConfig {
  Architecture kind = Architecture::kPlain;
  // plain
  int plain_layers = 8;
  int plain_channels = 16;
  // unet
  int unet_depth = 5;
  int base_channels = 32;
  bool channel_doubling = true;
  int max_channels = 512;
  // shared
  int kernel_size = 3;
  bool residual = true;
  double norm_eps = 1e-5;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

void validate(const NetworkConfig& config);

/// Throws kShapeMismatch if a (N, 1, H, W) input cannot pass through the
/// architecture (U-Net extents must be divisible by 2^depth).
void check_input_shape(const NetworkConfig& config, const Shape& input);

/// One convolution block and the parameters it owns.
struct ConvBlock {
  std::string name;
  int in_channels = 0;
  int out_channels = 0;
  int stride = 1;
  bool norm_relu = true;
};

/// Every block in parameter order.
std::vector<ConvBlock> conv_blocks(const NetworkConfig& config);

/// Channel width at U-Net level `level` (0 = full resolution).
int unet_channels(const NetworkConfig& config, int level);

/// He-style fan-in initialization, deterministic per seed. Biases and
/// normalization shifts start at 0, normalization scales at 1.
ParamSet build_network(const NetworkConfig& config, std::uint64_t seed);

template <typename T>
struct ForwardResult {
  typename BasicGraph<T>::Var output;
  /// Deepest feature map (the plain net reports its last hidden block).
  typename BasicGraph<T>::Var bottleneck;
};

/// Registers `params` on `graph` and evaluates the network on `input`
/// (network-domain intensities).
template <typename T>
ForwardResult<T> forward(BasicGraph<T>& graph, const NetworkConfig& config,
                         const BasicParamSet<T>& params, typename BasicGraph<T>::Var input);

/// Inference-only forward pass on a network-domain tensor.
Tensor forward_values(const NetworkConfig& config, const ParamSet& params, const Tensor& input);

}  // namespace nrtw::denoiser
