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
#include "nrtw/denoiser/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace nrtw::denoiser {

std::string to_string(Architecture arch) {
  return arch == Architecture::kPlain ? "plain" : "unet";
}

Architecture parse_architecture(const std::string& name) {
  if (name == "plain") return Architecture::kPlain;
  if (name == "unet") return Architecture::kUnet;
  fail(ErrorCode::kInvalidArgument, "unknown architecture '" + name + "' (plain|unet)");
}

void validate(const NetworkConfig& c) {
  require(c.kernel_size >= 1 && c.kernel_size % 2 == 1, ErrorCode::kInvalidArgument,
          "network: kernel size must be odd and positive");
  require(c.norm_eps > 0.0, ErrorCode::kInvalidArgument, "network: norm eps must be > 0");
  if (c.kind == Architecture::kPlain) {
    require(c.plain_layers >= 2, ErrorCode::kInvalidArgument,
            "network: plain net needs at least 2 layers");
    require(c.plain_channels >= 1, ErrorCode::kInvalidArgument,
            "network: plain channels must be >= 1");
  } else {
    require(c.unet_depth >= 1 && c.unet_depth <= 12, ErrorCode::kInvalidArgument,
            "network: unet depth must lie in [1, 12]");
    require(c.base_channels >= 1 && c.max_channels >= c.base_channels,
            ErrorCode::kInvalidArgument, "network: invalid unet channel widths");
  }
}

void check_input_shape(const NetworkConfig& config, const Shape& input) {
  require(input.c == 1 && input.h > 0 && input.w > 0 && input.n > 0, ErrorCode::kShapeMismatch,
          "network: expected (N, 1, H, W) input, got " + input.str());
  if (config.kind == Architecture::kUnet) {
    const std::int64_t m = std::int64_t{1} << config.unet_depth;
    require(input.h % m == 0 && input.w % m == 0, ErrorCode::kShapeMismatch,
            "network: unet depth " + std::to_string(config.unet_depth) +
                " needs extents divisible by " + std::to_string(m) + ", got " +
                std::to_string(input.h) + "x" + std::to_string(input.w));
  }
}

int unet_channels(const NetworkConfig& config, int level) {
  if (!config.channel_doubling) return config.base_channels;
  const std::int64_t width = static_cast<std::int64_t>(config.base_channels) << level;
  return static_cast<int>(std::min<std::int64_t>(width, config.max_channels));
}

std::vector<ConvBlock> conv_blocks(const NetworkConfig& c) {
  validate(c);
  std::vector<ConvBlock> blocks;
  if (c.kind == Architecture::kPlain) {
    for (int i = 0; i + 1 < c.plain_layers; ++i) {
      blocks.push_back({"conv" + std::to_string(i), i == 0 ? 1 : c.plain_channels,
                        c.plain_channels, 1, true});
    }
    blocks.push_back({"out", c.plain_channels, 1, 1, false});
    return blocks;
  }
  const int d = c.unet_depth;
  blocks.push_back({"enc0", 1, unet_channels(c, 0), 1, true});
  for (int l = 1; l <= d; ++l) {
    blocks.push_back({"down" + std::to_string(l), unet_channels(c, l - 1), unet_channels(c, l), 2,
                      true});
    blocks.push_back({"enc" + std::to_string(l), unet_channels(c, l), unet_channels(c, l), 1, true});
  }
  for (int l = d; l >= 1; --l) {
    blocks.push_back({"up" + std::to_string(l), unet_channels(c, l), unet_channels(c, l - 1), 1,
                      true});
    blocks.push_back({"fuse" + std::to_string(l), 2 * unet_channels(c, l - 1),
                      unet_channels(c, l - 1), 1, true});
  }
  blocks.push_back({"out", unet_channels(c, 0), 1, 1, false});
  return blocks;
}

ParamSet build_network(const NetworkConfig& config, std::uint64_t seed) {
  const auto blocks = conv_blocks(config);
  const int k = config.kernel_size;
  std::mt19937_64 rng(seed);
  ParamSet params;
  for (const auto& b : blocks) {
    Tensor weight(Shape{b.out_channels, b.in_channels, k, k});
    const bool zero_start = config.residual && b.name == "out";
    if (!zero_start) {
      const double stddev = std::sqrt(2.0 / static_cast<double>(b.in_channels * k * k));
      std::normal_distribution<double> normal(0.0, stddev);
      for (auto& v : weight.data()) v = static_cast<float>(normal(rng));
    }
    params.add(b.name + ".weight", std::move(weight));
    params.add(b.name + ".bias", Tensor(Shape{1, b.out_channels, 1, 1}));
    if (b.norm_relu) {
      params.add(b.name + ".norm.scale", Tensor(Shape{1, b.out_channels, 1, 1}, 1.0f));
      params.add(b.name + ".norm.shift", Tensor(Shape{1, b.out_channels, 1, 1}));
    }
  }
  return params;
}

template <typename T>
ForwardResult<T> forward(BasicGraph<T>& graph, const NetworkConfig& config,
                         const BasicParamSet<T>& params, typename BasicGraph<T>::Var input) {
  using Var = typename BasicGraph<T>::Var;
  check_input_shape(config, graph.value(input).shape());
  const auto blocks = conv_blocks(config);

  std::map<std::string, Var> vars;
  for (const auto& e : params.entries()) vars.emplace(e.name, graph.parameter(e.name, e.value));
  auto lookup = [&](const std::string& name) {
    auto it = vars.find(name);
    if (it == vars.end()) fail(ErrorCode::kShapeMismatch, "network: missing parameter '" + name + "'");
    return it->second;
  };
  std::map<std::string, const ConvBlock*> by_name;
  for (const auto& b : blocks) by_name.emplace(b.name, &b);

  const int pad = config.kernel_size / 2;
  const T eps = static_cast<T>(config.norm_eps);
  auto block = [&](const std::string& name, Var x) {
    const ConvBlock& b = *by_name.at(name);
    Var y = graph.conv2d(x, lookup(name + ".weight"), lookup(name + ".bias"), b.stride, pad);
    if (!b.norm_relu) return y;
    y = graph.instance_norm(y, lookup(name + ".norm.scale"), lookup(name + ".norm.shift"), eps);
    return graph.relu(y);
  };

  ForwardResult<T> result;
  Var features = input;
  if (config.kind == Architecture::kPlain) {
    for (int i = 0; i + 1 < config.plain_layers; ++i) {
      features = block("conv" + std::to_string(i), features);
    }
    result.bottleneck = features;
  } else {
    const int d = config.unet_depth;
    std::vector<Var> skips;
    skips.push_back(block("enc0", input));
    for (int l = 1; l <= d; ++l) {
      Var down = block("down" + std::to_string(l), skips.back());
      skips.push_back(block("enc" + std::to_string(l), down));
    }
    result.bottleneck = skips.back();
    features = skips.back();
    for (int l = d; l >= 1; --l) {
      Var up = block("up" + std::to_string(l), graph.upsample_nearest(features, 2));
      features = block("fuse" + std::to_string(l),
                       graph.concat_channels(up, skips[static_cast<std::size_t>(l - 1)]));
    }
  }
  Var out = block("out", features);
  if (config.residual) out = graph.add(out, input);
  result.output = out;
  return result;
}

Tensor forward_values(const NetworkConfig& config, const ParamSet& params, const Tensor& input) {
  Graph graph(/*record_gradients=*/false);
  auto x = graph.constant(input);
  auto result = forward(graph, config, params, x);
  return graph.value(result.output);
}

template ForwardResult<float> forward(BasicGraph<float>&, const NetworkConfig&,
                                      const BasicParamSet<float>&, BasicGraph<float>::Var);
template ForwardResult<double> forward(BasicGraph<double>&, const NetworkConfig&,
                                       const BasicParamSet<double>&, BasicGraph<double>::Var);

}  // namespace nrtw::denoiser
