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
#include "nrtw/denoiser/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string_view>

#include "nrtw/core/optimizer.hpp"
#include "nrtw/util/bytes.hpp"

namespace nrtw::denoiser {
namespace {

// Copies an (h, w) window of each selected unit-domain image into one batch.
Tensor gather(const std::vector<Tensor>& images, const std::vector<std::size_t>& picks,
              const std::vector<std::pair<std::int64_t, std::int64_t>>& offsets,
              std::int64_t h, std::int64_t w) {
  Tensor batch(Shape{static_cast<std::int64_t>(picks.size()), 1, h, w});
  for (std::size_t b = 0; b < picks.size(); ++b) {
    const Tensor& src = images[picks[b]];
    const auto [r0, c0] = offsets[b];
    for (std::int64_t r = 0; r < h; ++r) {
      for (std::int64_t c = 0; c < w; ++c) {
        batch.at(static_cast<std::int64_t>(b), 0, r, c) = src.at(0, 0, r0 + r, c0 + c);
      }
    }
  }
  return batch;
}

}  // namespace

std::string dataset_fingerprint(const std::vector<data::PairedSample>& dataset) {
  std::string blob;
  for (const auto& s : dataset) {
    blob += util::sha256_hex(encode_image(s.clean));
    blob += util::sha256_hex(encode_image(s.noisy));
  }
  return util::sha256_hex(blob);
}

namespace {

Checkpoint fit(const std::vector<data::PairedSample>& dataset, const NetworkConfig& network,
               const TrainConfig& config, std::uint64_t init_seed, const ParamSet* initial,
               const TrainObserver& observer) {
  require(!dataset.empty(), ErrorCode::kInvalidArgument, "train: dataset is empty");
  validate(network);
  validate(config);

  const Shape first = dataset.front().clean.shape();
  std::vector<Tensor> noisy_unit, clean_unit;
  noisy_unit.reserve(dataset.size());
  clean_unit.reserve(dataset.size());
  for (const auto& s : dataset) {
    require_image(s.clean, "train sample");
    require_same_shape(s.clean.shape(), first, "train: all samples must share one extent");
    require_same_shape(s.noisy.shape(), first, "train: noisy/clean extent");
    noisy_unit.push_back(hu_to_unit(s.noisy));
    clean_unit.push_back(hu_to_unit(s.clean));
  }
  const std::int64_t crop_h = config.crop > 0 ? config.crop : first.h;
  const std::int64_t crop_w = config.crop > 0 ? config.crop : first.w;
  require(crop_h <= first.h && crop_w <= first.w, ErrorCode::kInvalidArgument,
          "train: crop exceeds image extent");
  check_input_shape(network, Shape{1, 1, crop_h, crop_w});

  Checkpoint ckpt;
  ckpt.network = network;
  ckpt.train = config;
  ckpt.seed = init_seed;
  ckpt.dataset_fingerprint = dataset_fingerprint(dataset);
  ckpt.params = initial ? *initial : build_network(network, init_seed);
  ckpt.loss_history.reserve(static_cast<std::size_t>(config.iterations));

  OptimizerHyperparams hyper;
  hyper.learning_rate = config.learning_rate;
  hyper.beta1 = config.beta1;
  hyper.beta2 = config.beta2;
  OptimizerState state = OptimizerState::adam(ckpt.params, hyper);

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  std::uniform_int_distribution<std::int64_t> row_offset(0, first.h - crop_h);
  std::uniform_int_distribution<std::int64_t> col_offset(0, first.w - crop_w);

  for (std::int64_t it = 0; it < config.iterations; ++it) {
    std::vector<std::size_t> picks;
    std::vector<std::pair<std::int64_t, std::int64_t>> offsets;
    for (int b = 0; b < config.batch_size; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      picks.push_back(order[cursor++]);
      offsets.emplace_back(row_offset(rng), col_offset(rng));
    }

    state.hyper.learning_rate = scheduled_learning_rate(config, it);
    auto diverged = [&](const std::string& detail) {
      char lr[32];
      std::snprintf(lr, sizeof lr, "%g", state.hyper.learning_rate);
      fail(ErrorCode::kNonFinite,
           "train: diverged at iteration " + std::to_string(it) + " (lr " + lr + "): " + detail);
    };
    try {
      Graph graph;
      auto input = graph.constant(gather(noisy_unit, picks, offsets, crop_h, crop_w));
      auto target = graph.constant(gather(clean_unit, picks, offsets, crop_h, crop_w));
      auto result = forward(graph, network, ckpt.params, input);
      auto loss = graph.mse_loss(result.output, target);
      const double loss_value = graph.scalar(loss);
      if (!std::isfinite(loss_value)) diverged("non-finite loss");
      ckpt.loss_history.push_back(loss_value);
      if (observer) observer(it, loss_value);

      ParamSet grads = graph.backward(loss);
      adam_step(ckpt.params, grads, state);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFinite || std::string_view(e.what()).starts_with("train:")) {
        throw;
      }
      diverged(e.what());
    }
  }
  ckpt.metadata["optimizer"] = "adam";
  ckpt.metadata["loss"] = "mean_squared_error";
  ckpt.metadata["intensity_domain"] = "unit:[-1024,3071]HU";
  return ckpt;
}

}  // namespace

Checkpoint train(const std::vector<data::PairedSample>& dataset, const NetworkConfig& network,
                 const TrainConfig& config, std::uint64_t init_seed,
                 const TrainObserver& observer) {
  return fit(dataset, network, config, init_seed, nullptr, observer);
}

Checkpoint fine_tune(const Checkpoint& base, const std::vector<data::PairedSample>& dataset,
                     const TrainConfig& config, const TrainObserver& observer) {
  require(base.params.size() == build_network(base.network, 0).size(), ErrorCode::kInvalidArgument,
          "fine_tune: checkpoint parameters do not match its network");
  Checkpoint ckpt = fit(dataset, base.network, config, base.seed, &base.params, observer);
  ckpt.metadata["fine_tuned_from"] = base.dataset_fingerprint;
  return ckpt;
}

Image infer(const NetworkConfig& network, const ParamSet& params, const Image& noisy) {
  require_image(noisy, "infer");
  return unit_to_hu(forward_values(network, params, hu_to_unit(noisy)));
}

Image infer(const Checkpoint& ckpt, const Image& noisy) {
  return infer(ckpt.network, ckpt.params, noisy);
}

Image recursive_infer(const Checkpoint& ckpt, const Image& noisy, int k) {
  require(k >= 0, ErrorCode::kInvalidArgument, "recursive_infer: K must be >= 0");
  require_image(noisy, "recursive_infer");
  Image current = noisy;
  for (int i = 0; i < k; ++i) current = infer(ckpt, current);
  return current;
}

}  // namespace nrtw::denoiser
