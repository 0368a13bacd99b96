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
#include "nrtw/denoiser/checkpoint.hpp"

#include <cmath>

#include "nrtw/util/bytes.hpp"

namespace nrtw::denoiser {
namespace {

constexpr std::string_view kCheckpointMagic = "NRTW-CKPT v1";

}  // namespace

void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = nlohmann::json{{"kind", to_string(c.kind)},
                     {"plain_layers", c.plain_layers},
                     {"plain_channels", c.plain_channels},
                     {"unet_depth", c.unet_depth},
                     {"base_channels", c.base_channels},
                     {"channel_doubling", c.channel_doubling},
                     {"max_channels", c.max_channels},
                     {"kernel_size", c.kernel_size},
                     {"residual", c.residual},
                     {"norm_eps", c.norm_eps},
                     {"normalization", "instance"},
                     {"activation", "relu"}};
}

void from_json(const nlohmann::json& j, NetworkConfig& c) {
  c = NetworkConfig{};
  c.kind = parse_architecture(j.value("kind", std::string("plain")));
  c.plain_layers = j.value("plain_layers", c.plain_layers);
  c.plain_channels = j.value("plain_channels", c.plain_channels);
  c.unet_depth = j.value("unet_depth", c.unet_depth);
  c.base_channels = j.value("base_channels", c.base_channels);
  c.channel_doubling = j.value("channel_doubling", c.channel_doubling);
  c.max_channels = j.value("max_channels", c.max_channels);
  c.kernel_size = j.value("kernel_size", c.kernel_size);
  c.residual = j.value("residual", c.residual);
  c.norm_eps = j.value("norm_eps", c.norm_eps);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"iterations", c.iterations}, {"learning_rate", c.learning_rate},
                     {"milestones", c.milestones}, {"decay", c.decay},
                     {"beta1", c.beta1},           {"beta2", c.beta2},
                     {"batch_size", c.batch_size}, {"seed", c.seed},
                     {"crop", c.crop}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c = TrainConfig{};
  c.iterations = j.value("iterations", c.iterations);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.milestones = j.value("milestones", c.milestones);
  c.decay = j.value("decay", c.decay);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.crop = j.value("crop", c.crop);
}

void validate(const TrainConfig& c) {
  require(c.iterations > 0, ErrorCode::kInvalidArgument, "train: iterations must be > 0");
  require(c.learning_rate > 0.0 && std::isfinite(c.learning_rate), ErrorCode::kInvalidArgument,
          "train: learning rate must be > 0");
  require(c.decay > 0.0, ErrorCode::kInvalidArgument, "train: decay factor must be > 0");
  require(c.batch_size >= 1, ErrorCode::kInvalidArgument, "train: batch size must be >= 1");
  require(c.crop >= 0, ErrorCode::kInvalidArgument, "train: crop must be >= 0");
  for (double m : c.milestones) {
    require(m > 0.0 && m < 1.0, ErrorCode::kInvalidArgument,
            "train: milestones are fractions in (0, 1)");
  }
}

double scheduled_learning_rate(const TrainConfig& c, std::int64_t iteration) {
  double lr = c.learning_rate;
  for (double m : c.milestones) {
    const auto at = static_cast<std::int64_t>(std::llround(m * static_cast<double>(c.iterations)));
    if (iteration >= at) lr *= c.decay;
  }
  return lr;
}

void validate(const Checkpoint& ckpt) {
  std::vector<std::pair<std::string, Shape>> expected;
  const std::int64_t k = ckpt.network.kernel_size;
  for (const auto& b : conv_blocks(ckpt.network)) {
    const Shape per_channel{1, b.out_channels, 1, 1};
    expected.emplace_back(b.name + ".weight", Shape{b.out_channels, b.in_channels, k, k});
    expected.emplace_back(b.name + ".bias", per_channel);
    if (b.norm_relu) {
      expected.emplace_back(b.name + ".norm.scale", per_channel);
      expected.emplace_back(b.name + ".norm.shift", per_channel);
    }
  }
  bool ok = expected.size() == ckpt.params.size();
  for (std::size_t i = 0; ok && i < expected.size(); ++i) {
    ok = expected[i].first == ckpt.params[i].name &&
         expected[i].second == ckpt.params[i].value.shape();
  }
  require(ok, ErrorCode::kShapeMismatch,
          "checkpoint parameters do not match the " + to_string(ckpt.network.kind) +
              " network config");
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  validate(ckpt);
  nlohmann::json params = nlohmann::json::array();
  for (const auto& e : ckpt.params.entries()) {
    const Shape& s = e.value.shape();
    params.push_back({{"name", e.name}, {"shape", {s.n, s.c, s.h, s.w}}});
  }
  nlohmann::json header = {{"format", "NRTW-CKPT"},
                           {"version", 1},
                           {"network", ckpt.network},
                           {"train", ckpt.train},
                           {"seed", ckpt.seed},
                           {"dataset_fingerprint", ckpt.dataset_fingerprint},
                           {"params", params},
                           {"loss_history", ckpt.loss_history},
                           {"metadata", ckpt.metadata},
                           {"dtype", "float32-le"}};
  std::string out(kCheckpointMagic);
  out += '\n';
  out += header.dump();
  out += '\n';
  for (const auto& e : ckpt.params.entries()) util::append_f32_le(out, e.value.data());
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  const std::size_t magic_end = bytes.find('\n');
  if (magic_end == std::string_view::npos || bytes.substr(0, magic_end) != kCheckpointMagic) {
    fail(ErrorCode::kFormat, "not an NRTW-CKPT v1 file (bad magic line)");
  }
  const std::size_t header_end = bytes.find('\n', magic_end + 1);
  if (header_end == std::string_view::npos) fail(ErrorCode::kFormat, "NRTW-CKPT: missing header");

  Checkpoint ckpt;
  std::size_t offset = header_end + 1;
  try {
    const auto header =
        nlohmann::json::parse(bytes.substr(magic_end + 1, header_end - magic_end - 1));
    require(header.at("format") == "NRTW-CKPT" && header.at("version") == 1, ErrorCode::kFormat,
            "NRTW-CKPT: unsupported format/version");
    ckpt.network = header.at("network").get<NetworkConfig>();
    ckpt.train = header.at("train").get<TrainConfig>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.dataset_fingerprint = header.at("dataset_fingerprint").get<std::string>();
    ckpt.loss_history = header.at("loss_history").get<std::vector<double>>();
    ckpt.metadata = header.value("metadata", std::map<std::string, std::string>{});
    for (const auto& p : header.at("params")) {
      const auto dims = p.at("shape").get<std::vector<std::int64_t>>();
      require(dims.size() == 4, ErrorCode::kFormat, "NRTW-CKPT: parameter shape must be 4-D");
      Tensor t(Shape{dims[0], dims[1], dims[2], dims[3]});
      util::read_f32_le(bytes, offset, t.data());
      offset += static_cast<std::size_t>(t.numel()) * 4;
      ckpt.params.add(p.at("name").get<std::string>(), std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("NRTW-CKPT: malformed header: ") + e.what());
  }
  require(offset == bytes.size(), ErrorCode::kFormat,
          "NRTW-CKPT: " + std::to_string(bytes.size() - offset) + " trailing payload bytes");
  validate(ckpt);
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  util::write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(util::read_file(path));
}

}  // namespace nrtw::denoiser
