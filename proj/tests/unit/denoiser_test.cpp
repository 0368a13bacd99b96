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
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "expect_error.hpp"
#include "nrtw/core/ops.hpp"
#include "nrtw/data/phantom.hpp"
#include "nrtw/denoiser/denoiser.hpp"
#include "nrtw/util/bytes.hpp"

namespace nrtw::denoiser {
namespace {

namespace fs = std::filesystem;

std::int64_t count(const ParamSet& p) {
  std::int64_t n = 0;
  for (const auto& e : p.entries()) n += e.value.numel();
  return n;
}

// Weights, bias and (for hidden blocks) the normalization scale and shift.
std::int64_t block_params(std::int64_t in, std::int64_t out, std::int64_t k, bool norm) {
  return in * out * k * k + out + (norm ? 2 * out : 0);
}

NetworkConfig plain(int layers, int channels) {
  NetworkConfig c;
  c.plain_layers = layers;
  c.plain_channels = channels;
  return c;
}

NetworkConfig unet(int depth, int base) {
  NetworkConfig c;
  c.kind = Architecture::kUnet;
  c.unet_depth = depth;
  c.base_channels = base;
  return c;
}

data::PairedSample noisy_pair(std::int64_t size, double sigma, std::uint64_t seed) {
  data::NoiseSpec ns;
  ns.sigma = sigma;
  ns.seed = seed;
  return data::add_noise(data::generate_phantom(data::default_phantom_spec(size), 0), ns);
}

Checkpoint tiny_checkpoint(std::uint64_t seed = 1) {
  TrainConfig tc;
  tc.iterations = 30;
  tc.learning_rate = 1e-3;
  tc.seed = seed;
  return train({noisy_pair(32, 25.0, 1), noisy_pair(32, 25.0, 2)}, plain(3, 4), tc, seed);
}

TEST(Network, PlainParameterCountClosedForm) {
  for (auto [layers, channels] : {std::pair{8, 16}, std::pair{2, 3}, std::pair{5, 7}}) {
    const std::int64_t c = channels;
    const std::int64_t expect = (9 * c + 3 * c) + (layers - 2) * (9 * c * c + 3 * c) + (9 * c + 1);
    EXPECT_EQ(count(build_network(plain(layers, channels), 0)), expect) << layers << "x" << channels;
  }
  EXPECT_EQ(count(build_network(plain(8, 16), 0)), 14449);
}

TEST(Network, UnetParameterCountClosedForm) {
  // Widths 4, 8, 16 at levels 0..2.
  std::int64_t expect = block_params(1, 4, 3, true);
  expect += block_params(4, 8, 3, true) + block_params(8, 8, 3, true);
  expect += block_params(8, 16, 3, true) + block_params(16, 16, 3, true);
  expect += block_params(16, 8, 3, true) + block_params(16, 8, 3, true);
  expect += block_params(8, 4, 3, true) + block_params(8, 4, 3, true);
  expect += block_params(4, 1, 3, false);
  EXPECT_EQ(count(build_network(unet(2, 4), 0)), expect);

  NetworkConfig capped = unet(3, 4);
  capped.max_channels = 8;
  EXPECT_EQ(unet_channels(capped, 0), 4);
  EXPECT_EQ(unet_channels(capped, 1), 8);
  EXPECT_EQ(unet_channels(capped, 3), 8);
  NetworkConfig flat = unet(3, 4);
  flat.channel_doubling = false;
  EXPECT_EQ(unet_channels(flat, 3), 4);
}

TEST(Network, BuildIsDeterministicPerSeed) {
  for (const NetworkConfig& c : {plain(8, 16), unet(3, 4)}) {
    const ParamSet a = build_network(c, 42);
    const ParamSet b = build_network(c, 42);
    const ParamSet other = build_network(c, 43);
    ASSERT_EQ(a.size(), b.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].name, b[i].name);
      EXPECT_EQ(a[i].value, b[i].value);
      differs = differs || !(a[i].value == other[i].value);
    }
    EXPECT_TRUE(differs);
  }
}

TEST(Network, FanInInitialization) {
  const ParamSet p = build_network(plain(4, 32), 5);
  const Tensor& w = p[p.index_of("conv1.weight")].value;
  double s = 0.0;
  for (float v : w.data()) s += static_cast<double>(v) * v;
  EXPECT_NEAR(std::sqrt(s / static_cast<double>(w.numel())), std::sqrt(2.0 / (32.0 * 9.0)), 0.01);
  for (float v : p[p.index_of("conv1.bias")].value.data()) EXPECT_EQ(v, 0.0f);
  for (float v : p[p.index_of("conv1.norm.scale")].value.data()) EXPECT_EQ(v, 1.0f);
  for (float v : p[p.index_of("out.weight")].value.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Network, UnetBottleneckReachesOnePixel) {
  for (int depth : {3, 4, 5}) {
    const NetworkConfig c = unet(depth, 2);
    const ParamSet p = build_network(c, 0);
    const std::int64_t side = std::int64_t{1} << depth;
    Graph g(false);
    const auto r = forward(g, c, p, g.constant(Tensor(Shape{1, 1, side, side}, 0.3f)));
    EXPECT_EQ(g.value(r.bottleneck).shape().h, 1);
    EXPECT_EQ(g.value(r.bottleneck).shape().w, 1);
    EXPECT_EQ(g.value(r.bottleneck).shape().c, unet_channels(c, depth));
    EXPECT_EQ(g.value(r.output).shape(), (Shape{1, 1, side, side}));
  }
}

TEST(Network, ShapeChecks) {
  EXPECT_NO_THROW(check_input_shape(plain(8, 16), Shape{1, 1, 37, 21}));
  EXPECT_ERROR_CODE(check_input_shape(plain(8, 16), Shape{1, 2, 8, 8}), ErrorCode::kShapeMismatch);
  EXPECT_ERROR_CODE(check_input_shape(unet(3, 4), Shape{1, 1, 12, 16}), ErrorCode::kShapeMismatch);
  EXPECT_NO_THROW(check_input_shape(unet(3, 4), Shape{1, 1, 24, 16}));
  EXPECT_ERROR_CODE(validate(plain(1, 16)), ErrorCode::kInvalidArgument);
  NetworkConfig even = plain(8, 16);
  even.kernel_size = 2;
  EXPECT_ERROR_CODE(validate(even), ErrorCode::kInvalidArgument);
}

TEST(Network, UntrainedResidualNetIsIdentity) {
  const NetworkConfig c = plain(8, 16);
  const data::PairedSample s = noisy_pair(32, 25.0, 0);
  const Image y = infer(c, build_network(c, 0), s.noisy);
  EXPECT_EQ(y.shape(), s.noisy.shape());
  for (std::int64_t i = 0; i < y.numel(); ++i) ASSERT_NEAR(y[i], s.noisy[i], 1e-3);
}

TEST(Schedule, MilestoneDecay) {
  TrainConfig tc;
  tc.iterations = 1000;
  EXPECT_DOUBLE_EQ(scheduled_learning_rate(tc, 0), 1e-4);
  EXPECT_DOUBLE_EQ(scheduled_learning_rate(tc, 499), 1e-4);
  EXPECT_NEAR(scheduled_learning_rate(tc, 500), 1e-5, 1e-18);
  EXPECT_NEAR(scheduled_learning_rate(tc, 749), 1e-5, 1e-18);
  EXPECT_NEAR(scheduled_learning_rate(tc, 750), 1e-6, 1e-18);
  EXPECT_NEAR(scheduled_learning_rate(tc, 999), 1e-6, 1e-18);
}

TEST(Train, ValidatesInputs) {
  TrainConfig tc;
  tc.iterations = 1;
  EXPECT_ERROR_CODE(train({}, plain(2, 2), tc, 0), ErrorCode::kInvalidArgument);
  tc.iterations = 0;
  EXPECT_ERROR_CODE(train({noisy_pair(32, 1.0, 0)}, plain(2, 2), tc, 0),
                    ErrorCode::kInvalidArgument);
  tc.iterations = 1;
  tc.learning_rate = 0.0;
  EXPECT_ERROR_CODE(train({noisy_pair(32, 1.0, 0)}, plain(2, 2), tc, 0),
                    ErrorCode::kInvalidArgument);
  tc.learning_rate = 1e-4;
  EXPECT_ERROR_CODE(train({noisy_pair(32, 1.0, 0), noisy_pair(48, 1.0, 0)}, plain(2, 2), tc, 0),
                    ErrorCode::kShapeMismatch);
  EXPECT_ERROR_CODE(train({noisy_pair(40, 1.0, 0)}, unet(4, 2), tc, 0), ErrorCode::kShapeMismatch);
}

TEST(Train, NoiselessDatasetReachesTinyLoss) {
  TrainConfig tc;
  tc.iterations = 500;
  const Checkpoint ck = train({noisy_pair(32, 0.0, 0)}, plain(2, 16), tc, 3);
  ASSERT_EQ(ck.loss_history.size(), 500u);
  for (double l : ck.loss_history) ASSERT_LE(l, 1e-6);
}

TEST(Train, SinglePairOverfits) {
  TrainConfig tc;
  tc.iterations = 2000;
  const Checkpoint ck = train({noisy_pair(64, 25.0, 3)}, plain(8, 16), tc, 7);
  const auto& h = ck.loss_history;
  ASSERT_EQ(h.size(), 2000u);
  EXPECT_LT(h[1999], 0.01 * h[0]);
  const auto tenth = h.size() / 10;
  const double first = std::accumulate(h.begin(), h.begin() + tenth, 0.0);
  const double last = std::accumulate(h.end() - tenth, h.end(), 0.0);
  EXPECT_LT(last, first);
}

TEST(Train, FineTuneStartsFromBaseWeights) {
  const Checkpoint base = tiny_checkpoint(2);
  const data::PairedSample pair = noisy_pair(32, 25.0, 9);
  TrainConfig tc;
  tc.iterations = 40;
  tc.learning_rate = 1e-3;
  const Checkpoint tuned = fine_tune(base, {pair}, tc);
  const Image out = infer(base, pair.noisy);
  const double mse = ops::mse_loss(hu_to_unit(out), hu_to_unit(pair.clean));
  EXPECT_NEAR(tuned.loss_history.front(), mse, 1e-6 * mse);
  EXPECT_LT(tuned.loss_history.back(), tuned.loss_history.front());
  EXPECT_EQ(tuned.network, base.network);
  EXPECT_EQ(tuned.metadata.at("fine_tuned_from"), base.dataset_fingerprint);
}

TEST(Train, SameSeedSameHistory) {
  const Checkpoint a = tiny_checkpoint(4);
  const Checkpoint b = tiny_checkpoint(4);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(encode_checkpoint(a), encode_checkpoint(b));
  EXPECT_NE(tiny_checkpoint(5).loss_history, a.loss_history);
}

TEST(Train, CropsAndObserver) {
  TrainConfig tc;
  tc.iterations = 12;
  tc.crop = 16;
  tc.batch_size = 2;
  std::vector<std::int64_t> seen;
  const Checkpoint ck = train({noisy_pair(32, 25.0, 1), noisy_pair(32, 25.0, 2)}, plain(3, 4), tc,
                             0, [&](std::int64_t it, double) { seen.push_back(it); });
  ASSERT_EQ(seen.size(), 12u);
  EXPECT_EQ(seen.front(), 0);
  EXPECT_EQ(seen.back(), 11);
  EXPECT_EQ(ck.loss_history.size(), 12u);
  tc.crop = 48;
  EXPECT_ERROR_CODE(train({noisy_pair(32, 25.0, 1)}, plain(3, 4), tc, 0),
                    ErrorCode::kInvalidArgument);
}

TEST(Train, DivergenceAbortsWithDiagnostic) {
  TrainConfig tc;
  tc.iterations = 200;
  tc.learning_rate = 1e38;
  tc.milestones = {};
  NetworkConfig c = plain(3, 4);
  c.residual = false;
  try {
    train({noisy_pair(32, 25.0, 1)}, c, tc, 0);
    ADD_FAILURE() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos) << e.what();
  }
}

TEST(Train, RecordsProvenance) {
  const std::vector<data::PairedSample> ds{noisy_pair(32, 25.0, 1), noisy_pair(32, 25.0, 2)};
  TrainConfig tc;
  tc.iterations = 2;
  const Checkpoint ck = train(ds, plain(3, 4), tc, 9);
  EXPECT_EQ(ck.seed, 9u);
  EXPECT_EQ(ck.dataset_fingerprint, dataset_fingerprint(ds));
  EXPECT_EQ(ck.dataset_fingerprint.size(), 64u);
  EXPECT_NE(dataset_fingerprint({ds[1], ds[0]}), ck.dataset_fingerprint);
  EXPECT_EQ(ck.train, tc);
  EXPECT_EQ(ck.network, plain(3, 4));
}

TEST(Infer, DeterministicPureAndShapePreserving) {
  const Checkpoint ck = tiny_checkpoint();
  const std::string before = util::sha256_hex(encode_checkpoint(ck));
  const Image x = noisy_pair(32, 25.0, 7).noisy;
  const Image a = infer(ck, x);
  const Image b = infer(ck, x);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.shape(), x.shape());
  EXPECT_EQ(util::sha256_hex(encode_checkpoint(ck)), before);
  EXPECT_ERROR_CODE(infer(ck, Tensor(Shape{1, 2, 32, 32})), ErrorCode::kShapeMismatch);
}

TEST(Infer, RecursiveDefinition) {
  const Checkpoint ck = tiny_checkpoint();
  const Image x = noisy_pair(32, 25.0, 8).noisy;
  EXPECT_EQ(recursive_infer(ck, x, 0), x);
  EXPECT_EQ(recursive_infer(ck, x, 1), infer(ck, x));
  EXPECT_EQ(recursive_infer(ck, x, 3), infer(ck, infer(ck, infer(ck, x))));
  EXPECT_ERROR_CODE(recursive_infer(ck, x, -1), ErrorCode::kInvalidArgument);
}

TEST(Checkpoint, WriteReadWriteIsByteIdentical) {
  const fs::path dir = fs::temp_directory_path() / "nrtw_ckpt_roundtrip";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Checkpoint ck = tiny_checkpoint();
  ck.metadata["note"] = "round trip";
  write_checkpoint(dir / "a.ckpt", ck);
  const Checkpoint back = read_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(back.network, ck.network);
  EXPECT_EQ(back.train, ck.train);
  EXPECT_EQ(back.loss_history, ck.loss_history);
  EXPECT_EQ(back.seed, ck.seed);
  EXPECT_EQ(back.dataset_fingerprint, ck.dataset_fingerprint);
  EXPECT_EQ(back.metadata, ck.metadata);
  for (std::size_t i = 0; i < ck.params.size(); ++i) EXPECT_EQ(back.params[i].value, ck.params[i].value);
  write_checkpoint(dir / "b.ckpt", back);
  EXPECT_EQ(util::read_file(dir / "a.ckpt"), util::read_file(dir / "b.ckpt"));
  fs::remove_all(dir);
}

TEST(Checkpoint, UnetRoundTrip) {
  Checkpoint ck;
  ck.network = unet(2, 3);
  ck.params = build_network(ck.network, 11);
  const std::string bytes = encode_checkpoint(ck);
  EXPECT_EQ(encode_checkpoint(decode_checkpoint(bytes)), bytes);
}

TEST(Checkpoint, RejectsCorruptOrInconsistent) {
  const std::string good = encode_checkpoint(tiny_checkpoint());
  EXPECT_ERROR_CODE(decode_checkpoint("NRTW-CKPT v9\n{}\n"), ErrorCode::kFormat);
  EXPECT_ERROR_CODE(decode_checkpoint(good.substr(0, good.size() - 1)), ErrorCode::kFormat);
  EXPECT_ERROR_CODE(decode_checkpoint(good + "extra"), ErrorCode::kFormat);
  Checkpoint bad = tiny_checkpoint();
  bad.network.plain_channels = 5;
  EXPECT_ERROR_CODE(validate(bad), ErrorCode::kShapeMismatch);
  EXPECT_ERROR_CODE(encode_checkpoint(bad), ErrorCode::kShapeMismatch);
  EXPECT_ERROR_CODE(read_checkpoint("/nonexistent/x.ckpt"), ErrorCode::kIo);
}

}  // namespace
}  // namespace nrtw::denoiser
