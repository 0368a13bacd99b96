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

#include <atomic>
#include <chrono>
#include <filesystem>
#include <thread>

#include "expect_error.hpp"
#include "httplib.h"
#include "nrtw/data/phantom.hpp"
#include "nrtw/denoiser/denoiser.hpp"
#include "nrtw/did/curve_io.hpp"
#include "nrtw/service/http.hpp"
#include "nrtw/service/service.hpp"
#include "nrtw/util/bytes.hpp"

namespace nrtw::service {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::int64_t kSize = 32;

data::PairedSample sample(std::uint64_t noise_seed) {
  data::NoiseSpec ns;
  ns.seed = noise_seed;
  return data::add_noise(data::generate_phantom(data::default_phantom_spec(kSize), 0), ns);
}

const denoiser::Checkpoint& trained() {
  static const denoiser::Checkpoint ck = [] {
    denoiser::NetworkConfig nc;
    nc.plain_layers = 3;
    nc.plain_channels = 4;
    denoiser::TrainConfig tc;
    tc.iterations = 60;
    tc.learning_rate = 1e-3;
    return denoiser::train({sample(1), sample(2)}, nc, tc, 5);
  }();
  return ck;
}

// Untrained residual net: its output conv starts at zero, so it passes the
// input through up to the intensity mapping.
denoiser::Checkpoint passthrough() {
  denoiser::Checkpoint ck;
  ck.network.plain_layers = 2;
  ck.network.plain_channels = 2;
  ck.params = denoiser::build_network(ck.network, 3);
  return ck;
}

struct Fixture {
  explicit Fixture(const std::string& name)
      : root(fs::temp_directory_path() / ("nrtw_service_" + name)) {
    fs::remove_all(root);
    denoiser::write_checkpoint(root / "ckpts" / "tiny.nrtwckpt", trained());
    denoiser::write_checkpoint(root / "ckpts" / "identity.nrtwckpt", passthrough());
  }
  ~Fixture() { fs::remove_all(root); }

  ServiceOptions options() const { return {root / "ckpts", root / "state", {}}; }

  fs::path root;
};

json phantom_request(const std::string& ckpt = "tiny") {
  return {{"checkpoint_id", ckpt},
          {"phantom", {{"size", kSize}, {"seed", 0}, {"sigma", 25.0}, {"noise_seed", 7}}}};
}

json long_sweep(const std::string& direction) {
  return {{"direction", direction},
          {"config", {{"max_iterations", 1000000}, {"stop_threshold", 1e-12}, {"cadence", 1}}}};
}

json quick_sweep(const std::string& direction) {
  return {{"direction", direction}, {"config", {{"max_iterations", 40}, {"cadence", 5}}}};
}

void wait_for_count(const Service& s, const std::string& id, std::size_t n) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(60);
  while (s.curve(id).at("count").get<std::size_t>() < n) {
    ASSERT_LT(std::chrono::steady_clock::now(), deadline) << "curve did not grow";
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

std::vector<std::int64_t> indices(const json& curve) {
  std::vector<std::int64_t> out;
  for (const auto& c : curve.at("candidates")) out.push_back(c.at("index").get<std::int64_t>());
  return out;
}

// ---------------------------------------------------------------- registry

TEST(Registry, ListsAddsAndRejects) {
  Fixture f("registry");
  CheckpointRegistry reg(f.root / "ckpts");
  const json listed = reg.list();
  ASSERT_EQ(listed.size(), 2u);
  EXPECT_EQ(listed[0].at("id"), "identity");
  EXPECT_EQ(listed[1].at("id"), "tiny");
  EXPECT_EQ(listed[1].at("sha256"), util::sha256_file(f.root / "ckpts" / "tiny.nrtwckpt"));

  const std::string bytes = denoiser::encode_checkpoint(trained());
  auto [entry, created] = reg.add(bytes, std::nullopt);
  EXPECT_TRUE(created);
  EXPECT_EQ(entry.at("id").get<std::string>(), util::sha256_hex(bytes).substr(0, 16));
  EXPECT_FALSE(reg.add(bytes, std::nullopt).second);
  EXPECT_FALSE(reg.add(bytes, "tiny").second);
  EXPECT_ERROR_CODE(reg.add(denoiser::encode_checkpoint(passthrough()), "tiny"),
                    ErrorCode::kConflict);
  EXPECT_ERROR_CODE(reg.add("not a checkpoint", "junk"), ErrorCode::kFormat);
  EXPECT_ERROR_CODE(reg.add(bytes, "../escape"), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(reg.get("missing"), ErrorCode::kNotFound);
  EXPECT_EQ(reg.list().size(), 3u);
  EXPECT_EQ(reg.get("tiny")->params, trained().params);
}

TEST(MergeConfig, AppliesKnownKeysOnly) {
  const did::DIDConfig base;
  const auto c = merge_config(base, {{"learning_rate", 1e-3}, {"stop_reference", "image"}}, false);
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.stop_reference, did::StopReference::kImage);
  EXPECT_EQ(c.momentum, base.momentum);
  EXPECT_EQ(merge_config(base, json(), false), base);
  EXPECT_EQ(merge_config(base, {{"k", 2}}, true).k, 2);
  EXPECT_ERROR_CODE(merge_config(base, {{"k", 2}}, false), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(merge_config(base, {{"eta", 1}}, false), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(merge_config(base, {{"momentum", 1.0}}, false), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(merge_config(base, {{"cadence", "ten"}}, false), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(merge_config(base, json::array(), false), ErrorCode::kInvalidArgument);
}

// ---------------------------------------------------------------- sessions

TEST(Session, PhantomSessionHasDefaultCandidate) {
  Fixture f("create");
  Service s(f.options());
  const json out = s.create_session(phantom_request());
  const std::string id = out.at("id");
  EXPECT_EQ(out.at("candidate").at("index"), 0);
  EXPECT_TRUE(out.at("has_clean").get<bool>());
  EXPECT_EQ(out.at("height"), kSize);

  const json curve = s.curve(id);
  EXPECT_EQ(curve.at("index_range"), json::array({0, 0}));
  EXPECT_EQ(curve.at("count"), 1);
  EXPECT_EQ(curve.at("directions").at("low_noise").at("status"), "idle");
  EXPECT_TRUE(curve.at("candidates")[0].at("metrics").at("roi_std").contains("flat"));

  const Image expect = denoiser::infer(trained(), sample(7).noisy);
  const std::string bytes = s.candidate_bytes(id, 0);
  EXPECT_EQ(decode_image(bytes).image, expect);
  EXPECT_EQ(s.candidate_bytes(id, 0), bytes);
  EXPECT_EQ(util::sha256_hex(bytes), curve.at("candidates")[0].at("sha256"));
  EXPECT_EQ(s.session_ids(), std::vector<std::string>{id});
}

TEST(Session, CreationErrors) {
  Fixture f("create_errors");
  Service s(f.options());
  EXPECT_ERROR_CODE(s.create_session(phantom_request("nope")), ErrorCode::kNotFound);
  EXPECT_ERROR_CODE(s.create_session(json{{"checkpoint_id", "tiny"}}),
                    ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(
      s.create_session(json{{"checkpoint_id", "tiny"}, {"image", util::base64_encode("junk")}}),
      ErrorCode::kFormat);
  EXPECT_ERROR_CODE(s.create_session(json{{"checkpoint_id", "tiny"}, {"image", "@@@"}}),
                    ErrorCode::kFormat);
  json bad_roi = phantom_request();
  bad_roi["rois"] = json::array({{{"row0", 30}, {"col0", 0}, {"height", 8}, {"width", 8},
                                  {"label", "flat"}}});
  EXPECT_ERROR_CODE(s.create_session(bad_roi), ErrorCode::kInvalidArgument);
  json bad_config = phantom_request();
  bad_config["config"] = {{"learning_rate", -1.0}};
  EXPECT_ERROR_CODE(s.create_session(bad_config), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(s.curve("nope"), ErrorCode::kNotFound);
  EXPECT_TRUE(s.session_ids().empty());
}

TEST(Session, UploadedImageWithoutCleanMarksRmseUnavailable) {
  Fixture f("upload");
  Service s(f.options());
  const Image x = sample(9).noisy;
  const json out = s.create_session(
      json{{"checkpoint_id", "tiny"}, {"image", util::base64_encode(encode_image(x))}});
  EXPECT_FALSE(out.at("has_clean").get<bool>());
  const std::string id = out.at("id");
  EXPECT_EQ(decode_image(s.candidate_bytes(id, 0)).image, denoiser::infer(trained(), x));
  const json m = s.roi_metrics(id, 0, json::object());
  EXPECT_TRUE(m.at("rmse").is_null());
  EXPECT_TRUE(m.at("unavailable").contains("rmse"));
  EXPECT_TRUE(m.at("roi_std").contains("flat"));
}

// ------------------------------------------------------------------ sweeps

TEST(Sweep, RunsToCompletionWithPositiveIndices) {
  Fixture f("sweep_low");
  Service s(f.options());
  const std::string id = s.create_session(phantom_request()).at("id");
  const json job = s.start_sweep(id, quick_sweep("low_noise"));
  EXPECT_EQ(job.at("location"), "/api/v1/sessions/" + id + "/curve");
  s.wait(id);
  const json curve = s.curve(id);
  EXPECT_EQ(curve.at("directions").at("low_noise").at("status"), "complete");
  EXPECT_EQ(curve.at("directions").at("low_noise").at("config").at("max_iterations"), 40);
  const auto idx = indices(curve);
  ASSERT_GE(idx.size(), 2u);
  for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(idx[i], static_cast<std::int64_t>(i));
  for (const auto& c : curve.at("candidates")) {
    EXPECT_TRUE(c.at("metrics").at("roi_std").contains("flat"));
  }
}

TEST(Sweep, SecondStartConflicts) {
  Fixture f("sweep_conflict");
  Service s(f.options());
  const std::string id = s.create_session(phantom_request()).at("id");
  s.start_sweep(id, long_sweep("low_noise"));
  EXPECT_ERROR_CODE(s.start_sweep(id, long_sweep("low")), ErrorCode::kConflict);
  s.start_sweep(id, long_sweep("high_resolution"));
  EXPECT_EQ(s.curve(id).at("status"), "building");
  s.cancel_sweep(id, "low_noise");
  s.cancel_sweep(id, "high");
  s.wait(id);
  EXPECT_ERROR_CODE(s.cancel_sweep(id, "low_noise"), ErrorCode::kConflict);
  EXPECT_ERROR_CODE(s.start_sweep(id, json{{"direction", "sideways"}}),
                    ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(s.start_sweep(id, json{{"direction", "low"}, {"config", {{"k", 1}}}}),
                    ErrorCode::kInvalidArgument);
}

TEST(Sweep, PollsGrowMonotonicallyAndCancelKeepsPrefix) {
  Fixture f("sweep_cancel");
  Service s(f.options());
  const std::string id = s.create_session(phantom_request()).at("id");
  s.start_sweep(id, long_sweep("high_resolution"));
  wait_for_count(s, id, 3);
  const json first = s.curve(id);
  wait_for_count(s, id, first.at("count").get<std::size_t>() + 2);
  const json second = s.curve(id);
  EXPECT_LE(second.at("index_range")[0].get<std::int64_t>(),
            first.at("index_range")[0].get<std::int64_t>());
  const auto a = indices(first);
  const auto b = indices(second);
  for (auto j : a) EXPECT_NE(std::find(b.begin(), b.end(), j), b.end());

  EXPECT_EQ(s.cancel_sweep(id, "high_resolution").at("status"), "cancelling");
  s.wait(id);
  const json done = s.curve(id);
  EXPECT_EQ(done.at("directions").at("high_resolution").at("status"), "cancelled");
  const auto idx = indices(done);
  ASSERT_GE(idx.size(), b.size());
  const std::int64_t lo = idx.front();
  for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(idx[i], lo + static_cast<std::int64_t>(i));
  EXPECT_EQ(idx.back(), 0);
}

TEST(Sweep, RerunReplacesOnlyItsSide) {
  Fixture f("sweep_rerun");
  Service s(f.options());
  const std::string id = s.create_session(phantom_request()).at("id");
  s.start_sweep(id, quick_sweep("high"));
  s.wait(id);
  const std::string neg = s.candidate_bytes(id, -1);
  s.start_sweep(id, quick_sweep("low"));
  s.wait(id);
  json cfg = quick_sweep("low");
  cfg["config"]["cadence"] = 20;
  s.start_sweep(id, cfg);
  s.wait(id);
  const json curve = s.curve(id);
  EXPECT_EQ(s.candidate_bytes(id, -1), neg);
  EXPECT_EQ(curve.at("index_range")[1], 2);
  EXPECT_EQ(decode_image(s.candidate_bytes(id, 1)).provenance.at("iteration"), "20");
  EXPECT_FALSE(fs::exists(f.root / "state" / "sessions" / id / "curve" /
                          did::candidate_file_name(3)));
}

TEST(Sweep, SessionsAreIsolated) {
  Fixture f("isolation");
  Service s(f.options());
  const std::string a = s.create_session(phantom_request()).at("id");
  json other = phantom_request();
  other["phantom"]["noise_seed"] = 8;
  const std::string b = s.create_session(other).at("id");
  const std::string ckpt_hash = util::sha256_file(f.root / "ckpts" / "tiny.nrtwckpt");
  const json before = s.curve(b);
  const std::string bytes = s.candidate_bytes(b, 0);
  s.start_sweep(a, quick_sweep("low"));
  s.start_sweep(a, quick_sweep("high"));
  s.wait(a);
  EXPECT_EQ(s.curve(b), before);
  EXPECT_EQ(s.candidate_bytes(b, 0), bytes);
  EXPECT_EQ(util::sha256_file(f.root / "ckpts" / "tiny.nrtwckpt"), ckpt_hash);
  EXPECT_GT(s.curve(a).at("count").get<int>(), 1);
}

// -------------------------------------------------------------- durability

TEST(Durability, InterruptedSweepBecomesFailedWithPrefix) {
  Fixture f("restart");
  std::string id;
  json before;
  std::map<std::int64_t, std::string> bytes;
  {
    Service s(f.options());
    id = s.create_session(phantom_request()).at("id");
    s.start_sweep(id, quick_sweep("low"));
    s.wait(id);
    before = s.curve(id);
    for (auto j : indices(before)) bytes[j] = s.candidate_bytes(id, j);
  }
  // Simulate a crash mid-sweep: the last manifest written still says building.
  const fs::path manifest = f.root / "state" / "sessions" / id / "curve" / "manifest.json";
  json m = json::parse(util::read_file(manifest));
  m["directions"]["low_noise"]["status"] = "building";
  util::write_file_atomic(manifest, m.dump());

  Service s(f.options());
  const json after = s.curve(id);
  const json low = after.at("directions").at("low_noise");
  EXPECT_EQ(low.at("status"), "failed");
  EXPECT_NE(low.at("error").get<std::string>().find("interrupted"), std::string::npos);
  EXPECT_EQ(indices(after), indices(before));
  for (const auto& [j, b] : bytes) EXPECT_EQ(s.candidate_bytes(id, j), b);
  EXPECT_EQ(after.at("status"), "failed");
  s.start_sweep(id, quick_sweep("low"));
  s.wait(id);
  EXPECT_EQ(s.curve(id).at("directions").at("low_noise").at("status"), "complete");
}

TEST(Durability, ShutdownCancelsAndPersists) {
  Fixture f("shutdown");
  std::string id;
  std::size_t count = 0;
  {
    Service s(f.options());
    id = s.create_session(phantom_request()).at("id");
    s.start_sweep(id, long_sweep("low"));
    wait_for_count(s, id, 3);
    s.shutdown();
    count = s.curve(id).at("count");
    EXPECT_ERROR_CODE(s.start_sweep(id, quick_sweep("low")), ErrorCode::kConflict);
  }
  Service s(f.options());
  const json curve = s.curve(id);
  EXPECT_EQ(curve.at("directions").at("low_noise").at("status"), "cancelled");
  EXPECT_EQ(curve.at("count"), count);
  EXPECT_NO_THROW(did::read_curve(f.root / "state" / "sessions" / id / "curve"));
}

// ------------------------------------------------------------ images, rois

TEST(Candidates, WindowingAndMissingIndex) {
  Fixture f("window");
  Service s(f.options());
  const std::string id = s.create_session(phantom_request()).at("id");
  const Image img = decode_image(s.candidate_bytes(id, 0)).image;
  const WindowedImage w = s.candidate_windowed(id, 0, -160.0, 240.0);
  EXPECT_EQ(w.height, kSize);
  EXPECT_EQ(w.width, kSize);
  EXPECT_EQ(w.pixels, window_to_bytes(img, -160.0, 240.0));
  bool saw_low = false, saw_high = false;
  for (std::int64_t i = 0; i < img.numel(); ++i) {
    if (img[i] <= -160.0f) {
      EXPECT_EQ(w.pixels[static_cast<std::size_t>(i)], 0);
      saw_low = true;
    }
    if (img[i] >= 240.0f) {
      EXPECT_EQ(w.pixels[static_cast<std::size_t>(i)], 255);
      saw_high = true;
    }
  }
  EXPECT_TRUE(saw_low);
  EXPECT_TRUE(saw_high);
  EXPECT_ERROR_CODE(s.candidate_windowed(id, 0, 240.0, -160.0), ErrorCode::kInvalidArgument);
  try {
    s.candidate_bytes(id, 5);
    FAIL() << "expected not-found";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
    EXPECT_NE(std::string(e.what()).find("[0, 0]"), std::string::npos);
  }
}

TEST(Metrics, EngineeredRoisThroughPassthroughNetwork) {
  Fixture f("metrics");
  Service s(f.options());
  Image x = make_image(kSize, kSize, 0.0f);
  const metrics::Roi fg{2, 2, 6, 6, "lesion"}, bg{12, 12, 6, 6, "lesion_bg"};
  const metrics::Roi flat{20, 20, 8, 8, "flat"};
  auto paint = [&](const metrics::Roi& roi, float mean, float sigma) {
    for (std::int64_t r = 0; r < roi.height; ++r) {
      for (std::int64_t c = 0; c < roi.width; ++c) {
        x.at(0, 0, roi.row0 + r, roi.col0 + c) = (r + c) % 2 == 0 ? mean + sigma : mean - sigma;
      }
    }
  };
  paint(fg, 100.0f, 10.0f);
  paint(bg, 50.0f, 10.0f);
  paint(flat, 30.0f, 0.0f);
  const std::string id =
      s.create_session("identity", x, std::nullopt, json{{"rois", {fg, bg, flat}}}).at("id");

  const json m = s.roi_metrics(id, 0, json::object());
  EXPECT_NEAR(m.at("cnr").get<double>(), 5.0, 1e-3);
  EXPECT_NEAR(m.at("roi_std").at("flat").get<double>(), 0.0, 1e-9);
  EXPECT_TRUE(m.at("rmse").is_null());
  EXPECT_EQ(m.at("unavailable").at("rmse"), "no clean reference for this session");
  EXPECT_TRUE(m.at("unavailable").contains("resolution_proxy"));

  const json drawn = s.roi_metrics(
      id, 0,
      {{"rois", {{{"row0", 20}, {"col0", 20}, {"height", 4}, {"width", 4}, {"label", "mine"}}}},
       {"metrics", {"roi_std"}}});
  EXPECT_NEAR(drawn.at("roi_std").at("mine").get<double>(), 0.0, 1e-9);
  EXPECT_TRUE(drawn.at("unavailable").empty());

  const json flat_pair = {{"rois", {flat, {{"row0", 0}, {"col0", 24}, {"height", 4},
                                           {"width", 4}, {"label", "air"}}}},
                          {"foreground", "flat"},
                          {"background", "air"},
                          {"metrics", {"cnr"}}};
  EXPECT_ERROR_CODE(s.roi_metrics(id, 0, flat_pair), ErrorCode::kDegenerate);
  EXPECT_ERROR_CODE(
      s.roi_metrics(id, 0, {{"rois", {{{"row0", 30}, {"col0", 30}, {"height", 9}, {"width", 9}}}}}),
      ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(s.roi_metrics(id, 0, {{"metrics", {"psnr"}}}), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(s.roi_metrics(id, 3, json::object()), ErrorCode::kNotFound);
}

// -------------------------------------------------------------------- http

class HttpTest : public ::testing::Test {
 protected:
  HttpTest() : fixture_("http"), service_(fixture_.options()), server_(service_) {
    port_ = server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.serve(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(std::chrono::seconds(60));
    for (int i = 0; i < 500 && !client_->Get("/api/v1/checkpoints"); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }
  ~HttpTest() override {
    server_.stop();
    thread_.join();
  }

  json post_json(const std::string& path, const json& body, int expect) {
    auto r = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r);
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << ": " << r->body;
    return json::parse(r->body);
  }

  json get_json(const std::string& path, int expect) {
    auto r = client_->Get(path);
    EXPECT_TRUE(r);
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << ": " << r->body;
    return json::parse(r->body);
  }

  Fixture fixture_;
  Service service_;
  HttpServer server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(HttpTest, CheckpointRegistry) {
  const json list = get_json("/api/v1/checkpoints", 200);
  ASSERT_EQ(list.at("checkpoints").size(), 2u);
  const std::string bytes = denoiser::encode_checkpoint(trained());
  auto r = client_->Post("/api/v1/checkpoints?id=again", bytes, kCheckpointContentType);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 201);
  r = client_->Post("/api/v1/checkpoints?id=again", bytes, kCheckpointContentType);
  EXPECT_EQ(r->status, 200);
  r = client_->Post("/api/v1/checkpoints?id=bad", "garbage", kCheckpointContentType);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body).at("error").at("code"), "format");
  EXPECT_EQ(get_json("/api/v1/checkpoints", 200).at("checkpoints").size(), 3u);
}

TEST_F(HttpTest, SessionLifecycle) {
  const json created = post_json("/api/v1/sessions", phantom_request(), 201);
  const std::string id = created.at("id");
  const std::string base = "/api/v1/sessions/" + id;
  EXPECT_EQ(get_json(base, 200).at("id"), id);
  EXPECT_EQ(get_json(base + "/curve", 200).at("index_range"), json::array({0, 0}));

  auto raw = client_->Get(base + "/candidates/0");
  ASSERT_TRUE(raw);
  EXPECT_EQ(raw->status, 200);
  EXPECT_EQ(raw->get_header_value("Content-Type"), kImageContentType);
  EXPECT_EQ(raw->body, service_.candidate_bytes(id, 0));
  EXPECT_EQ(client_->Get(base + "/candidates/0")->body, raw->body);

  auto gray = client_->Get(base + "/candidates/0?format=gray8&window=-160,240");
  ASSERT_TRUE(gray);
  EXPECT_EQ(gray->status, 200);
  EXPECT_EQ(gray->body.size(), static_cast<std::size_t>(kSize * kSize));
  EXPECT_EQ(gray->get_header_value("X-Image-Width"), std::to_string(kSize));
  const auto pixels = service_.candidate_windowed(id, 0, -160, 240).pixels;
  EXPECT_EQ(gray->body, std::string(pixels.begin(), pixels.end()));
  auto png = client_->Get(base + "/candidates/0?format=png");
  ASSERT_TRUE(png);
  EXPECT_EQ(png->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(png->body.substr(1, 3), "PNG");
  EXPECT_EQ(client_->Get(base + "/candidates/0?format=png&window=240,-160")->status, 400);
  EXPECT_EQ(client_->Get(base + "/candidates/0?format=jpeg")->status, 400);
  EXPECT_EQ(client_->Get(base + "/candidates/zero")->status, 400);
  const json missing = get_json(base + "/candidates/4", 404);
  EXPECT_NE(missing.at("error").at("message").get<std::string>().find("[0, 0]"),
            std::string::npos);

  const json m = post_json(base + "/candidates/0/metrics", json::object(), 200);
  EXPECT_TRUE(m.at("rmse").is_number());
  EXPECT_TRUE(m.at("roi_std").contains("flat"));

  const json job = post_json(base + "/sweeps", long_sweep("low_noise"), 202);
  EXPECT_EQ(job.at("location"), base + "/curve");
  EXPECT_EQ(post_json(base + "/sweeps", long_sweep("low_noise"), 409).at("error").at("code"),
            "conflict");
  wait_for_count(service_, id, 2);
  auto del = client_->Delete(base + "/sweeps/low_noise");
  ASSERT_TRUE(del);
  EXPECT_EQ(del->status, 202);
  service_.wait(id);
  EXPECT_EQ(client_->Delete(base + "/sweeps/low_noise")->status, 409);
  const json curve = get_json(base + "/curve", 200);
  EXPECT_EQ(curve.at("directions").at("low_noise").at("status"), "cancelled");
  EXPECT_GE(curve.at("index_range")[1].get<int>(), 1);

  post_json(base + "/sweeps", quick_sweep("high_resolution"), 202);
  service_.wait(id);
  EXPECT_EQ(get_json(base + "/curve", 200).at("directions").at("high_resolution").at("status"),
            "complete");
}

TEST_F(HttpTest, ErrorsAreStructured) {
  EXPECT_EQ(get_json("/api/v1/sessions/none/curve", 404).at("error").at("code"), "not_found");
  EXPECT_EQ(post_json("/api/v1/sessions", phantom_request("missing"), 404)
                .at("error")
                .at("code"),
            "not_found");
  auto r = client_->Post("/api/v1/sessions", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(get_json("/api/v1/elsewhere", 404).at("error").at("code"), "not_found");

  const Image x = sample(4).noisy;
  r = client_->Post("/api/v1/sessions?checkpoint_id=tiny", encode_image(x), kImageContentType);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 201);
  EXPECT_FALSE(json::parse(r->body).at("has_clean").get<bool>());
}

TEST(Address, Parsing) {
  EXPECT_EQ(parse_address("127.0.0.1:8080"), std::make_pair(std::string("127.0.0.1"), 8080));
  EXPECT_EQ(parse_address("localhost:0").second, 0);
  EXPECT_ERROR_CODE(parse_address("8080"), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_address("host:99999"), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_address("host:http"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(http_status(ErrorCode::kConflict), 409);
  EXPECT_EQ(http_status(ErrorCode::kDegenerate), 422);
}

TEST(Address, UnbindableAddressFails) {
  Fixture f("bind");
  Service s(f.options());
  HttpServer server(s);
  EXPECT_ERROR_CODE(server.bind("203.0.113.1", 80), ErrorCode::kIo);
}

}  // namespace
}  // namespace nrtw::service
