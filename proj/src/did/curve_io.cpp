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
#include "nrtw/did/curve_io.hpp"

#include <cstdio>

#include "nrtw/data/phantom.hpp"
#include "nrtw/util/bytes.hpp"

namespace nrtw::metrics {

void to_json(nlohmann::json& j, const MetricsRecord& r) {
  j = nlohmann::json::object();
  j["rmse"] = r.rmse ? nlohmann::json(*r.rmse) : nlohmann::json(nullptr);
  j["cnr"] = r.cnr ? nlohmann::json(*r.cnr) : nlohmann::json(nullptr);
  j["roi_std"] = r.roi_std;
  j["resolution_proxy"] =
      r.resolution_proxy ? nlohmann::json(*r.resolution_proxy) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, MetricsRecord& r) {
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  r.rmse = opt("rmse");
  r.cnr = opt("cnr");
  r.resolution_proxy = opt("resolution_proxy");
  r.roi_std = j.value("roi_std", std::map<std::string, double>{});
}

}  // namespace nrtw::metrics

namespace nrtw::did {
namespace {

namespace fs = std::filesystem;

constexpr const char* kManifest = "manifest.json";

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_double(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string write_named(const fs::path& dir, const std::string& name, const Image& image,
                        const Provenance& provenance) {
  const std::string bytes = encode_image(image, provenance);
  util::write_file_atomic(dir / name, bytes);
  return util::sha256_hex(bytes);
}

Image read_verified(const fs::path& dir, const nlohmann::json& entry) {
  const std::string name = entry.at("file").get<std::string>();
  const fs::path path = dir / name;
  require(fs::exists(path), ErrorCode::kFormat, "curve: missing file " + path.string());
  const std::string bytes = util::read_file(path);
  require(util::sha256_hex(bytes) == entry.at("sha256").get<std::string>(), ErrorCode::kFormat,
          "curve: hash mismatch for " + path.string());
  return decode_image(bytes).image;
}

nlohmann::json direction_json(const DirectionState& s) {
  return {{"status", to_string(s.status)},
          {"config", s.config},
          {"error", s.error},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"loss_trace", s.loss_trace}};
}

DirectionState direction_from_json(const nlohmann::json& j) {
  DirectionState s;
  s.status = parse_sweep_status(j.at("status").get<std::string>());
  if (j.contains("config")) s.config = j.at("config").get<DIDConfig>();
  s.error = j.value("error", std::string());
  s.iterations = j.value("iterations", std::int64_t{0});
  s.converged = j.value("converged", false);
  s.loss_trace = j.value("loss_trace", std::vector<double>{});
  return s;
}

Provenance candidate_provenance(const Candidate& c) {
  return {{"kind", "candidate"},
          {"index", std::to_string(c.index)},
          {"iteration", std::to_string(c.iteration)}};
}

}  // namespace

void to_json(nlohmann::json& j, const DIDConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate},
                     {"momentum", c.momentum},
                     {"stop_threshold", c.stop_threshold},
                     {"max_iterations", c.max_iterations},
                     {"cadence", c.cadence},
                     {"k", c.k},
                     {"stop_reference", to_string(c.stop_reference)}};
}

void from_json(const nlohmann::json& j, DIDConfig& c) {
  c = DIDConfig{};
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.momentum = j.value("momentum", c.momentum);
  c.stop_threshold = j.value("stop_threshold", c.stop_threshold);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.cadence = j.value("cadence", c.cadence);
  c.k = j.value("k", c.k);
  c.stop_reference =
      parse_stop_reference(j.value("stop_reference", to_string(c.stop_reference)));
}

std::string candidate_file_name(std::int64_t index) {
  char buf[48];
  const long long magnitude = index < 0 ? -static_cast<long long>(index) : index;
  std::snprintf(buf, sizeof buf, "candidate_%s%04lld.nrtwimg", index < 0 ? "m" : "p",
                magnitude);
  return buf;
}

std::string encode_candidate(const Candidate& candidate) {
  return encode_image(candidate.image, candidate_provenance(candidate));
}

std::string write_candidate_image(const fs::path& dir, const Candidate& candidate) {
  fs::create_directories(dir);
  return write_named(dir, candidate_file_name(candidate.index), candidate.image,
                     candidate_provenance(candidate));
}

nlohmann::json manifest_json(const NRTCurve& curve, const HashCache* hashes) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& [index, c] : curve.candidates) {
    std::string sha;
    if (hashes != nullptr) {
      if (auto it = hashes->find(index); it != hashes->end()) sha = it->second;
    }
    if (sha.empty()) sha = util::sha256_hex(encode_candidate(c));
    candidates.push_back({{"index", index},
                          {"file", candidate_file_name(index)},
                          {"sha256", sha},
                          {"iteration", c.iteration},
                          {"loss", optional_json(c.loss)},
                          {"distance_to_target", optional_json(c.distance_to_target)},
                          {"distance_to_low", c.distance_to_low},
                          {"distance_to_high", c.distance_to_high},
                          {"metrics", c.metrics}});
  }
  const auto [lo, hi] = curve.index_range();
  nlohmann::json bounds = {
      {"k", curve.bounds.k},
      {"t_high", {{"file", "t_high.nrtwimg"},
                  {"sha256", util::sha256_hex(encode_image(curve.bounds.t_high,
                                                           {{"kind", "t_high"}}))}}},
      {"t_low", {{"file", "t_low.nrtwimg"},
                 {"sha256", util::sha256_hex(encode_image(curve.bounds.t_low,
                                                          {{"kind", "t_low"}}))}}}};
  nlohmann::json context = {{"rois", curve.context.rois}, {"clean", nullptr}};
  if (curve.context.clean) {
    context["clean"] = {{"file", "clean.nrtwimg"},
                        {"sha256", util::sha256_hex(encode_image(*curve.context.clean,
                                                                 {{"kind", "clean"}}))}};
  }
  return {{"format", "NRTW-CURVE"},
          {"version", 1},
          {"config", curve.config},
          {"provenance", {{"checkpoint_id", curve.provenance.checkpoint_id},
                          {"input_id", curve.provenance.input_id}}},
          {"bounds", bounds},
          {"context", context},
          {"status", to_string(curve.status())},
          {"directions", {{"low_noise", direction_json(curve.low_noise)},
                          {"high_resolution", direction_json(curve.high_resolution)}}},
          {"index_range", {lo, hi}},
          {"candidates", candidates}};
}

void write_curve_manifest(const fs::path& dir, const NRTCurve& curve, const HashCache* hashes) {
  fs::create_directories(dir);
  util::write_file_atomic(dir / kManifest, manifest_json(curve, hashes).dump(2) + "\n");
}

void write_curve(const fs::path& dir, const NRTCurve& curve) {
  fs::create_directories(dir);
  write_named(dir, "t_high.nrtwimg", curve.bounds.t_high, {{"kind", "t_high"}});
  write_named(dir, "t_low.nrtwimg", curve.bounds.t_low, {{"kind", "t_low"}});
  if (curve.context.clean) {
    write_named(dir, "clean.nrtwimg", *curve.context.clean, {{"kind", "clean"}});
  }
  for (const auto& [index, c] : curve.candidates) write_candidate_image(dir, c);
  write_curve_manifest(dir, curve);
}

NRTCurve read_curve(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifest;
  require(fs::exists(manifest_path), ErrorCode::kNotFound,
          "curve: no manifest.json in " + dir.string());
  NRTCurve curve;
  try {
    const auto m = nlohmann::json::parse(util::read_file(manifest_path));
    require(m.at("format") == "NRTW-CURVE" && m.at("version") == 1, ErrorCode::kFormat,
            "curve: unsupported manifest format/version");
    curve.config = m.at("config").get<DIDConfig>();
    curve.provenance.checkpoint_id = m.at("provenance").value("checkpoint_id", std::string());
    curve.provenance.input_id = m.at("provenance").value("input_id", std::string());
    const auto& b = m.at("bounds");
    curve.bounds.k = b.at("k").get<int>();
    curve.bounds.t_high = read_verified(dir, b.at("t_high"));
    curve.bounds.t_low = read_verified(dir, b.at("t_low"));
    const auto& ctx = m.at("context");
    curve.context.rois = ctx.at("rois").get<std::vector<metrics::Roi>>();
    if (!ctx.at("clean").is_null()) curve.context.clean = read_verified(dir, ctx.at("clean"));
    curve.low_noise = direction_from_json(m.at("directions").at("low_noise"));
    curve.high_resolution = direction_from_json(m.at("directions").at("high_resolution"));
    for (const auto& e : m.at("candidates")) {
      Candidate c;
      c.index = e.at("index").get<std::int64_t>();
      c.image = read_verified(dir, e);
      c.iteration = e.at("iteration").get<std::int64_t>();
      c.loss = optional_double(e, "loss");
      c.distance_to_target = optional_double(e, "distance_to_target");
      c.distance_to_low = e.at("distance_to_low").get<double>();
      c.distance_to_high = e.at("distance_to_high").get<double>();
      c.metrics = e.at("metrics").get<metrics::MetricsRecord>();
      curve.candidates.emplace(c.index, std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("curve: malformed manifest: ") + e.what());
  }
  return curve;
}

}  // namespace nrtw::did
