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
#include "nrtw/service/service.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "nrtw/data/noise.hpp"
#include "nrtw/data/phantom.hpp"
#include "nrtw/did/curve_io.hpp"
#include "nrtw/util/bytes.hpp"

namespace nrtw::service {
namespace {

namespace fs = std::filesystem;

constexpr const char* kCheckpointSuffix = ".nrtwckpt";

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json candidate_entry(const did::Candidate& c, const std::string& sha) {
  return {{"index", c.index},
          {"iteration", c.iteration},
          {"loss", optional_json(c.loss)},
          {"distance_to_target", optional_json(c.distance_to_target)},
          {"distance_to_low", c.distance_to_low},
          {"distance_to_high", c.distance_to_high},
          {"metrics", c.metrics},
          {"sha256", sha}};
}

nlohmann::json direction_summary(const did::DirectionState& s) {
  return {{"status", did::to_string(s.status)},
          {"error", s.error},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"config", s.config}};
}

std::vector<metrics::Roi> parse_rois(const nlohmann::json& j) {
  require(j.is_array(), ErrorCode::kInvalidArgument, "rois must be an array");
  try {
    return j.get<std::vector<metrics::Roi>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed roi: ") + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------- registry

CheckpointRegistry::CheckpointRegistry(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

bool CheckpointRegistry::valid_id(std::string_view id) {
  if (id.empty() || id.size() > 64 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

fs::path CheckpointRegistry::path_of(const std::string& id) const {
  return dir_ / (id + kCheckpointSuffix);
}

namespace {

nlohmann::json checkpoint_entry(const std::string& id, const denoiser::Checkpoint& ckpt,
                                const std::string& sha) {
  return {{"id", id},
          {"sha256", sha},
          {"network", ckpt.network},
          {"parameters", ckpt.params.parameter_count()},
          {"train_iterations", ckpt.train.iterations},
          {"seed", ckpt.seed},
          {"dataset_fingerprint", ckpt.dataset_fingerprint}};
}

}  // namespace

nlohmann::json CheckpointRegistry::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    const fs::path& p = entry.path();
    if (entry.is_regular_file() && p.extension() == kCheckpointSuffix) {
      ids.push_back(p.stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  nlohmann::json out = nlohmann::json::array();
  for (const auto& id : ids) {
    try {
      const auto ckpt = get(id);
      out.push_back(checkpoint_entry(id, *ckpt, util::sha256_file(path_of(id))));
    } catch (const Error& e) {
      out.push_back({{"id", id}, {"error", e.what()}});
    }
  }
  return out;
}

std::pair<nlohmann::json, bool> CheckpointRegistry::add(std::string_view bytes,
                                                        std::optional<std::string> id) {
  const std::string sha = util::sha256_hex(bytes);
  const std::string name = id.value_or(sha.substr(0, 16));
  require(valid_id(name), ErrorCode::kInvalidArgument,
          "checkpoint id must be 1-64 characters of [A-Za-z0-9._-]");
  auto ckpt = std::make_shared<const denoiser::Checkpoint>(denoiser::decode_checkpoint(bytes));
  std::lock_guard lock(mu_);
  const fs::path path = path_of(name);
  if (fs::exists(path)) {
    require(util::sha256_file(path) == sha, ErrorCode::kConflict,
            "checkpoint " + name + " already exists with different contents");
    return {checkpoint_entry(name, *ckpt, sha), false};
  }
  util::write_file_atomic(path, bytes);
  loaded_[name] = ckpt;
  return {checkpoint_entry(name, *ckpt, sha), true};
}

std::shared_ptr<const denoiser::Checkpoint> CheckpointRegistry::get(const std::string& id) const {
  require(valid_id(id), ErrorCode::kNotFound, "unknown checkpoint " + id);
  std::lock_guard lock(mu_);
  if (auto it = loaded_.find(id); it != loaded_.end()) return it->second;
  const fs::path path = path_of(id);
  require(fs::exists(path), ErrorCode::kNotFound, "unknown checkpoint " + id);
  auto ckpt = std::make_shared<const denoiser::Checkpoint>(denoiser::read_checkpoint(path));
  loaded_[id] = ckpt;
  return ckpt;
}

// ------------------------------------------------------------------ config

did::DIDConfig merge_config(const did::DIDConfig& base, const nlohmann::json& overrides,
                            bool allow_k) {
  if (overrides.is_null()) return base;
  require(overrides.is_object(), ErrorCode::kInvalidArgument, "config must be an object");
  did::DIDConfig c = base;
  try {
    for (const auto& [key, value] : overrides.items()) {
      if (key == "learning_rate") {
        c.learning_rate = value.get<double>();
      } else if (key == "momentum") {
        c.momentum = value.get<double>();
      } else if (key == "stop_threshold") {
        c.stop_threshold = value.get<double>();
      } else if (key == "max_iterations") {
        c.max_iterations = value.get<std::int64_t>();
      } else if (key == "cadence") {
        c.cadence = value.get<std::int64_t>();
      } else if (key == "stop_reference") {
        c.stop_reference = did::parse_stop_reference(value.get<std::string>());
      } else if (key == "k" && allow_k) {
        c.k = value.get<int>();
      } else if (key == "k") {
        fail(ErrorCode::kInvalidArgument, "config: k is fixed when the session is created");
      } else {
        fail(ErrorCode::kInvalidArgument, "config: unknown key " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  did::validate(c);
  return c;
}

// ----------------------------------------------------------------- session

struct Service::Session {
  struct Job {
    std::thread thread;
    std::shared_ptr<did::CancelToken> cancel;
    bool running = false;
  };

  std::string id;
  std::string checkpoint_id;
  std::string created;
  fs::path dir;
  std::shared_ptr<const denoiser::Checkpoint> ckpt;

  mutable std::mutex mu;
  std::condition_variable idle;
  did::NRTCurve curve;
  did::HashCache hashes;
  std::map<did::Direction, Job> jobs;

  fs::path curve_dir() const { return dir / "curve"; }

  bool busy() const {
    return std::any_of(jobs.begin(), jobs.end(), [](const auto& kv) { return kv.second.running; });
  }

  void persist_manifest() const { did::write_curve_manifest(curve_dir(), curve, &hashes); }

  nlohmann::json summary() const {
    return {{"id", id},
            {"checkpoint_id", checkpoint_id},
            {"created", created},
            {"input_id", curve.provenance.input_id},
            {"height", curve.bounds.t_high.shape().h},
            {"width", curve.bounds.t_high.shape().w},
            {"has_clean", curve.context.clean.has_value()},
            {"rois", curve.context.rois},
            {"config", curve.config},
            {"status", did::to_string(curve.status())},
            {"links",
             {{"curve", "/api/v1/sessions/" + id + "/curve"},
              {"sweeps", "/api/v1/sessions/" + id + "/sweeps"},
              {"candidates", "/api/v1/sessions/" + id + "/candidates/"}}}};
  }
};

Service::Service(ServiceOptions options)
    : options_(std::move(options)), registry_(options_.checkpoint_dir) {
  did::validate(options_.defaults);
  fs::create_directories(options_.state_dir / "sessions");
  load_persisted();
}

Service::~Service() { shutdown(); }

void Service::load_persisted() {
  for (const auto& entry : fs::directory_iterator(options_.state_dir / "sessions")) {
    if (!entry.is_directory()) continue;
    auto s = std::make_shared<Session>();
    s->dir = entry.path();
    try {
      const auto meta = nlohmann::json::parse(util::read_file(s->dir / "session.json"));
      s->id = meta.at("id").get<std::string>();
      s->checkpoint_id = meta.at("checkpoint_id").get<std::string>();
      s->created = meta.value("created", std::string());
      s->curve = did::read_curve(s->curve_dir());
    } catch (const std::exception& e) {
      std::cerr << "service: skipping session " << s->dir << ": " << e.what() << "\n";
      continue;
    }
    try {
      s->ckpt = registry_.get(s->checkpoint_id);
    } catch (const Error&) {
      // Stored candidates stay readable; new sweeps fail with not-found.
    }
    for (auto d : {did::Direction::kLowNoise, did::Direction::kHighResolution}) {
      auto& st = s->curve.state(d);
      if (st.status != did::SweepStatus::kBuilding) continue;
      std::int64_t reached = 0;
      for (const auto& [index, c] : s->curve.candidates) {
        if (index * did::sign(d) > 0) reached = std::max(reached, index * did::sign(d));
      }
      st.status = did::SweepStatus::kFailed;
      st.error = "interrupted: service stopped while building; kept candidates up to index " +
                 std::to_string(did::sign(d) * reached);
    }
    for (const auto& [index, c] : s->curve.candidates) {
      s->hashes[index] = util::sha256_hex(did::encode_candidate(c));
    }
    s->persist_manifest();
    sessions_[s->id] = s;
  }
}

std::string Service::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  for (;;) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << rng();
    const std::string id = os.str();
    if (!sessions_.contains(id) && !fs::exists(options_.state_dir / "sessions" / id)) return id;
  }
}

std::shared_ptr<Service::Session> Service::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  require(it != sessions_.end(), ErrorCode::kNotFound, "unknown session " + id);
  return it->second;
}

std::vector<std::string> Service::session_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

nlohmann::json Service::create_session(const nlohmann::json& request) {
  require(request.is_object(), ErrorCode::kInvalidArgument, "session request must be an object");
  require(request.contains("checkpoint_id") && request.at("checkpoint_id").is_string(),
          ErrorCode::kInvalidArgument, "session request needs a checkpoint_id string");
  const std::string ckpt_id = request.at("checkpoint_id").get<std::string>();
  try {
    if (request.contains("phantom")) {
      const auto& p = request.at("phantom");
      require(p.is_object(), ErrorCode::kInvalidArgument, "phantom must be an object");
      const data::PhantomSpec spec =
          p.contains("spec") ? p.at("spec").get<data::PhantomSpec>()
                             : data::default_phantom_spec(p.value("size", std::int64_t{128}));
      data::validate(spec);
      data::NoiseSpec noise;
      noise.sigma = p.value("sigma", noise.sigma);
      noise.seed = p.value("noise_seed", std::uint64_t{1});
      const Image clean = data::generate_phantom(spec, p.value("seed", std::uint64_t{0}));
      nlohmann::json rest = request;
      if (!rest.contains("rois")) rest["rois"] = spec.rois;
      return create_session(ckpt_id, data::add_noise(clean, noise).noisy, clean, rest);
    }
    require(request.contains("image") && request.at("image").is_string(),
            ErrorCode::kInvalidArgument, "session request needs a phantom or an image");
    const Image input = decode_image(util::base64_decode(request.at("image").get<std::string>())).image;
    std::optional<Image> clean;
    if (request.contains("clean") && !request.at("clean").is_null()) {
      clean = decode_image(util::base64_decode(request.at("clean").get<std::string>())).image;
    }
    return create_session(ckpt_id, input, std::move(clean), request);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed session request: ") + e.what());
  }
}

nlohmann::json Service::create_session(const std::string& checkpoint_id, const Image& input,
                                       std::optional<Image> clean, const nlohmann::json& body) {
  require(body.is_null() || body.is_object(), ErrorCode::kInvalidArgument,
          "session request must be an object");
  const nlohmann::json request = body.is_null() ? nlohmann::json::object() : body;
  auto ckpt = registry_.get(checkpoint_id);
  require_image(input, "session input");
  const did::DIDConfig config =
      merge_config(options_.defaults, request.value("config", nlohmann::json()), true);
  did::CurveContext context;
  context.clean = std::move(clean);
  context.rois = request.contains("rois") ? parse_rois(request.at("rois"))
                                          : data::default_rois(input.shape().h, input.shape().w);
  std::vector<did::Direction> start;
  for (const auto& d : request.value("sweeps", nlohmann::json::array())) {
    start.push_back(did::parse_direction(d.get<std::string>()));
  }

  auto s = std::make_shared<Session>();
  s->checkpoint_id = checkpoint_id;
  s->ckpt = ckpt;
  s->created = utc_now();
  const std::string input_id = util::sha256_hex(encode_image(input)).substr(0, 16);
  s->curve = did::start_curve(*ckpt, input, config, std::move(context), {checkpoint_id, input_id});
  s->hashes[0] = util::sha256_hex(did::encode_candidate(s->curve.candidates.at(0)));

  std::lock_guard lock(mu_);
  require(!shutting_down_, ErrorCode::kConflict, "service is shutting down");
  s->id = new_id();
  s->dir = options_.state_dir / "sessions" / s->id;
  did::write_curve(s->curve_dir(), s->curve);
  util::write_file_atomic(s->dir / "session.json",
                          nlohmann::json{{"id", s->id},
                                         {"checkpoint_id", checkpoint_id},
                                         {"created", s->created}}
                                  .dump(2));
  sessions_[s->id] = s;
  nlohmann::json out;
  {
    std::lock_guard session_lock(s->mu);
    for (auto d : start) launch(s, d, s->curve.config);
    out = s->summary();
    out["candidate"] = candidate_entry(s->curve.candidates.at(0), s->hashes.at(0));
  }
  return out;
}

nlohmann::json Service::session(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->summary();
}

// ------------------------------------------------------------------ sweeps

void Service::launch(const std::shared_ptr<Session>& s, did::Direction direction,
                     const did::DIDConfig& config) {
  auto& job = s->jobs[direction];
  require(!job.running, ErrorCode::kConflict,
          "a " + did::to_string(direction) + " sweep is already running for session " + s->id);
  if (job.thread.joinable()) job.thread.join();

  const int sign = did::sign(direction);
  for (auto it = s->curve.candidates.begin(); it != s->curve.candidates.end();) {
    if (it->first * sign > 0) {
      fs::remove(s->curve_dir() / did::candidate_file_name(it->first));
      s->hashes.erase(it->first);
      it = s->curve.candidates.erase(it);
    } else {
      ++it;
    }
  }
  auto& st = s->curve.state(direction);
  st = did::DirectionState{};
  st.status = did::SweepStatus::kBuilding;
  st.config = config;
  s->persist_manifest();

  job.cancel = std::make_shared<did::CancelToken>();
  job.running = true;
  const Image x = s->curve.bounds.t_high;
  const Image target =
      direction == did::Direction::kLowNoise ? s->curve.bounds.t_low : s->curve.bounds.t_high;
  job.thread = std::thread([s, direction, config, x, target, bounds = s->curve.bounds,
                            context = s->curve.context, cancel = job.cancel] {
    did::SweepHooks hooks;
    hooks.cancel = cancel.get();
    hooks.annotate = [&](did::Candidate& c) { did::annotate(c, bounds, context); };
    hooks.on_candidate = [&](const did::Candidate& c) {
      if (c.index == 0) return;
      const std::string sha = did::write_candidate_image(s->curve_dir(), c);
      std::lock_guard lock(s->mu);
      s->curve.candidates.insert_or_assign(c.index, c);
      s->hashes[c.index] = sha;
      s->persist_manifest();
    };
    did::SweepResult r;
    try {
      require(s->ckpt != nullptr, ErrorCode::kNotFound,
              "checkpoint " + s->checkpoint_id + " is no longer registered");
      r = did::sweep(*s->ckpt, x, target, config, direction, hooks);
    } catch (const std::exception& e) {
      r.status = did::SweepStatus::kFailed;
      r.error = e.what();
    }
    std::lock_guard lock(s->mu);
    auto& state = s->curve.state(direction);
    state.status = r.status;
    state.error = std::move(r.error);
    state.iterations = r.iterations;
    state.converged = r.converged;
    state.loss_trace = std::move(r.loss_trace);
    try {
      s->persist_manifest();
    } catch (const std::exception& e) {
      std::cerr << "service: session " << s->id << ": " << e.what() << "\n";
    }
    s->jobs[direction].running = false;
    s->idle.notify_all();
  });
}

nlohmann::json Service::start_sweep(const std::string& id, const nlohmann::json& request) {
  require(request.is_object() && request.contains("direction") &&
              request.at("direction").is_string(),
          ErrorCode::kInvalidArgument, "sweep request needs a direction string");
  const did::Direction direction = did::parse_direction(request.at("direction").get<std::string>());
  auto s = find(id);
  {
    std::lock_guard lock(mu_);
    require(!shutting_down_, ErrorCode::kConflict, "service is shutting down");
  }
  std::lock_guard lock(s->mu);
  const did::DIDConfig config =
      merge_config(s->curve.config, request.value("config", nlohmann::json()), false);
  launch(s, direction, config);
  return {{"session", id},
          {"direction", did::to_string(direction)},
          {"status", did::to_string(did::SweepStatus::kBuilding)},
          {"config", config},
          {"location", "/api/v1/sessions/" + id + "/curve"}};
}

nlohmann::json Service::cancel_sweep(const std::string& id, const std::string& direction_name) {
  const did::Direction direction = did::parse_direction(direction_name);
  auto s = find(id);
  std::lock_guard lock(s->mu);
  auto it = s->jobs.find(direction);
  require(it != s->jobs.end() && it->second.running, ErrorCode::kConflict,
          "no " + did::to_string(direction) + " sweep is running for session " + id);
  it->second.cancel->cancel();
  return {{"session", id},
          {"direction", did::to_string(direction)},
          {"status", "cancelling"},
          {"location", "/api/v1/sessions/" + id + "/curve"}};
}

void Service::wait(const std::string& id) {
  auto s = find(id);
  std::unique_lock lock(s->mu);
  s->idle.wait(lock, [&] { return !s->busy(); });
  for (auto& [d, job] : s->jobs) {
    if (job.thread.joinable()) job.thread.join();
  }
}

void Service::shutdown() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mu_);
    shutting_down_ = true;
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  for (const auto& s : all) {
    std::lock_guard lock(s->mu);
    for (auto& [d, job] : s->jobs) {
      if (job.running) job.cancel->cancel();
    }
  }
  for (const auto& s : all) wait(s->id);
}

// ------------------------------------------------------------------- reads

nlohmann::json Service::curve(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  const auto& c = s->curve;
  const auto [lo, hi] = c.index_range();
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& [index, cand] : c.candidates) {
    candidates.push_back(candidate_entry(cand, s->hashes.at(index)));
  }
  return {{"session", id},
          {"status", did::to_string(c.status())},
          {"index_range", {lo, hi}},
          {"count", c.candidates.size()},
          {"bounds", {{"k", c.bounds.k}}},
          {"config", c.config},
          {"directions",
           {{"low_noise", direction_summary(c.low_noise)},
            {"high_resolution", direction_summary(c.high_resolution)}}},
          {"candidates", candidates}};
}

std::string Service::candidate_bytes(const std::string& id, std::int64_t index) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return did::encode_candidate(did::select_candidate(s->curve, index));
}

WindowedImage Service::candidate_windowed(const std::string& id, std::int64_t index, double low,
                                          double high) const {
  auto s = find(id);
  Image image;
  {
    std::lock_guard lock(s->mu);
    image = did::select_candidate(s->curve, index).image;
  }
  return {image.shape().h, image.shape().w, window_to_bytes(image, low, high)};
}

nlohmann::json Service::roi_metrics(const std::string& id, std::int64_t index,
                                    const nlohmann::json& request) const {
  require(request.is_object() || request.is_null(), ErrorCode::kInvalidArgument,
          "metrics request must be an object");
  auto s = find(id);
  Image image;
  std::optional<Image> clean;
  std::vector<metrics::Roi> rois;
  {
    std::lock_guard lock(s->mu);
    image = did::select_candidate(s->curve, index).image;
    clean = s->curve.context.clean;
    rois = s->curve.context.rois;
  }
  const nlohmann::json req = request.is_null() ? nlohmann::json::object() : request;
  if (req.contains("rois")) rois = parse_rois(req.at("rois"));
  for (const auto& roi : rois) metrics::validate_roi(roi, image.shape());

  std::vector<std::string> wanted = {"rmse", "cnr", "roi_std", "resolution_proxy"};
  std::string fg_label = metrics::kLesionRoi, bg_label = metrics::kLesionBackgroundRoi,
              edge_label = metrics::kEdgeRoi;
  try {
    if (req.contains("metrics")) wanted = req.at("metrics").get<std::vector<std::string>>();
    fg_label = req.value("foreground", fg_label);
    bg_label = req.value("background", bg_label);
    edge_label = req.value("edge", edge_label);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed metrics request: ") + e.what());
  }
  auto labelled = [&](const std::string& label) -> const metrics::Roi* {
    for (const auto& roi : rois) {
      if (roi.label == label) return &roi;
    }
    return nullptr;
  };

  nlohmann::json out = {{"session", id},
                        {"index", index},
                        {"rmse", nullptr},
                        {"cnr", nullptr},
                        {"roi_std", nlohmann::json::object()},
                        {"resolution_proxy", nullptr},
                        {"unavailable", nlohmann::json::object()}};
  for (const auto& name : wanted) {
    if (name == "rmse") {
      if (clean) {
        out["rmse"] = metrics::rmse(image, *clean);
      } else {
        out["unavailable"]["rmse"] = "no clean reference for this session";
      }
    } else if (name == "cnr") {
      const auto* fg = labelled(fg_label);
      const auto* bg = labelled(bg_label);
      if (fg != nullptr && bg != nullptr) {
        out["cnr"] = metrics::cnr(image, *fg, *bg);
      } else {
        out["unavailable"]["cnr"] = "needs ROIs labelled " + fg_label + " and " + bg_label;
      }
    } else if (name == "roi_std") {
      for (std::size_t i = 0; i < rois.size(); ++i) {
        const std::string label = rois[i].label.empty() ? "roi" + std::to_string(i) : rois[i].label;
        out["roi_std"][label] = metrics::roi_std(image, rois[i]);
      }
    } else if (name == "resolution_proxy") {
      if (const auto* edge = labelled(edge_label)) {
        out["resolution_proxy"] = metrics::resolution_proxy(image, *edge);
      } else {
        out["unavailable"]["resolution_proxy"] = "needs an ROI labelled " + edge_label;
      }
    } else {
      fail(ErrorCode::kInvalidArgument, "unknown metric " + name);
    }
  }
  return out;
}

}  // namespace nrtw::service
