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

// Session-oriented facade over the curve engine. Every public call is safe
// to make from concurrent request threads; sweeps run on worker threads and
// publish candidates one at a time, so readers always see a consistent
// prefix.
//
// State directory layout:
//
//   sessions/<id>/session.json   id, checkpoint id, creation time
//   sessions/<id>/curve/         a curve directory (see curve_io.hpp)

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nrtw/denoiser/checkpoint.hpp"
#include "nrtw/did/did.hpp"

namespace nrtw::service {

/// Checkpoints are files <id>.nrtwckpt in one directory.
class CheckpointRegistry {
 public:
  explicit CheckpointRegistry(std::filesystem::path dir);

  nlohmann::json list() const;
  /// Stores the bytes under `id` (default: a prefix of their hash). The
  /// second member is false when identical bytes were already registered.
  /// Throws kConflict when the id holds different bytes.
  std::pair<nlohmann::json, bool> add(std::string_view bytes, std::optional<std::string> id);
  std::shared_ptr<const denoiser::Checkpoint> get(const std::string& id) const;

  static bool valid_id(std::string_view id);

 private:
  std::filesystem::path path_of(const std::string& id) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const denoiser::Checkpoint>> loaded_;
};

struct ServiceOptions {
  std::filesystem::path checkpoint_dir;
  std::filesystem::path state_dir;
  did::DIDConfig defaults;
};

/// Applies the keys of `overrides` to `base`. Unknown keys, and "k" unless
/// `allow_k`, throw kInvalidArgument.
did::DIDConfig merge_config(const did::DIDConfig& base, const nlohmann::json& overrides,
                            bool allow_k);

struct WindowedImage {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::uint8_t> pixels;
};

class Service {
 public:
  /// Reloads persisted sessions; sweeps that were building when the state
  /// was last written are marked failed and keep their candidates.
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  CheckpointRegistry& checkpoints() { return registry_; }

  /// Request fields: checkpoint_id; either phantom {spec?, size?, seed?,
  /// sigma?, noise_seed?} or image (base64 NRTW-IMG) with optional clean;
  /// optional rois, config and sweeps (directions to start at once).
  nlohmann::json create_session(const nlohmann::json& request);
  nlohmann::json create_session(const std::string& checkpoint_id, const Image& input,
                                std::optional<Image> clean, const nlohmann::json& request = {});

  nlohmann::json session(const std::string& id) const;
  std::vector<std::string> session_ids() const;

  /// Request fields: direction, optional config overrides. Throws
  /// kConflict while that direction is building.
  nlohmann::json start_sweep(const std::string& id, const nlohmann::json& request);
  /// Throws kConflict when nothing is building in that direction.
  nlohmann::json cancel_sweep(const std::string& id, const std::string& direction);

  nlohmann::json curve(const std::string& id) const;
  std::string candidate_bytes(const std::string& id, std::int64_t index) const;
  WindowedImage candidate_windowed(const std::string& id, std::int64_t index, double low,
                                   double high) const;
  /// Request fields: rois (default: the session's), metrics (subset of
  /// rmse, cnr, roi_std, resolution_proxy), foreground/background/edge
  /// labels. Metrics that cannot be computed are listed under "unavailable".
  nlohmann::json roi_metrics(const std::string& id, std::int64_t index,
                             const nlohmann::json& request) const;

  /// Blocks until no sweep of the session is building.
  void wait(const std::string& id);
  /// Cancels every sweep and waits for the workers.
  void shutdown();

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  void load_persisted();
  void launch(const std::shared_ptr<Session>& s, did::Direction direction,
              const did::DIDConfig& config);
  std::string new_id();

  ServiceOptions options_;
  CheckpointRegistry registry_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  bool shutting_down_ = false;
};

}  // namespace nrtw::service
