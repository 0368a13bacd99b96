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

// Curve directories:
//
//   manifest.json          config, provenance, bounds hashes, direction
//                          states and the candidate table
//   t_high.nrtwimg         the input
//   t_low.nrtwimg
//   clean.nrtwimg          only when a clean reference is known
//   candidate_<s><j>.nrtwimg  s is "p" or "m", j zero-padded to 4 digits

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"
#include "nrtw/did/did.hpp"

namespace nrtw::did {

std::string candidate_file_name(std::int64_t index);

/// The NRTW-IMG bytes stored for a candidate.
std::string encode_candidate(const Candidate& candidate);

/// SHA-256 of candidate files by index, so manifests need not re-hash them.
using HashCache = std::map<std::int64_t, std::string>;

/// Writes the image of one candidate (atomically) and returns its hash.
std::string write_candidate_image(const std::filesystem::path& dir, const Candidate& candidate);

/// Rewrites manifest.json (atomically) from the in-memory curve; the image
/// files of its candidates must already exist.
void write_curve_manifest(const std::filesystem::path& dir, const NRTCurve& curve,
                          const HashCache* hashes = nullptr);

/// Bounds, clean reference, every candidate image and the manifest.
void write_curve(const std::filesystem::path& dir, const NRTCurve& curve);

/// Throws kFormat when a file is missing or its hash disagrees with the
/// manifest.
NRTCurve read_curve(const std::filesystem::path& dir);

nlohmann::json manifest_json(const NRTCurve& curve, const HashCache* hashes = nullptr);

void to_json(nlohmann::json& j, const DIDConfig& c);
void from_json(const nlohmann::json& j, DIDConfig& c);

}  // namespace nrtw::did

namespace nrtw::metrics {
void to_json(nlohmann::json& j, const MetricsRecord& r);
void from_json(const nlohmann::json& j, MetricsRecord& r);
}  // namespace nrtw::metrics
