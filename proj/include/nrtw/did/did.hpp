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

// Test-time fine-tuning of a trained denoiser toward two bound images. Each
// sweep restarts from the checkpoint weights and snapshots its outputs into
// a signed-index noise-resolution tradeoff curve: positive indices move
// toward the smoothed bound, negative ones toward the noisy input.

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nrtw/data/image.hpp"
#include "nrtw/denoiser/checkpoint.hpp"
#include "nrtw/metrics/metrics.hpp"

namespace nrtw::did {

struct Bounds {
  Image t_high;  // the input itself
  Image t_low;   // the denoiser applied k times
  int k = 3;
};

/// Throws kInvalidArgument for k < 1 and kShapeMismatch for inputs the
/// network cannot take.
Bounds make_bounds(const denoiser::Checkpoint& ckpt, const Image& x, int k);

/// What the stopping rule compares between consecutive snapshots.
enum class StopReference {
  kImage,       // the output phi_w(x)
  kCorrection,  // the correction phi_w(x) - x
  kResidual,    // the remaining gap phi_w(x) - target
};

std::string to_string(StopReference reference);
StopReference parse_stop_reference(const std::string& name);

struct DIDConfig {
  double learning_rate = 1e-2;
  double momentum = 0.9;
  double stop_threshold = 0.01;
  std::int64_t max_iterations = 2000;
  /// Optimizer steps between stored candidates.
  std::int64_t cadence = 10;
  int k = 3;
  StopReference stop_reference = StopReference::kCorrection;

  friend bool operator==(const DIDConfig&, const DIDConfig&) = default;
};

void validate(const DIDConfig& config);

enum class Direction { kLowNoise, kHighResolution };

/// +1 toward t_low, -1 toward t_high.
int sign(Direction direction) noexcept;
std::string to_string(Direction direction);
/// Accepts "low_noise"/"low" and "high_resolution"/"high".
Direction parse_direction(const std::string& name);

struct Candidate {
  std::int64_t index = 0;
  Image image;  // HU
  /// Optimizer steps taken before this output; 0 for the default image.
  std::int64_t iteration = 0;
  /// Mean squared error to the sweep target in the network intensity domain.
  std::optional<double> loss;
  /// L2 distance in HU to the sweep target.
  std::optional<double> distance_to_target;
  double distance_to_low = 0.0;
  double distance_to_high = 0.0;
  metrics::MetricsRecord metrics;
};

enum class SweepStatus { kIdle, kBuilding, kComplete, kCancelled, kFailed };

std::string to_string(SweepStatus status);
SweepStatus parse_sweep_status(const std::string& name);

class CancelToken {
 public:
  void cancel() noexcept { flag_.store(true, std::memory_order_relaxed); }
  bool cancelled() const noexcept { return flag_.load(std::memory_order_relaxed); }

 private:
  std::atomic<bool> flag_{false};
};

struct SweepHooks {
  /// Runs on each candidate before it is stored, e.g. to attach metrics.
  std::function<void(Candidate&)> annotate;
  /// Sees every stored candidate, in order, as soon as it exists.
  std::function<void(const Candidate&)> on_candidate;
  /// Checked between iterations.
  const CancelToken* cancel = nullptr;
};

struct SweepResult {
  /// Snapshot order; the first entry is the untouched network's output with
  /// index 0, later ones carry index sign * 1, sign * 2, ...
  std::vector<Candidate> candidates;
  /// Loss and HU distance to the target for every evaluated iterate.
  std::vector<double> loss_trace;
  std::vector<double> distance_trace;
  SweepStatus status = SweepStatus::kComplete;
  std::string error;
  std::int64_t iterations = 0;
  bool converged = false;
};

/// SGD with momentum on the mean squared error between phi_w(x) and
/// `target`, starting from the checkpoint weights with zero velocity. Stops
/// when a snapshot moves less than `stop_threshold` relative to the previous
/// one, when the loss is exactly zero, or after `max_iterations` steps. A
/// non-finite loss ends the sweep as failed; cancellation as cancelled. The
/// checkpoint is never modified.
SweepResult sweep(const denoiser::Checkpoint& ckpt, const Image& x, const Image& target,
                  const DIDConfig& config, Direction direction, const SweepHooks& hooks = {});

/// ||cur - prev|| / ||prev||. Throws kDegenerate for a zero-norm `prev`.
double relative_change(const Image& prev, const Image& cur);

/// phi^j = t + (1 - eta * theta)^j (phi^0 - t) for j = 0..steps.
std::vector<double> linear_twicing_oracle(double phi0, double t, double eta, double theta,
                                          int steps);

struct CurveContext {
  std::optional<Image> clean;
  std::vector<metrics::Roi> rois;
};

/// Fills distances to both bounds and the ROI metrics.
void annotate(Candidate& candidate, const Bounds& bounds, const CurveContext& context);

struct DirectionState {
  SweepStatus status = SweepStatus::kIdle;
  /// The configuration the direction last ran with.
  DIDConfig config;
  std::string error;
  std::int64_t iterations = 0;
  bool converged = false;
  std::vector<double> loss_trace;
};

struct CurveProvenance {
  std::string checkpoint_id;
  std::string input_id;
};

struct NRTCurve {
  std::map<std::int64_t, Candidate> candidates;
  Bounds bounds;
  DIDConfig config;
  CurveContext context;
  DirectionState low_noise;
  DirectionState high_resolution;
  CurveProvenance provenance;

  DirectionState& state(Direction direction);
  const DirectionState& state(Direction direction) const;
  /// Building if either direction is; otherwise failed, then cancelled,
  /// then complete.
  SweepStatus status() const;
  /// Smallest and largest stored index.
  std::pair<std::int64_t, std::int64_t> index_range() const;
};

/// Bounds and the annotated index-0 candidate, with no sweep started.
NRTCurve start_curve(const denoiser::Checkpoint& ckpt, const Image& x, const DIDConfig& config,
                     CurveContext context, CurveProvenance provenance = {});

/// Runs one direction into `curve`, replacing its earlier candidates.
void run_direction(NRTCurve& curve, const denoiser::Checkpoint& ckpt, Direction direction,
                   const SweepHooks& hooks = {});

struct CurveOptions {
  std::vector<Direction> directions = {Direction::kLowNoise, Direction::kHighResolution};
  CurveContext context;
  CurveProvenance provenance;
  std::function<void(const NRTCurve&, const Candidate&)> on_candidate;
  const CancelToken* cancel = nullptr;
};

NRTCurve build_nrt_curve(const denoiser::Checkpoint& ckpt, const Image& x,
                         const DIDConfig& config, const CurveOptions& options = {});

/// Throws kNotFound naming the available [min, max] range.
const Candidate& select_candidate(const NRTCurve& curve, std::int64_t index);

/// HU-domain L2 distance.
double distance(const Image& a, const Image& b);

}  // namespace nrtw::did
