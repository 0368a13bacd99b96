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
#include "nrtw/did/did.hpp"

#include <cmath>

#include "nrtw/core/graph.hpp"
#include "nrtw/core/optimizer.hpp"
#include "nrtw/denoiser/denoiser.hpp"

namespace nrtw::did {

Bounds make_bounds(const denoiser::Checkpoint& ckpt, const Image& x, int k) {
  require(k >= 1, ErrorCode::kInvalidArgument, "make_bounds: K must be >= 1");
  require_image(x, "make_bounds input");
  denoiser::check_input_shape(ckpt.network, x.shape());
  return Bounds{x, denoiser::recursive_infer(ckpt, x, k), k};
}

std::string to_string(StopReference reference) {
  switch (reference) {
    case StopReference::kImage:
      return "image";
    case StopReference::kCorrection:
      return "correction";
    case StopReference::kResidual:
      return "residual";
  }
  return "?";
}

StopReference parse_stop_reference(const std::string& name) {
  if (name == "image") return StopReference::kImage;
  if (name == "correction") return StopReference::kCorrection;
  if (name == "residual") return StopReference::kResidual;
  fail(ErrorCode::kInvalidArgument,
       "unknown stop reference '" + name + "' (image|correction|residual)");
}

void validate(const DIDConfig& c) {
  require(c.learning_rate > 0.0 && std::isfinite(c.learning_rate), ErrorCode::kInvalidArgument,
          "did: learning rate must be > 0");
  require(c.momentum >= 0.0 && c.momentum < 1.0, ErrorCode::kInvalidArgument,
          "did: momentum must lie in [0, 1)");
  require(c.stop_threshold > 0.0 && c.stop_threshold < 1.0, ErrorCode::kInvalidArgument,
          "did: stop threshold must lie in (0, 1)");
  require(c.max_iterations >= 0, ErrorCode::kInvalidArgument,
          "did: max iterations must be >= 0");
  require(c.cadence >= 1, ErrorCode::kInvalidArgument, "did: cadence must be >= 1");
  require(c.k >= 1, ErrorCode::kInvalidArgument, "did: K must be >= 1");
}

int sign(Direction direction) noexcept { return direction == Direction::kLowNoise ? 1 : -1; }

std::string to_string(Direction direction) {
  return direction == Direction::kLowNoise ? "low_noise" : "high_resolution";
}

Direction parse_direction(const std::string& name) {
  if (name == "low_noise" || name == "low") return Direction::kLowNoise;
  if (name == "high_resolution" || name == "high") return Direction::kHighResolution;
  fail(ErrorCode::kInvalidArgument,
       "unknown direction '" + name + "' (low_noise|high_resolution)");
}

std::string to_string(SweepStatus status) {
  switch (status) {
    case SweepStatus::kIdle: return "idle";
    case SweepStatus::kBuilding: return "building";
    case SweepStatus::kComplete: return "complete";
    case SweepStatus::kCancelled: return "cancelled";
    case SweepStatus::kFailed: return "failed";
  }
  return "failed";
}

SweepStatus parse_sweep_status(const std::string& name) {
  for (auto s : {SweepStatus::kIdle, SweepStatus::kBuilding, SweepStatus::kComplete,
                 SweepStatus::kCancelled, SweepStatus::kFailed}) {
    if (to_string(s) == name) return s;
  }
  fail(ErrorCode::kFormat, "unknown sweep status '" + name + "'");
}

double distance(const Image& a, const Image& b) { return l2_distance(a, b); }

double relative_change(const Image& prev, const Image& cur) {
  require_same_shape(prev.shape(), cur.shape(), "relative_change");
  const double norm = l2_norm(prev);
  require(norm > 0.0, ErrorCode::kDegenerate, "relative_change: previous output has zero norm");
  return l2_distance(cur, prev) / norm;
}

std::vector<double> linear_twicing_oracle(double phi0, double t, double eta, double theta,
                                          int steps) {
  require(steps >= 0, ErrorCode::kInvalidArgument, "linear_twicing_oracle: steps must be >= 0");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  const double rate = 1.0 - eta * theta;
  for (int j = 0; j <= steps; ++j) out.push_back(t + std::pow(rate, j) * (phi0 - t));
  return out;
}

SweepResult sweep(const denoiser::Checkpoint& ckpt, const Image& x, const Image& target,
                  const DIDConfig& config, Direction direction, const SweepHooks& hooks) {
  validate(config);
  require_image(x, "sweep input");
  require_same_shape(target.shape(), x.shape(), "sweep: target vs input");
  denoiser::check_input_shape(ckpt.network, x.shape());

  ParamSet params = ckpt.params;
  OptimizerHyperparams hyper;
  hyper.learning_rate = config.learning_rate;
  hyper.momentum = config.momentum;
  OptimizerState state = OptimizerState::sgd_momentum(params, hyper);

  const Tensor x_unit = hu_to_unit(x);
  const double hu_range = kHuMax - kHuMin;
  const double count = static_cast<double>(x.numel());

  SweepResult result;
  std::optional<Image> previous;
  std::int64_t local = 0;
  auto store = [&](Image image, std::int64_t iteration, double loss) {
    Candidate c;
    c.index = sign(direction) * local++;
    c.image = std::move(image);
    c.iteration = iteration;
    c.loss = loss;
    c.distance_to_target = distance(c.image, target);
    if (hooks.annotate) hooks.annotate(c);
    result.candidates.push_back(std::move(c));
    if (hooks.on_candidate) hooks.on_candidate(result.candidates.back());
  };

  try {
    for (std::int64_t it = 0;; ++it) {
      if (hooks.cancel != nullptr && hooks.cancel->cancelled()) {
        result.status = SweepStatus::kCancelled;
        break;
      }
      Graph graph;
      auto input = graph.constant(x_unit);
      auto hu_span = graph.constant(Tensor(Shape{1, 1, 1, 1}, static_cast<float>(hu_range)));
      auto hu_offset = graph.constant(Tensor(x.shape(), static_cast<float>(kHuMin)));
      auto output = denoiser::forward(graph, ckpt.network, params, input).output;
      auto output_hu = graph.add(graph.scale(output, hu_span), hu_offset);
      auto loss = graph.mse_loss(output_hu, graph.constant(target), 1.0 / (hu_range * hu_range));
      const double value = graph.scalar(loss);
      if (!std::isfinite(value)) {
        result.status = SweepStatus::kFailed;
        result.error = "non-finite loss at iteration " + std::to_string(it);
        break;
      }
      result.loss_trace.push_back(value);
      result.distance_trace.push_back(std::sqrt(value * count) * hu_range);

      const bool last = it == config.max_iterations;
      if (it % config.cadence == 0 || last || value == 0.0) {
        Image image = graph.value(output_hu);
        Image reference = image;
        if (config.stop_reference == StopReference::kCorrection) reference = subtract(image, x);
        if (config.stop_reference == StopReference::kResidual) reference = subtract(image, target);
        bool settled = false;
        if (previous) {
          const double norm = l2_norm(*previous);
          settled = norm > 0.0 && l2_distance(reference, *previous) / norm < config.stop_threshold;
        }
        store(std::move(image), it, value);
        previous = std::move(reference);
        if (settled || value == 0.0) {
          result.converged = true;
          break;
        }
      }
      if (last) break;

      ParamSet grads = graph.backward(loss);
      sgd_momentum_step(params, grads, state);
      result.iterations = it + 1;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNonFinite) throw;
    result.status = SweepStatus::kFailed;
    result.error = e.what();
  }
  return result;
}

void annotate(Candidate& candidate, const Bounds& bounds, const CurveContext& context) {
  candidate.distance_to_low = distance(candidate.image, bounds.t_low);
  candidate.distance_to_high = distance(candidate.image, bounds.t_high);
  candidate.metrics = metrics::measure(
      candidate.image, context.clean ? &*context.clean : nullptr, context.rois);
}

DirectionState& NRTCurve::state(Direction direction) {
  return direction == Direction::kLowNoise ? low_noise : high_resolution;
}

const DirectionState& NRTCurve::state(Direction direction) const {
  return direction == Direction::kLowNoise ? low_noise : high_resolution;
}

SweepStatus NRTCurve::status() const {
  const SweepStatus a = low_noise.status;
  const SweepStatus b = high_resolution.status;
  for (auto s : {SweepStatus::kBuilding, SweepStatus::kFailed, SweepStatus::kCancelled,
                 SweepStatus::kComplete}) {
    if (a == s || b == s) return s;
  }
  return SweepStatus::kIdle;
}

std::pair<std::int64_t, std::int64_t> NRTCurve::index_range() const {
  if (candidates.empty()) return {0, 0};
  return {candidates.begin()->first, candidates.rbegin()->first};
}

NRTCurve start_curve(const denoiser::Checkpoint& ckpt, const Image& x, const DIDConfig& config,
                     CurveContext context, CurveProvenance provenance) {
  validate(config);
  if (context.clean) {
    require_same_shape(context.clean->shape(), x.shape(), "curve: clean reference vs input");
  }
  for (const auto& roi : context.rois) metrics::validate_roi(roi, x.shape());

  NRTCurve curve;
  curve.bounds = make_bounds(ckpt, x, config.k);
  curve.config = config;
  curve.context = std::move(context);
  curve.provenance = std::move(provenance);
  Candidate zero;
  zero.image = denoiser::infer(ckpt, x);
  annotate(zero, curve.bounds, curve.context);
  curve.candidates.emplace(0, std::move(zero));
  return curve;
}

void run_direction(NRTCurve& curve, const denoiser::Checkpoint& ckpt, Direction direction,
                   const SweepHooks& hooks) {
  const int s = sign(direction);
  std::erase_if(curve.candidates, [s](const auto& kv) { return kv.first * s > 0; });
  DirectionState& st = curve.state(direction);
  st = DirectionState{};
  st.status = SweepStatus::kBuilding;
  st.config = curve.config;

  SweepHooks inner;
  inner.cancel = hooks.cancel;
  inner.annotate = [&](Candidate& c) {
    annotate(c, curve.bounds, curve.context);
    if (hooks.annotate) hooks.annotate(c);
  };
  inner.on_candidate = [&](const Candidate& c) {
    if (c.index != 0) curve.candidates.insert_or_assign(c.index, c);
    if (hooks.on_candidate) hooks.on_candidate(c);
  };
  const Image& target =
      direction == Direction::kLowNoise ? curve.bounds.t_low : curve.bounds.t_high;
  SweepResult r = sweep(ckpt, curve.bounds.t_high, target, curve.config, direction, inner);
  st.status = r.status;
  st.error = std::move(r.error);
  st.iterations = r.iterations;
  st.converged = r.converged;
  st.loss_trace = std::move(r.loss_trace);
}

NRTCurve build_nrt_curve(const denoiser::Checkpoint& ckpt, const Image& x,
                         const DIDConfig& config, const CurveOptions& options) {
  NRTCurve curve = start_curve(ckpt, x, config, options.context, options.provenance);
  if (options.on_candidate) options.on_candidate(curve, curve.candidates.at(0));
  for (Direction d : options.directions) {
    SweepHooks hooks;
    hooks.cancel = options.cancel;
    if (options.on_candidate) {
      hooks.on_candidate = [&](const Candidate& c) {
        if (c.index != 0) options.on_candidate(curve, c);
      };
    }
    run_direction(curve, ckpt, d, hooks);
  }
  return curve;
}

const Candidate& select_candidate(const NRTCurve& curve, std::int64_t index) {
  auto it = curve.candidates.find(index);
  if (it == curve.candidates.end()) {
    const auto [lo, hi] = curve.index_range();
    fail(ErrorCode::kNotFound, "candidate " + std::to_string(index) +
                                   " not in curve; available [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "]");
  }
  return it->second;
}

}  // namespace nrtw::did
