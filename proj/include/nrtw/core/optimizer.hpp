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

#include <cstdint>

#include "nrtw/core/param_set.hpp"

namespace nrtw {

enum class OptimizerKind { kAdam, kSgdMomentum };

struct OptimizerHyperparams {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double momentum = 0.9;
};

/// Auxiliary tensors mirror the parameter layout: `first`/`second` hold the
/// Adam moments, `first` alone holds the SGD velocity.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  OptimizerHyperparams hyper;
  std::int64_t step = 0;
  ParamSet first;
  ParamSet second;

  static OptimizerState adam(const ParamSet& params, OptimizerHyperparams hyper);
  static OptimizerState sgd_momentum(const ParamSet& params, OptimizerHyperparams hyper);
};

/// Bias-corrected Adam; epsilon is added after the square root.
void adam_step(ParamSet& params, const ParamSet& grads, OptimizerState& state);

/// v <- mu * v + g;  p <- p - lr * v.
void sgd_momentum_step(ParamSet& params, const ParamSet& grads, OptimizerState& state);

}  // namespace nrtw
