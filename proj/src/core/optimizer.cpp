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
#include "nrtw/core/optimizer.hpp"

#include <cmath>

namespace nrtw {

OptimizerState OptimizerState::adam(const ParamSet& params, OptimizerHyperparams hyper) {
  OptimizerState s;
  s.kind = OptimizerKind::kAdam;
  s.hyper = hyper;
  s.first = params.zeros_like();
  s.second = params.zeros_like();
  return s;
}

OptimizerState OptimizerState::sgd_momentum(const ParamSet& params, OptimizerHyperparams hyper) {
  require(hyper.momentum >= 0.0 && hyper.momentum < 1.0, ErrorCode::kInvalidArgument,
          "sgd: momentum must lie in [0, 1)");
  OptimizerState s;
  s.kind = OptimizerKind::kSgdMomentum;
  s.hyper = hyper;
  s.first = params.zeros_like();
  return s;
}

void adam_step(ParamSet& params, const ParamSet& grads, OptimizerState& state) {
  require(state.kind == OptimizerKind::kAdam, ErrorCode::kInvalidArgument,
          "adam_step: optimizer state is not adam");
  require_same_layout(params, grads, "adam_step grads");
  require_same_layout(params, state.first, "adam_step first moment");
  require_same_layout(params, state.second, "adam_step second moment");

  ++state.step;
  const double b1 = state.hyper.beta1;
  const double b2 = state.hyper.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const double lr = state.hyper.learning_rate;
  const double eps = state.hyper.adam_eps;

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k].value;
    const Tensor& g = grads[k].value;
    Tensor& m = state.first[k].value;
    Tensor& v = state.second[k].value;
    for (std::int64_t i = 0; i < p.numel(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double m_hat = mi / correction1;
      const double v_hat = vi / correction2;
      p[i] = static_cast<float>(p[i] - lr * m_hat / (std::sqrt(v_hat) + eps));
    }
  }
}

void sgd_momentum_step(ParamSet& params, const ParamSet& grads, OptimizerState& state) {
  require(state.kind == OptimizerKind::kSgdMomentum, ErrorCode::kInvalidArgument,
          "sgd_momentum_step: optimizer state is not sgd-momentum");
  require_same_layout(params, grads, "sgd_momentum_step grads");
  require_same_layout(params, state.first, "sgd_momentum_step velocity");

  ++state.step;
  const float mu = static_cast<float>(state.hyper.momentum);
  const float lr = static_cast<float>(state.hyper.learning_rate);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k].value;
    const Tensor& g = grads[k].value;
    Tensor& vel = state.first[k].value;
    for (std::int64_t i = 0; i < p.numel(); ++i) {
      vel[i] = mu * vel[i] + g[i];
      p[i] -= lr * vel[i];
    }
  }
}

}  // namespace nrtw
