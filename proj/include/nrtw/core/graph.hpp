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

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "nrtw/core/param_set.hpp"
#include "nrtw/core/tensor.hpp"

namespace nrtw {

/// Reverse-mode tape over the fixed op set used by the denoisers.
///
/// Every op evaluates eagerly and appends a node; backward() walks the tape
/// in reverse and returns gradients for every registered parameter, in
/// registration order. A graph built with `record_gradients = false` keeps
/// only values, so inference does not pay for im2col caches.
template <typename T>
class BasicGraph {
 public:
  struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
    bool valid() const noexcept { return id != std::numeric_limits<std::size_t>::max(); }
  };

  explicit BasicGraph(bool record_gradients = true) : record_(record_gradients) {}

  BasicGraph(const BasicGraph&) = delete;
  BasicGraph& operator=(const BasicGraph&) = delete;
  BasicGraph(BasicGraph&&) noexcept = default;
  BasicGraph& operator=(BasicGraph&&) noexcept = default;

  bool records_gradients() const noexcept { return record_; }

  /// Input that never receives a gradient.
  Var constant(BasicTensor<T> value);
  /// Differentiable leaf. Names must be unique within a graph.
  Var parameter(const std::string& name, BasicTensor<T> value);
  /// Registers every entry of `params` and returns the handles in order.
  std::vector<Var> parameters(const BasicParamSet<T>& params);

  Var conv2d(Var input, Var kernel, Var bias, int stride, int padding);
  Var instance_norm(Var input, Var scale, Var shift, T eps);
  Var relu(Var input);
  Var upsample_nearest(Var input, int factor);
  Var concat_channels(Var a, Var b);
  Var add(Var a, Var b);
  /// Multiplies every element of `input` by the single element of `factor`.
  Var scale(Var input, Var factor);
  /// weight * mean((a - b)^2).
  Var mse_loss(Var a, Var b, double weight = 1.0);

  const BasicTensor<T>& value(Var v) const;
  /// Double-precision value of a scalar node (loss nodes keep it unrounded).
  double scalar(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Gradient of the scalar `loss` with respect to every parameter.
  BasicParamSet<T> backward(Var loss);

 private:
  struct Node {
    BasicTensor<T> value;
    double scalar = std::numeric_limits<double>::quiet_NaN();
    bool needs_grad = false;
    std::string param_name;  // non-empty for parameter leaves
    std::function<void(BasicGraph&, std::size_t)> backward;
  };

  Var push(Node node);
  const Node& node(Var v) const;
  bool needs_grad(Var v) const { return record_ && nodes_[v.id].needs_grad; }
  void accumulate(std::size_t id, BasicTensor<T> grad);

  bool record_;
  std::vector<Node> nodes_;
  std::vector<BasicTensor<T>> grads_;
};

using Graph = BasicGraph<float>;
using GraphD = BasicGraph<double>;

}  // namespace nrtw
