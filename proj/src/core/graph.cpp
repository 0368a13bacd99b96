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
#include "nrtw/core/graph.hpp"

#include <memory>

#include "nrtw/core/ops.hpp"

namespace nrtw {

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename T>
const typename BasicGraph<T>::Node& BasicGraph<T>::node(Var v) const {
  require(v.valid() && v.id < nodes_.size(), ErrorCode::kInvalidArgument,
          "graph: variable does not belong to this graph");
  return nodes_[v.id];
}

template <typename T>
void BasicGraph<T>::accumulate(std::size_t id, BasicTensor<T> grad) {
  auto& slot = grads_[id];
  if (slot.empty()) {
    slot = std::move(grad);
    return;
  }
  for (std::int64_t i = 0; i < slot.numel(); ++i) slot[i] += grad[i];
}

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::constant(BasicTensor<T> value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::parameter(const std::string& name,
                                                     BasicTensor<T> value) {
  require(!name.empty(), ErrorCode::kInvalidArgument, "graph: parameter name is empty");
  for (const auto& existing : nodes_) {
    require(existing.param_name != name, ErrorCode::kInvalidArgument,
            "graph: duplicate parameter '" + name + "'");
  }
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  n.param_name = name;
  return push(std::move(n));
}

template <typename T>
std::vector<typename BasicGraph<T>::Var> BasicGraph<T>::parameters(
    const BasicParamSet<T>& params) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& e : params.entries()) vars.push_back(parameter(e.name, e.value));
  return vars;
}

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::conv2d(Var input, Var kernel, Var bias, int stride,
                                                  int padding) {
  const bool grad = needs_grad(input) || needs_grad(kernel) || needs_grad(bias);
  auto columns = std::make_shared<AlignedVector<T>>();
  Node n;
  n.value = ops::conv2d(node(input).value, node(kernel).value, node(bias).value, stride, padding,
                        grad ? columns.get() : nullptr);
  n.needs_grad = grad;
  if (grad) {
    n.backward = [input, kernel, bias, stride, padding, columns](BasicGraph& g,
                                                                 std::size_t self) {
      auto grads = ops::conv2d_backward(g.nodes_[input.id].value, g.nodes_[kernel.id].value,
                                        g.grads_[self], stride, padding, *columns,
                                        g.needs_grad(input));
      columns->clear();
      columns->shrink_to_fit();
      if (g.needs_grad(input)) g.accumulate(input.id, std::move(grads.input));
      if (g.needs_grad(kernel)) g.accumulate(kernel.id, std::move(grads.kernel));
      if (g.needs_grad(bias)) g.accumulate(bias.id, std::move(grads.bias));
    };
  }
  return push(std::move(n));
}

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::instance_norm(Var input, Var scale, Var shift,
                                                         T eps) {
  const bool grad = needs_grad(input) || needs_grad(scale) || needs_grad(shift);
  auto cache = std::make_shared<ops::InstanceNormCache<T>>();
  Node n;
  n.value = ops::instance_norm(node(input).value, eps, node(scale).value, node(shift).value,
                               grad ? cache.get() : nullptr);
  n.needs_grad = grad;
  if (grad) {
    n.backward = [input, scale, shift, cache](BasicGraph& g, std::size_t self) {
      auto grads = ops::instance_norm_backward(*cache, g.nodes_[scale.id].value, g.grads_[self]);
      if (g.needs_grad(input)) g.accumulate(input.id, std::move(grads.input));
      if (g.needs_grad(scale)) g.accumulate(scale.id, std::move(grads.scale));
      if (g.needs_grad(shift)) g.accumulate(shift.id, std::move(grads.shift));
    };
  }
  return push(std::move(n));
}

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::relu(Var input) {
  Node n;
  n.value = ops::relu(node(input).value);
  n.needs_grad = needs_grad(input);
  if (n.needs_grad) {
    n.backward = [input](BasicGraph& g, std::size_t self) {
      g.accumulate(input.id, ops::relu_backward(g.nodes_[self].value, g.grads_[self]));
    };
  }
  return push(std::move(n));
}

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::upsample_nearest(Var input, int factor) {
  Node n;
  n.value = ops::upsample_nearest(node(input).value, factor);
  n.needs_grad = needs_grad(input);
  if (n.needs_grad) {
    n.backward = [input, factor](BasicGraph& g, std::size_t self) {
      g.accumulate(input.id, ops::upsample_nearest_backward(g.grads_[self], factor));
    };
  }
  return push(std::move(n));
}

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::concat_channels(Var a, Var b) {
  Node n;
  n.value = ops::concat_channels(node(a).value, node(b).value);
  n.needs_grad = needs_grad(a) || needs_grad(b);
  if (n.needs_grad) {
    n.backward = [a, b](BasicGraph& g, std::size_t self) {
      const Shape sa = g.nodes_[a.id].value.shape();
      const Shape sb = g.nodes_[b.id].value.shape();
      const auto& up = g.grads_[self];
      const std::int64_t plane = sa.plane();
      BasicTensor<T> ga(sa), gb(sb);
      for (std::int64_t s = 0; s < sa.n; ++s) {
        const T* src = up.raw() + s * (sa.c + sb.c) * plane;
        std::copy_n(src, sa.c * plane, ga.raw() + s * sa.c * plane);
        std::copy_n(src + sa.c * plane, sb.c * plane, gb.raw() + s * sb.c * plane);
      }
      if (g.needs_grad(a)) g.accumulate(a.id, std::move(ga));
      if (g.needs_grad(b)) g.accumulate(b.id, std::move(gb));
    };
  }
  return push(std::move(n));
}

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::add(Var a, Var b) {
  Node n;
  n.value = nrtw::add(node(a).value, node(b).value);
  n.needs_grad = needs_grad(a) || needs_grad(b);
  if (n.needs_grad) {
    n.backward = [a, b](BasicGraph& g, std::size_t self) {
      if (g.needs_grad(a)) g.accumulate(a.id, g.grads_[self]);
      if (g.needs_grad(b)) g.accumulate(b.id, g.grads_[self]);
    };
  }
  return push(std::move(n));
}

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::scale(Var input, Var factor) {
  const T f = node(factor).value.item();
  Node n;
  n.value = nrtw::scaled(node(input).value, f);
  n.needs_grad = needs_grad(input) || needs_grad(factor);
  if (n.needs_grad) {
    n.backward = [input, factor](BasicGraph& g, std::size_t self) {
      const auto& up = g.grads_[self];
      const auto& x = g.nodes_[input.id].value;
      if (g.needs_grad(input)) {
        g.accumulate(input.id, nrtw::scaled(up, g.nodes_[factor.id].value.item()));
      }
      if (g.needs_grad(factor)) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < up.numel(); ++i) {
          acc += static_cast<double>(up[i]) * static_cast<double>(x[i]);
        }
        g.accumulate(factor.id, BasicTensor<T>(g.nodes_[factor.id].value.shape(),
                                               static_cast<T>(acc)));
      }
    };
  }
  return push(std::move(n));
}

template <typename T>
typename BasicGraph<T>::Var BasicGraph<T>::mse_loss(Var a, Var b, double weight) {
  const double loss = weight * ops::mse_loss(node(a).value, node(b).value);
  Node n;
  n.value = BasicTensor<T>::scalar(static_cast<T>(loss));
  n.scalar = loss;
  n.needs_grad = needs_grad(a) || needs_grad(b);
  if (n.needs_grad) {
    n.backward = [a, b, weight](BasicGraph& g, std::size_t self) {
      const double upstream = weight * static_cast<double>(g.grads_[self].item());
      auto grad = ops::mse_loss_backward(g.nodes_[a.id].value, g.nodes_[b.id].value, upstream);
      if (g.needs_grad(b)) g.accumulate(b.id, nrtw::scaled(grad, T(-1)));
      if (g.needs_grad(a)) g.accumulate(a.id, std::move(grad));
    };
  }
  return push(std::move(n));
}

template <typename T>
const BasicTensor<T>& BasicGraph<T>::value(Var v) const {
  return node(v).value;
}

template <typename T>
double BasicGraph<T>::scalar(Var v) const {
  const Node& n = node(v);
  require(n.value.numel() == 1, ErrorCode::kShapeMismatch,
          "graph: scalar() on non-scalar node of shape " + n.value.shape().str());
  return std::isnan(n.scalar) ? static_cast<double>(n.value.item()) : n.scalar;
}

template <typename T>
BasicParamSet<T> BasicGraph<T>::backward(Var loss) {
  const Node& root = node(loss);
  require(root.value.numel() == 1, ErrorCode::kShapeMismatch,
          "backward: graph must end in a scalar, got shape " + root.value.shape().str());
  require(record_, ErrorCode::kInvalidArgument,
          "backward: graph was built without gradient recording");

  grads_.assign(nodes_.size(), BasicTensor<T>());
  if (root.needs_grad) {
    grads_[loss.id] = BasicTensor<T>::scalar(T(1));
    for (std::size_t id = loss.id + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (!n.backward || grads_[id].empty()) continue;
      n.backward(*this, id);
    }
  }

  BasicParamSet<T> out;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (n.param_name.empty()) continue;
    if (grads_[id].empty()) {
      out.add(n.param_name, BasicTensor<T>(n.value.shape()));
    } else {
      out.add(n.param_name, std::move(grads_[id]));
    }
  }
  grads_.clear();
  return out;
}

template class BasicGraph<float>;
template class BasicGraph<double>;

}  // namespace nrtw
