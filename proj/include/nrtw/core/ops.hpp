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

// Forward and backward kernels for the differentiable op set. These are plain
// functions over tensors; the tape in graph.hpp wires them together.

#include <vector>

#include "nrtw/core/tensor.hpp"

namespace nrtw::ops {

/// Threads the GEMM backend may use; results are bit-reproducible for a
/// fixed value.
int compute_threads() noexcept;

/// Output extent of a square-kernel convolution.
Shape conv2d_output_shape(const Shape& input, const Shape& kernel, int stride, int padding);

/// Zero-padded cross-correlation. kernel is (C_out, C_in, k, k), bias is
/// (1, C_out, 1, 1). When `columns` is non-null it receives the im2col buffer
/// of every sample so the backward pass can reuse it.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                      const BasicTensor<T>& bias, int stride, int padding,
                      AlignedVector<T>* columns = nullptr);

template <typename T>
struct Conv2dGrads {
  BasicTensor<T> input;
  BasicTensor<T> kernel;
  BasicTensor<T> bias;
};

/// `columns` may be empty, in which case im2col is recomputed from `input`.
template <typename T>
Conv2dGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                               const BasicTensor<T>& grad_output, int stride, int padding,
                               const AlignedVector<T>& columns, bool input_grad = true);

template <typename T>
struct InstanceNormCache {
  BasicTensor<T> normalized;       // pre-affine x-hat
  std::vector<double> inv_std;     // one per (n, c) plane
};

/// Per-(sample, channel) standardization followed by a per-channel affine.
/// scale and shift are (1, C, 1, 1).
template <typename T>
BasicTensor<T> instance_norm(const BasicTensor<T>& input, T eps, const BasicTensor<T>& scale,
                             const BasicTensor<T>& shift, InstanceNormCache<T>* cache = nullptr);

template <typename T>
struct InstanceNormGrads {
  BasicTensor<T> input;
  BasicTensor<T> scale;
  BasicTensor<T> shift;
};

template <typename T>
InstanceNormGrads<T> instance_norm_backward(const InstanceNormCache<T>& cache,
                                            const BasicTensor<T>& scale,
                                            const BasicTensor<T>& grad_output);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);
/// Gradient masked by the forward output (output > 0).
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& output, const BasicTensor<T>& grad_output);

template <typename T>
BasicTensor<T> upsample_nearest(const BasicTensor<T>& input, int factor);
template <typename T>
BasicTensor<T> upsample_nearest_backward(const BasicTensor<T>& grad_output, int factor);

/// Channel concatenation of two tensors with equal N, H, W.
template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Mean of squared differences, accumulated in double.
template <typename T>
double mse_loss(const BasicTensor<T>& a, const BasicTensor<T>& b);
/// d/da of mse_loss, scaled by `upstream`.
template <typename T>
BasicTensor<T> mse_loss_backward(const BasicTensor<T>& a, const BasicTensor<T>& b,
                                 double upstream);

}  // namespace nrtw::ops
