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
#include "nrtw/core/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cstring>

namespace nrtw::ops {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMatrix = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMapMatrix = Eigen::Map<const RowMatrix<T>>;

struct ConvGeometry {
  std::int64_t c_in, h, w, k, h_out, w_out;
  int stride, padding;
  std::int64_t rows() const { return c_in * k * k; }
  std::int64_t cols() const { return h_out * w_out; }
};

// One sample's (C_in*k*k, H_out*W_out) patch matrix. Rows are ordered
// (channel, ky, kx) to match the kernel's row-major flattening.
template <typename T>
void im2col(const T* image, const ConvGeometry& g, T* columns) {
  const std::int64_t plane = g.h_out * g.w_out;
  for (std::int64_t ci = 0; ci < g.c_in; ++ci) {
    const T* src = image + ci * g.h * g.w;
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        T* dst = columns + ((ci * g.k + ky) * g.k + kx) * plane;
        for (std::int64_t oy = 0; oy < g.h_out; ++oy) {
          const std::int64_t iy = oy * g.stride + ky - g.padding;
          T* row = dst + oy * g.w_out;
          if (iy < 0 || iy >= g.h) {
            std::fill(row, row + g.w_out, T(0));
            continue;
          }
          const T* src_row = src + iy * g.w;
          if (g.stride == 1) {
            // Valid ox range satisfies 0 <= ox + kx - p < w.
            const std::int64_t lo = std::clamp<std::int64_t>(g.padding - kx, 0, g.w_out);
            const std::int64_t hi = std::clamp<std::int64_t>(g.w + g.padding - kx, lo, g.w_out);
            std::fill(row, row + lo, T(0));
            std::memcpy(row + lo, src_row + lo + kx - g.padding,
                        static_cast<std::size_t>(hi - lo) * sizeof(T));
            std::fill(row + hi, row + g.w_out, T(0));
          } else {
            for (std::int64_t ox = 0; ox < g.w_out; ++ox) {
              const std::int64_t ix = ox * g.stride + kx - g.padding;
              row[ox] = (ix >= 0 && ix < g.w) ? src_row[ix] : T(0);
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_accumulate(const T* columns, const ConvGeometry& g, T* image) {
  const std::int64_t plane = g.h_out * g.w_out;
  for (std::int64_t ci = 0; ci < g.c_in; ++ci) {
    T* dst = image + ci * g.h * g.w;
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        const T* src = columns + ((ci * g.k + ky) * g.k + kx) * plane;
        for (std::int64_t oy = 0; oy < g.h_out; ++oy) {
          const std::int64_t iy = oy * g.stride + ky - g.padding;
          if (iy < 0 || iy >= g.h) continue;
          const T* row = src + oy * g.w_out;
          T* dst_row = dst + iy * g.w;
          if (g.stride == 1) {
            const std::int64_t lo = std::clamp<std::int64_t>(g.padding - kx, 0, g.w_out);
            const std::int64_t hi = std::clamp<std::int64_t>(g.w + g.padding - kx, lo, g.w_out);
            T* base = dst_row + kx - g.padding;
            for (std::int64_t ox = lo; ox < hi; ++ox) base[ox] += row[ox];
            continue;
          }
          for (std::int64_t ox = 0; ox < g.w_out; ++ox) {
            const std::int64_t ix = ox * g.stride + kx - g.padding;
            if (ix >= 0 && ix < g.w) dst_row[ix] += row[ox];
          }
        }
      }
    }
  }
}

ConvGeometry make_geometry(const Shape& input, const Shape& kernel, int stride, int padding) {
  const Shape out = conv2d_output_shape(input, kernel, stride, padding);
  return ConvGeometry{input.c, input.h, input.w, kernel.h, out.h, out.w, stride, padding};
}

}  // namespace

int compute_threads() noexcept { return Eigen::nbThreads(); }

Shape conv2d_output_shape(const Shape& input, const Shape& kernel, int stride, int padding) {
  require(kernel.h == kernel.w && kernel.h >= 1, ErrorCode::kShapeMismatch,
          "conv2d: kernel must be square, got " + kernel.str());
  require(input.c == kernel.c, ErrorCode::kShapeMismatch,
          "conv2d: input channels " + std::to_string(input.c) + " vs kernel in-channels " +
              std::to_string(kernel.c));
  require(stride == 1 || stride == 2, ErrorCode::kInvalidArgument,
          "conv2d: stride must be 1 or 2, got " + std::to_string(stride));
  require(padding >= 0, ErrorCode::kInvalidArgument, "conv2d: negative padding");
  const std::int64_t span_h = input.h + 2 * padding - kernel.h;
  const std::int64_t span_w = input.w + 2 * padding - kernel.w;
  require(span_h >= 0 && span_w >= 0, ErrorCode::kShapeMismatch,
          "conv2d: kernel larger than padded input " + input.str());
  return Shape{input.n, kernel.n, span_h / stride + 1, span_w / stride + 1};
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                      const BasicTensor<T>& bias, int stride, int padding,
                      AlignedVector<T>* columns) {
  const Shape out_shape = conv2d_output_shape(input.shape(), kernel.shape(), stride, padding);
  require(bias.numel() == kernel.shape().n, ErrorCode::kShapeMismatch,
          "conv2d: bias length " + std::to_string(bias.numel()) + " vs out-channels " +
              std::to_string(kernel.shape().n));
  input.check_finite("conv2d input");

  const ConvGeometry g = make_geometry(input.shape(), kernel.shape(), stride, padding);
  const std::int64_t c_out = kernel.shape().n;
  const std::int64_t per_sample = g.rows() * g.cols();

  AlignedVector<T> scratch;
  AlignedVector<T>& cols = columns != nullptr ? *columns : scratch;
  cols.resize(static_cast<std::size_t>(per_sample * input.shape().n));

  BasicTensor<T> out(out_shape);
  ConstMapMatrix<T> weights(kernel.raw(), c_out, g.rows());
  for (std::int64_t n = 0; n < input.shape().n; ++n) {
    T* sample_cols = cols.data() + n * per_sample;
    im2col(input.raw() + n * g.c_in * g.h * g.w, g, sample_cols);
    ConstMapMatrix<T> patch(sample_cols, g.rows(), g.cols());
    MapMatrix<T> result(out.raw() + n * c_out * g.cols(), c_out, g.cols());
    result.noalias() = weights * patch;
    for (std::int64_t co = 0; co < c_out; ++co) result.row(co).array() += bias[co];
  }
  return out;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                               const BasicTensor<T>& grad_output, int stride, int padding,
                               const AlignedVector<T>& columns, bool input_grad) {
  const Shape out_shape = conv2d_output_shape(input.shape(), kernel.shape(), stride, padding);
  require_same_shape(grad_output.shape(), out_shape, "conv2d_backward grad_output");
  const ConvGeometry g = make_geometry(input.shape(), kernel.shape(), stride, padding);
  const std::int64_t c_out = kernel.shape().n;
  const std::int64_t per_sample = g.rows() * g.cols();
  const bool have_columns =
      static_cast<std::int64_t>(columns.size()) == per_sample * input.shape().n;

  Conv2dGrads<T> grads{input_grad ? BasicTensor<T>(input.shape()) : BasicTensor<T>(),
                       BasicTensor<T>(kernel.shape()),
                       BasicTensor<T>(Shape{1, c_out, 1, 1})};
  ConstMapMatrix<T> weights(kernel.raw(), c_out, g.rows());
  MapMatrix<T> grad_weights(grads.kernel.raw(), c_out, g.rows());
  RowMatrix<T> grad_cols(input_grad ? g.rows() : 0, input_grad ? g.cols() : 0);
  AlignedVector<T> scratch;
  if (!have_columns) scratch.resize(static_cast<std::size_t>(per_sample));

  for (std::int64_t n = 0; n < input.shape().n; ++n) {
    const T* sample_cols = nullptr;
    if (have_columns) {
      sample_cols = columns.data() + n * per_sample;
    } else {
      im2col(input.raw() + n * g.c_in * g.h * g.w, g, scratch.data());
      sample_cols = scratch.data();
    }
    ConstMapMatrix<T> patch(sample_cols, g.rows(), g.cols());
    ConstMapMatrix<T> upstream(grad_output.raw() + n * c_out * g.cols(), c_out, g.cols());
    grad_weights.noalias() += upstream * patch.transpose();
    for (std::int64_t co = 0; co < c_out; ++co) grads.bias[co] += upstream.row(co).sum();
    if (!input_grad) continue;
    grad_cols.noalias() = weights.transpose() * upstream;
    col2im_accumulate(grad_cols.data(), g, grads.input.raw() + n * g.c_in * g.h * g.w);
  }
  return grads;
}

template <typename T>
BasicTensor<T> instance_norm(const BasicTensor<T>& input, T eps, const BasicTensor<T>& scale,
                             const BasicTensor<T>& shift, InstanceNormCache<T>* cache) {
  const Shape& s = input.shape();
  require(scale.numel() == s.c && shift.numel() == s.c, ErrorCode::kShapeMismatch,
          "instance_norm: " + std::to_string(s.c) + " channels but scale/shift have " +
              std::to_string(scale.numel()) + "/" + std::to_string(shift.numel()));
  require(eps > T(0), ErrorCode::kInvalidArgument, "instance_norm: eps must be positive");

  const std::int64_t plane = s.plane();
  BasicTensor<T> out(s);
  BasicTensor<T> normalized;
  if (cache != nullptr) {
    normalized = BasicTensor<T>(s);
    cache->inv_std.assign(static_cast<std::size_t>(s.n * s.c), 0.0);
  }
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      const std::int64_t base = (n * s.c + c) * plane;
      const T* x = input.raw() + base;
      double mean = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) mean += x[i];
      mean /= static_cast<double>(plane);
      double var = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) {
        const double d = x[i] - mean;
        var += d * d;
      }
      var /= static_cast<double>(plane);
      const double inv_std = 1.0 / std::sqrt(var + static_cast<double>(eps));
      const T gamma = scale[c];
      const T beta = shift[c];
      T* y = out.raw() + base;
      for (std::int64_t i = 0; i < plane; ++i) {
        const T xhat = static_cast<T>((x[i] - mean) * inv_std);
        y[i] = gamma * xhat + beta;
        if (cache != nullptr) normalized[base + i] = xhat;
      }
      if (cache != nullptr) cache->inv_std[static_cast<std::size_t>(n * s.c + c)] = inv_std;
    }
  }
  if (cache != nullptr) cache->normalized = std::move(normalized);
  return out;
}

template <typename T>
InstanceNormGrads<T> instance_norm_backward(const InstanceNormCache<T>& cache,
                                            const BasicTensor<T>& scale,
                                            const BasicTensor<T>& grad_output) {
  const Shape& s = cache.normalized.shape();
  require_same_shape(grad_output.shape(), s, "instance_norm_backward");
  const std::int64_t plane = s.plane();
  const double m = static_cast<double>(plane);
  InstanceNormGrads<T> grads{BasicTensor<T>(s), BasicTensor<T>(Shape{1, s.c, 1, 1}),
                             BasicTensor<T>(Shape{1, s.c, 1, 1})};
  std::vector<double> dscale(static_cast<std::size_t>(s.c), 0.0);
  std::vector<double> dshift(static_cast<std::size_t>(s.c), 0.0);
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      const std::int64_t base = (n * s.c + c) * plane;
      const T* xhat = cache.normalized.raw() + base;
      const T* dy = grad_output.raw() + base;
      double sum_dy = 0.0;
      double sum_dy_xhat = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) {
        sum_dy += dy[i];
        sum_dy_xhat += static_cast<double>(dy[i]) * xhat[i];
      }
      dshift[static_cast<std::size_t>(c)] += sum_dy;
      dscale[static_cast<std::size_t>(c)] += sum_dy_xhat;
      // dx = gamma * inv_std / m * (m * dy - sum(dy) - xhat * sum(dy * xhat))
      const double k = static_cast<double>(scale[c]) *
                       cache.inv_std[static_cast<std::size_t>(n * s.c + c)] / m;
      T* dx = grads.input.raw() + base;
      for (std::int64_t i = 0; i < plane; ++i) {
        dx[i] = static_cast<T>(k * (m * dy[i] - sum_dy - xhat[i] * sum_dy_xhat));
      }
    }
  }
  for (std::int64_t c = 0; c < s.c; ++c) {
    grads.scale[c] = static_cast<T>(dscale[static_cast<std::size_t>(c)]);
    grads.shift[c] = static_cast<T>(dshift[static_cast<std::size_t>(c)]);
  }
  return grads;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  BasicTensor<T> out(input.shape());
  for (std::int64_t i = 0; i < input.numel(); ++i) out[i] = input[i] > T(0) ? input[i] : T(0);
  return out;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& output, const BasicTensor<T>& grad_output) {
  require_same_shape(output.shape(), grad_output.shape(), "relu_backward");
  BasicTensor<T> grad(output.shape());
  for (std::int64_t i = 0; i < output.numel(); ++i) {
    grad[i] = output[i] > T(0) ? grad_output[i] : T(0);
  }
  return grad;
}

template <typename T>
BasicTensor<T> upsample_nearest(const BasicTensor<T>& input, int factor) {
  require(factor >= 1, ErrorCode::kInvalidArgument,
          "upsample_nearest: factor must be >= 1, got " + std::to_string(factor));
  const Shape& s = input.shape();
  BasicTensor<T> out(Shape{s.n, s.c, s.h * factor, s.w * factor});
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      for (std::int64_t y = 0; y < s.h * factor; ++y) {
        for (std::int64_t x = 0; x < s.w * factor; ++x) {
          out.at(n, c, y, x) = input.at(n, c, y / factor, x / factor);
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> upsample_nearest_backward(const BasicTensor<T>& grad_output, int factor) {
  require(factor >= 1, ErrorCode::kInvalidArgument, "upsample_nearest_backward: bad factor");
  const Shape& s = grad_output.shape();
  require(s.h % factor == 0 && s.w % factor == 0, ErrorCode::kShapeMismatch,
          "upsample_nearest_backward: extent not divisible by factor");
  BasicTensor<T> grad(Shape{s.n, s.c, s.h / factor, s.w / factor});
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      for (std::int64_t y = 0; y < s.h; ++y) {
        for (std::int64_t x = 0; x < s.w; ++x) {
          grad.at(n, c, y / factor, x / factor) += grad_output.at(n, c, y, x);
        }
      }
    }
  }
  return grad;
}

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  require(sa.n == sb.n && sa.h == sb.h && sa.w == sb.w, ErrorCode::kShapeMismatch,
          "concat_channels: " + sa.str() + " vs " + sb.str());
  BasicTensor<T> out(Shape{sa.n, sa.c + sb.c, sa.h, sa.w});
  const std::int64_t plane = sa.plane();
  for (std::int64_t n = 0; n < sa.n; ++n) {
    T* dst = out.raw() + n * (sa.c + sb.c) * plane;
    std::copy_n(a.raw() + n * sa.c * plane, sa.c * plane, dst);
    std::copy_n(b.raw() + n * sb.c * plane, sb.c * plane, dst + sa.c * plane);
  }
  return out;
}

template <typename T>
double mse_loss(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mse_loss");
  require(a.numel() > 0, ErrorCode::kInvalidArgument, "mse_loss: empty tensors");
  double acc = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.numel());
}

template <typename T>
BasicTensor<T> mse_loss_backward(const BasicTensor<T>& a, const BasicTensor<T>& b,
                                 double upstream) {
  require_same_shape(a.shape(), b.shape(), "mse_loss_backward");
  BasicTensor<T> grad(a.shape());
  const double k = 2.0 * upstream / static_cast<double>(a.numel());
  for (std::int64_t i = 0; i < a.numel(); ++i) {
    grad[i] = static_cast<T>(k * (static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return grad;
}

#define NRTW_INSTANTIATE(T)                                                                 \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&,             \
                                 const BasicTensor<T>&, int, int, AlignedVector<T>*);         \
  template Conv2dGrads<T> conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&,    \
                                          const BasicTensor<T>&, int, int,                 \
                                          const AlignedVector<T>&, bool);                    \
  template BasicTensor<T> instance_norm(const BasicTensor<T>&, T, const BasicTensor<T>&,   \
                                        const BasicTensor<T>&, InstanceNormCache<T>*);     \
  template InstanceNormGrads<T> instance_norm_backward(                                    \
      const InstanceNormCache<T>&, const BasicTensor<T>&, const BasicTensor<T>&);           \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                      \
  template BasicTensor<T> relu_backward(const BasicTensor<T>&, const BasicTensor<T>&);      \
  template BasicTensor<T> upsample_nearest(const BasicTensor<T>&, int);                     \
  template BasicTensor<T> upsample_nearest_backward(const BasicTensor<T>&, int);            \
  template BasicTensor<T> concat_channels(const BasicTensor<T>&, const BasicTensor<T>&);    \
  template double mse_loss(const BasicTensor<T>&, const BasicTensor<T>&);                   \
  template BasicTensor<T> mse_loss_backward(const BasicTensor<T>&, const BasicTensor<T>&,   \
                                            double);

NRTW_INSTANTIATE(float)
NRTW_INSTANTIATE(double)
#undef NRTW_INSTANTIATE

}  // namespace nrtw::ops
