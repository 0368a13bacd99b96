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
#include "nrtw/core/tensor.hpp"

#include <malloc.h>

#include <sstream>

namespace nrtw {
namespace {

// Keeps large activation buffers on the heap between iterations instead of
// returning them to the kernel after every graph.
const bool kAllocatorTuned = [] {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  return true;
}();

}  // namespace

bool allocator_tuned() noexcept { return kAllocatorTuned; }


std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << ", " << c << ", " << h << ", " << w << ")";
  return os.str();
}

void require_same_shape(const Shape& a, const Shape& b, const std::string& what) {
  if (!(a == b)) {
    fail(ErrorCode::kShapeMismatch, what + ": shape " + a.str() + " vs " + b.str());
  }
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(shape) {
  require(shape.n >= 0 && shape.c >= 0 && shape.h >= 0 && shape.w >= 0,
          ErrorCode::kInvalidArgument, "negative tensor extent " + shape.str());
  data_.assign(static_cast<std::size_t>(shape.numel()), fill);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data)
    : shape_(shape), data_(data.begin(), data.end()) {
  require(shape.n >= 0 && shape.c >= 0 && shape.h >= 0 && shape.w >= 0,
          ErrorCode::kInvalidArgument, "negative tensor extent " + shape.str());
  require(static_cast<std::int64_t>(data_.size()) == shape.numel(), ErrorCode::kShapeMismatch,
          "data length " + std::to_string(data_.size()) + " does not match shape " +
              shape.str());
}

template <typename T>
T BasicTensor<T>::item() const {
  require(numel() == 1, ErrorCode::kShapeMismatch, "item() on tensor of shape " + shape_.str());
  return data_.front();
}

template <typename T>
void BasicTensor<T>::check_finite(const std::string& what) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      fail(ErrorCode::kNonFinite,
           what + ": non-finite value at flat index " + std::to_string(i));
    }
  }
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  BasicTensor<T> out(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T>
BasicTensor<T> subtract(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "subtract");
  BasicTensor<T> out(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out[i] = a[i] - b[i];
  return out;
}

template <typename T>
BasicTensor<T> scaled(const BasicTensor<T>& a, T factor) {
  BasicTensor<T> out(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out[i] = a[i] * factor;
  return out;
}

template <typename T>
double l2_norm(const BasicTensor<T>& a) {
  double acc = 0.0;
  for (T v : a.data()) acc += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(acc);
}

template <typename T>
double l2_distance(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "l2_distance");
  double acc = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

#define NRTW_INSTANTIATE(T)                                                 \
  template class BasicTensor<T>;                                            \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> subtract(const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> scaled(const BasicTensor<T>&, T);                 \
  template double l2_norm(const BasicTensor<T>&);                           \
  template double l2_distance(const BasicTensor<T>&, const BasicTensor<T>&);

NRTW_INSTANTIATE(float)
NRTW_INSTANTIATE(double)
#undef NRTW_INSTANTIATE

}  // namespace nrtw
