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

#include <map>
#include <string>
#include <vector>

#include "nrtw/core/tensor.hpp"

namespace nrtw {

/// Ordered collection of uniquely named tensors. Used both for network
/// parameters and for gradients / optimizer moments that mirror them.
template <typename T>
class BasicParamSet {
 public:
  struct Entry {
    std::string name;
    BasicTensor<T> value;
  };

  void add(std::string name, BasicTensor<T> value);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const BasicTensor<T>& get(const std::string& name) const;
  BasicTensor<T>& get(const std::string& name);
  std::size_t index_of(const std::string& name) const;

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<Entry>& entries() noexcept { return entries_; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  Entry& operator[](std::size_t i) { return entries_[i]; }

  /// Total scalar count over all tensors.
  std::int64_t parameter_count() const;

  /// Same names and shapes, all values set to `fill`.
  BasicParamSet zeros_like(T fill = T(0)) const;

  /// True when names, order and shapes agree.
  bool same_layout(const BasicParamSet& other) const;

  template <typename U>
  BasicParamSet<U> cast() const {
    BasicParamSet<U> out;
    for (const auto& e : entries_) out.add(e.name, e.value.template cast<U>());
    return out;
  }

  friend bool operator==(const BasicParamSet& a, const BasicParamSet& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      if (a.entries_[i].name != b.entries_[i].name ||
          !(a.entries_[i].value == b.entries_[i].value)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

using ParamSet = BasicParamSet<float>;
using ParamSetD = BasicParamSet<double>;

/// Throws kShapeMismatch unless `a` and `b` share names, order and shapes.
template <typename T>
void require_same_layout(const BasicParamSet<T>& a, const BasicParamSet<T>& b,
                         const std::string& what);

}  // namespace nrtw
