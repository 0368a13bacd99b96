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
#include "nrtw/core/param_set.hpp"

namespace nrtw {

template <typename T>
void BasicParamSet<T>::add(std::string name, BasicTensor<T> value) {
  require(!name.empty(), ErrorCode::kInvalidArgument, "param set: empty name");
  require(!contains(name), ErrorCode::kInvalidArgument,
          "param set: duplicate name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back(Entry{std::move(name), std::move(value)});
}

template <typename T>
std::size_t BasicParamSet<T>::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::kNotFound, "param set: no entry '" + name + "'");
  return it->second;
}

template <typename T>
const BasicTensor<T>& BasicParamSet<T>::get(const std::string& name) const {
  return entries_[index_of(name)].value;
}

template <typename T>
BasicTensor<T>& BasicParamSet<T>::get(const std::string& name) {
  return entries_[index_of(name)].value;
}

template <typename T>
std::int64_t BasicParamSet<T>::parameter_count() const {
  std::int64_t total = 0;
  for (const auto& e : entries_) total += e.value.numel();
  return total;
}

template <typename T>
BasicParamSet<T> BasicParamSet<T>::zeros_like(T fill) const {
  BasicParamSet out;
  for (const auto& e : entries_) out.add(e.name, BasicTensor<T>(e.value.shape(), fill));
  return out;
}

template <typename T>
bool BasicParamSet<T>::same_layout(const BasicParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name ||
        !(entries_[i].value.shape() == other.entries_[i].value.shape())) {
      return false;
    }
  }
  return true;
}

template <typename T>
void require_same_layout(const BasicParamSet<T>& a, const BasicParamSet<T>& b,
                         const std::string& what) {
  require(a.same_layout(b), ErrorCode::kShapeMismatch,
          what + ": parameter layouts differ (" + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()) + " tensors)");
}

template class BasicParamSet<float>;
template class BasicParamSet<double>;
template void require_same_layout(const BasicParamSet<float>&, const BasicParamSet<float>&,
                                  const std::string&);
template void require_same_layout(const BasicParamSet<double>&, const BasicParamSet<double>&,
                                  const std::string&);

}  // namespace nrtw
