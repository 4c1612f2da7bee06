/*
 * Copyright 2026 The hipseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HIPSEG_TENSOR_HPP_
#define HIPSEG_TENSOR_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hipseg/errors.hpp"

namespace hipseg {

using Shape = std::vector<std::int64_t>;

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t acc, std::int64_t e) {
                           return acc * static_cast<std::size_t>(e);
                         });
}

std::string to_string(const Shape& shape);

/// Dense row-major N-d array with an optional same-shape gradient buffer.
///
/// Network tensors use the N x C x D x H x W layout, so the last extent is
/// the fastest-varying one (x).
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)) {
    check_shape();
    data_.assign(shape_numel(shape_), fill);
  }

  BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != shape_numel(shape_)) {
      throw ShapeMismatch("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape " + to_string(shape_));
    }
  }

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t rank() const { return shape_.size(); }
  [[nodiscard]] std::int64_t dim(std::size_t i) const { return shape_.at(i); }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::span<T> data() { return data_; }
  [[nodiscard]] std::span<const T> data() const { return data_; }
  [[nodiscard]] std::vector<T>& storage() { return data_; }
  [[nodiscard]] const std::vector<T>& storage() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  [[nodiscard]] bool has_grad() const { return grad_.has_value(); }
  void zero_grad() { grad_.emplace(data_.size(), T{0}); }
  void drop_grad() { grad_.reset(); }
  [[nodiscard]] std::span<T> grad() {
    if (!grad_) throw StateError("tensor has no gradient buffer");
    return *grad_;
  }
  [[nodiscard]] std::span<const T> grad() const {
    if (!grad_) throw StateError("tensor has no gradient buffer");
    return *grad_;
  }

  [[nodiscard]] bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  /// Same values under a new shape with an equal element count.
  [[nodiscard]] BasicTensor reshaped(Shape shape) const {
    return BasicTensor(std::move(shape), data_);
  }

  template <typename U>
  [[nodiscard]] BasicTensor<U> cast() const {
    return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

 private:
  void check_shape() const {
    for (auto e : shape_) {
      if (e <= 0) throw ShapeMismatch("tensor extents must be positive, got " + to_string(shape_));
    }
  }

  Shape shape_;
  std::vector<T> data_;
  std::optional<std::vector<T>> grad_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

}  // namespace hipseg

#endif  // HIPSEG_TENSOR_HPP_
