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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "hipseg/ops.hpp"

namespace hipseg {

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

template <typename T>
void require_finite(const BasicTensor<T>& t, const char* where) {
  if (!t.all_finite()) throw DivergenceError(std::string(where) + " produced a non-finite value");
}

template <typename T>
BasicTensor<T> activate(const BasicTensor<T>& input, Activation kind) {
  BasicTensor<T> out(input.shape());
  auto src = input.data();
  auto dst = out.data();
  if (kind == Activation::relu) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > T{0} ? src[i] : T{0};
  } else {
    // Keep the result strictly inside (0, 1) after rounding to T, symmetrically
    // so a saturated voxel passes the same small gradient on either side.
    const T lo = std::numeric_limits<T>::epsilon() / 2;
    const T hi = T{1} - std::numeric_limits<T>::epsilon() / 2;
    for (std::size_t i = 0; i < src.size(); ++i) {
      double s = 1.0 / (1.0 + std::exp(-static_cast<double>(src[i])));
      dst[i] = std::clamp(static_cast<T>(s), lo, hi);
    }
  }
  require_finite(out, "activate");
  return out;
}

template <typename T>
BasicTensor<T> activate_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& output,
                                 Activation kind) {
  if (grad_out.shape() != output.shape()) {
    throw ShapeMismatch("activation gradient shape " + to_string(grad_out.shape()) +
                        " does not match output " + to_string(output.shape()));
  }
  BasicTensor<T> grad(output.shape());
  auto g = grad_out.data();
  auto y = output.data();
  auto dst = grad.data();
  if (kind == Activation::relu) {
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] = y[i] > T{0} ? g[i] : T{0};
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] = g[i] * y[i] * (T{1} - y[i]);
  }
  require_finite(grad, "activate_backward");
  return grad;
}

template <typename T>
BasicTensor<T> elementwise(const BasicTensor<T>& a, const BasicTensor<T>& b, Elementwise op) {
  if (a.shape() != b.shape()) {
    throw ShapeMismatch("elementwise operands differ: " + to_string(a.shape()) + " vs " +
                        to_string(b.shape()));
  }
  BasicTensor<T> out(a.shape());
  auto x = a.data();
  auto y = b.data();
  auto dst = out.data();
  if (op == Elementwise::add) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = x[i] + y[i];
  } else {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = x[i] * y[i];
  }
  require_finite(out, "elementwise");
  return out;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> elementwise_backward(const BasicTensor<T>& grad_out,
                                                               const BasicTensor<T>& a,
                                                               const BasicTensor<T>& b,
                                                               Elementwise op) {
  if (a.shape() != b.shape() || grad_out.shape() != a.shape()) {
    throw ShapeMismatch("elementwise_backward shapes differ");
  }
  if (op == Elementwise::add) return {grad_out, grad_out};
  BasicTensor<T> ga(a.shape());
  BasicTensor<T> gb(b.shape());
  auto g = grad_out.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    ga[i] = g[i] * b[i];
    gb[i] = g[i] * a[i];
  }
  return {std::move(ga), std::move(gb)};
}

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  bool ok = sa.size() >= 2 && sa.size() == sb.size() && sa[0] == sb[0];
  for (std::size_t i = 2; ok && i < sa.size(); ++i) ok = sa[i] == sb[i];
  if (!ok) {
    throw ShapeMismatch("concat_channels needs equal non-channel extents: " + to_string(sa) +
                        " vs " + to_string(sb));
  }
  Shape s = sa;
  s[1] = sa[1] + sb[1];
  BasicTensor<T> out(s);
  const std::size_t block_a = a.size() / static_cast<std::size_t>(sa[0]);
  const std::size_t block_b = b.size() / static_cast<std::size_t>(sb[0]);
  T* dst = out.data().data();
  for (std::int64_t n = 0; n < sa[0]; ++n) {
    std::memcpy(dst, a.data().data() + n * block_a, block_a * sizeof(T));
    dst += block_a;
    std::memcpy(dst, b.data().data() + n * block_b, block_b * sizeof(T));
    dst += block_b;
  }
  return out;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> split_channels(const BasicTensor<T>& grad,
                                                         std::int64_t channels_a) {
  const auto& s = grad.shape();
  if (s.size() < 2 || channels_a <= 0 || channels_a >= s[1]) {
    throw ShapeMismatch("split_channels: cannot split " + to_string(s) + " at " +
                        std::to_string(channels_a));
  }
  Shape sa = s;
  Shape sb = s;
  sa[1] = channels_a;
  sb[1] = s[1] - channels_a;
  BasicTensor<T> a(sa);
  BasicTensor<T> b(sb);
  const std::size_t block_a = a.size() / static_cast<std::size_t>(s[0]);
  const std::size_t block_b = b.size() / static_cast<std::size_t>(s[0]);
  const T* src = grad.data().data();
  for (std::int64_t n = 0; n < s[0]; ++n) {
    std::memcpy(a.data().data() + n * block_a, src, block_a * sizeof(T));
    src += block_a;
    std::memcpy(b.data().data() + n * block_b, src, block_b * sizeof(T));
    src += block_b;
  }
  return {std::move(a), std::move(b)};
}

Tensor volume_to_tensor(const Volume& volume) {
  const auto& d = volume.dims();
  return Tensor(Shape{1, 1, d.d, d.h, d.w},
                std::vector<float>(volume.data().begin(), volume.data().end()));
}

Volume tensor_to_volume(const Tensor& tensor, Spacing3 spacing, std::int64_t n, std::int64_t c) {
  if (tensor.rank() != 5 || n >= tensor.dim(0) || c >= tensor.dim(1)) {
    throw ShapeMismatch("tensor_to_volume needs a rank-5 tensor holding channel (" +
                        std::to_string(n) + ", " + std::to_string(c) + ")");
  }
  Dims3 dims{static_cast<int>(tensor.dim(4)), static_cast<int>(tensor.dim(3)),
             static_cast<int>(tensor.dim(2))};
  const std::size_t block = dims.voxels();
  const float* src = tensor.data().data() + (n * tensor.dim(1) + c) * block;
  return Volume(dims, spacing, std::vector<float>(src, src + block));
}

#define HIPSEG_INSTANTIATE_POINTWISE(T)                                                          \
  template void require_finite<T>(const BasicTensor<T>&, const char*);                          \
  template BasicTensor<T> activate<T>(const BasicTensor<T>&, Activation);                       \
  template BasicTensor<T> activate_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,    \
                                               Activation);                                     \
  template BasicTensor<T> elementwise<T>(const BasicTensor<T>&, const BasicTensor<T>&,          \
                                         Elementwise);                                          \
  template std::pair<BasicTensor<T>, BasicTensor<T>> elementwise_backward<T>(                   \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, Elementwise);        \
  template BasicTensor<T> concat_channels<T>(const BasicTensor<T>&, const BasicTensor<T>&);     \
  template std::pair<BasicTensor<T>, BasicTensor<T>> split_channels<T>(const BasicTensor<T>&,   \
                                                                       std::int64_t);

HIPSEG_INSTANTIATE_POINTWISE(float)
HIPSEG_INSTANTIATE_POINTWISE(double)

}  // namespace hipseg
