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

#include <Eigen/Core>
#include <algorithm>
#include <cstring>

#include "hipseg/ops.hpp"

namespace hipseg {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

// Column budget for one im2col chunk, in elements.
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

struct Extents3 {
  std::int64_t d, h, w;
  [[nodiscard]] std::int64_t count() const { return d * h * w; }
};

Extents3 spatial(const Shape& s) { return {s[2], s[3], s[4]}; }

void require_rank5(const Shape& s, const char* what) {
  if (s.size() != 5) {
    throw ShapeMismatch(std::string(what) + " must be rank 5 [N,C,D,H,W], got " + to_string(s));
  }
}

void check_geometry(const ConvGeometry& g) {
  if (g.kernel != 2 && g.kernel != 3) throw ShapeMismatch("conv3d kernel must be 2 or 3");
  if (g.stride != 1 && g.stride != 2) throw ShapeMismatch("conv3d stride must be 1 or 2");
  if (g.padding < 0) throw ShapeMismatch("conv3d padding must be non-negative");
}

// Unfolds output planes [od0, od1) of one channel block into a
// (C*k^3) x (planes*Ho*Wo) row-major matrix. Padding reads as zero.
template <typename T>
void im2col(const T* src, std::int64_t channels, Extents3 in, Extents3 out, const ConvGeometry& g,
            std::int64_t od0, std::int64_t od1, T* cols) {
  const int k = g.kernel;
  const std::int64_t plane = out.h * out.w;
  const std::int64_t ncols = (od1 - od0) * plane;
  T* row = cols;
  for (std::int64_t c = 0; c < channels; ++c) {
    const T* chan = src + c * in.count();
    for (int kd = 0; kd < k; ++kd) {
      for (int kh = 0; kh < k; ++kh) {
        for (int kw = 0; kw < k; ++kw, row += ncols) {
          T* dst = row;
          for (std::int64_t od = od0; od < od1; ++od) {
            std::int64_t id = od * g.stride - g.padding + kd;
            if (id < 0 || id >= in.d) {
              std::fill(dst, dst + plane, T{0});
              dst += plane;
              continue;
            }
            for (std::int64_t oh = 0; oh < out.h; ++oh, dst += out.w) {
              std::int64_t ih = oh * g.stride - g.padding + kh;
              if (ih < 0 || ih >= in.h) {
                std::fill(dst, dst + out.w, T{0});
                continue;
              }
              const T* line = chan + (id * in.h + ih) * in.w;
              std::int64_t base = -g.padding + kw;
              if (g.stride == 1) {
                std::int64_t lo = std::clamp<std::int64_t>(-base, 0, out.w);
                std::int64_t hi = std::clamp<std::int64_t>(in.w - base, lo, out.w);
                std::fill(dst, dst + lo, T{0});
                if (hi > lo) std::memcpy(dst + lo, line + base + lo, (hi - lo) * sizeof(T));
                std::fill(dst + hi, dst + out.w, T{0});
              } else {
                for (std::int64_t ow = 0; ow < out.w; ++ow) {
                  std::int64_t iw = ow * g.stride + base;
                  dst[ow] = (iw >= 0 && iw < in.w) ? line[iw] : T{0};
                }
              }
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates columns back into the source layout.
template <typename T>
void col2im(const T* cols, std::int64_t channels, Extents3 in, Extents3 out, const ConvGeometry& g,
            std::int64_t od0, std::int64_t od1, T* dst_image) {
  const int k = g.kernel;
  const std::int64_t plane = out.h * out.w;
  const std::int64_t ncols = (od1 - od0) * plane;
  const T* row = cols;
  for (std::int64_t c = 0; c < channels; ++c) {
    T* chan = dst_image + c * in.count();
    for (int kd = 0; kd < k; ++kd) {
      for (int kh = 0; kh < k; ++kh) {
        for (int kw = 0; kw < k; ++kw, row += ncols) {
          const T* src = row;
          for (std::int64_t od = od0; od < od1; ++od) {
            std::int64_t id = od * g.stride - g.padding + kd;
            if (id < 0 || id >= in.d) {
              src += plane;
              continue;
            }
            for (std::int64_t oh = 0; oh < out.h; ++oh, src += out.w) {
              std::int64_t ih = oh * g.stride - g.padding + kh;
              if (ih < 0 || ih >= in.h) continue;
              T* line = chan + (id * in.h + ih) * in.w;
              std::int64_t base = -g.padding + kw;
              for (std::int64_t ow = 0; ow < out.w; ++ow) {
                std::int64_t iw = ow * g.stride + base;
                if (iw >= 0 && iw < in.w) line[iw] += src[ow];
              }
            }
          }
        }
      }
    }
  }
}

std::int64_t planes_per_chunk(std::int64_t rows, std::int64_t plane, std::int64_t depth) {
  auto budget = static_cast<std::int64_t>(kColumnBudget);
  return std::clamp<std::int64_t>(budget / std::max<std::int64_t>(1, rows * plane), 1, depth);
}

template <typename T>
void add_bias(T* out, std::span<const T> bias, std::int64_t per_channel) {
  for (std::size_t c = 0; c < bias.size(); ++c) {
    T* p = out + static_cast<std::int64_t>(c) * per_channel;
    const T b = bias[c];
    for (std::int64_t i = 0; i < per_channel; ++i) p[i] += b;
  }
}

template <typename T>
void bias_grad(const T* grad_out, std::int64_t channels, std::int64_t per_channel, T* grad_bias) {
  for (std::int64_t c = 0; c < channels; ++c) {
    const T* p = grad_out + c * per_channel;
    double acc = 0.0;
    for (std::int64_t i = 0; i < per_channel; ++i) acc += p[i];
    grad_bias[c] += static_cast<T>(acc);
  }
}

}  // namespace

std::int64_t conv_output_extent(std::int64_t extent, const ConvGeometry& g) {
  std::int64_t span = extent + 2 * g.padding - g.kernel;
  if (span < 0 || span % g.stride != 0) {
    throw ShapeMismatch("extent " + std::to_string(extent) + " is not admissible for kernel " +
                        std::to_string(g.kernel) + ", stride " + std::to_string(g.stride) +
                        ", padding " + std::to_string(g.padding));
  }
  return span / g.stride + 1;
}

template <typename T>
BasicTensor<T> conv3d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      std::span<const T> bias, const ConvGeometry& g) {
  check_geometry(g);
  require_rank5(input.shape(), "conv3d input");
  require_rank5(weight.shape(), "conv3d weight");
  const auto& ws = weight.shape();
  const std::int64_t n = input.dim(0), cin = input.dim(1), cout = ws[0];
  if (ws[1] != cin || ws[2] != g.kernel || ws[3] != g.kernel || ws[4] != g.kernel) {
    throw ShapeMismatch("conv3d weight " + to_string(ws) + " does not fit input " +
                        to_string(input.shape()) + " with kernel " + std::to_string(g.kernel));
  }
  if (!bias.empty() && static_cast<std::int64_t>(bias.size()) != cout) {
    throw ShapeMismatch("conv3d bias length must equal output channels");
  }
  Extents3 in = spatial(input.shape());
  Extents3 out{conv_output_extent(in.d, g), conv_output_extent(in.h, g),
               conv_output_extent(in.w, g)};

  BasicTensor<T> result(Shape{n, cout, out.d, out.h, out.w});
  const std::int64_t rows = cin * g.kernel * g.kernel * g.kernel;
  const std::int64_t plane = out.h * out.w;
  const std::int64_t chunk = planes_per_chunk(rows, plane, out.d);
  std::vector<T> cols(static_cast<std::size_t>(rows * chunk * plane));
  ConstMatMap<T> w(weight.data().data(), cout, rows, Eigen::OuterStride<>(rows));

  for (std::int64_t b = 0; b < n; ++b) {
    const T* src = input.data().data() + b * cin * in.count();
    T* dst = result.data().data() + b * cout * out.count();
    for (std::int64_t od0 = 0; od0 < out.d; od0 += chunk) {
      std::int64_t od1 = std::min(out.d, od0 + chunk);
      std::int64_t ncols = (od1 - od0) * plane;
      im2col(src, cin, in, out, g, od0, od1, cols.data());
      ConstMatMap<T> c(cols.data(), rows, ncols, Eigen::OuterStride<>(ncols));
      MatMap<T> o(dst + od0 * plane, cout, ncols, Eigen::OuterStride<>(out.count()));
      o.noalias() = w * c;
    }
    if (!bias.empty()) add_bias(dst, bias, out.count());
  }
  require_finite(result, "conv3d");
  return result;
}

template <typename T>
ConvGradients<T> conv3d_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& input,
                                 const BasicTensor<T>& weight, const ConvGeometry& g) {
  check_geometry(g);
  require_rank5(input.shape(), "conv3d input");
  require_rank5(weight.shape(), "conv3d weight");
  require_rank5(grad_out.shape(), "conv3d grad_out");
  const std::int64_t n = input.dim(0), cin = input.dim(1), cout = weight.dim(0);
  if (weight.dim(1) != cin || weight.dim(2) != g.kernel) {
    throw ShapeMismatch("conv3d_backward weight does not fit input");
  }
  Extents3 in = spatial(input.shape());
  Extents3 out{conv_output_extent(in.d, g), conv_output_extent(in.h, g),
               conv_output_extent(in.w, g)};
  if (grad_out.shape() != Shape{n, cout, out.d, out.h, out.w}) {
    throw ShapeMismatch("conv3d_backward grad_out " + to_string(grad_out.shape()) +
                        " does not match forward output");
  }

  ConvGradients<T> grads{BasicTensor<T>(input.shape()), BasicTensor<T>(weight.shape()),
                         BasicTensor<T>(Shape{cout})};
  const std::int64_t rows = cin * g.kernel * g.kernel * g.kernel;
  const std::int64_t plane = out.h * out.w;
  const std::int64_t chunk = planes_per_chunk(rows, plane, out.d);
  std::vector<T> cols(static_cast<std::size_t>(rows * chunk * plane));
  ConstMatMap<T> w(weight.data().data(), cout, rows, Eigen::OuterStride<>(rows));
  MatMap<T> gw(grads.weight.data().data(), cout, rows, Eigen::OuterStride<>(rows));

  for (std::int64_t b = 0; b < n; ++b) {
    const T* src = input.data().data() + b * cin * in.count();
    const T* gout = grad_out.data().data() + b * cout * out.count();
    T* gin = grads.input.data().data() + b * cin * in.count();
    for (std::int64_t od0 = 0; od0 < out.d; od0 += chunk) {
      std::int64_t od1 = std::min(out.d, od0 + chunk);
      std::int64_t ncols = (od1 - od0) * plane;
      ConstMatMap<T> go(gout + od0 * plane, cout, ncols, Eigen::OuterStride<>(out.count()));
      MatMap<T> c(cols.data(), rows, ncols, Eigen::OuterStride<>(ncols));

      im2col(src, cin, in, out, g, od0, od1, cols.data());
      gw.noalias() += go * c.transpose();

      c.noalias() = w.transpose() * go;
      col2im(cols.data(), cin, in, out, g, od0, od1, gin);
    }
    bias_grad(gout, cout, out.count(), grads.bias.data().data());
  }
  require_finite(grads.input, "conv3d_backward");
  require_finite(grads.weight, "conv3d_backward");
  return grads;
}

namespace {

constexpr ConvGeometry kUpGeometry{2, 2, 0};

void check_deconv(const Shape& input, const Shape& weight) {
  require_rank5(input, "deconv3d input");
  require_rank5(weight, "deconv3d weight");
  if (weight[0] != input[1] || weight[2] != 2 || weight[3] != 2 || weight[4] != 2) {
    throw ShapeMismatch("deconv3d weight " + to_string(weight) + " must be [Cin, Cout, 2, 2, 2] for input " +
                        to_string(input));
  }
}

}  // namespace

template <typename T>
BasicTensor<T> deconv3d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                        std::span<const T> bias) {
  check_deconv(input.shape(), weight.shape());
  const std::int64_t n = input.dim(0), cin = input.dim(1), cout = weight.dim(1);
  if (!bias.empty() && static_cast<std::int64_t>(bias.size()) != cout) {
    throw ShapeMismatch("deconv3d bias length must equal output channels");
  }
  Extents3 in = spatial(input.shape());
  Extents3 out{2 * in.d, 2 * in.h, 2 * in.w};
  BasicTensor<T> result(Shape{n, cout, out.d, out.h, out.w});

  const std::int64_t rows = cout * 8;
  const std::int64_t p = in.count();
  std::vector<T> cols(static_cast<std::size_t>(rows * p));
  ConstMatMap<T> w(weight.data().data(), cin, rows, Eigen::OuterStride<>(rows));
  MatMap<T> c(cols.data(), rows, p, Eigen::OuterStride<>(p));

  // The output of a 2x2x2 stride-2 transposed convolution is the col2im
  // image of W^T x, with the roles of input and output extents exchanged.
  for (std::int64_t b = 0; b < n; ++b) {
    ConstMatMap<T> x(input.data().data() + b * cin * p, cin, p, Eigen::OuterStride<>(p));
    c.noalias() = w.transpose() * x;
    T* dst = result.data().data() + b * cout * out.count();
    col2im(cols.data(), cout, out, in, kUpGeometry, 0, in.d, dst);
    if (!bias.empty()) add_bias(dst, bias, out.count());
  }
  require_finite(result, "deconv3d");
  return result;
}

template <typename T>
ConvGradients<T> deconv3d_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& input,
                                   const BasicTensor<T>& weight) {
  check_deconv(input.shape(), weight.shape());
  const std::int64_t n = input.dim(0), cin = input.dim(1), cout = weight.dim(1);
  Extents3 in = spatial(input.shape());
  Extents3 out{2 * in.d, 2 * in.h, 2 * in.w};
  if (grad_out.shape() != Shape{n, cout, out.d, out.h, out.w}) {
    throw ShapeMismatch("deconv3d_backward grad_out " + to_string(grad_out.shape()) +
                        " does not match forward output");
  }
  ConvGradients<T> grads{BasicTensor<T>(input.shape()), BasicTensor<T>(weight.shape()),
                         BasicTensor<T>(Shape{cout})};

  const std::int64_t rows = cout * 8;
  const std::int64_t p = in.count();
  std::vector<T> cols(static_cast<std::size_t>(rows * p));
  ConstMatMap<T> w(weight.data().data(), cin, rows, Eigen::OuterStride<>(rows));
  MatMap<T> gw(grads.weight.data().data(), cin, rows, Eigen::OuterStride<>(rows));
  ConstMatMap<T> c(cols.data(), rows, p, Eigen::OuterStride<>(p));

  for (std::int64_t b = 0; b < n; ++b) {
    const T* gout = grad_out.data().data() + b * cout * out.count();
    im2col(gout, cout, out, in, kUpGeometry, 0, in.d, cols.data());
    ConstMatMap<T> x(input.data().data() + b * cin * p, cin, p, Eigen::OuterStride<>(p));
    MatMap<T> gin(grads.input.data().data() + b * cin * p, cin, p, Eigen::OuterStride<>(p));
    gin.noalias() = w * c;
    gw.noalias() += x * c.transpose();
    bias_grad(gout, cout, out.count(), grads.bias.data().data());
  }
  require_finite(grads.input, "deconv3d_backward");
  require_finite(grads.weight, "deconv3d_backward");
  return grads;
}

#define HIPSEG_INSTANTIATE_CONV(T)                                                             \
  template BasicTensor<T> conv3d<T>(const BasicTensor<T>&, const BasicTensor<T>&,             \
                                    std::span<const T>, const ConvGeometry&);                  \
  template ConvGradients<T> conv3d_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,  \
                                               const BasicTensor<T>&, const ConvGeometry&);    \
  template BasicTensor<T> deconv3d<T>(const BasicTensor<T>&, const BasicTensor<T>&,           \
                                      std::span<const T>);                                     \
  template ConvGradients<T> deconv3d_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&, \
                                                 const BasicTensor<T>&);

HIPSEG_INSTANTIATE_CONV(float)
HIPSEG_INSTANTIATE_CONV(double)

}  // namespace hipseg
