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

#ifndef HIPSEG_OPS_HPP_
#define HIPSEG_OPS_HPP_

#include <span>
#include <utility>

#include "hipseg/tensor.hpp"
#include "hipseg/volume.hpp"

namespace hipseg {

/// Cubic kernel geometry shared by all three spatial axes.
struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int padding = 1;
};

template <typename T>
struct ConvGradients {
  BasicTensor<T> input;
  BasicTensor<T> weight;
  BasicTensor<T> bias;
};

/// Output extent of a convolution along one axis; throws ShapeMismatch when
/// (extent + 2p - k) is negative or not a multiple of the stride.
std::int64_t conv_output_extent(std::int64_t extent, const ConvGeometry& g);

// Cross-correlation with zero padding.
//   input  [N, Cin, D, H, W]
//   weight [Cout, Cin, k, k, k]
//   bias   Cout values, or empty for none
// k must be 2 or 3 and the stride 1 or 2.
template <typename T>
BasicTensor<T> conv3d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      std::span<const T> bias, const ConvGeometry& g);

/// Gradients of conv3d. `input` is the tensor seen by the forward call; only
/// its shape matters for grad_input. grad_bias has shape [Cout].
template <typename T>
ConvGradients<T> conv3d_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& input,
                                 const BasicTensor<T>& weight, const ConvGeometry& g);

// Transposed convolution with a 2x2x2 kernel and stride 2, doubling every
// spatial extent. Weight layout is [Cin, Cout, 2, 2, 2].
template <typename T>
BasicTensor<T> deconv3d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                        std::span<const T> bias);

template <typename T>
ConvGradients<T> deconv3d_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& input,
                                   const BasicTensor<T>& weight);

/// Align-corners trilinear resampling. Output index i along an axis maps to
/// source coordinate i*(S-1)/(T-1), or (S-1)/2 when T == 1.
Volume trilinear_resample(const Volume& volume, Dims3 target);

/// Resamples every (n, c) channel of a rank-5 tensor to target (W, H, D).
template <typename T>
BasicTensor<T> trilinear_resample(const BasicTensor<T>& tensor, Dims3 target);

enum class Activation { relu, sigmoid };

/// Sigmoid output is kept strictly inside (0, 1) even where the exact value
/// rounds to 0 or 1 in T.
template <typename T>
BasicTensor<T> activate(const BasicTensor<T>& input, Activation kind);

/// Backward pass expressed through the forward output.
template <typename T>
BasicTensor<T> activate_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& output,
                                 Activation kind);

enum class Elementwise { add, mul };

template <typename T>
BasicTensor<T> elementwise(const BasicTensor<T>& a, const BasicTensor<T>& b, Elementwise op);

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> elementwise_backward(const BasicTensor<T>& grad_out,
                                                               const BasicTensor<T>& a,
                                                               const BasicTensor<T>& b,
                                                               Elementwise op);

/// Concatenates along dim 1; every other extent must match.
template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Inverse of concat_channels for gradients: the first `channels_a` channels
/// go to the first result.
template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> split_channels(const BasicTensor<T>& grad,
                                                         std::int64_t channels_a);

/// Throws DivergenceError naming `where` if any entry is NaN or infinite.
template <typename T>
void require_finite(const BasicTensor<T>& t, const char* where);

/// Wraps a volume as a [1, 1, D, H, W] tensor and back.
Tensor volume_to_tensor(const Volume& volume);
Volume tensor_to_volume(const Tensor& tensor, Spacing3 spacing, std::int64_t n = 0,
                        std::int64_t c = 0);

}  // namespace hipseg

#endif  // HIPSEG_OPS_HPP_
