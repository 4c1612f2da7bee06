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

#include "hipseg/fcn.hpp"

#include <cmath>
#include <random>

#include "float_env.hpp"

namespace hipseg {

namespace {

constexpr ConvGeometry kBlock{3, 1, 1};
constexpr ConvGeometry kDown{2, 2, 0};

}  // namespace

void NetworkConfig::validate() const {
  if (levels < 1 || levels > 8) throw InvalidConfig("levels must be in [1, 8]");
  if (base_channels < 1) throw InvalidConfig("base_channels must be positive");
  if (convs_per_level < 1) throw InvalidConfig("convs_per_level must be positive");
  if (input_channels < 1 || output_channels < 1) {
    throw InvalidConfig("input and output channel counts must be positive");
  }
}

void NetworkConfig::validate_input(const Dims3& dims) const {
  const int divisor = 1 << levels;
  if (dims.w % divisor || dims.h % divisor || dims.d % divisor) {
    throw InvalidConfig("input dims " + to_string(dims) + " are not divisible by 2^" +
                        std::to_string(levels));
  }
}

std::size_t parameter_count(const NetworkConfig& c) {
  c.validate();
  auto conv = [](std::size_t in, std::size_t out, std::size_t taps) { return taps * in * out + out; };
  std::size_t total = 0;
  for (int l = 0; l < c.levels; ++l) {
    std::size_t ch = c.channels_at(l);
    std::size_t in = l == 0 ? c.input_channels : ch;
    total += conv(in, ch, 27) + (c.convs_per_level - 1) * conv(ch, ch, 27);
    total += conv(ch, 2 * ch, 8);
    // decoder mirror: deconv from 2*ch to ch, then conv from the 2*ch concat
    total += conv(2 * ch, ch, 8);
    total += conv(2 * ch, ch, 27) + (c.convs_per_level - 1) * conv(ch, ch, 27);
  }
  return total + conv(c.channels_at(0), c.output_channels, 27);
}

template <typename T>
BasicFcn<T>::BasicFcn(NetworkConfig config) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  auto add = [&](const std::string& name, Shape weight_shape, std::int64_t fan_in,
                 std::int64_t bias_len) {
    BasicTensor<T> w(std::move(weight_shape));
    std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (auto& v : w.data()) v = static_cast<T>(gauss(rng));
    params_.push_back({name + ".weight", std::move(w)});
    params_.push_back({name + ".bias", BasicTensor<T>(Shape{bias_len})});
  };

  const int L = config_.levels;
  for (int l = 0; l < L; ++l) {
    const std::int64_t ch = config_.channels_at(l);
    std::int64_t in = l == 0 ? config_.input_channels : ch;
    for (int c = 0; c < config_.convs_per_level; ++c) {
      add("enc" + std::to_string(l) + ".conv" + std::to_string(c), Shape{ch, in, 3, 3, 3}, in * 27,
          ch);
      in = ch;
    }
    add("enc" + std::to_string(l) + ".down", Shape{2 * ch, ch, 2, 2, 2}, ch * 8, 2 * ch);
  }
  for (int l = L - 1; l >= 0; --l) {
    const std::int64_t ch = config_.channels_at(l);
    // Each output voxel of a stride-2 2x2x2 transposed conv sees one tap per
    // input channel.
    add("dec" + std::to_string(l) + ".up", Shape{2 * ch, ch, 2, 2, 2}, 2 * ch, ch);
    std::int64_t in = 2 * ch;
    for (int c = 0; c < config_.convs_per_level; ++c) {
      add("dec" + std::to_string(l) + ".conv" + std::to_string(c), Shape{ch, in, 3, 3, 3},
          in * 27, ch);
      in = ch;
    }
  }
  const std::int64_t c0 = config_.channels_at(0);
  add("head", Shape{config_.output_channels, c0, 3, 3, 3}, c0 * 27, config_.output_channels);
}

template <typename T>
std::size_t BasicFcn<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
void BasicFcn<T>::fill_parameters(T value) {
  for (auto& p : params_) std::fill(p.value.data().begin(), p.value.data().end(), value);
}

template <typename T>
BasicTensor<T> BasicFcn<T>::forward(const BasicTensor<T>& input, bool record) {
  tape_.clear();
  return run(input, record ? &tape_ : nullptr);
}

template <typename T>
BasicTensor<T> BasicFcn<T>::predict(const BasicTensor<T>& input) const {
  return run(input, nullptr);
}

template <typename T>
BasicTensor<T> BasicFcn<T>::run(const BasicTensor<T>& input, std::vector<Record>* tape) const {
  const FlushSubnormals flush;
  if (input.rank() != 5 || input.dim(1) != config_.input_channels) {
    throw ShapeMismatch("network input must be [N, " + std::to_string(config_.input_channels) +
                        ", D, H, W], got " + to_string(input.shape()));
  }
  const std::int64_t divisor = std::int64_t{1} << config_.levels;
  for (std::size_t i = 2; i < 5; ++i) {
    if (input.dim(i) % divisor) {
      throw ShapeMismatch("network input " + to_string(input.shape()) +
                          " has a spatial extent not divisible by " + std::to_string(divisor));
    }
  }

  std::size_t layer = 0;
  auto weight = [&](std::size_t i) -> const BasicTensor<T>& { return params_[2 * i].value; };
  auto bias = [&](std::size_t i) { return std::span<const T>(params_[2 * i + 1].value.data()); };
  auto keep = [&](const BasicTensor<T>& in, const BasicTensor<T>* out) {
    if (tape) tape->push_back({in, out ? *out : BasicTensor<T>{}});
  };

  BasicTensor<T> x = input;
  std::vector<BasicTensor<T>> skips;
  for (int l = 0; l < config_.levels; ++l) {
    for (int c = 0; c < config_.convs_per_level; ++c, ++layer) {
      auto y = activate(conv3d(x, weight(layer), bias(layer), kBlock), Activation::relu);
      keep(x, &y);
      x = std::move(y);
    }
    skips.push_back(x);
    auto y = conv3d(x, weight(layer), bias(layer), kDown);
    keep(x, nullptr);
    x = std::move(y);
    ++layer;
  }
  for (int l = config_.levels - 1; l >= 0; --l) {
    auto up = deconv3d(x, weight(layer), bias(layer));
    keep(x, nullptr);
    ++layer;
    x = concat_channels(up, skips[static_cast<std::size_t>(l)]);
    for (int c = 0; c < config_.convs_per_level; ++c, ++layer) {
      auto y = activate(conv3d(x, weight(layer), bias(layer), kBlock), Activation::relu);
      keep(x, &y);
      x = std::move(y);
    }
  }
  auto out = activate(conv3d(x, weight(layer), bias(layer), kBlock), Activation::sigmoid);
  keep(x, &out);
  return out;
}

template <typename T>
std::vector<BasicTensor<T>> BasicFcn<T>::backward(const BasicTensor<T>& grad_output) const {
  if (tape_.empty()) throw StateError("backward called without a recorded forward pass");
  const FlushSubnormals flush;
  const auto& head = tape_.back();
  if (grad_output.shape() != head.output.shape()) {
    throw ShapeMismatch("output gradient " + to_string(grad_output.shape()) +
                        " does not match network output " + to_string(head.output.shape()));
  }

  std::vector<BasicTensor<T>> grads(params_.size());
  std::size_t layer = tape_.size() - 1;
  auto weight = [&](std::size_t i) -> const BasicTensor<T>& { return params_[2 * i].value; };
  auto store = [&](std::size_t i, ConvGradients<T>&& g) {
    grads[2 * i] = std::move(g.weight);
    grads[2 * i + 1] = std::move(g.bias);
    return std::move(g.input);
  };

  auto g = activate_backward(grad_output, head.output, Activation::sigmoid);
  g = store(layer, conv3d_backward(g, head.input, weight(layer), kBlock));

  std::vector<BasicTensor<T>> skip_grads(static_cast<std::size_t>(config_.levels));
  for (int l = 0; l < config_.levels; ++l) {
    for (int c = 0; c < config_.convs_per_level; ++c) {
      --layer;
      const auto& rec = tape_[layer];
      g = activate_backward(g, rec.output, Activation::relu);
      g = store(layer, conv3d_backward(g, rec.input, weight(layer), kBlock));
    }
    auto [g_up, g_skip] = split_channels(g, config_.channels_at(l));
    skip_grads[static_cast<std::size_t>(l)] = std::move(g_skip);
    --layer;
    g = store(layer, deconv3d_backward(g_up, tape_[layer].input, weight(layer)));
  }
  for (int l = config_.levels - 1; l >= 0; --l) {
    --layer;
    g = store(layer, conv3d_backward(g, tape_[layer].input, weight(layer), kDown));
    g = elementwise(g, skip_grads[static_cast<std::size_t>(l)], Elementwise::add);
    for (int c = 0; c < config_.convs_per_level; ++c) {
      --layer;
      const auto& rec = tape_[layer];
      g = activate_backward(g, rec.output, Activation::relu);
      g = store(layer, conv3d_backward(g, rec.input, weight(layer), kBlock));
    }
  }
  return grads;
}

template class BasicFcn<float>;
template class BasicFcn<double>;

FcnModel build_network(const NetworkConfig& config, std::optional<Dims3> input_dims) {
  config.validate();
  if (input_dims) config.validate_input(*input_dims);
  return FcnModel(config);
}

}  // namespace hipseg
