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

#ifndef HIPSEG_FCN_HPP_
#define HIPSEG_FCN_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hipseg/ops.hpp"
#include "hipseg/tensor.hpp"
#include "hipseg/volume.hpp"

namespace hipseg {

/// Architecture of the encoder-decoder shared by both pipeline stages.
///
/// Level l carries base_channels * 2^l feature maps. Each encoder level
/// runs convs_per_level 3x3x3 conv + relu blocks and then a 2x2x2 stride-2
/// conv that doubles the channels; the decoder mirrors this with 2x2x2
/// transposed convs, concatenation skip connections and conv + relu blocks.
/// A 3x3x3 conv followed by a sigmoid produces the probability map.
struct NetworkConfig {
  int levels = 3;
  int base_channels = 8;
  int convs_per_level = 2;
  int input_channels = 1;
  int output_channels = 1;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
  /// Throws InvalidConfig unless every extent is divisible by 2^levels.
  void validate_input(const Dims3& dims) const;
  [[nodiscard]] int channels_at(int level) const { return base_channels << level; }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Closed-form number of scalar parameters (weights and biases).
std::size_t parameter_count(const NetworkConfig& config);

template <typename T>
struct NamedParameter {
  std::string name;
  BasicTensor<T> value;
};

template <typename T>
class BasicFcn {
 public:
  /// Builds the layer stack with seeded He initialisation
  /// (std = sqrt(2 / fan_in)) and zero biases.
  explicit BasicFcn(NetworkConfig config);

  [[nodiscard]] const NetworkConfig& config() const { return config_; }
  [[nodiscard]] std::vector<NamedParameter<T>>& parameters() { return params_; }
  [[nodiscard]] const std::vector<NamedParameter<T>>& parameters() const { return params_; }
  [[nodiscard]] std::size_t scalar_count() const;

  /// Sets every weight and bias to `value`; used by tests.
  void fill_parameters(T value);

  /// Runs the network on [N, input_channels, D, H, W]. With `record` set the
  /// activations needed by backward() are kept until the next forward or
  /// clear_record().
  BasicTensor<T> forward(const BasicTensor<T>& input, bool record = false);

  /// forward() without touching the recorded activations.
  [[nodiscard]] BasicTensor<T> predict(const BasicTensor<T>& input) const;

  /// Gradients of every parameter, aligned with parameters(), for the
  /// given gradient at the output of the last forward(record = true).
  /// Throws StateError when nothing was recorded.
  std::vector<BasicTensor<T>> backward(const BasicTensor<T>& grad_output) const;

  [[nodiscard]] bool has_record() const { return !tape_.empty(); }
  void clear_record() { tape_.clear(); }

  template <typename U>
  [[nodiscard]] BasicFcn<U> cast() const {
    BasicFcn<U> out(config_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      out.parameters()[i].value = params_[i].value.template cast<U>();
    }
    return out;
  }

 private:
  struct Record {
    BasicTensor<T> input;
    BasicTensor<T> output;
  };

  BasicTensor<T> run(const BasicTensor<T>& input, std::vector<Record>* tape) const;

  NetworkConfig config_;
  // Layer order: encoder conv blocks and down convs, decoder up convs and
  // conv blocks, then the head. Layer i owns the weight at 2*i and the bias
  // at 2*i + 1.
  std::vector<NamedParameter<T>> params_;
  // One record per layer in the same order.
  std::vector<Record> tape_;
};

using FcnModel = BasicFcn<float>;

/// Builds a model, optionally checking that `input_dims` is admissible.
FcnModel build_network(const NetworkConfig& config, std::optional<Dims3> input_dims = {});

/// "FCK1" checkpoint: magic, u32 version, config, named parameters with
/// shapes and f32 data, trailing CRC32 of everything before it.
void save_checkpoint(const FcnModel& model, const std::filesystem::path& path);
FcnModel load_checkpoint(const std::filesystem::path& path);

std::vector<char> serialize_checkpoint(const FcnModel& model);
FcnModel deserialize_checkpoint(std::span<const char> bytes);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace hipseg

#endif  // HIPSEG_FCN_HPP_
