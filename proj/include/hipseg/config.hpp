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

#ifndef HIPSEG_CONFIG_HPP_
#define HIPSEG_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hipseg/dataset.hpp"
#include "hipseg/fcn.hpp"
#include "hipseg/mask.hpp"
#include "hipseg/optimizer.hpp"
#include "hipseg/volume.hpp"

namespace hipseg {

enum class LabelDownsample { trilinear, nearest };

/// Every hyperparameter of a run. Both stages share the network layout;
/// their seeds are derived from `seed`.
struct PipelineConfig {
  NetworkConfig network;
  Dims3 proposal_dims{32, 32, 32};
  Dims3 crop_dims{32, 32, 32};
  MaskParams mask;
  double epsilon = 5.0;
  // Localize on the binarized proposal rather than the raw probabilities.
  bool localize_binarized = true;
  // Initial output probability: the head bias starts at logit(output_prior)
  // so an untrained net does not call half the volume target. 0 estimates it
  // as the mean foreground fraction of the stage's training targets.
  double output_prior = 0.0;
  OptimizerSettings optimizer;
  int proposal_iterations = 400;
  int segmentation_iterations = 400;
  int batch_size = 1;
  int checkpoint_interval = 50;
  std::uint64_t seed = 1;
  int folds = 5;
  Side side = Side::left;
  LabelDownsample label_downsample = LabelDownsample::trilinear;
  // Worker threads for independent folds or alpha runs.
  int jobs = 1;

  /// Throws InvalidConfig.
  void validate() const;
  [[nodiscard]] NetworkConfig proposal_network() const;
  [[nodiscard]] NetworkConfig segmentation_network() const;
};

/// Sets one field from its text form; throws InvalidConfig on unknown keys
/// or unparsable values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);
/// "key=value" form used for command-line overrides.
void apply_override(PipelineConfig& config, const std::string& assignment);

/// Parses `key = value` lines; '#' starts a comment. Starts from defaults.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
/// Lists every key, loadable by parse_config.
std::string format_config(const PipelineConfig& config);

std::vector<std::string> config_keys();

/// Independent stream seed for a named consumer of the run seed.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& stream);

}  // namespace hipseg

#endif  // HIPSEG_CONFIG_HPP_
