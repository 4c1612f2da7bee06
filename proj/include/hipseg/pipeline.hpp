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

#ifndef HIPSEG_PIPELINE_HPP_
#define HIPSEG_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hipseg/config.hpp"
#include "hipseg/dataset.hpp"
#include "hipseg/dice.hpp"
#include "hipseg/fcn.hpp"
#include "hipseg/localizer.hpp"
#include "hipseg/mask.hpp"

namespace hipseg {

using LogFn = std::function<void(const std::string&)>;

struct TrainRecord {
  std::vector<double> loss;     // one per optimizer step
  std::vector<double> seconds;  // wall clock per step
  std::vector<std::pair<int, double>> val_dsc;  // (iteration, mean validation DSC)

  /// "iteration,loss,val_dsc" with one row per step; val_dsc is blank on
  /// steps without a validation pass. Wall clock is left out so identical
  /// runs give identical files.
  [[nodiscard]] std::string to_csv() const;
  /// First validated iteration whose DSC reaches `target`.
  [[nodiscard]] std::optional<int> first_reaching(double target) const;
};

struct ModelCheckpoint {
  int iteration = 0;
  FcnModel model;
};

struct TrainOptions {
  LogFn log;
  // When set, checkpoints and the record CSV are also written here.
  std::filesystem::path output_dir;
  std::string prefix = "model";
  // Keep every intermediate checkpoint in memory, not only the last.
  bool keep_checkpoints = true;
  // Validation cadence in steps; 0 means every checkpoint_interval.
  int validation_interval = 0;
};

struct TrainResult {
  std::vector<ModelCheckpoint> checkpoints;  // ascending; the last is the final model
  TrainRecord record;
  [[nodiscard]] const FcnModel& final_model() const { return checkpoints.back().model; }
};

/// Network input and Dice target for one training draw.
struct TrainingExample {
  Tensor input;
  Tensor target;
};

/// Network input for a volume: a [1, 1, D, H, W] tensor standardized to zero
/// mean and unit variance over the volume. A constant volume maps to zeros.
Tensor network_input(const Volume& volume);

/// Draw order over `samples` for `draws` steps: concatenated shuffles.
std::vector<std::size_t> training_order(std::size_t samples, std::size_t draws,
                                        std::uint64_t seed);

/// Volume and label resampled to proposal_dims, label re-binarized at 0.5.
TrainingExample proposal_example(const Sample& sample, const PipelineConfig& config);
/// Label brought to `target` dims by the configured downsampling rule.
LabelVolume downsample_label(const LabelVolume& label, Dims3 target, LabelDownsample rule);

TrainResult train_proposal(const std::vector<Sample>& train, const std::vector<Sample>& validation,
                           const PipelineConfig& config, const TrainOptions& options = {});

/// Probability map at the volume's own dims.
Volume infer_proposal(const FcnModel& model, const Volume& volume, const Dims3& proposal_dims);

/// Localization of a full-resolution probability map. Throws EmptyProposal.
Localization localize_proposal(const Volume& prob, const PipelineConfig& config);

/// Mask-enhanced crop around the localized structure, the segmentation
/// network's input.
EnhancedCrop segmentation_input(const Volume& prob, const Volume& volume,
                                const Localization& loc, const PipelineConfig& config);

/// Segmentation training data for one sample given its proposal map. With
/// `fallback` an empty proposal is localized from the label instead.
struct SegmentationExample {
  TrainingExample tensors;
  Localization loc;
  CropWindow window;
  bool used_fallback = false;
};
SegmentationExample segmentation_example(const Sample& sample, const Volume& prob,
                                         const PipelineConfig& config, bool fallback);

TrainResult train_segmentation(const std::vector<Sample>& train,
                               const std::vector<Sample>& validation, const FcnModel& proposal,
                               const PipelineConfig& config, const TrainOptions& options = {});

struct TwoStageResult {
  LabelVolume label;
  Localization loc;
  CropWindow window;
};

/// Propagates EmptyProposal.
TwoStageResult infer_two_stage(const FcnModel& proposal, const FcnModel& segmentation,
                               const Volume& volume, const PipelineConfig& config);

/// Segmentation output for a prepared crop, binarized and pasted into a
/// zero volume of the source dims.
LabelVolume segment_crop(const FcnModel& segmentation, const EnhancedCrop& crop);

std::vector<double> default_alphas();

struct AlphaRun {
  double alpha = 0.0;
  TrainResult result;
};

/// One segmentation run per alpha, all from the same seed.
std::vector<AlphaRun> alpha_sweep(const std::vector<Sample>& train,
                                  const std::vector<Sample>& validation, const FcnModel& proposal,
                                  const std::vector<double>& alphas, const PipelineConfig& config,
                                  const TrainOptions& options = {});

/// Mean validation DSC of proposal checkpoints (rows) against segmentation
/// checkpoints. Column 0 is the proposal alone; column j + 1 pairs it with
/// segmentation checkpoint j.
struct AblationTable {
  std::vector<int> proposal_iterations;
  std::vector<int> segmentation_iterations;
  std::vector<std::vector<double>> dsc;
  [[nodiscard]] std::string to_csv() const;
};

AblationTable ablation_grid(const std::vector<ModelCheckpoint>& proposals,
                            const std::vector<ModelCheckpoint>& segmentations,
                            const std::vector<Sample>& validation, const PipelineConfig& config);

struct SampleEvaluation {
  std::string id;
  MetricReport metrics;
  double proposal_dsc = 0.0;
  // The proposal was empty or the segmentation came out empty; such a
  // sample scores zero on every metric.
  bool failed = false;
};

/// Full-volume metrics of the two-stage output against the sample label.
SampleEvaluation evaluate_sample(const FcnModel& proposal, const FcnModel& segmentation,
                                 const Sample& sample, const PipelineConfig& config);

struct FoldReport {
  int fold = 0;
  std::vector<SampleEvaluation> samples;
  MetricReport mean;
  double proposal_dsc = 0.0;
};

struct SideReport {
  Side side = Side::left;
  std::vector<FoldReport> folds;
  MetricReport mean;  // arithmetic mean of the per-fold means
  double proposal_dsc = 0.0;
};

struct CrossValidationReport {
  std::vector<SideReport> sides;
  /// side,fold,id,dsc,jsc,pi,ri,proposal_dsc with "mean" rows per fold and side.
  [[nodiscard]] std::string to_csv() const;
};

/// Trains both stages on the complement of each fold and evaluates on the
/// fold, independently per side. Folds come from the manifest.
CrossValidationReport cross_validate(const Manifest& manifest, const PipelineConfig& config,
                                     const TrainOptions& options = {},
                                     const std::vector<Side>& sides = {Side::left, Side::right});

MetricReport mean_report(const std::vector<MetricReport>& reports);

}  // namespace hipseg

#endif  // HIPSEG_PIPELINE_HPP_
