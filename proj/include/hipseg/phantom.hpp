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

#ifndef HIPSEG_PHANTOM_HPP_
#define HIPSEG_PHANTOM_HPP_

#include <cstdint>
#include <filesystem>

#include "hipseg/dataset.hpp"
#include "hipseg/volume.hpp"

namespace hipseg {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Synthetic head phantom: a bright "brain" ellipsoid on a dark background
/// holding two dimmer target ellipsoids mirrored across the x midline.
struct PhantomSpec {
  Dims3 dims{96, 96, 96};
  std::uint64_t seed = 1;
  double noise_std = 0.05;
  int pair_count = 10;
  int folds = 5;
  // Semi-axes of each target are drawn uniformly from [min, max] (voxels).
  Vec3 target_axes_min{5.0, 8.0, 6.0};
  Vec3 target_axes_max{7.0, 11.0, 8.0};
  // Each target center moves by an integer in [-jitter, jitter] per axis.
  int jitter = 3;
  // Brain semi-axes as fractions of the volume extents.
  Vec3 brain_fraction{0.42, 0.45, 0.40};
  // Distance of each nominal target center from the midline, fraction of W.
  double lateral_offset = 0.19;
  double background_intensity = 0.05;
  double brain_intensity = 0.6;
  double target_intensity = 0.35;

  /// Throws InvalidSpec, including when some admissible jitter would let a
  /// target leave the brain or touch the other target.
  void validate() const;

  [[nodiscard]] Vec3 brain_center() const;
  [[nodiscard]] Vec3 brain_axes() const;
  /// Unjittered target centers (left has the smaller x).
  [[nodiscard]] Vec3 nominal_center(bool left) const;
};

struct Ellipsoid {
  Vec3 center;
  Vec3 axes;
  [[nodiscard]] bool contains(double x, double y, double z) const;
};

struct Phantom {
  Volume volume;
  LabelVolume left;
  LabelVolume right;
  Ellipsoid left_target;
  Ellipsoid right_target;
};

/// Fully determined by (spec.seed, index). Labels are the exact target
/// interiors before noise.
Phantom generate_phantom(const PhantomSpec& spec, int index);

/// Writes pair_count phantoms as native volumes plus manifest.tsv into
/// `directory`; sample i lands in fold i % folds.
Manifest export_dataset(const PhantomSpec& spec, const std::filesystem::path& directory);

}  // namespace hipseg

#endif  // HIPSEG_PHANTOM_HPP_
