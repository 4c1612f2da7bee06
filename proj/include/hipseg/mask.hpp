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

#ifndef HIPSEG_MASK_HPP_
#define HIPSEG_MASK_HPP_

#include "hipseg/localizer.hpp"
#include "hipseg/volume.hpp"

namespace hipseg {

/// Enhancement mask M = L * alpha + beta.
struct MaskParams {
  double alpha = 0.1;
  double beta = 1.0;
  double binarize_threshold = 0.5;
  // Build M from the probability map itself instead of its binarisation.
  bool soft = false;

  void validate() const;
};

/// 1 where prob > threshold, else 0.
LabelVolume binarize(const Volume& prob, double threshold);

Volume build_mask(const LabelVolume& label, const MaskParams& params);
/// Soft variant: M = prob * alpha + beta.
Volume build_mask(const Volume& prob, const MaskParams& params);

/// Voxelwise product mask * original.
Volume apply_mask(const Volume& mask, const Volume& original);

struct EnhancedCrop {
  Volume volume;
  CropWindow window;
};

/// Crops the full-resolution proposal and the original at the localized
/// center, turns the proposal crop into a mask and applies it to the
/// original crop.
EnhancedCrop enhance_crop(const Volume& prob_fullres, const Volume& original,
                          const Localization& loc, const Dims3& crop_dims,
                          const MaskParams& params);

}  // namespace hipseg

#endif  // HIPSEG_MASK_HPP_
