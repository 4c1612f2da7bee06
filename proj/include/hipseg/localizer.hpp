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

#ifndef HIPSEG_LOCALIZER_HPP_
#define HIPSEG_LOCALIZER_HPP_

#include <string>
#include <vector>

#include "hipseg/volume.hpp"

namespace hipseg {

/// Marginal sums of a proposal map: hx[i] sums the plane x == i, and so on.
struct AxisHistograms {
  std::vector<double> hx;
  std::vector<double> hy;
  std::vector<double> hz;

  [[nodiscard]] const std::vector<double>& along(int axis) const {
    return axis == 0 ? hx : axis == 1 ? hy : hz;
  }
};

AxisHistograms axis_histograms(const Volume& prob);
AxisHistograms axis_histograms(const LabelVolume& label);

/// Bounding planes and integer center of the detected structure.
struct Localization {
  Index3 min;
  Index3 max;
  Index3 center;

  /// "xmin xmax ymin ymax zmin zmax cx cy cz"
  [[nodiscard]] std::string to_line() const;
  static Localization from_line(const std::string& line);

  friend bool operator==(const Localization&, const Localization&) = default;
};

/// Per axis, min/max are the smallest and largest indices whose histogram
/// value is strictly greater than epsilon; the center is floor((min+max)/2).
/// Throws EmptyProposal when some axis has no such index.
Localization localize(const AxisHistograms& hist, double epsilon);

/// Placement of a fixed-size window in a source volume.
///
/// Along each axis the window starts at center - floor(size/2), clamped so
/// it fits. When the source is smaller than the window the whole source
/// axis is taken (start 0) and zero padding is split evenly, the extra
/// voxel going after.
struct CropWindow {
  Dims3 source;
  Dims3 size;
  Index3 start;       // first source voxel covered, after clamping
  Index3 pad_before;  // zero voxels preceding the source content

  friend bool operator==(const CropWindow&, const CropWindow&) = default;
};

CropWindow plan_crop(const Dims3& source, const Index3& center, const Dims3& size);

Volume crop(const Volume& volume, const CropWindow& window);
LabelVolume crop(const LabelVolume& label, const CropWindow& window);

struct CroppedVolume {
  Volume volume;
  CropWindow window;
};
CroppedVolume crop(const Volume& volume, const Index3& center, const Dims3& size);

/// Writes the window content back into a zero volume of the source dims.
/// Padding voxels are dropped.
Volume paste_back(const Volume& cropped, const CropWindow& window);
LabelVolume paste_back(const LabelVolume& cropped, const CropWindow& window);

}  // namespace hipseg

#endif  // HIPSEG_LOCALIZER_HPP_
