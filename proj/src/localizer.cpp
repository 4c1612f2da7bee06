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

#include "hipseg/localizer.hpp"

#include <algorithm>
#include <sstream>

#include "hipseg/errors.hpp"

namespace hipseg {

namespace {

template <typename V>
AxisHistograms histograms_of(const V& vol) {
  const auto& d = vol.dims();
  AxisHistograms h{std::vector<double>(d.w, 0.0), std::vector<double>(d.h, 0.0),
                   std::vector<double>(d.d, 0.0)};
  auto data = vol.data();
  std::size_t i = 0;
  for (int z = 0; z < d.d; ++z) {
    for (int y = 0; y < d.h; ++y) {
      double row = 0.0;
      for (int x = 0; x < d.w; ++x, ++i) {
        const double v = data[i];
        h.hx[x] += v;
        row += v;
      }
      h.hy[y] += row;
      h.hz[z] += row;
    }
  }
  return h;
}

struct AxisSpan {
  int start;
  int pad;
};

AxisSpan plan_axis(int source, int center, int size) {
  if (source >= size) {
    int start = std::clamp(center - size / 2, 0, source - size);
    return {start, 0};
  }
  return {0, (size - source) / 2};
}

// Calls fn(crop_index, source_index) for every window voxel backed by source.
template <typename Fn>
void for_each_covered(const CropWindow& w, Fn&& fn) {
  const auto& s = w.source;
  for (int z = 0; z < w.size.d; ++z) {
    int sz = w.start.z + z - w.pad_before.z;
    if (sz < 0 || sz >= s.d) continue;
    for (int y = 0; y < w.size.h; ++y) {
      int sy = w.start.y + y - w.pad_before.y;
      if (sy < 0 || sy >= s.h) continue;
      for (int x = 0; x < w.size.w; ++x) {
        int sx = w.start.x + x - w.pad_before.x;
        if (sx < 0 || sx >= s.w) continue;
        std::size_t ci = x + static_cast<std::size_t>(w.size.w) * (y + static_cast<std::size_t>(w.size.h) * z);
        std::size_t si = sx + static_cast<std::size_t>(s.w) * (sy + static_cast<std::size_t>(s.h) * sz);
        fn(ci, si);
      }
    }
  }
}

void check_source(const CropWindow& w, const Dims3& dims) {
  if (w.source != dims) {
    throw ShapeMismatch("crop window planned for " + to_string(w.source) + " applied to " +
                        to_string(dims));
  }
}

}  // namespace

AxisHistograms axis_histograms(const Volume& prob) { return histograms_of(prob); }
AxisHistograms axis_histograms(const LabelVolume& label) { return histograms_of(label); }

Localization localize(const AxisHistograms& hist, double epsilon) {
  if (!(epsilon >= 0.0)) throw InvalidConfig("localization epsilon must be non-negative");
  int lo[3];
  int hi[3];
  for (int axis = 0; axis < 3; ++axis) {
    const auto& h = hist.along(axis);
    lo[axis] = -1;
    hi[axis] = -1;
    for (int i = 0; i < static_cast<int>(h.size()); ++i) {
      if (h[i] > epsilon) {
        if (lo[axis] < 0) lo[axis] = i;
        hi[axis] = i;
      }
    }
    if (lo[axis] < 0) {
      throw EmptyProposal("no plane along axis " + std::string(1, "xyz"[axis]) +
                          " exceeds epsilon " + std::to_string(epsilon));
    }
  }
  Localization loc;
  loc.min = {lo[0], lo[1], lo[2]};
  loc.max = {hi[0], hi[1], hi[2]};
  loc.center = {(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2};
  return loc;
}

std::string Localization::to_line() const {
  std::ostringstream out;
  out << min.x << ' ' << max.x << ' ' << min.y << ' ' << max.y << ' ' << min.z << ' ' << max.z
      << ' ' << center.x << ' ' << center.y << ' ' << center.z;
  return out.str();
}

Localization Localization::from_line(const std::string& line) {
  std::istringstream in(line);
  Localization loc;
  if (!(in >> loc.min.x >> loc.max.x >> loc.min.y >> loc.max.y >> loc.min.z >> loc.max.z >>
        loc.center.x >> loc.center.y >> loc.center.z)) {
    throw DataError("malformed localization line: " + line);
  }
  return loc;
}

CropWindow plan_crop(const Dims3& source, const Index3& center, const Dims3& size) {
  if (size.w <= 0 || size.h <= 0 || size.d <= 0) {
    throw ShapeMismatch("crop dims must be positive, got " + to_string(size));
  }
  auto x = plan_axis(source.w, center.x, size.w);
  auto y = plan_axis(source.h, center.y, size.h);
  auto z = plan_axis(source.d, center.z, size.d);
  return {source, size, {x.start, y.start, z.start}, {x.pad, y.pad, z.pad}};
}

Volume crop(const Volume& volume, const CropWindow& window) {
  check_source(window, volume.dims());
  Volume out(window.size, volume.spacing());
  auto src = volume.data();
  auto dst = out.data();
  for_each_covered(window, [&](std::size_t ci, std::size_t si) { dst[ci] = src[si]; });
  return out;
}

LabelVolume crop(const LabelVolume& label, const CropWindow& window) {
  check_source(window, label.dims());
  std::vector<std::uint8_t> bits(window.size.voxels(), 0);
  auto src = label.data();
  for_each_covered(window, [&](std::size_t ci, std::size_t si) { bits[ci] = src[si]; });
  return LabelVolume(window.size, label.spacing(), std::move(bits));
}

CroppedVolume crop(const Volume& volume, const Index3& center, const Dims3& size) {
  auto window = plan_crop(volume.dims(), center, size);
  return {crop(volume, window), window};
}

Volume paste_back(const Volume& cropped, const CropWindow& window) {
  if (cropped.dims() != window.size) throw ShapeMismatch("cropped volume does not match window");
  Volume out(window.source, cropped.spacing());
  auto src = cropped.data();
  auto dst = out.data();
  for_each_covered(window, [&](std::size_t ci, std::size_t si) { dst[si] = src[ci]; });
  return out;
}

LabelVolume paste_back(const LabelVolume& cropped, const CropWindow& window) {
  if (cropped.dims() != window.size) throw ShapeMismatch("cropped label does not match window");
  std::vector<std::uint8_t> bits(window.source.voxels(), 0);
  auto src = cropped.data();
  for_each_covered(window, [&](std::size_t ci, std::size_t si) { bits[si] = src[ci]; });
  return LabelVolume(window.source, cropped.spacing(), std::move(bits));
}

}  // namespace hipseg
