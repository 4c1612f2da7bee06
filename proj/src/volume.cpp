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

#include "hipseg/volume.hpp"

#include <algorithm>
#include <cmath>

#include "hipseg/errors.hpp"

namespace hipseg {

namespace {

void check_geometry(const Dims3& dims, const Spacing3& spacing) {
  if (dims.w <= 0 || dims.h <= 0 || dims.d <= 0) {
    throw ShapeMismatch("volume dims must be positive, got " + to_string(dims));
  }
  auto ok = [](float s) { return std::isfinite(s) && s > 0.0f; };
  if (!ok(spacing.x) || !ok(spacing.y) || !ok(spacing.z)) {
    throw ShapeMismatch("volume spacing must be finite and positive");
  }
}

}  // namespace

std::string to_string(const Dims3& dims) {
  return std::to_string(dims.w) + "x" + std::to_string(dims.h) + "x" + std::to_string(dims.d);
}

Volume::Volume(Dims3 dims, Spacing3 spacing, float fill)
    : dims_(dims), spacing_(spacing) {
  check_geometry(dims_, spacing_);
  if (!std::isfinite(fill)) throw NonFiniteData("volume fill value is not finite");
  data_.assign(dims_.voxels(), fill);
}

Volume::Volume(Dims3 dims, Spacing3 spacing, std::vector<float> data)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
  check_geometry(dims_, spacing_);
  if (data_.size() != dims_.voxels()) {
    throw ShapeMismatch("volume data length " + std::to_string(data_.size()) +
                        " does not match dims " + to_string(dims_));
  }
  require_finite();
}

void Volume::require_finite() const {
  auto bad = std::find_if(data_.begin(), data_.end(), [](float v) { return !std::isfinite(v); });
  if (bad != data_.end()) {
    throw NonFiniteData("volume holds a non-finite value at linear index " +
                        std::to_string(bad - data_.begin()));
  }
}

LabelVolume::LabelVolume(Dims3 dims, Spacing3 spacing) : dims_(dims), spacing_(spacing) {
  check_geometry(dims_, spacing_);
  data_.assign(dims_.voxels(), 0);
}

LabelVolume::LabelVolume(Dims3 dims, Spacing3 spacing, std::vector<std::uint8_t> data)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
  check_geometry(dims_, spacing_);
  if (data_.size() != dims_.voxels()) {
    throw ShapeMismatch("label data length does not match dims " + to_string(dims_));
  }
  if (std::any_of(data_.begin(), data_.end(), [](std::uint8_t v) { return v > 1; })) {
    throw DataError("label volume values must be 0 or 1");
  }
}

LabelVolume LabelVolume::from_volume(const Volume& volume) {
  std::vector<std::uint8_t> bits(volume.size());
  auto src = volume.data();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (src[i] == 0.0f) {
      bits[i] = 0;
    } else if (src[i] == 1.0f) {
      bits[i] = 1;
    } else {
      throw DataError("label volume holds a value other than 0 or 1 at linear index " +
                      std::to_string(i));
    }
  }
  return LabelVolume(volume.dims(), volume.spacing(), std::move(bits));
}

Volume LabelVolume::to_volume() const {
  std::vector<float> values(data_.begin(), data_.end());
  return Volume(dims_, spacing_, std::move(values));
}

std::size_t LabelVolume::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

}  // namespace hipseg
