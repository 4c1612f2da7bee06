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

#ifndef HIPSEG_VOLUME_HPP_
#define HIPSEG_VOLUME_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hipseg {

/// Voxel extents along x (W), y (H) and z (D).
struct Dims3 {
  int w = 0;
  int h = 0;
  int d = 0;

  [[nodiscard]] std::size_t voxels() const {
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
           static_cast<std::size_t>(d);
  }
  [[nodiscard]] int along(int axis) const { return axis == 0 ? w : axis == 1 ? h : d; }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

struct Index3 {
  int x = 0;
  int y = 0;
  int z = 0;

  [[nodiscard]] int along(int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  friend bool operator==(const Index3&, const Index3&) = default;
};

/// Millimetres per voxel.
struct Spacing3 {
  float x = 1.0f;
  float y = 1.0f;
  float z = 1.0f;
  friend bool operator==(const Spacing3&, const Spacing3&) = default;
};

std::string to_string(const Dims3& dims);

/// Dense scalar field stored x-fastest: index = x + W*(y + H*z).
///
/// Construction enforces the invariants: positive dims, positive spacing,
/// data length W*H*D and finite values. A Volume is immutable once handed
/// to the pipeline; mutation goes through `data()` only while building one.
class Volume {
 public:
  Volume() = default;
  Volume(Dims3 dims, Spacing3 spacing, float fill = 0.0f);
  Volume(Dims3 dims, Spacing3 spacing, std::vector<float> data);

  [[nodiscard]] const Dims3& dims() const { return dims_; }
  [[nodiscard]] const Spacing3& spacing() const { return spacing_; }
  [[nodiscard]] std::span<const float> data() const { return data_; }
  [[nodiscard]] std::span<float> data() { return data_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  [[nodiscard]] std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims_.w) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims_.h) * z);
  }
  [[nodiscard]] float at(int x, int y, int z) const { return data_[index(x, y, z)]; }
  float& at(int x, int y, int z) { return data_[index(x, y, z)]; }

  /// Throws NonFiniteData if any voxel is NaN or infinite.
  void require_finite() const;

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Dims3 dims_{};
  Spacing3 spacing_{};
  std::vector<float> data_;
};

/// Binary volume; every voxel is 0 or 1.
class LabelVolume {
 public:
  LabelVolume() = default;
  LabelVolume(Dims3 dims, Spacing3 spacing);
  LabelVolume(Dims3 dims, Spacing3 spacing, std::vector<std::uint8_t> data);

  /// Accepts only volumes whose voxels are exactly 0.0 or 1.0.
  static LabelVolume from_volume(const Volume& volume);
  [[nodiscard]] Volume to_volume() const;

  [[nodiscard]] const Dims3& dims() const { return dims_; }
  [[nodiscard]] const Spacing3& spacing() const { return spacing_; }
  [[nodiscard]] std::span<const std::uint8_t> data() const { return data_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] std::size_t count() const;

  [[nodiscard]] std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims_.w) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims_.h) * z);
  }
  [[nodiscard]] std::uint8_t at(int x, int y, int z) const { return data_[index(x, y, z)]; }
  void set(int x, int y, int z, bool on) { data_[index(x, y, z)] = on ? 1 : 0; }

  friend bool operator==(const LabelVolume&, const LabelVolume&) = default;

 private:
  Dims3 dims_{};
  Spacing3 spacing_{};
  std::vector<std::uint8_t> data_;
};

}  // namespace hipseg

#endif  // HIPSEG_VOLUME_HPP_
