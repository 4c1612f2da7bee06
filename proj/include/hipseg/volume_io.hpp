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

#ifndef HIPSEG_VOLUME_IO_HPP_
#define HIPSEG_VOLUME_IO_HPP_

#include <filesystem>

#include "hipseg/volume.hpp"

namespace hipseg {

enum class Axis { x = 0, y = 1, z = 2 };

/// Reads a single-file, uncompressed NIfTI-1 volume ("n+1").
///
/// Supported datatypes are uint8, int16 and float32, in either byte order.
/// scl_slope/scl_inter are applied when scl_slope is non-zero. Orientation
/// (qform/sform) is ignored; axes are those of the stored array.
Volume load_nifti(const std::filesystem::path& path);

/// Native "VXVOL001" format: magic, u32 W/H/D, f32 spacings, f32 voxels,
/// all little-endian, x fastest.
void save_native(const Volume& volume, const std::filesystem::path& path);
Volume load_native(const std::filesystem::path& path);

void save_native(const LabelVolume& label, const std::filesystem::path& path);
LabelVolume load_native_label(const std::filesystem::path& path);

/// Picks the reader from the extension: ".nii" goes to load_nifti, anything
/// else to load_native.
Volume load_volume(const std::filesystem::path& path);

/// Writes one plane as binary PGM (P5, maxval 255), min-max normalised over
/// the plane, rounding half up. A constant plane maps to 128.
///
/// Plane layout: axis z gives columns x / rows y, axis y gives columns x /
/// rows z, axis x gives columns y / rows z.
void export_slice(const Volume& volume, Axis axis, int index, const std::filesystem::path& path);

}  // namespace hipseg

#endif  // HIPSEG_VOLUME_IO_HPP_
