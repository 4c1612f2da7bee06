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

#include "hipseg/volume_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "binary_io.hpp"
#include "hipseg/errors.hpp"

namespace hipseg {

namespace detail {

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoFailure("read failed for " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoFailure("write failed for " + path.string());
}

}  // namespace detail

namespace {

constexpr std::string_view kNativeMagic = "VXVOL001";
constexpr std::int32_t kNiftiHeaderSize = 348;

enum NiftiType : std::int16_t { kUint8 = 2, kInt16 = 4, kFloat32 = 16 };

struct NiftiHeader {
  Dims3 dims;
  Spacing3 spacing;
  std::int16_t datatype = 0;
  float vox_offset = 0.0f;
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  bool swapped = false;
};

float positive_or_unit(float pixdim) {
  return std::isfinite(pixdim) && pixdim > 0.0f ? pixdim : 1.0f;
}

NiftiHeader parse_nifti_header(std::span<const char> bytes) {
  if (bytes.size() < static_cast<std::size_t>(kNiftiHeaderSize)) {
    throw MalformedHeader("file shorter than a NIfTI-1 header");
  }
  NiftiHeader hdr;
  {
    detail::ByteReader<MalformedHeader> probe(bytes);
    auto size = static_cast<std::int32_t>(probe.u32());
    if (size != kNiftiHeaderSize) {
      if (static_cast<std::int32_t>(detail::byteswap(static_cast<std::uint32_t>(size))) !=
          kNiftiHeaderSize) {
        throw MalformedHeader("sizeof_hdr is " + std::to_string(size) + ", expected 348");
      }
      hdr.swapped = true;
    }
  }
  detail::ByteReader<MalformedHeader> in(bytes, hdr.swapped);
  in.seek(344);
  auto magic = in.take(4);
  if (magic != std::string_view("n+1\0", 4)) {
    throw MalformedHeader("NIfTI magic is not \"n+1\" (only single-file NIfTI-1 is supported)");
  }

  in.seek(40);
  std::int16_t dim[8];
  for (auto& d : dim) d = static_cast<std::int16_t>(in.u16());
  if (dim[0] < 1 || dim[0] > 7) throw MalformedHeader("dim[0] out of range");
  int extents[3] = {1, 1, 1};
  for (int i = 0; i < 3 && i < dim[0]; ++i) {
    if (dim[i + 1] < 1) throw MalformedHeader("non-positive dimension in header");
    extents[i] = dim[i + 1];
  }
  for (int i = 4; i <= dim[0]; ++i) {
    if (dim[i] > 1) throw MalformedHeader("multi-frame volumes are not supported");
  }
  hdr.dims = {extents[0], extents[1], extents[2]};

  in.seek(70);
  hdr.datatype = static_cast<std::int16_t>(in.u16());
  in.seek(76);
  float pixdim[8];
  for (auto& p : pixdim) p = in.f32();
  hdr.spacing = {positive_or_unit(pixdim[1]), positive_or_unit(pixdim[2]),
                 positive_or_unit(pixdim[3])};
  hdr.vox_offset = in.f32();
  hdr.scl_slope = in.f32();
  hdr.scl_inter = in.f32();
  return hdr;
}

}  // namespace

Volume load_nifti(const std::filesystem::path& path) {
  auto bytes = detail::read_file(path);
  auto hdr = parse_nifti_header(bytes);

  std::size_t bytes_per_voxel = 0;
  switch (hdr.datatype) {
    case kUint8: bytes_per_voxel = 1; break;
    case kInt16: bytes_per_voxel = 2; break;
    case kFloat32: bytes_per_voxel = 4; break;
    default:
      throw UnsupportedDatatype("NIfTI datatype " + std::to_string(hdr.datatype) +
                                " is not one of uint8, int16, float32");
  }

  if (!std::isfinite(hdr.vox_offset) || hdr.vox_offset < kNiftiHeaderSize) {
    throw MalformedHeader("vox_offset must be at least 348 for single-file NIfTI");
  }
  auto offset = static_cast<std::size_t>(hdr.vox_offset);
  std::size_t count = hdr.dims.voxels();
  if (offset > bytes.size() || bytes.size() - offset < count * bytes_per_voxel) {
    throw TruncatedFile("data section of " + path.string() + " is shorter than " +
                        std::to_string(count * bytes_per_voxel) + " bytes");
  }

  detail::ByteReader<TruncatedFile> in(bytes, hdr.swapped);
  in.seek(offset);
  std::vector<double> raw(count);
  for (auto& v : raw) {
    switch (hdr.datatype) {
      case kUint8: v = static_cast<unsigned char>(in.take(1)[0]); break;
      case kInt16: v = static_cast<std::int16_t>(in.u16()); break;
      default: v = in.f32(); break;
    }
  }

  bool scaled = std::isfinite(hdr.scl_slope) && hdr.scl_slope != 0.0f;
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    double v = raw[i];
    if (scaled) v = v * hdr.scl_slope + hdr.scl_inter;
    values[i] = static_cast<float>(v);
    if (!std::isfinite(values[i])) {
      throw NonFiniteData("NIfTI voxel " + std::to_string(i) + " is not finite");
    }
  }
  return Volume(hdr.dims, hdr.spacing, std::move(values));
}

void save_native(const Volume& volume, const std::filesystem::path& path) {
  detail::ByteWriter out;
  out.put_bytes(kNativeMagic);
  out.put_u32(static_cast<std::uint32_t>(volume.dims().w));
  out.put_u32(static_cast<std::uint32_t>(volume.dims().h));
  out.put_u32(static_cast<std::uint32_t>(volume.dims().d));
  out.put_f32(volume.spacing().x);
  out.put_f32(volume.spacing().y);
  out.put_f32(volume.spacing().z);
  out.put_f32s(volume.data());
  detail::write_file(path, out.bytes());
}

Volume load_native(const std::filesystem::path& path) {
  auto bytes = detail::read_file(path);
  detail::ByteReader<IoFailure> in(bytes);
  if (in.remaining() < kNativeMagic.size() || in.take(kNativeMagic.size()) != kNativeMagic) {
    throw IoFailure(path.string() + " is not a VXVOL001 volume");
  }
  Dims3 dims;
  dims.w = static_cast<int>(in.u32());
  dims.h = static_cast<int>(in.u32());
  dims.d = static_cast<int>(in.u32());
  Spacing3 spacing;
  spacing.x = in.f32();
  spacing.y = in.f32();
  spacing.z = in.f32();
  if (dims.w <= 0 || dims.h <= 0 || dims.d <= 0) throw IoFailure("bad dims in " + path.string());
  std::vector<float> values(dims.voxels());
  if (in.remaining() != values.size() * sizeof(float)) {
    throw IoFailure("payload size of " + path.string() + " does not match its dims");
  }
  in.f32s(values);
  return Volume(dims, spacing, std::move(values));
}

void save_native(const LabelVolume& label, const std::filesystem::path& path) {
  save_native(label.to_volume(), path);
}

LabelVolume load_native_label(const std::filesystem::path& path) {
  return LabelVolume::from_volume(load_native(path));
}

Volume load_volume(const std::filesystem::path& path) {
  if (path.extension() == ".nii") return load_nifti(path);
  return load_native(path);
}

void export_slice(const Volume& volume, Axis axis, int index, const std::filesystem::path& path) {
  const auto& dims = volume.dims();
  int a = static_cast<int>(axis);
  if (index < 0 || index >= dims.along(a)) {
    throw IndexOutOfRange("slice " + std::to_string(index) + " outside [0, " +
                          std::to_string(dims.along(a)) + ")");
  }
  int cols = 0;
  int rows = 0;
  switch (axis) {
    case Axis::x: cols = dims.h; rows = dims.d; break;
    case Axis::y: cols = dims.w; rows = dims.d; break;
    case Axis::z: cols = dims.w; rows = dims.h; break;
  }
  auto sample = [&](int c, int r) {
    switch (axis) {
      case Axis::x: return volume.at(index, c, r);
      case Axis::y: return volume.at(c, index, r);
      default: return volume.at(c, r, index);
    }
  };

  std::vector<float> plane(static_cast<std::size_t>(cols) * rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) plane[static_cast<std::size_t>(r) * cols + c] = sample(c, r);
  }
  auto [lo_it, hi_it] = std::minmax_element(plane.begin(), plane.end());
  double lo = *lo_it;
  double hi = *hi_it;

  std::string pixels(plane.size(), '\0');
  for (std::size_t i = 0; i < plane.size(); ++i) {
    int level = 128;
    if (hi > lo) level = static_cast<int>(std::floor((plane[i] - lo) / (hi - lo) * 255.0 + 0.5));
    pixels[i] = static_cast<char>(std::clamp(level, 0, 255));
  }

  detail::ByteWriter out;
  out.put_bytes("P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n");
  out.put_bytes(pixels);
  detail::write_file(path, out.bytes());
}

}  // namespace hipseg
