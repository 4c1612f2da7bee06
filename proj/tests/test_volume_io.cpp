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

#include <cmath>
#include <random>
#include <zlib.h>

#include "doctest.h"
#include "hipseg/errors.hpp"
#include "hipseg/volume_io.hpp"
#include "oracles.hpp"

using namespace hipseg;

namespace {

std::vector<char> int16_payload(const std::vector<std::int16_t>& values, bool big_endian) {
  std::vector<char> out;
  for (auto v : values) oracle::append_scalar(out, v, big_endian);
  return out;
}

struct Pgm {
  int width = 0, height = 0, maxval = 0;
  std::vector<unsigned char> pixels;
};

Pgm read_pgm(const std::filesystem::path& path) {
  auto bytes = oracle::read_bytes(path);
  std::string text(bytes.begin(), bytes.end());
  Pgm p;
  char magic[3] = {};
  int consumed = 0;
  REQUIRE(std::sscanf(text.c_str(), "%2s %d %d %d%n", magic, &p.width, &p.height, &p.maxval,
                      &consumed) == 4);
  REQUIRE(std::string(magic) == "P5");
  p.pixels.assign(bytes.begin() + consumed + 1, bytes.end());
  return p;
}

}  // namespace

TEST_CASE("volume construction enforces its invariants") {
  CHECK_THROWS_AS(Volume({0, 2, 2}, Spacing3{}), ShapeMismatch);
  CHECK_THROWS_AS(Volume({2, 2, 2}, Spacing3{1, 0, 1}), ShapeMismatch);
  CHECK_THROWS_AS(Volume({2, 2, 2}, Spacing3{}, std::vector<float>(7)), ShapeMismatch);
  std::vector<float> bad(8, 0.0f);
  bad[3] = INFINITY;
  CHECK_THROWS_AS(Volume({2, 2, 2}, Spacing3{}, bad), NonFiniteData);
  Volume v({2, 2, 2}, Spacing3{}, std::vector<float>{0, 1, 0, 1, 1, 1, 0, 0});
  CHECK(LabelVolume::from_volume(v).count() == 4);
  v.at(0, 0, 0) = 0.5f;
  CHECK_THROWS_AS(LabelVolume::from_volume(v), DataError);
}

TEST_CASE("NIfTI float32 zeros and int16 scaling") {
  auto dir = oracle::temp_dir("nifti");
  oracle::NiftiSpec zeros;
  zeros.dims[0] = zeros.dims[1] = zeros.dims[2] = 4;
  for (int i = 0; i < 64; ++i) oracle::append_scalar(zeros.payload, 0.0f, false);
  oracle::write_nifti(zeros, dir / "zeros.nii");
  auto v = load_nifti(dir / "zeros.nii");
  CHECK(v.dims() == Dims3{4, 4, 4});
  CHECK(v.spacing() == Spacing3{1, 1, 1});
  for (float x : v.data()) CHECK(x == 0.0f);

  oracle::NiftiSpec scaled;
  scaled.datatype = 4;
  scaled.scl_slope = 2.0f;
  scaled.scl_inter = 1.0f;
  scaled.payload = int16_payload({3}, false);
  oracle::write_nifti(scaled, dir / "scaled.nii");
  CHECK(load_nifti(dir / "scaled.nii").at(0, 0, 0) == 7.0f);
}

TEST_CASE("NIfTI int16 ramp in both byte orders") {
  auto dir = oracle::temp_dir("nifti_ramp");
  for (bool big : {false, true}) {
    oracle::NiftiSpec s;
    s.dims[0] = 3;
    s.dims[1] = 2;
    s.dims[2] = 2;
    s.pixdim[0] = 0.5f;
    s.pixdim[1] = 2.0f;
    s.pixdim[2] = 1.5f;
    s.datatype = 4;
    s.big_endian = big;
    std::vector<std::int16_t> ramp(12);
    std::iota(ramp.begin(), ramp.end(), 0);
    s.payload = int16_payload(ramp, big);
    const auto path = dir / (big ? "be.nii" : "le.nii");
    oracle::write_nifti(s, path);
    auto v = load_volume(path);
    CHECK(v.spacing() == Spacing3{0.5f, 2.0f, 1.5f});
    for (int z = 0; z < 2; ++z)
      for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) CHECK(v.at(x, y, z) == static_cast<float>(x + 3 * y + 6 * z));
  }
}

TEST_CASE("NIfTI uint8 payload") {
  auto dir = oracle::temp_dir("nifti_u8");
  oracle::NiftiSpec s;
  s.dims[0] = 4;
  s.datatype = 2;
  s.payload = {0, 1, static_cast<char>(200), static_cast<char>(255)};
  oracle::write_nifti(s, dir / "u8.nii");
  auto v = load_nifti(dir / "u8.nii");
  CHECK(std::vector<float>(v.data().begin(), v.data().end()) == std::vector<float>{0, 1, 200, 255});
}

TEST_CASE("NIfTI error paths") {
  auto dir = oracle::temp_dir("nifti_err");
  oracle::NiftiSpec base;
  base.dims[0] = 2;
  for (int i = 0; i < 2; ++i) oracle::append_scalar(base.payload, 1.0f, false);

  auto s = base;
  s.datatype = 64;  // float64
  oracle::write_nifti(s, dir / "f64.nii");
  CHECK_THROWS_AS(load_nifti(dir / "f64.nii"), UnsupportedDatatype);

  s = base;
  s.magic = std::string("ni1\0", 4);
  oracle::write_nifti(s, dir / "pair.nii");
  CHECK_THROWS_AS(load_nifti(dir / "pair.nii"), MalformedHeader);

  s = base;
  s.sizeof_hdr = 540;
  oracle::write_nifti(s, dir / "nifti2.nii");
  CHECK_THROWS_AS(load_nifti(dir / "nifti2.nii"), MalformedHeader);

  s = base;
  s.payload.resize(5);
  oracle::write_nifti(s, dir / "short.nii");
  CHECK_THROWS_AS(load_nifti(dir / "short.nii"), TruncatedFile);

  s = base;
  s.payload.clear();
  oracle::append_scalar(s.payload, 1.0f, false);
  oracle::append_scalar(s.payload, std::nanf(""), false);
  oracle::write_nifti(s, dir / "nan.nii");
  CHECK_THROWS_AS(load_nifti(dir / "nan.nii"), NonFiniteData);

  CHECK_THROWS_AS(load_nifti(dir / "absent.nii"), IoFailure);
}

TEST_CASE("native volumes round-trip bit-exactly") {
  auto dir = oracle::temp_dir("native");
  std::mt19937_64 rng(17);
  auto v = oracle::random_volume({64, 64, 128}, rng, -5, 5);
  v = Volume(v.dims(), Spacing3{0.9f, 1.1f, 2.5f}, std::vector<float>(v.data().begin(), v.data().end()));
  save_native(v, dir / "v.vxv");
  auto back = load_native(dir / "v.vxv");
  CHECK(back == v);
  auto crc = [](std::span<const float> d) {
    return crc32(0L, reinterpret_cast<const Bytef*>(d.data()), static_cast<uInt>(d.size_bytes()));
  };
  CHECK(crc(back.data()) == crc(v.data()));

  auto bytes = oracle::read_bytes(dir / "v.vxv");
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "VXVOL001");
  CHECK(bytes.size() == 8 + 12 + 12 + v.size() * 4);

  auto label = oracle::random_label({5, 6, 7}, rng);
  save_native(label, dir / "l.vxv");
  CHECK(load_native_label(dir / "l.vxv") == label);
  CHECK_THROWS_AS(load_native_label(dir / "v.vxv"), DataError);

  bytes.resize(bytes.size() - 3);
  std::ofstream(dir / "cut.vxv", std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  CHECK_THROWS(load_native(dir / "cut.vxv"));
}

TEST_CASE("slice export normalisation and layout") {
  auto dir = oracle::temp_dir("pgm");
  Volume zeros({4, 4, 4}, Spacing3{});
  export_slice(zeros, Axis::z, 2, dir / "zero.pgm");
  auto p = read_pgm(dir / "zero.pgm");
  CHECK(p.width == 4);
  CHECK(p.height == 4);
  CHECK(p.maxval == 255);
  for (auto px : p.pixels) CHECK(px == 128);

  Volume ramp({4, 4, 1}, Spacing3{});
  for (int i = 0; i < 16; ++i) ramp.data()[i] = static_cast<float>(i);
  export_slice(ramp, Axis::z, 0, dir / "ramp.pgm");
  p = read_pgm(dir / "ramp.pgm");
  REQUIRE(p.pixels.size() == 16);
  for (int i = 0; i < 16; ++i) CHECK(p.pixels[i] == 17 * i);

  Volume mid({3, 1, 1}, Spacing3{}, std::vector<float>{0, 5, 10});
  export_slice(mid, Axis::z, 0, dir / "mid.pgm");
  CHECK(read_pgm(dir / "mid.pgm").pixels[1] == 128);

  Volume box({5, 3, 2}, Spacing3{});
  export_slice(box, Axis::x, 4, dir / "x.pgm");
  p = read_pgm(dir / "x.pgm");
  CHECK(p.width == 3);
  CHECK(p.height == 2);
  export_slice(box, Axis::y, 0, dir / "y.pgm");
  p = read_pgm(dir / "y.pgm");
  CHECK(p.width == 5);
  CHECK(p.height == 2);
  CHECK_THROWS_AS(export_slice(box, Axis::x, 5, dir / "bad.pgm"), IndexOutOfRange);
  CHECK_THROWS_AS(export_slice(box, Axis::z, -1, dir / "bad.pgm"), IndexOutOfRange);
}
