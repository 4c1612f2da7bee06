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

// Brute-force reference implementations used only by the tests. None of
// them share code with the library.
#ifndef HIPSEG_TESTS_ORACLES_HPP_
#define HIPSEG_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hipseg/tensor.hpp"
#include "hipseg/volume.hpp"

namespace oracle {

using hipseg::BasicTensor;
using hipseg::Shape;

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hipseg_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

template <typename T>
BasicTensor<T> random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  BasicTensor<T> t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.data()) v = static_cast<T>(u(rng));
  return t;
}

inline hipseg::Volume random_volume(hipseg::Dims3 d, std::mt19937_64& rng, double lo = 0.0,
                                    double hi = 1.0) {
  hipseg::Volume v(d, hipseg::Spacing3{});
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& x : v.data()) x = static_cast<float>(u(rng));
  return v;
}

inline hipseg::LabelVolume random_label(hipseg::Dims3 d, std::mt19937_64& rng, double p = 0.5) {
  hipseg::LabelVolume l(d, hipseg::Spacing3{});
  std::bernoulli_distribution b(p);
  for (int z = 0; z < d.d; ++z)
    for (int y = 0; y < d.h; ++y)
      for (int x = 0; x < d.w; ++x) l.set(x, y, z, b(rng));
  return l;
}

// Seven nested loops (plus batch) over the textbook cross-correlation sum.
inline BasicTensor<double> conv3d(const BasicTensor<double>& in, const BasicTensor<double>& w,
                                  const std::vector<double>& bias, int k, int s, int p) {
  const auto N = in.dim(0), Ci = in.dim(1), D = in.dim(2), H = in.dim(3), W = in.dim(4);
  const auto Co = w.dim(0);
  const auto OD = (D + 2 * p - k) / s + 1, OH = (H + 2 * p - k) / s + 1,
             OW = (W + 2 * p - k) / s + 1;
  BasicTensor<double> out(Shape{N, Co, OD, OH, OW});
  auto at_in = [&](int64_t n, int64_t c, int64_t z, int64_t y, int64_t x) {
    return in[(((n * Ci + c) * D + z) * H + y) * W + x];
  };
  auto at_w = [&](int64_t o, int64_t c, int64_t a, int64_t b, int64_t e) {
    return w[(((o * Ci + c) * k + a) * k + b) * k + e];
  };
  for (int64_t n = 0; n < N; ++n)
    for (int64_t o = 0; o < Co; ++o)
      for (int64_t z = 0; z < OD; ++z)
        for (int64_t y = 0; y < OH; ++y)
          for (int64_t x = 0; x < OW; ++x) {
            double acc = bias.empty() ? 0.0 : bias[o];
            for (int64_t c = 0; c < Ci; ++c)
              for (int64_t a = 0; a < k; ++a)
                for (int64_t b = 0; b < k; ++b)
                  for (int64_t e = 0; e < k; ++e) {
                    const int64_t iz = z * s - p + a, iy = y * s - p + b, ix = x * s - p + e;
                    if (iz < 0 || iy < 0 || ix < 0 || iz >= D || iy >= H || ix >= W) continue;
                    acc += at_in(n, c, iz, iy, ix) * at_w(o, c, a, b, e);
                  }
            out[(((n * Co + o) * OD + z) * OH + y) * OW + x] = acc;
          }
  return out;
}

// Scatter form of the 2x2x2 stride-2 transposed convolution.
inline BasicTensor<double> deconv3d(const BasicTensor<double>& in, const BasicTensor<double>& w,
                                    const std::vector<double>& bias) {
  const auto N = in.dim(0), Ci = in.dim(1), D = in.dim(2), H = in.dim(3), W = in.dim(4);
  const auto Co = w.dim(1);
  BasicTensor<double> out(Shape{N, Co, 2 * D, 2 * H, 2 * W});
  for (int64_t n = 0; n < N; ++n)
    for (int64_t o = 0; o < Co; ++o)
      for (int64_t z = 0; z < 2 * D; ++z)
        for (int64_t y = 0; y < 2 * H; ++y)
          for (int64_t x = 0; x < 2 * W; ++x) {
            double acc = bias.empty() ? 0.0 : bias[o];
            for (int64_t c = 0; c < Ci; ++c) {
              const double v = in[(((n * Ci + c) * D + z / 2) * H + y / 2) * W + x / 2];
              acc += v * w[(((c * Co + o) * 2 + z % 2) * 2 + y % 2) * 2 + x % 2];
            }
            out[(((n * Co + o) * 2 * D + z) * 2 * H + y) * 2 * W + x] = acc;
          }
  return out;
}

// Evaluates the align-corners trilinear formula at one output voxel.
inline double resample_at(const hipseg::Volume& v, hipseg::Dims3 target, int x, int y, int z) {
  auto coord = [](int i, int source, int size) {
    return size == 1 ? (source - 1) / 2.0 : static_cast<double>(i) * (source - 1) / (size - 1);
  };
  const auto& s = v.dims();
  const double cx = coord(x, s.w, target.w), cy = coord(y, s.h, target.h),
               cz = coord(z, s.d, target.d);
  double sum = 0.0;
  // Weight of every source voxel is the product of 1D hat functions.
  for (int k = 0; k < s.d; ++k) {
    const double wz = std::max(0.0, 1.0 - std::abs(cz - k));
    if (wz == 0.0) continue;
    for (int j = 0; j < s.h; ++j) {
      const double wy = std::max(0.0, 1.0 - std::abs(cy - j));
      if (wy == 0.0) continue;
      for (int i = 0; i < s.w; ++i) {
        const double wx = std::max(0.0, 1.0 - std::abs(cx - i));
        if (wx == 0.0) continue;
        sum += wx * wy * wz * v.at(i, j, k);
      }
    }
  }
  return sum;
}

struct Histograms {
  std::vector<double> hx, hy, hz;
};

template <typename Vol>
Histograms histograms(const Vol& v) {
  const auto& d = v.dims();
  Histograms h{std::vector<double>(d.w), std::vector<double>(d.h), std::vector<double>(d.d)};
  for (int x = 0; x < d.w; ++x)
    for (int y = 0; y < d.h; ++y)
      for (int z = 0; z < d.d; ++z) {
        const double val = v.at(x, y, z);
        h.hx[x] += val;
        h.hy[y] += val;
        h.hz[z] += val;
      }
  return h;
}

struct Bounds {
  int lo = -1, hi = -1;
};

// Scans every index against the threshold.
inline Bounds threshold_bounds(const std::vector<double>& h, double eps) {
  Bounds b;
  for (int i = 0; i < static_cast<int>(h.size()); ++i) {
    if (h[i] > eps) {
      if (b.lo < 0) b.lo = i;
      b.hi = i;
    }
  }
  return b;
}

struct SetMetrics {
  double dsc, jsc, pi, ri;
};

// Counts membership voxel by voxel.
inline SetMetrics set_metrics(const hipseg::LabelVolume& seg, const hipseg::LabelVolume& ref) {
  double s = 0, g = 0, both = 0, either = 0;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const bool a = seg.data()[i] != 0, b = ref.data()[i] != 0;
    s += a;
    g += b;
    both += a && b;
    either += a || b;
  }
  return {2 * both / (s + g), both / either, both / g, both / s};
}

// Central difference of a scalar function of one entry of `values`.
inline double central_difference(const std::function<double()>& f, double& value, double step) {
  const double saved = value;
  value = saved + step;
  const double up = f();
  value = saved - step;
  const double down = f();
  value = saved;
  return (up - down) / (2 * step);
}

inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Writes a single-file NIfTI-1 image byte by byte from the published header
// layout.
struct NiftiSpec {
  int dims[3] = {1, 1, 1};
  float pixdim[3] = {1, 1, 1};
  std::int16_t datatype = 16;
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  bool big_endian = false;
  int sizeof_hdr = 348;
  std::string magic = std::string("n+1\0", 4);
  std::vector<char> payload;  // already in file byte order
};

inline void write_nifti(const NiftiSpec& s, const std::filesystem::path& path) {
  std::vector<char> hdr(352, 0);
  auto put = [&](std::size_t off, const void* src, std::size_t n) {
    std::memcpy(hdr.data() + off, src, n);
    if (s.big_endian) std::reverse(hdr.begin() + off, hdr.begin() + off + n);
  };
  const std::int32_t size = s.sizeof_hdr;
  put(0, &size, 4);
  const std::int16_t dim[8] = {3, static_cast<std::int16_t>(s.dims[0]),
                               static_cast<std::int16_t>(s.dims[1]),
                               static_cast<std::int16_t>(s.dims[2]), 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) put(40 + 2 * i, &dim[i], 2);
  put(70, &s.datatype, 2);
  std::int16_t bitpix = s.datatype == 2 ? 8 : s.datatype == 4 ? 16 : 32;
  put(72, &bitpix, 2);
  const float pix[8] = {1, s.pixdim[0], s.pixdim[1], s.pixdim[2], 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) put(76 + 4 * i, &pix[i], 4);
  const float vox_offset = 352.0f;
  put(108, &vox_offset, 4);
  put(112, &s.scl_slope, 4);
  put(116, &s.scl_inter, 4);
  std::memcpy(hdr.data() + 344, s.magic.data(), 4);
  std::ofstream out(path, std::ios::binary);
  out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  out.write(s.payload.data(), static_cast<std::streamsize>(s.payload.size()));
}

template <typename V>
void append_scalar(std::vector<char>& bytes, V v, bool big_endian) {
  char raw[sizeof(V)];
  std::memcpy(raw, &v, sizeof(V));
  if (big_endian) std::reverse(raw, raw + sizeof(V));
  bytes.insert(bytes.end(), raw, raw + sizeof(V));
}

inline std::vector<char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace oracle

#endif  // HIPSEG_TESTS_ORACLES_HPP_
