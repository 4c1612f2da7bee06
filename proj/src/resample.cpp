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

#include "hipseg/ops.hpp"

namespace hipseg {

namespace {

struct Tap {
  std::int64_t lo;
  std::int64_t hi;
  double frac;
};

std::vector<Tap> axis_taps(std::int64_t source, std::int64_t target) {
  std::vector<Tap> taps(static_cast<std::size_t>(target));
  for (std::int64_t i = 0; i < target; ++i) {
    double pos = target > 1 ? static_cast<double>(i) * static_cast<double>(source - 1) /
                                  static_cast<double>(target - 1)
                            : static_cast<double>(source - 1) / 2.0;
    auto lo = static_cast<std::int64_t>(std::floor(pos));
    if (lo > source - 2) lo = std::max<std::int64_t>(source - 2, 0);
    std::int64_t hi = std::min(lo + 1, source - 1);
    taps[static_cast<std::size_t>(i)] = {lo, hi, source > 1 ? pos - static_cast<double>(lo) : 0.0};
  }
  return taps;
}

// Resamples one x-fastest block of extents (sw, sh, *) into the tap grid.
template <typename T>
void resample_block(const T* src, std::int64_t sw, std::int64_t sh, T* dst,
                    const std::vector<Tap>& tx, const std::vector<Tap>& ty,
                    const std::vector<Tap>& tz) {
  auto at = [&](std::int64_t x, std::int64_t y, std::int64_t z) -> double {
    return static_cast<double>(src[(z * sh + y) * sw + x]);
  };
  for (const auto& z : tz) {
    for (const auto& y : ty) {
      for (const auto& x : tx) {
        double c00 = at(x.lo, y.lo, z.lo) * (1 - x.frac) + at(x.hi, y.lo, z.lo) * x.frac;
        double c10 = at(x.lo, y.hi, z.lo) * (1 - x.frac) + at(x.hi, y.hi, z.lo) * x.frac;
        double c01 = at(x.lo, y.lo, z.hi) * (1 - x.frac) + at(x.hi, y.lo, z.hi) * x.frac;
        double c11 = at(x.lo, y.hi, z.hi) * (1 - x.frac) + at(x.hi, y.hi, z.hi) * x.frac;
        double c0 = c00 * (1 - y.frac) + c10 * y.frac;
        double c1 = c01 * (1 - y.frac) + c11 * y.frac;
        *dst++ = static_cast<T>(c0 * (1 - z.frac) + c1 * z.frac);
      }
    }
  }
}

void check_target(const Dims3& target) {
  if (target.w <= 0 || target.h <= 0 || target.d <= 0) {
    throw ShapeMismatch("resample target dims must be positive, got " + to_string(target));
  }
}

}  // namespace

Volume trilinear_resample(const Volume& volume, Dims3 target) {
  check_target(target);
  const auto& s = volume.dims();
  auto tx = axis_taps(s.w, target.w);
  auto ty = axis_taps(s.h, target.h);
  auto tz = axis_taps(s.d, target.d);
  std::vector<float> out(target.voxels());
  resample_block(volume.data().data(), s.w, s.h, out.data(), tx, ty, tz);
  return Volume(target, volume.spacing(), std::move(out));
}

template <typename T>
BasicTensor<T> trilinear_resample(const BasicTensor<T>& tensor, Dims3 target) {
  check_target(target);
  if (tensor.rank() != 5) {
    throw ShapeMismatch("trilinear_resample needs a rank-5 tensor, got " + to_string(tensor.shape()));
  }
  const std::int64_t sd = tensor.dim(2), sh = tensor.dim(3), sw = tensor.dim(4);
  auto tx = axis_taps(sw, target.w);
  auto ty = axis_taps(sh, target.h);
  auto tz = axis_taps(sd, target.d);
  BasicTensor<T> out(Shape{tensor.dim(0), tensor.dim(1), target.d, target.h, target.w});
  const std::int64_t blocks = tensor.dim(0) * tensor.dim(1);
  const std::size_t in_block = static_cast<std::size_t>(sd * sh * sw);
  const std::size_t out_block = target.voxels();
  for (std::int64_t b = 0; b < blocks; ++b) {
    resample_block(tensor.data().data() + b * in_block, sw, sh,
                   out.data().data() + b * out_block, tx, ty, tz);
  }
  return out;
}

template BasicTensor<float> trilinear_resample<float>(const BasicTensor<float>&, Dims3);
template BasicTensor<double> trilinear_resample<double>(const BasicTensor<double>&, Dims3);

}  // namespace hipseg
