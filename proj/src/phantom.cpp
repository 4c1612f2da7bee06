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

#include "hipseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "hipseg/errors.hpp"
#include "hipseg/volume_io.hpp"

namespace hipseg {

namespace {

double sq(double v) { return v * v; }

}  // namespace

bool Ellipsoid::contains(double x, double y, double z) const {
  return sq((x - center.x) / axes.x) + sq((y - center.y) / axes.y) +
             sq((z - center.z) / axes.z) <=
         1.0;
}

Vec3 PhantomSpec::brain_center() const {
  return {(dims.w - 1) / 2.0, (dims.h - 1) / 2.0, (dims.d - 1) / 2.0};
}

Vec3 PhantomSpec::brain_axes() const {
  return {brain_fraction.x * dims.w, brain_fraction.y * dims.h, brain_fraction.z * dims.d};
}

Vec3 PhantomSpec::nominal_center(bool left) const {
  Vec3 c = brain_center();
  const double offset = lateral_offset * dims.w;
  c.x += left ? -offset : offset;
  return c;
}

void PhantomSpec::validate() const {
  if (dims.w < 8 || dims.h < 8 || dims.d < 8) throw InvalidSpec("phantom dims must be at least 8");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw InvalidSpec("noise_std must be finite and >= 0");
  }
  if (pair_count < 1) throw InvalidSpec("pair_count must be positive");
  if (folds < 1 || folds > pair_count) throw InvalidSpec("folds must lie in [1, pair_count]");
  if (jitter < 0) throw InvalidSpec("jitter must be >= 0");
  auto positive = [](const Vec3& v) { return v.x > 0 && v.y > 0 && v.z > 0; };
  if (!positive(target_axes_min) || target_axes_max.x < target_axes_min.x ||
      target_axes_max.y < target_axes_min.y || target_axes_max.z < target_axes_min.z) {
    throw InvalidSpec("target semi-axis ranges must be positive with max >= min");
  }
  const Vec3 brain = brain_axes();
  if (!positive(brain) || brain.x >= dims.w / 2.0 || brain.y >= dims.h / 2.0 ||
      brain.z >= dims.d / 2.0) {
    throw InvalidSpec("brain ellipsoid must fit inside the volume");
  }
  if (lateral_offset * dims.w <= jitter + target_axes_max.x) {
    throw InvalidSpec("lateral offset too small: targets could touch across the midline");
  }

  // The brain is convex, so it contains a target whenever it contains every
  // corner of the box bounding all admissible jittered target positions.
  const Ellipsoid brain_body{brain_center(), brain};
  for (bool left : {true, false}) {
    const Vec3 c = nominal_center(left);
    const Vec3 r{target_axes_max.x + jitter, target_axes_max.y + jitter,
                 target_axes_max.z + jitter};
    for (int corner = 0; corner < 8; ++corner) {
      double x = c.x + ((corner & 1) ? r.x : -r.x);
      double y = c.y + ((corner & 2) ? r.y : -r.y);
      double z = c.z + ((corner & 4) ? r.z : -r.z);
      const double q = sq((x - brain_body.center.x) / brain.x) +
                       sq((y - brain_body.center.y) / brain.y) +
                       sq((z - brain_body.center.z) / brain.z);
      if (q >= 1.0) throw InvalidSpec("a jittered target can leave the brain ellipsoid");
    }
  }
  for (double v : {background_intensity, brain_intensity, target_intensity}) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidSpec("intensities must lie in [0, 1]");
  }
}

Phantom generate_phantom(const PhantomSpec& spec, int index) {
  spec.validate();
  if (index < 0) throw InvalidSpec("phantom index must be non-negative");
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);

  auto draw_target = [&](bool left) {
    auto axis = [&](double lo, double hi) {
      return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    std::uniform_int_distribution<int> shift(-spec.jitter, spec.jitter);
    Ellipsoid e;
    e.axes = {axis(spec.target_axes_min.x, spec.target_axes_max.x),
              axis(spec.target_axes_min.y, spec.target_axes_max.y),
              axis(spec.target_axes_min.z, spec.target_axes_max.z)};
    e.center = spec.nominal_center(left);
    e.center.x += shift(rng);
    e.center.y += shift(rng);
    e.center.z += shift(rng);
    return e;
  };
  const Ellipsoid left = draw_target(true);
  const Ellipsoid right = draw_target(false);
  const Ellipsoid brain{spec.brain_center(), spec.brain_axes()};

  const Dims3 d = spec.dims;
  Phantom p{Volume(d, Spacing3{}), LabelVolume(d, Spacing3{}), LabelVolume(d, Spacing3{}), left,
            right};
  std::normal_distribution<double> noise(0.0, 1.0);
  auto values = p.volume.data();
  std::size_t i = 0;
  for (int z = 0; z < d.d; ++z) {
    for (int y = 0; y < d.h; ++y) {
      for (int x = 0; x < d.w; ++x, ++i) {
        double v = spec.background_intensity;
        if (brain.contains(x, y, z)) v = spec.brain_intensity;
        if (left.contains(x, y, z)) {
          v = spec.target_intensity;
          p.left.set(x, y, z, true);
        } else if (right.contains(x, y, z)) {
          v = spec.target_intensity;
          p.right.set(x, y, z, true);
        }
        if (spec.noise_std > 0) v += spec.noise_std * noise(rng);
        values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return p;
}

Manifest export_dataset(const PhantomSpec& spec, const std::filesystem::path& directory) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoFailure("cannot create " + directory.string() + ": " + ec.message());

  Manifest m;
  m.root = directory;
  std::ostringstream header;
  header << " hipseg phantom dataset: seed=" << spec.seed << " dims=" << to_string(spec.dims)
         << " noise_std=" << spec.noise_std << " jitter=" << spec.jitter
         << " folds=" << spec.folds << "; sample i is generated from (seed, i)";
  m.comments.push_back(header.str());

  for (int i = 0; i < spec.pair_count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "sample_%03d", i);
    auto p = generate_phantom(spec, i);
    ManifestEntry e{id, std::string(id) + "_vol.vxv", std::string(id) + "_left.vxv",
                    std::string(id) + "_right.vxv", i % spec.folds};
    save_native(p.volume, directory / e.volume);
    save_native(p.left, directory / e.left);
    save_native(p.right, directory / e.right);
    m.entries.push_back(std::move(e));
  }
  write_manifest(m, directory / "manifest.tsv");
  return m;
}

}  // namespace hipseg
