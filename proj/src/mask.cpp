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

#include "hipseg/mask.hpp"

#include <cmath>

#include "hipseg/errors.hpp"

namespace hipseg {

void MaskParams::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) throw InvalidConfig("mask alpha must be finite and >= 0");
  if (!std::isfinite(beta)) throw InvalidConfig("mask beta must be finite");
  if (!(binarize_threshold >= 0.0 && binarize_threshold <= 1.0)) {
    throw InvalidConfig("binarize threshold must lie in [0, 1]");
  }
}

LabelVolume binarize(const Volume& prob, double threshold) {
  std::vector<std::uint8_t> bits(prob.size());
  auto src = prob.data();
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = src[i] > threshold ? 1 : 0;
  return LabelVolume(prob.dims(), prob.spacing(), std::move(bits));
}

Volume build_mask(const LabelVolume& label, const MaskParams& params) {
  params.validate();
  const auto off = static_cast<float>(params.beta);
  const auto on = static_cast<float>(params.alpha + params.beta);
  std::vector<float> values(label.size());
  auto src = label.data();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = src[i] ? on : off;
  return Volume(label.dims(), label.spacing(), std::move(values));
}

Volume build_mask(const Volume& prob, const MaskParams& params) {
  params.validate();
  std::vector<float> values(prob.size());
  auto src = prob.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = static_cast<float>(src[i] * params.alpha + params.beta);
  }
  return Volume(prob.dims(), prob.spacing(), std::move(values));
}

Volume apply_mask(const Volume& mask, const Volume& original) {
  if (mask.dims() != original.dims()) {
    throw ShapeMismatch("mask " + to_string(mask.dims()) + " and volume " +
                        to_string(original.dims()) + " differ");
  }
  std::vector<float> values(original.size());
  auto m = mask.data();
  auto x = original.data();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = m[i] * x[i];
  return Volume(original.dims(), original.spacing(), std::move(values));
}

EnhancedCrop enhance_crop(const Volume& prob_fullres, const Volume& original,
                          const Localization& loc, const Dims3& crop_dims,
                          const MaskParams& params) {
  if (prob_fullres.dims() != original.dims()) {
    throw ShapeMismatch("proposal " + to_string(prob_fullres.dims()) + " and volume " +
                        to_string(original.dims()) + " differ");
  }
  auto window = plan_crop(original.dims(), loc.center, crop_dims);
  auto proposal = crop(prob_fullres, window);
  auto mask = params.soft ? build_mask(proposal, params)
                          : build_mask(binarize(proposal, params.binarize_threshold), params);
  return {apply_mask(mask, crop(original, window)), window};
}

}  // namespace hipseg
