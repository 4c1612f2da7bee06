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

#ifndef HIPSEG_DICE_HPP_
#define HIPSEG_DICE_HPP_

#include <string>

#include "hipseg/tensor.hpp"
#include "hipseg/volume.hpp"

namespace hipseg {

/// Soft Dice over all elements: 2*sum(p*g) / (sum(p^2) + sum(g^2)).
/// Returns 1 when both squared sums are zero.
template <typename T>
double dice_coefficient(const BasicTensor<T>& p, const BasicTensor<T>& g);

template <typename T>
struct DiceLoss {
  double loss = 0.0;         // 1 - D
  double coefficient = 0.0;  // D
  BasicTensor<T> grad;       // d(loss)/dp
};

/// Loss 1 - D and its analytic gradient with respect to p. In the
/// empty-vs-empty case (D defined as 1) the gradient is zero.
template <typename T>
DiceLoss<T> dice_loss_and_grad(const BasicTensor<T>& p, const BasicTensor<T>& g);

/// Set overlap of two binary volumes.
struct OverlapCounts {
  std::size_t segmented = 0;  // |Vs|
  std::size_t reference = 0;  // |Vg|
  std::size_t both = 0;       // |Vs n Vg|
};

OverlapCounts count_overlap(const LabelVolume& seg, const LabelVolume& ref);

/// DSC alone; empty vs empty counts as 1. Never throws on empty sets.
double dice_score(const LabelVolume& seg, const LabelVolume& ref);

struct MetricReport {
  double dsc = 0.0;
  double jsc = 0.0;
  double pi = 0.0;
  double ri = 0.0;

  /// "dsc,jsc,pi,ri" with six decimals.
  [[nodiscard]] std::string csv_row() const;
};

/// DSC, JSC, precision index |Vs n Vg|/|Vg| and recall index |Vs n Vg|/|Vs|.
/// Both sets empty gives all ones. Throws EmptyReference when only Vg is
/// empty and EmptySegmentation when only Vs is empty.
MetricReport compute_metrics(const LabelVolume& seg, const LabelVolume& ref);
MetricReport metrics_from_counts(const OverlapCounts& counts);

}  // namespace hipseg

#endif  // HIPSEG_DICE_HPP_
