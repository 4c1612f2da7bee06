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

#include "hipseg/dice.hpp"

#include <cstdio>

namespace hipseg {

namespace {

struct DiceSums {
  double pg = 0.0;
  double pp = 0.0;
  double gg = 0.0;
};

template <typename T>
DiceSums dice_sums(const BasicTensor<T>& p, const BasicTensor<T>& g) {
  if (p.shape() != g.shape()) {
    throw ShapeMismatch("dice operands differ: " + to_string(p.shape()) + " vs " +
                        to_string(g.shape()));
  }
  DiceSums s;
  auto pv = p.data();
  auto gv = g.data();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double a = pv[i];
    const double b = gv[i];
    s.pg += a * b;
    s.pp += a * a;
    s.gg += b * b;
  }
  return s;
}

}  // namespace

template <typename T>
double dice_coefficient(const BasicTensor<T>& p, const BasicTensor<T>& g) {
  auto s = dice_sums(p, g);
  const double denom = s.pp + s.gg;
  return denom == 0.0 ? 1.0 : 2.0 * s.pg / denom;
}

template <typename T>
DiceLoss<T> dice_loss_and_grad(const BasicTensor<T>& p, const BasicTensor<T>& g) {
  auto s = dice_sums(p, g);
  const double denom = s.pp + s.gg;
  DiceLoss<T> out;
  out.grad = BasicTensor<T>(p.shape());
  if (denom == 0.0) {
    out.coefficient = 1.0;
    out.loss = 0.0;
    return out;
  }
  out.coefficient = 2.0 * s.pg / denom;
  out.loss = 1.0 - out.coefficient;
  // dD/dp_j = 2 (g_j S - 2 p_j sum(pg)) / S^2 with S = sum(p^2) + sum(g^2)
  const double inv = 1.0 / (denom * denom);
  auto pv = p.data();
  auto gv = g.data();
  auto dst = out.grad.data();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double dd = 2.0 * (static_cast<double>(gv[i]) * denom - 2.0 * pv[i] * s.pg) * inv;
    dst[i] = static_cast<T>(-dd);
  }
  return out;
}

template double dice_coefficient<float>(const BasicTensor<float>&, const BasicTensor<float>&);
template double dice_coefficient<double>(const BasicTensor<double>&, const BasicTensor<double>&);
template DiceLoss<float> dice_loss_and_grad<float>(const BasicTensor<float>&,
                                                   const BasicTensor<float>&);
template DiceLoss<double> dice_loss_and_grad<double>(const BasicTensor<double>&,
                                                     const BasicTensor<double>&);

OverlapCounts count_overlap(const LabelVolume& seg, const LabelVolume& ref) {
  if (seg.dims() != ref.dims()) {
    throw ShapeMismatch("metric operands differ: " + to_string(seg.dims()) + " vs " +
                        to_string(ref.dims()));
  }
  OverlapCounts c;
  auto s = seg.data();
  auto r = ref.data();
  for (std::size_t i = 0; i < s.size(); ++i) {
    c.segmented += s[i];
    c.reference += r[i];
    c.both += s[i] & r[i];
  }
  return c;
}

double dice_score(const LabelVolume& seg, const LabelVolume& ref) {
  auto c = count_overlap(seg, ref);
  const std::size_t total = c.segmented + c.reference;
  return total == 0 ? 1.0 : 2.0 * static_cast<double>(c.both) / static_cast<double>(total);
}

MetricReport metrics_from_counts(const OverlapCounts& c) {
  if (c.segmented == 0 && c.reference == 0) return {1.0, 1.0, 1.0, 1.0};
  if (c.reference == 0) throw EmptyReference("precision index undefined: reference set is empty");
  if (c.segmented == 0) {
    throw EmptySegmentation("recall index undefined: segmentation set is empty");
  }
  const auto both = static_cast<double>(c.both);
  const auto seg = static_cast<double>(c.segmented);
  const auto ref = static_cast<double>(c.reference);
  MetricReport m;
  m.dsc = 2.0 * both / (seg + ref);
  m.jsc = both / (seg + ref - both);
  m.pi = both / ref;
  m.ri = both / seg;
  return m;
}

MetricReport compute_metrics(const LabelVolume& seg, const LabelVolume& ref) {
  return metrics_from_counts(count_overlap(seg, ref));
}

std::string MetricReport::csv_row() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f", dsc, jsc, pi, ri);
  return buf;
}

}  // namespace hipseg
