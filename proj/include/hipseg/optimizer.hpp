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

#ifndef HIPSEG_OPTIMIZER_HPP_
#define HIPSEG_OPTIMIZER_HPP_

#include <cstdint>
#include <vector>

#include "hipseg/fcn.hpp"
#include "hipseg/tensor.hpp"

namespace hipseg {

enum class OptimizerKind { sgd, adam };

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double momentum = 0.9;  // sgd only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// Per-parameter moments, kept in double and created lazily on the first
/// step. For SGD `first` holds the velocity.
struct OptimizerState {
  std::int64_t steps = 0;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
};

/// One update of every parameter from its gradient:
///   sgd:  v = momentum*v - lr*g;  p += v
///   adam: bias-corrected first/second moments, p -= lr*m/(sqrt(v)+eps)
/// Throws ShapeMismatch when the gradient list does not line up.
template <typename T>
void optimizer_step(std::vector<NamedParameter<T>>& params,
                    const std::vector<BasicTensor<T>>& grads, OptimizerState& state,
                    const OptimizerSettings& settings);

}  // namespace hipseg

#endif  // HIPSEG_OPTIMIZER_HPP_
