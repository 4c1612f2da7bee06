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

#include "hipseg/optimizer.hpp"

#include <cmath>

#include "hipseg/errors.hpp"

namespace hipseg {

void OptimizerSettings::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidConfig("learning_rate must be positive and finite");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidConfig("momentum must lie in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidConfig("adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw InvalidConfig("adam epsilon must be positive");
}

template <typename T>
void optimizer_step(std::vector<NamedParameter<T>>& params,
                    const std::vector<BasicTensor<T>>& grads, OptimizerState& state,
                    const OptimizerSettings& settings) {
  if (grads.size() != params.size()) {
    throw ShapeMismatch("optimizer got " + std::to_string(grads.size()) + " gradients for " +
                        std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i].value.shape()) {
      throw ShapeMismatch("gradient " + to_string(grads[i].shape()) + " does not match " +
                          params[i].name + " " + to_string(params[i].value.shape()));
    }
  }
  if (state.first.empty()) {
    for (const auto& p : params) {
      state.first.emplace_back(p.value.size(), 0.0);
      if (settings.kind == OptimizerKind::adam) state.second.emplace_back(p.value.size(), 0.0);
    }
  } else if (state.first.size() != params.size()) {
    throw ShapeMismatch("optimizer state was built for a different parameter list");
  }
  ++state.steps;

  const double lr = settings.learning_rate;
  if (settings.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto p = params[i].value.data();
      auto g = grads[i].data();
      auto& v = state.first[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        v[j] = settings.momentum * v[j] - lr * static_cast<double>(g[j]);
        p[j] = static_cast<T>(static_cast<double>(p[j]) + v[j]);
      }
    }
    return;
  }

  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(settings.beta1, t);
  const double c2 = 1.0 - std::pow(settings.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].value.data();
    auto g = grads[i].data();
    auto& m = state.first[i];
    auto& v = state.second[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g[j];
      m[j] = settings.beta1 * m[j] + (1.0 - settings.beta1) * gj;
      v[j] = settings.beta2 * v[j] + (1.0 - settings.beta2) * gj * gj;
      const double step = lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + settings.epsilon);
      p[j] = static_cast<T>(static_cast<double>(p[j]) - step);
    }
  }
}

template void optimizer_step<float>(std::vector<NamedParameter<float>>&,
                                    const std::vector<BasicTensor<float>>&, OptimizerState&,
                                    const OptimizerSettings&);
template void optimizer_step<double>(std::vector<NamedParameter<double>>&,
                                     const std::vector<BasicTensor<double>>&, OptimizerState&,
                                     const OptimizerSettings&);

}  // namespace hipseg
