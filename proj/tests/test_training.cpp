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

// Training runs at the default desk configuration. Slow; kept apart from the
// unit tests.
#include "doctest.h"
#include "hipseg/config.hpp"
#include "hipseg/dice.hpp"
#include "hipseg/phantom.hpp"
#include "hipseg/pipeline.hpp"

using namespace hipseg;

namespace {

Sample phantom_sample(const PhantomSpec& spec, int index) {
  auto p = generate_phantom(spec, index);
  return {"p" + std::to_string(index), p.volume, p.left};
}

// One proposal and one segmentation network on eight phantoms, shared by the
// cases below.
struct Trained {
  std::vector<Sample> validation;
  TrainResult proposal;
  TrainResult segmentation;
  PipelineConfig config;
};

const Trained& trained() {
  static const Trained t = [] {
    Trained r;
    PhantomSpec spec;
    spec.seed = 31;
    std::vector<Sample> train;
    for (int i = 0; i < 8; ++i) train.push_back(phantom_sample(spec, i));
    for (int i = 8; i < 10; ++i) r.validation.push_back(phantom_sample(spec, i));
    r.config.checkpoint_interval = r.config.segmentation_iterations / 6;
    r.proposal = train_proposal(train, r.validation, r.config);
    r.segmentation =
        train_segmentation(train, r.validation, r.proposal.final_model(), r.config);
    return r;
  }();
  return t;
}

}  // namespace

TEST_CASE("the proposal network overfits one phantom") {
  PipelineConfig c;
  c.proposal_iterations = 500;
  const auto sample = phantom_sample(PhantomSpec{}, 0);
  auto r = train_proposal({sample}, {}, c);
  const auto ex = proposal_example(sample, c);
  const double dice = dice_coefficient(r.final_model().predict(ex.input), ex.target);
  MESSAGE("proposal training Dice after 500 steps: " << dice);
  CHECK(dice > 0.95);
}

TEST_CASE("the segmentation network overfits one cropped phantom") {
  PipelineConfig c;
  c.proposal_iterations = 500;
  c.segmentation_iterations = 500;
  const auto sample = phantom_sample(PhantomSpec{}, 0);
  auto proposal = train_proposal({sample}, {}, c).final_model();
  auto seg = train_segmentation({sample}, {}, proposal, c).final_model();
  const auto ex = segmentation_example(sample, infer_proposal(proposal, sample.volume,
                                                              c.proposal_dims),
                                       c, true);
  const double dice = dice_coefficient(seg.predict(ex.tensors.input), ex.tensors.target);
  MESSAGE("segmentation cropped Dice after 500 steps: " << dice);
  CHECK(dice > 0.95);
}

TEST_CASE("trained models segment a noiseless phantom") {
  const auto& t = trained();
  PhantomSpec clean;
  clean.seed = 31;
  clean.noise_std = 0.0;
  for (int i : {8, 9}) {
    const auto sample = phantom_sample(clean, i);
    const auto e = evaluate_sample(t.proposal.final_model(), t.segmentation.final_model(), sample,
                                   t.config);
    MESSAGE("noiseless phantom " << i << " DSC " << e.metrics.dsc);
    CHECK_FALSE(e.failed);
    CHECK(e.metrics.dsc >= 0.85);
  }
}

TEST_CASE("later segmentation checkpoints dominate earlier ones") {
  const auto& t = trained();
  const auto table =
      ablation_grid(t.proposal.checkpoints, t.segmentation.checkpoints, t.validation, t.config);
  MESSAGE("ablation table\n" << table.to_csv());
  // A proposal column counts when its last segmentation checkpoint scores at
  // least as well as its first.
  int dominated = 0;
  for (const auto& row : table.dsc) dominated += row.back() >= row[1];
  const double share = static_cast<double>(dominated) / static_cast<double>(table.dsc.size());
  CHECK(share >= 0.7);
}
