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

#include <random>

#include "doctest.h"
#include "hipseg/dice.hpp"
#include "hipseg/errors.hpp"
#include "oracles.hpp"

using namespace hipseg;

namespace {

LabelVolume label_from(Dims3 d, const std::vector<int>& on) {
  std::vector<std::uint8_t> bits(d.voxels(), 0);
  for (int i : on) bits[static_cast<std::size_t>(i)] = 1;
  return LabelVolume(d, Spacing3{}, bits);
}

TensorD volume_tensor(const LabelVolume& l) {
  return TensorD(Shape{static_cast<std::int64_t>(l.size())},
                 std::vector<double>(l.data().begin(), l.data().end()));
}

}  // namespace

TEST_CASE("dice coefficient hand values") {
  TensorD p(Shape{3}, std::vector<double>{1, 1, 0}), g(Shape{3}, std::vector<double>{1, 0, 1});
  CHECK(dice_coefficient(p, g) == doctest::Approx(0.5));
  CHECK(dice_coefficient(g, g) == 1.0);
  TensorD a(Shape{4}, std::vector<double>{1, 1, 0, 0}), b(Shape{4}, std::vector<double>{0, 0, 1, 1});
  CHECK(dice_coefficient(a, b) == 0.0);
  CHECK(dice_coefficient(TensorD(Shape{4}), TensorD(Shape{4})) == 1.0);
  CHECK_THROWS_AS(dice_coefficient(TensorD(Shape{3}), TensorD(Shape{4})), ShapeMismatch);

  TensorD half(Shape{1}, 0.5), one(Shape{1}, 1.0);
  auto d = dice_loss_and_grad(half, one);
  CHECK(d.coefficient == doctest::Approx(0.8));
  CHECK(d.loss == doctest::Approx(0.2));
  CHECK(-d.grad[0] == doctest::Approx(0.96));

  auto perfect = dice_loss_and_grad(g, g);
  CHECK(perfect.loss == 0.0);
  CHECK(perfect.grad.all_finite());
  auto empty = dice_loss_and_grad(TensorD(Shape{5}), TensorD(Shape{5}));
  CHECK(empty.loss == 0.0);
  for (double v : empty.grad.data()) CHECK(v == 0.0);
}

TEST_CASE("dice gradient matches finite differences") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> len(1, 40);
  std::bernoulli_distribution on(0.4);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = len(rng);
    auto p = oracle::random_tensor<double>({n}, rng, 0.01, 0.99);
    TensorD g(Shape{n});
    for (auto& v : g.data()) v = on(rng) ? 1.0 : 0.0;
    auto d = dice_loss_and_grad(p, g);
    for (int i = 0; i < n; ++i) {
      const double fd = oracle::central_difference(
          [&] { return 1.0 - dice_coefficient(p, g); }, p.data()[i], 1e-6);
      CHECK(oracle::relative_error(d.grad[i], fd, 1e-8) < 1e-4);
    }
  }
}

TEST_CASE("compute_metrics counted example and edge cases") {
  const Dims3 d{5, 5, 2};
  std::vector<int> seg, ref;
  for (int i = 0; i < 8; ++i) {
    seg.push_back(i);
    ref.push_back(i);
  }
  seg.push_back(20);
  seg.push_back(21);
  for (int i = 30; i < 38; ++i) ref.push_back(i);
  auto m = compute_metrics(label_from(d, seg), label_from(d, ref));
  CHECK(m.dsc == doctest::Approx(16.0 / 26.0));
  CHECK(m.jsc == doctest::Approx(8.0 / 18.0));
  CHECK(m.pi == doctest::Approx(0.5));
  CHECK(m.ri == doctest::Approx(0.8));
  CHECK(m.csv_row() == "0.615385,0.444444,0.500000,0.800000");

  auto same = compute_metrics(label_from(d, ref), label_from(d, ref));
  CHECK(same.dsc == 1.0);
  CHECK(same.jsc == 1.0);
  CHECK(same.pi == 1.0);
  CHECK(same.ri == 1.0);
  auto apart = compute_metrics(label_from(d, {1, 2}), label_from(d, {3, 4}));
  CHECK(apart.dsc == 0.0);
  CHECK(apart.ri == 0.0);

  auto empty = label_from(d, {});
  auto both_empty = compute_metrics(empty, empty);
  CHECK(both_empty.dsc == 1.0);
  CHECK(both_empty.jsc == 1.0);
  CHECK_THROWS_AS(compute_metrics(label_from(d, {1}), empty), EmptyReference);
  CHECK_THROWS_AS(compute_metrics(empty, label_from(d, {1})), EmptySegmentation);
  CHECK(dice_score(empty, label_from(d, {1})) == 0.0);
  CHECK_THROWS_AS(compute_metrics(empty, LabelVolume({5, 5, 3}, Spacing3{})), ShapeMismatch);
}

TEST_CASE("metrics match set counting and satisfy the identities") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> density(0.05, 0.7);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = oracle::random_label({4, 5, 3}, rng, density(rng));
    auto b = oracle::random_label({4, 5, 3}, rng, density(rng));
    if (a.count() == 0 || b.count() == 0) continue;
    auto m = compute_metrics(a, b);
    auto want = oracle::set_metrics(a, b);
    CHECK(m.dsc == doctest::Approx(want.dsc).epsilon(1e-12));
    CHECK(m.jsc == doctest::Approx(want.jsc).epsilon(1e-12));
    CHECK(m.pi == doctest::Approx(want.pi).epsilon(1e-12));
    CHECK(m.ri == doctest::Approx(want.ri).epsilon(1e-12));
    CHECK(std::abs(m.dsc - 2 * m.jsc / (1 + m.jsc)) < 1e-12);
    auto r = compute_metrics(b, a);
    CHECK(r.dsc == m.dsc);
    CHECK(r.jsc == m.jsc);
    CHECK(r.pi == m.ri);
    CHECK(r.ri == m.pi);
    // Soft Dice on binary inputs reduces to the set form.
    CHECK(dice_coefficient(volume_tensor(a), volume_tensor(b)) == doctest::Approx(m.dsc).epsilon(1e-12));
  }
}
