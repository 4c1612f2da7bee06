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
#include "hipseg/fcn.hpp"
#include "oracles.hpp"

using namespace hipseg;

namespace {

// Layer recipe enumerated independently: per level, convs then a down conv;
// per decoder level an up conv then convs; then the head.
std::size_t enumerate_parameters(int levels, int base, int convs) {
  std::size_t n = 0;
  auto layer = [&](std::size_t in, std::size_t out, std::size_t taps) { n += in * out * taps + out; };
  std::size_t in = 1;
  for (int l = 0; l < levels; ++l) {
    const std::size_t ch = static_cast<std::size_t>(base) << l;
    for (int c = 0; c < convs; ++c, in = ch) layer(in, ch, 27);
    layer(ch, 2 * ch, 8);
    in = 2 * ch;
  }
  for (int l = levels - 1; l >= 0; --l) {
    const std::size_t ch = static_cast<std::size_t>(base) << l;
    layer(in, ch, 8);
    in = 2 * ch;
    for (int c = 0; c < convs; ++c, in = ch) layer(in, ch, 27);
  }
  layer(in, 1, 27);
  return n;
}

}  // namespace

TEST_CASE("parameter list follows the layer recipe") {
  NetworkConfig c{1, 4, 1};
  auto m = build_network(c, Dims3{8, 8, 8});
  std::vector<std::string> weights;
  for (const auto& p : m.parameters()) {
    if (p.name.ends_with(".weight")) weights.push_back(p.name);
  }
  CHECK(weights == std::vector<std::string>{"enc0.conv0.weight", "enc0.down.weight",
                                            "dec0.up.weight", "dec0.conv0.weight",
                                            "head.weight"});
  for (auto [levels, base, convs] :
       {std::tuple{1, 4, 1}, std::tuple{2, 3, 2}, std::tuple{3, 8, 2}, std::tuple{4, 2, 3}}) {
    NetworkConfig cfg{levels, base, convs};
    CHECK(parameter_count(cfg) == enumerate_parameters(levels, base, convs));
    CHECK(FcnModel(cfg).scalar_count() == parameter_count(cfg));
  }
}

TEST_CASE("build_network validates the configuration") {
  CHECK_THROWS_AS(build_network(NetworkConfig{3, 4, 1}, Dims3{4, 4, 4}), InvalidConfig);
  CHECK_NOTHROW(build_network(NetworkConfig{3, 4, 1}, Dims3{8, 8, 8}));
  CHECK_THROWS_AS(build_network(NetworkConfig{0, 4, 1}), InvalidConfig);
  CHECK_THROWS_AS(build_network(NetworkConfig{2, 0, 1}), InvalidConfig);
}

TEST_CASE("initialization is seeded and scaled by fan-in") {
  NetworkConfig c{2, 8, 2};
  c.seed = 42;
  FcnModel a(c), b(c);
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    CHECK(a.parameters()[i].value.storage() == b.parameters()[i].value.storage());
  }
  c.seed = 43;
  FcnModel other(c);
  CHECK(other.parameters()[0].value.storage() != a.parameters()[0].value.storage());

  // enc1.conv1 has fan-in 16 * 27.
  const auto& w = a.parameters()[2 * 4].value;
  REQUIRE(a.parameters()[2 * 4].name == "enc1.conv1.weight");
  double sq = 0.0;
  for (float v : w.data()) sq += double{v} * v;
  const double std_dev = std::sqrt(sq / static_cast<double>(w.size()));
  CHECK(std_dev == doctest::Approx(std::sqrt(2.0 / (16 * 27))).epsilon(0.05));
  for (float v : a.parameters()[2 * 4 + 1].value.data()) CHECK(v == 0.0f);
}

TEST_CASE("forward keeps spatial dims and stays inside (0, 1)") {
  std::mt19937_64 rng(2);
  FcnModel m(NetworkConfig{2, 4, 1});
  auto x = oracle::random_tensor<float>({2, 1, 8, 12, 4}, rng, 0, 1);
  auto y = m.forward(x);
  CHECK(y.shape() == Shape{2, 1, 8, 12, 4});
  for (float v : y.data()) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
  CHECK(m.predict(x).storage() == y.storage());
  CHECK_THROWS_AS(m.forward(Tensor({1, 1, 6, 8, 8})), ShapeMismatch);
  CHECK_THROWS_AS(m.forward(Tensor({1, 2, 8, 8, 8})), ShapeMismatch);

  m.fill_parameters(0.0f);
  const auto constant = m.forward(x);
  for (float v : constant.data()) CHECK(v == 0.5f);
}

TEST_CASE("backward requires a recorded forward pass") {
  FcnModel m(NetworkConfig{1, 2, 1});
  Tensor x({1, 1, 4, 4, 4}, 0.5f);
  CHECK_THROWS_AS(m.backward(Tensor({1, 1, 4, 4, 4})), StateError);
  m.forward(x, false);
  CHECK_THROWS_AS(m.backward(Tensor({1, 1, 4, 4, 4})), StateError);
  m.forward(x, true);
  CHECK_THROWS_AS(m.backward(Tensor({1, 1, 4, 4, 2})), ShapeMismatch);
  auto zero = m.backward(Tensor({1, 1, 4, 4, 4}));
  for (const auto& g : zero)
    for (float v : g.data()) CHECK(v == 0.0f);
  auto first = m.backward(Tensor({1, 1, 4, 4, 4}, 0.25f));
  auto second = m.backward(Tensor({1, 1, 4, 4, 4}, 0.25f));
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i].storage() == second[i].storage());
}

TEST_CASE("whole-network Dice gradient matches finite differences") {
  std::mt19937_64 rng(21);
  for (auto cfg : {NetworkConfig{1, 2, 1}, NetworkConfig{2, 2, 2}}) {
    cfg.seed = 5;
    BasicFcn<double> net(cfg);
    // Bias the biases away from zero so relu kinks are rarely hit.
    for (auto& p : net.parameters()) {
      if (p.name.ends_with(".bias"))
        for (auto& v : p.value.data()) v = 0.1;
    }
    const std::int64_t e = cfg.levels == 1 ? 4 : 8;
    auto x = oracle::random_tensor<double>({1, 1, e, e, e}, rng, 0, 1);
    TensorD target(x.shape());
    std::bernoulli_distribution on(0.3);
    for (auto& v : target.data()) v = on(rng) ? 1.0 : 0.0;

    auto loss = [&] { return dice_loss_and_grad(net.forward(x), target).loss; };
    auto out = net.forward(x, true);
    auto grads = net.backward(dice_loss_and_grad(out, target).grad);
    std::size_t checked = 0, failed = 0;
    for (std::size_t p = 0; p < grads.size(); ++p) {
      auto values = net.parameters()[p].value.data();
      std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
      for (int probe = 0; probe < 6; ++probe) {
        const auto i = pick(rng);
        const double fd = oracle::central_difference(loss, values[i], 1e-6);
        ++checked;
        if (oracle::relative_error(grads[p][i], fd, 1e-5) >= 1e-2) {
          ++failed;
          INFO(net.parameters()[p].name << "[" << i << "] analytic " << grads[p][i]
                                        << " numeric " << fd);
          CHECK(false);
        }
      }
    }
    CHECK(failed == 0);
    CHECK(checked > 40);
  }
}

TEST_CASE("checkpoints round-trip bit-exactly and detect damage") {
  auto dir = oracle::temp_dir("fcn");
  NetworkConfig c{2, 3, 2};
  c.seed = 99;
  FcnModel m(c);
  save_checkpoint(m, dir / "m.fck");
  auto back = load_checkpoint(dir / "m.fck");
  CHECK(back.config().seed == 99);
  CHECK(back.config().levels == 2);
  REQUIRE(back.parameters().size() == m.parameters().size());
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    CHECK(back.parameters()[i].name == m.parameters()[i].name);
    CHECK(std::memcmp(back.parameters()[i].value.data().data(),
                      m.parameters()[i].value.data().data(),
                      m.parameters()[i].value.size() * sizeof(float)) == 0);
  }
  std::mt19937_64 rng(4);
  auto x = oracle::random_tensor<float>({1, 1, 8, 8, 8}, rng, 0, 1);
  CHECK(back.forward(x).storage() == m.forward(x).storage());

  auto bytes = serialize_checkpoint(m);
  CHECK_THROWS_AS(deserialize_checkpoint(std::span<const char>(bytes).first(bytes.size() - 9)),
                  CorruptCheckpoint);
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(deserialize_checkpoint(flipped), CorruptCheckpoint);
  auto versioned = bytes;
  versioned[4] = 7;
  CHECK_THROWS_AS(deserialize_checkpoint(versioned), VersionMismatch);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad_magic), CorruptCheckpoint);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.fck"), IoFailure);
}
