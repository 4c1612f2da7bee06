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

#include "hipseg/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hipseg/errors.hpp"

namespace hipseg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename N>
N parse_number(const std::string& key, const std::string& text) {
  N v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw InvalidConfig("bad value for " + key + ": " + text);
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw InvalidConfig("bad boolean for " + key + ": " + text);
}

Dims3 parse_dims(const std::string& key, const std::string& text) {
  Dims3 d;
  char sep1 = 0, sep2 = 0;
  std::istringstream in(text);
  if (!(in >> d.w >> sep1 >> d.h >> sep2 >> d.d) || sep1 != 'x' || sep2 != 'x' ||
      in.peek() != EOF) {
    throw InvalidConfig("dims for " + key + " must look like 32x32x32, got " + text);
  }
  return d;
}

std::string format_dims(const Dims3& d) {
  return std::to_string(d.w) + "x" + std::to_string(d.h) + "x" + std::to_string(d.d);
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

template <typename N, typename Member>
Field number_field(Member member) {
  return {[member](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_number<N>(k, v);
          },
          [member](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<N>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["levels"] = {[](auto& c, auto& k, auto& v) { c.network.levels = parse_number<int>(k, v); },
                   [](auto& c) { return std::to_string(c.network.levels); }};
    t["base_channels"] = {
        [](auto& c, auto& k, auto& v) { c.network.base_channels = parse_number<int>(k, v); },
        [](auto& c) { return std::to_string(c.network.base_channels); }};
    t["convs_per_level"] = {
        [](auto& c, auto& k, auto& v) { c.network.convs_per_level = parse_number<int>(k, v); },
        [](auto& c) { return std::to_string(c.network.convs_per_level); }};
    t["proposal_dims"] = {
        [](auto& c, auto& k, auto& v) { c.proposal_dims = parse_dims(k, v); },
        [](auto& c) { return format_dims(c.proposal_dims); }};
    t["crop_dims"] = {[](auto& c, auto& k, auto& v) { c.crop_dims = parse_dims(k, v); },
                      [](auto& c) { return format_dims(c.crop_dims); }};
    t["alpha"] = {[](auto& c, auto& k, auto& v) { c.mask.alpha = parse_number<double>(k, v); },
                  [](auto& c) { return format_double(c.mask.alpha); }};
    t["beta"] = {[](auto& c, auto& k, auto& v) { c.mask.beta = parse_number<double>(k, v); },
                 [](auto& c) { return format_double(c.mask.beta); }};
    t["binarize_threshold"] = {
        [](auto& c, auto& k, auto& v) { c.mask.binarize_threshold = parse_number<double>(k, v); },
        [](auto& c) { return format_double(c.mask.binarize_threshold); }};
    t["soft_mask"] = {[](auto& c, auto& k, auto& v) { c.mask.soft = parse_bool(k, v); },
                      [](auto& c) { return std::string(c.mask.soft ? "true" : "false"); }};
    t["epsilon"] = number_field<double>(&PipelineConfig::epsilon);
    t["localize_binarized"] = {
        [](auto& c, auto& k, auto& v) { c.localize_binarized = parse_bool(k, v); },
        [](auto& c) { return std::string(c.localize_binarized ? "true" : "false"); }};
    t["output_prior"] = number_field<double>(&PipelineConfig::output_prior);
    t["optimizer"] = {[](auto& c, auto&, auto& v) {
                        if (v == "adam") {
                          c.optimizer.kind = OptimizerKind::adam;
                        } else if (v == "sgd") {
                          c.optimizer.kind = OptimizerKind::sgd;
                        } else {
                          throw InvalidConfig("optimizer must be adam or sgd, got " + v);
                        }
                      },
                      [](auto& c) {
                        return std::string(c.optimizer.kind == OptimizerKind::adam ? "adam"
                                                                                   : "sgd");
                      }};
    t["learning_rate"] = {
        [](auto& c, auto& k, auto& v) { c.optimizer.learning_rate = parse_number<double>(k, v); },
        [](auto& c) { return format_double(c.optimizer.learning_rate); }};
    t["momentum"] = {
        [](auto& c, auto& k, auto& v) { c.optimizer.momentum = parse_number<double>(k, v); },
        [](auto& c) { return format_double(c.optimizer.momentum); }};
    t["beta1"] = {
        [](auto& c, auto& k, auto& v) { c.optimizer.beta1 = parse_number<double>(k, v); },
        [](auto& c) { return format_double(c.optimizer.beta1); }};
    t["beta2"] = {
        [](auto& c, auto& k, auto& v) { c.optimizer.beta2 = parse_number<double>(k, v); },
        [](auto& c) { return format_double(c.optimizer.beta2); }};
    t["adam_epsilon"] = {
        [](auto& c, auto& k, auto& v) { c.optimizer.epsilon = parse_number<double>(k, v); },
        [](auto& c) { return format_double(c.optimizer.epsilon); }};
    t["proposal_iterations"] = number_field<int>(&PipelineConfig::proposal_iterations);
    t["segmentation_iterations"] = number_field<int>(&PipelineConfig::segmentation_iterations);
    t["batch_size"] = number_field<int>(&PipelineConfig::batch_size);
    t["checkpoint_interval"] = number_field<int>(&PipelineConfig::checkpoint_interval);
    t["seed"] = number_field<std::uint64_t>(&PipelineConfig::seed);
    t["folds"] = number_field<int>(&PipelineConfig::folds);
    t["jobs"] = number_field<int>(&PipelineConfig::jobs);
    t["side"] = {[](auto& c, auto&, auto& v) { c.side = parse_side(v); },
                 [](auto& c) { return std::string(to_string(c.side)); }};
    t["label_downsample"] = {
        [](auto& c, auto&, auto& v) {
          if (v == "trilinear") {
            c.label_downsample = LabelDownsample::trilinear;
          } else if (v == "nearest") {
            c.label_downsample = LabelDownsample::nearest;
          } else {
            throw InvalidConfig("label_downsample must be trilinear or nearest, got " + v);
          }
        },
        [](auto& c) {
          return std::string(c.label_downsample == LabelDownsample::trilinear ? "trilinear"
                                                                              : "nearest");
        }};
    return t;
  }();
  return table;
}

}  // namespace

void PipelineConfig::validate() const {
  network.validate();
  mask.validate();
  optimizer.validate();
  auto positive = [](const Dims3& d) { return d.w > 0 && d.h > 0 && d.d > 0; };
  if (!positive(proposal_dims) || !positive(crop_dims)) {
    throw InvalidConfig("proposal_dims and crop_dims must be positive");
  }
  network.validate_input(proposal_dims);
  network.validate_input(crop_dims);
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InvalidConfig("epsilon must be finite and >= 0");
  }
  if (proposal_iterations < 0 || segmentation_iterations < 0) {
    throw InvalidConfig("iteration counts must be >= 0");
  }
  if (!(output_prior >= 0.0 && output_prior < 1.0)) {
    throw InvalidConfig("output_prior must lie in [0, 1)");
  }
  if (batch_size < 1) throw InvalidConfig("batch_size must be positive");
  if (checkpoint_interval < 1) throw InvalidConfig("checkpoint_interval must be positive");
  if (folds < 2) throw InvalidConfig("folds must be at least 2");
  if (jobs < 1) throw InvalidConfig("jobs must be positive");
}

NetworkConfig PipelineConfig::proposal_network() const {
  NetworkConfig c = network;
  c.seed = derive_seed(seed, "proposal-network");
  return c;
}

NetworkConfig PipelineConfig::segmentation_network() const {
  NetworkConfig c = network;
  c.seed = derive_seed(seed, "segmentation-network");
  return c;
}

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw InvalidConfig("unknown config key: " + key);
  it->second.set(config, key, value);
}

void apply_override(PipelineConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidConfig("override must be key=value: " + assignment);
  apply_setting(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.find('=') == std::string::npos) {
      throw InvalidConfig("config line " + std::to_string(line_no) + " is not key = value");
    }
    apply_override(config, line);
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_config(const PipelineConfig& config) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(config) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& entry : fields()) keys.push_back(entry.first);
  return keys;
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& stream) {
  // FNV-1a over the stream name, folded into the seed and finished with a
  // splitmix64 round.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : stream) h = (h ^ c) * 1099511628211ULL;
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hipseg
