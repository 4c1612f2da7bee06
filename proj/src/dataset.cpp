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

#include "hipseg/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hipseg/errors.hpp"
#include "hipseg/volume_io.hpp"

namespace hipseg {

int Manifest::fold_count() const {
  int folds = 0;
  for (const auto& e : entries) folds = std::max(folds, e.fold + 1);
  return folds;
}

std::vector<std::size_t> Manifest::fold_members(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].fold == fold) out.push_back(i);
  }
  return out;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot write manifest " + path.string());
  for (const auto& c : manifest.comments) out << '#' << c << '\n';
  for (const auto& e : manifest.entries) {
    out << e.id << '\t' << e.volume << '\t' << e.left << '\t' << e.right << '\t' << e.fold << '\n';
  }
  if (!out) throw IoFailure("write failed for manifest " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open manifest " + path.string());
  Manifest m;
  m.root = path.parent_path();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      m.comments.push_back(line.substr(1));
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 5) {
      throw DataError("manifest line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected 5");
    }
    ManifestEntry e{fields[0], fields[1], fields[2], fields[3], 0};
    try {
      std::size_t used = 0;
      e.fold = std::stoi(fields[4], &used);
      if (used != fields[4].size() || e.fold < 0) throw std::invalid_argument("fold");
    } catch (const std::exception&) {
      throw DataError("manifest line " + std::to_string(line_no) + " has a bad fold: " + fields[4]);
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

Side parse_side(const std::string& text) {
  if (text == "left") return Side::left;
  if (text == "right") return Side::right;
  throw InvalidConfig("side must be left or right, got " + text);
}

const char* to_string(Side side) { return side == Side::left ? "left" : "right"; }

std::vector<Sample> load_samples(const Manifest& manifest, Side side,
                                 const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> picks = indices;
  if (picks.empty()) {
    picks.resize(manifest.entries.size());
    for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = i;
  }
  std::vector<Sample> out;
  out.reserve(picks.size());
  for (auto i : picks) {
    if (i >= manifest.entries.size()) throw DataError("manifest index out of range");
    const auto& e = manifest.entries[i];
    auto volume = load_volume(manifest.root / e.volume);
    auto label = load_native_label(manifest.root / (side == Side::left ? e.left : e.right));
    if (label.dims() != volume.dims()) {
      throw DataError("label of " + e.id + " has dims " + to_string(label.dims()) +
                      " but its volume has " + to_string(volume.dims()));
    }
    out.push_back({e.id, std::move(volume), std::move(label)});
  }
  return out;
}

}  // namespace hipseg
