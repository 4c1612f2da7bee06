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

#ifndef HIPSEG_DATASET_HPP_
#define HIPSEG_DATASET_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "hipseg/volume.hpp"

namespace hipseg {

/// One manifest record; paths are relative to the manifest's directory.
struct ManifestEntry {
  std::string id;
  std::string volume;
  std::string left;
  std::string right;
  int fold = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Tab-separated sample list:
///   id<TAB>volume-path<TAB>left-label-path<TAB>right-label-path<TAB>fold
/// Lines starting with '#' are comments and are kept as the header.
struct Manifest {
  std::filesystem::path root;
  std::vector<std::string> comments;
  std::vector<ManifestEntry> entries;

  [[nodiscard]] int fold_count() const;
  [[nodiscard]] std::vector<std::size_t> fold_members(int fold) const;

  friend bool operator==(const Manifest& a, const Manifest& b) {
    return a.comments == b.comments && a.entries == b.entries;
  }
};

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
/// Throws DataError on malformed records and IoFailure when unreadable.
Manifest read_manifest(const std::filesystem::path& path);

enum class Side { left, right };
Side parse_side(const std::string& text);
const char* to_string(Side side);

/// A volume with the label of one side.
struct Sample {
  std::string id;
  Volume volume;
  LabelVolume label;
};

/// Loads the listed entries (all entries when `indices` is empty) for one
/// side. Throws DataError when a label does not match its volume.
std::vector<Sample> load_samples(const Manifest& manifest, Side side,
                                 const std::vector<std::size_t>& indices = {});

}  // namespace hipseg

#endif  // HIPSEG_DATASET_HPP_
