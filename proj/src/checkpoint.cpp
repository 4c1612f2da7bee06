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

#include <zlib.h>

#include "binary_io.hpp"
#include "hipseg/fcn.hpp"

namespace hipseg {

namespace {

constexpr std::string_view kMagic = "FCK1";

std::uint32_t checksum(std::span<const char> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<char> serialize_checkpoint(const FcnModel& model) {
  detail::ByteWriter out;
  const auto& c = model.config();
  out.put_bytes(kMagic);
  out.put_u32(kCheckpointVersion);
  out.put_u32(static_cast<std::uint32_t>(c.levels));
  out.put_u32(static_cast<std::uint32_t>(c.base_channels));
  out.put_u32(static_cast<std::uint32_t>(c.convs_per_level));
  out.put_u32(static_cast<std::uint32_t>(c.input_channels));
  out.put_u32(static_cast<std::uint32_t>(c.output_channels));
  out.put_u64(c.seed);
  out.put_u32(static_cast<std::uint32_t>(model.parameters().size()));
  for (const auto& p : model.parameters()) {
    out.put_u32(static_cast<std::uint32_t>(p.name.size()));
    out.put_bytes(p.name);
    out.put_u32(static_cast<std::uint32_t>(p.value.rank()));
    for (auto e : p.value.shape()) out.put_u32(static_cast<std::uint32_t>(e));
    out.put_f32s(p.value.data());
  }
  auto bytes = out.bytes();
  detail::ByteWriter tail;
  tail.put_u32(checksum(bytes));
  bytes.insert(bytes.end(), tail.bytes().begin(), tail.bytes().end());
  return bytes;
}

FcnModel deserialize_checkpoint(std::span<const char> bytes) {
  if (bytes.size() < kMagic.size() + 8 ||
      std::string_view(bytes.data(), kMagic.size()) != kMagic) {
    throw CorruptCheckpoint("not an FCK1 checkpoint");
  }
  detail::ByteReader<CorruptCheckpoint> in(bytes);
  in.take(kMagic.size());
  if (auto version = in.u32(); version != kCheckpointVersion) {
    throw VersionMismatch("checkpoint version " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  }
  auto body = bytes.first(bytes.size() - 4);
  detail::ByteReader<CorruptCheckpoint> crc_in(bytes.last(4));
  if (crc_in.u32() != checksum(body)) throw CorruptCheckpoint("checkpoint CRC32 mismatch");

  NetworkConfig config;
  config.levels = static_cast<int>(in.u32());
  config.base_channels = static_cast<int>(in.u32());
  config.convs_per_level = static_cast<int>(in.u32());
  config.input_channels = static_cast<int>(in.u32());
  config.output_channels = static_cast<int>(in.u32());
  config.seed = in.u64();
  try {
    config.validate();
  } catch (const InvalidConfig& e) {
    throw CorruptCheckpoint(std::string("checkpoint config is invalid: ") + e.what());
  }

  FcnModel model(config);
  auto& params = model.parameters();
  if (in.u32() != params.size()) throw CorruptCheckpoint("parameter count does not match config");
  for (auto& p : params) {
    auto name = in.take(in.u32());
    if (name != p.name) {
      throw CorruptCheckpoint("expected parameter " + p.name + ", found " + std::string(name));
    }
    auto rank = in.u32();
    if (rank != p.value.rank()) throw CorruptCheckpoint("rank mismatch for " + p.name);
    for (auto e : p.value.shape()) {
      if (in.u32() != static_cast<std::uint32_t>(e)) {
        throw CorruptCheckpoint("shape mismatch for " + p.name);
      }
    }
    in.f32s(p.value.data());
  }
  if (in.remaining() != 4) throw CorruptCheckpoint("trailing bytes after parameters");
  return model;
}

void save_checkpoint(const FcnModel& model, const std::filesystem::path& path) {
  detail::write_file(path, serialize_checkpoint(model));
}

FcnModel load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(detail::read_file(path));
}

}  // namespace hipseg
