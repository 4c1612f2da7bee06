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

#ifndef HIPSEG_SRC_BINARY_IO_HPP_
#define HIPSEG_SRC_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hipseg::detail {

template <typename U>
U byteswap(U v) {
  static_assert(std::is_unsigned_v<U>);
  U out = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out = static_cast<U>((out << 8) | ((v >> (8 * i)) & 0xFF));
  }
  return out;
}

/// Appends little-endian scalars to a byte buffer.
class ByteWriter {
 public:
  void put_bytes(std::string_view bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }
  void put_u32(std::uint32_t v) { put_le(v); }
  void put_u64(std::uint64_t v) { put_le(v); }
  void put_f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
  void put_f32s(std::span<const float> values) {
    if constexpr (std::endian::native == std::endian::little) {
      const auto* p = reinterpret_cast<const char*>(values.data());
      buf_.insert(buf_.end(), p, p + values.size_bytes());
    } else {
      for (float v : values) put_f32(v);
    }
  }

  [[nodiscard]] const std::vector<char>& bytes() const { return buf_; }

 private:
  template <typename U>
  void put_le(U v) {
    if constexpr (std::endian::native == std::endian::big) v = byteswap(v);
    char raw[sizeof(U)];
    std::memcpy(raw, &v, sizeof(U));
    buf_.insert(buf_.end(), raw, raw + sizeof(U));
  }

  std::vector<char> buf_;
};

/// Reads scalars from a byte span; `Err` is thrown on underflow.
template <typename Err>
class ByteReader {
 public:
  explicit ByteReader(std::span<const char> bytes, bool swap = false)
      : bytes_(bytes), swap_(swap) {}

  std::string_view take(std::size_t n) {
    need(n);
    std::string_view out(bytes_.data() + pos_, n);
    pos_ += n;
    return out;
  }
  std::uint16_t u16() { return get<std::uint16_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  void f32s(std::span<float> out) {
    for (auto& v : out) v = f32();
  }

  void seek(std::size_t pos) {
    if (pos > bytes_.size()) throw Err("offset beyond end of data");
    pos_ = pos;
  }
  [[nodiscard]] std::size_t position() const { return pos_; }
  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Err("unexpected end of data");
  }

  template <typename U>
  U get() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    bool want_swap = (std::endian::native == std::endian::big) != swap_;
    return want_swap ? byteswap(v) : v;
  }

  std::span<const char> bytes_;
  std::size_t pos_ = 0;
  bool swap_ = false;
};

/// Whole-file helpers; both throw IoFailure.
std::vector<char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const char> bytes);

}  // namespace hipseg::detail

#endif  // HIPSEG_SRC_BINARY_IO_HPP_
