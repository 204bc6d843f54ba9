// Copyright 2026 The synthmeter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synthmeter/error.hpp"
#include "synthmeter/image.hpp"

namespace synthmeter {

using Code = std::uint16_t;

inline constexpr std::uint32_t kMinCodebookSize = 2;
inline constexpr std::uint32_t kMaxCodebookSize = 65536;

/// A latent_width x latent_height grid of Q-way categorical codes, row-major.
class CodeMap {
 public:
  CodeMap() = default;

  CodeMap(std::size_t latent_width, std::size_t latent_height, std::uint32_t q, std::vector<Code> codes)
      : width_(latent_width), height_(latent_height), q_(q), codes_(std::move(codes)) {
    if (q_ < kMinCodebookSize || q_ > kMaxCodebookSize) {
      throw Error(Errc::InvalidQ, "Q=" + std::to_string(q_) + " outside [2, 65536]");
    }
    if (width_ == 0 || height_ == 0) throw Error(Errc::InvalidArgument, "latent dimensions must be positive");
    if (codes_.size() != width_ * height_) {
      throw Error(Errc::InvalidArgument, "code buffer holds " + std::to_string(codes_.size()) +
                                             " values, expected " + std::to_string(width_ * height_));
    }
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      if (codes_[i] >= q_) {
        throw Error(Errc::CodeOutOfRange,
                    "code " + std::to_string(codes_[i]) + " at cell " + std::to_string(i) + " >= Q=" + std::to_string(q_));
      }
    }
  }

  std::size_t latent_width() const noexcept { return width_; }
  std::size_t latent_height() const noexcept { return height_; }
  std::uint32_t q() const noexcept { return q_; }
  std::size_t cell_count() const noexcept { return codes_.size(); }
  std::span<const Code> codes() const noexcept { return codes_; }
  Code at(std::size_t x, std::size_t y) const { return codes_[y * width_ + x]; }

  bool same_shape(const CodeMap& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && q_ == other.q_;
  }

  /// Bytes per code in the SMCM encoding.
  std::size_t code_bytes() const noexcept { return q_ <= 256 ? 1 : 2; }

  friend bool operator==(const CodeMap&, const CodeMap&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::uint32_t q_ = 0;
  std::vector<Code> codes_;
};

// SMCM layout: "SMCM" | version u16 | Q u16 | height u16 | width u16 | 6 zero
// bytes | codes. All integers little-endian. Q = 65536 is stored as 0.
inline constexpr std::size_t kSmcmHeaderSize = 16;
inline constexpr std::uint16_t kSmcmVersion = 1;

namespace detail {
inline void put_u16(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFFu));
  out.push_back(static_cast<char>((v >> 8) & 0xFFu));
}
inline std::uint32_t get_u16(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return static_cast<std::uint32_t>(bytes[offset]) | (static_cast<std::uint32_t>(bytes[offset + 1]) << 8);
}
}  // namespace detail

inline std::string encode_codemap(const CodeMap& map) {
  if (map.latent_width() > 0xFFFF || map.latent_height() > 0xFFFF) {
    throw Error(Errc::InvalidArgument, "latent dimensions exceed 65535");
  }
  std::string out = "SMCM";
  detail::put_u16(out, kSmcmVersion);
  detail::put_u16(out, map.q() & 0xFFFFu);
  detail::put_u16(out, static_cast<std::uint32_t>(map.latent_height()));
  detail::put_u16(out, static_cast<std::uint32_t>(map.latent_width()));
  out.append(kSmcmHeaderSize - out.size(), '\0');  // reserved
  out.reserve(kSmcmHeaderSize + map.cell_count() * map.code_bytes());
  if (map.code_bytes() == 1) {
    for (Code c : map.codes()) out.push_back(static_cast<char>(c));
  } else {
    for (Code c : map.codes()) detail::put_u16(out, c);
  }
  return out;
}

inline CodeMap decode_codemap(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>") {
  if (bytes.size() < 4 || bytes[0] != 'S' || bytes[1] != 'M' || bytes[2] != 'C' || bytes[3] != 'M') {
    throw Error(Errc::BadMagic, name);
  }
  if (bytes.size() < kSmcmHeaderSize) throw Error(Errc::TruncatedFile, name + ": short header");
  const std::uint32_t version = detail::get_u16(bytes, 4);
  if (version != kSmcmVersion) {
    throw Error(Errc::VersionMismatch, name + ": version " + std::to_string(version));
  }
  std::uint32_t q = detail::get_u16(bytes, 6);
  if (q == 0) q = kMaxCodebookSize;
  const std::size_t height = detail::get_u16(bytes, 8);
  const std::size_t width = detail::get_u16(bytes, 10);
  if (q < kMinCodebookSize) throw Error(Errc::InvalidQ, name + ": Q=" + std::to_string(q));
  if (width == 0 || height == 0) throw Error(Errc::CorruptFile, name + ": zero latent dimension");
  const std::size_t per_code = q <= 256 ? 1 : 2;
  const std::size_t expected = kSmcmHeaderSize + width * height * per_code;
  if (bytes.size() < expected) throw Error(Errc::TruncatedFile, name + ": short code payload");
  if (bytes.size() > expected) throw Error(Errc::CorruptFile, name + ": trailing bytes after codes");

  std::vector<Code> codes(width * height);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const std::size_t offset = kSmcmHeaderSize + i * per_code;
    const std::uint32_t c = per_code == 1 ? bytes[offset] : detail::get_u16(bytes, offset);
    if (c >= q) {
      throw Error(Errc::CodeOutOfRange, name + ": code " + std::to_string(c) + " at cell " + std::to_string(i));
    }
    codes[i] = static_cast<Code>(c);
  }
  return CodeMap(width, height, q, std::move(codes));
}

inline void write_codemap(const CodeMap& map, const std::filesystem::path& path) {
  const std::string data = encode_codemap(map);
  std::ofstream out(path, std::ios::binary);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::WriteFailure, path.string());
}

inline CodeMap read_codemap(const std::filesystem::path& path) {
  return decode_codemap(read_file_bytes(path), path.string());
}

}  // namespace synthmeter
