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

#include <png.h>

#include <csetjmp>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synthmeter/error.hpp"

namespace synthmeter {

/// Row-major 8-bit grayscale raster.
class GrayImage {
 public:
  GrayImage() = default;

  GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width_ == 0 || height_ == 0) {
      throw Error(Errc::InvalidArgument, "image dimensions must be positive");
    }
    if (pixels_.size() != width_ * height_) {
      throw Error(Errc::InvalidArgument,
                  "pixel buffer holds " + std::to_string(pixels_.size()) +
                      " values, expected " + std::to_string(width_ * height_));
    }
  }

  /// Constant image.
  GrayImage(std::size_t width, std::size_t height, std::uint8_t value)
      : GrayImage(width, height, std::vector<std::uint8_t>(width * height, value)) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  bool same_shape(const GrayImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Integer luma, rounded: (299 R + 587 G + 114 B + 500) / 1000.
constexpr std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// PGM (P5)

inline GrayImage decode_pgm(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>") {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (bytes[pos] == ' ' || bytes[pos] == '\t' || bytes[pos] == '\n' ||
                 bytes[pos] == '\r') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_space_and_comments();
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9') {
      throw Error(Errc::CorruptFile, name + ": bad PGM header");
    }
    std::size_t value = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (value > (1u << 30)) throw Error(Errc::CorruptFile, name + ": PGM header value too large");
      ++pos;
    }
    return value;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(Errc::UnsupportedFormat, name + ": not a binary PGM (P5)");
  }
  pos = 2;
  const std::size_t width = read_uint();
  const std::size_t height = read_uint();
  const std::size_t maxval = read_uint();
  if (width == 0 || height == 0 || maxval == 0) {
    throw Error(Errc::CorruptFile, name + ": zero PGM dimension or maxval");
  }
  if (maxval > 255) throw Error(Errc::UnsupportedFormat, name + ": 16-bit PGM");
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size()) throw Error(Errc::CorruptFile, name + ": missing PGM raster");
  ++pos;
  const std::size_t count = width * height;
  if (bytes.size() - pos < count) throw Error(Errc::CorruptFile, name + ": truncated PGM raster");
  std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
  for (auto p : pixels) {
    if (p > maxval) throw Error(Errc::CorruptFile, name + ": pixel exceeds PGM maxval");
  }
  return GrayImage(width, height, std::move(pixels));
}

inline std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels().data()), img.size());
  return out;
}

inline void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  const std::string data = encode_pgm(img);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::WriteFailure, path.string());
}

// ---------------------------------------------------------------------------
// PNG via libpng. The setjmp frames live in small helpers that hold only
// trivially destructible locals; owning objects stay in the callers.

namespace detail {

struct PngMemoryReader {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* reader = static_cast<PngMemoryReader*>(png_get_io_ptr(png));
  if (reader->bytes.size() - reader->offset < count) png_error(png, "unexpected end of data");
  std::memcpy(out, reader->bytes.data() + reader->offset, count);
  reader->offset += count;
}

inline void png_write_to_string(png_structp png, png_bytep data, png_size_t count) {
  static_cast<std::string*>(png_get_io_ptr(png))->append(reinterpret_cast<const char*>(data), count);
}

inline void png_flush_noop(png_structp) {}

[[noreturn]] inline void png_error_longjmp(png_structp png, png_const_charp) {
  png_longjmp(png, 1);
}

inline void png_warning_ignore(png_structp, png_const_charp) {}

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

class PngReadHandle {
 public:
  PngReadHandle() {
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_longjmp,
                                  png_warning_ignore);
    if (png_ != nullptr) info_ = png_create_info_struct(png_);
    if (png_ == nullptr || info_ == nullptr) {
      throw Error(Errc::InvariantViolation, "libpng allocation failed");
    }
  }
  ~PngReadHandle() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReadHandle(const PngReadHandle&) = delete;
  PngReadHandle& operator=(const PngReadHandle&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

 private:
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

inline bool png_read_header(png_structp png, png_infop info, PngMemoryReader* reader, PngHeader* out) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, reader, png_read_from_memory);
  png_read_info(png, info);
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  out->color_type = png_get_color_type(png, info);
  return true;
}

inline bool png_read_rows(png_structp png, png_infop info, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  return true;
}

inline bool png_write_all(png_structp png, png_infop info, std::string* sink, png_uint_32 width,
                          png_uint_32 height, int bit_depth, int color_type, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, sink, png_write_to_string, png_flush_noop);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

}  // namespace detail

inline bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

/// Decodes an 8-bit grayscale or RGB PNG. RGB is reduced with `luma`.
inline GrayImage decode_png(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>") {
  if (!is_png(bytes)) throw Error(Errc::UnsupportedFormat, name + ": not a PNG");
  detail::PngReadHandle handle;
  detail::PngMemoryReader reader{bytes, 0};
  detail::PngHeader header;
  if (!detail::png_read_header(handle.png(), handle.info(), &reader, &header)) {
    throw Error(Errc::CorruptFile, name + ": unreadable PNG header");
  }
  if (header.bit_depth != 8) {
    throw Error(Errc::UnsupportedFormat, name + ": PNG bit depth " + std::to_string(header.bit_depth));
  }
  std::size_t channels = 0;
  if (header.color_type == PNG_COLOR_TYPE_GRAY) {
    channels = 1;
  } else if (header.color_type == PNG_COLOR_TYPE_RGB) {
    channels = 3;
  } else {
    throw Error(Errc::UnsupportedFormat,
                name + ": PNG color type " + std::to_string(header.color_type) + " (need gray or RGB)");
  }
  const std::size_t width = header.width;
  const std::size_t height = header.height;
  std::vector<std::uint8_t> raw(width * height * channels);
  std::vector<png_bytep> rows(height);
  for (std::size_t y = 0; y < height; ++y) rows[y] = raw.data() + y * width * channels;
  if (!detail::png_read_rows(handle.png(), handle.info(), rows.data())) {
    throw Error(Errc::CorruptFile, name + ": corrupt PNG data");
  }
  if (channels == 1) return GrayImage(width, height, std::move(raw));
  std::vector<std::uint8_t> gray(width * height);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
  }
  return GrayImage(width, height, std::move(gray));
}

/// Encodes raw samples as PNG. `samples` is row-major, `channels` per pixel,
/// 16-bit samples big-endian as PNG stores them.
inline std::string encode_png_samples(std::size_t width, std::size_t height, int channels, int bit_depth,
                                      std::span<const std::uint8_t> samples) {
  const int color_type = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  const std::size_t row_bytes = width * static_cast<std::size_t>(channels) * (bit_depth == 16 ? 2 : 1);
  if (samples.size() != row_bytes * height) throw Error(Errc::InvalidArgument, "PNG sample buffer size");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_error_longjmp,
                                            detail::png_warning_ignore);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  std::string out;
  std::vector<png_bytep> rows(height);
  for (std::size_t y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(samples.data() + y * row_bytes);
  }
  const bool ok = info != nullptr &&
                  detail::png_write_all(png, info, &out, static_cast<png_uint_32>(width),
                                        static_cast<png_uint_32>(height), bit_depth, color_type, rows.data());
  png_destroy_write_struct(&png, &info);
  if (!ok) throw Error(Errc::WriteFailure, "PNG encoding failed");
  return out;
}

inline void write_png(const GrayImage& img, const std::filesystem::path& path) {
  const std::string data = encode_png_samples(img.width(), img.height(), 1, 8, img.pixels());
  std::ofstream out(path, std::ios::binary);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::WriteFailure, path.string());
}

/// Loads a PNG (8-bit gray or RGB) or binary PGM, chosen by file signature.
inline GrayImage load_gray_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (is_png(bytes)) return decode_png(bytes, path.string());
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes, path.string());
  throw Error(Errc::UnsupportedFormat, path.string() + ": expected PNG or PGM (P5)");
}

}  // namespace synthmeter
