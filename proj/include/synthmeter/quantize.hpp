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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "synthmeter/codemap.hpp"
#include "synthmeter/error.hpp"
#include "synthmeter/image.hpp"

namespace synthmeter {

struct LatentShape {
  std::size_t width = 64;
  std::size_t height = 64;

  friend bool operator==(const LatentShape&, const LatentShape&) = default;
};

/// Deterministic stand-in for a learned vector quantizer.
///
/// The image is cut into a latent_width x latent_height grid of blocks whose
/// edges sit at floor(i * W / latent_width) (same for rows). Each block's mean
/// intensity is computed with integer arithmetic and rounded half up; the
/// code is floor(mean * Q / 256), clamped to Q - 1.
inline CodeMap quantize_blockwise(const GrayImage& img, LatentShape latent, std::uint32_t q) {
  if (q < kMinCodebookSize || q > kMaxCodebookSize) {
    throw Error(Errc::InvalidQ, "Q=" + std::to_string(q) + " outside [2, 65536]");
  }
  if (latent.width == 0 || latent.height == 0) {
    throw Error(Errc::InvalidArgument, "latent dimensions must be positive");
  }
  if (latent.width > img.width() || latent.height > img.height()) {
    throw Error(Errc::LatentLargerThanImage,
                std::to_string(latent.width) + "x" + std::to_string(latent.height) + " latent for " +
                    std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
  }

  std::vector<std::size_t> x_edges(latent.width + 1);
  for (std::size_t i = 0; i <= latent.width; ++i) x_edges[i] = i * img.width() / latent.width;
  std::vector<std::size_t> y_edges(latent.height + 1);
  for (std::size_t j = 0; j <= latent.height; ++j) y_edges[j] = j * img.height() / latent.height;

  // Column sums per block row, then collapse along x.
  std::vector<Code> codes(latent.width * latent.height);
  std::vector<std::uint64_t> column_sums(img.width());
  const auto pixels = img.pixels();
  for (std::size_t j = 0; j < latent.height; ++j) {
    std::fill(column_sums.begin(), column_sums.end(), 0);
    for (std::size_t y = y_edges[j]; y < y_edges[j + 1]; ++y) {
      const std::uint8_t* row = pixels.data() + y * img.width();
      for (std::size_t x = 0; x < img.width(); ++x) column_sums[x] += row[x];
    }
    const std::uint64_t rows = y_edges[j + 1] - y_edges[j];
    for (std::size_t i = 0; i < latent.width; ++i) {
      std::uint64_t sum = 0;
      for (std::size_t x = x_edges[i]; x < x_edges[i + 1]; ++x) sum += column_sums[x];
      const std::uint64_t count = rows * (x_edges[i + 1] - x_edges[i]);
      const std::uint64_t mean = (2 * sum + count) / (2 * count);
      const std::uint64_t code = std::min<std::uint64_t>(mean * q / 256, q - 1);
      codes[j * latent.width + i] = static_cast<Code>(code);
    }
  }
  return CodeMap(latent.width, latent.height, q, std::move(codes));
}

}  // namespace synthmeter
