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

// Seeded synthetic "scan" corpus for demos and the trade-off harness: a
// shared piecewise-flat anatomy plus a per-image oriented texture inside a
// central window, so images are alike but not identical.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "synthmeter/image.hpp"
#include "synthmeter/random.hpp"

namespace synthmeter {

struct TextureCorpusOptions {
  std::size_t count = 100;
  std::size_t size = 64;
  std::uint64_t seed = 17;
  double window_fraction = 0.5;  // share of the image area that carries per-image texture
  double texture_amplitude = 20.0;
  int anatomy_levels = 6;
};

inline std::vector<GrayImage> make_texture_corpus(const TextureCorpusOptions& opt) {
  PortableRng rng(opt.seed);
  const std::size_t s = opt.size;
  const double two_pi = 2.0 * std::numbers::pi;

  auto add_wave = [&](std::vector<double>& field, double amplitude, double fmin, double fmax) {
    const double f = rng.uniform(fmin, fmax);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double phase = rng.uniform(0.0, two_pi);
    const double cx = std::cos(theta);
    const double cy = std::sin(theta);
    for (std::size_t y = 0; y < s; ++y) {
      for (std::size_t x = 0; x < s; ++x) {
        const double u = (static_cast<double>(x) * cx + static_cast<double>(y) * cy) / static_cast<double>(s);
        field[y * s + x] += amplitude * std::sin(two_pi * f * u + phase);
      }
    }
  };

  std::vector<double> base(s * s, 0.0);
  for (int c = 0; c < 3; ++c) add_wave(base, 1.0, 1.0, 6.0);
  const auto [lo, hi] = std::minmax_element(base.begin(), base.end());
  const double range = std::max(*hi - *lo, 1e-12);
  const double lo_value = *lo;
  const int levels = std::max(2, opt.anatomy_levels);
  const int step = 128 / (levels - 1);
  std::vector<int> anatomy(s * s);
  for (std::size_t i = 0; i < s * s; ++i) {
    const double t = (base[i] - lo_value) / range;
    const int level = std::min(static_cast<int>(std::floor(t * levels)), levels - 1);
    anatomy[i] = 64 + level * step;
  }

  const auto w = static_cast<std::size_t>(std::lround(static_cast<double>(s) * std::sqrt(opt.window_fraction)));
  const std::size_t o = (s - std::min(w, s)) / 2;
  std::vector<GrayImage> out;
  out.reserve(opt.count);
  for (std::size_t n = 0; n < opt.count; ++n) {
    std::vector<double> texture(s * s, 0.0);
    for (int c = 0; c < 3; ++c) add_wave(texture, rng.uniform(0.5, 1.0), 2.0, 10.0);
    std::vector<std::uint8_t> px(s * s);
    for (std::size_t y = 0; y < s; ++y) {
      for (std::size_t x = 0; x < s; ++x) {
        int v = anatomy[y * s + x];
        if (y >= o && y < o + w && x >= o && x < o + w) {
          v += static_cast<int>(std::floor(opt.texture_amplitude * texture[y * s + x] + 0.5));
        }
        px[y * s + x] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
    out.emplace_back(s, s, std::move(px));
  }
  return out;
}

}  // namespace synthmeter
