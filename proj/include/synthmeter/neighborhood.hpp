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

// Exact k-nearest-neighbour banding of synthetic images against a real
// corpus, in Hamming distance over latent code maps.
//
// For each real image r_i let d1_i and dk_i be the distances to its 1st and
// k-th nearest other real image. A synthetic image s at distance D from r_i
// falls in r_i's
//   copy band      if D <  d1_i,
//   real band      if d1_i <= D <= dk_i,
//   non-real band  if D >  dk_i.
// s is private (p = 1) unless it is in some copy band; it is faithful (f = 1)
// if it is in some copy or real band; it is privately faithful (fp = 1) if it
// is in some real band and no copy band.
//
// All distances are integer counts, so every result is independent of thread
// count and evaluation order.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthmeter/codemap.hpp"
#include "synthmeter/error.hpp"
#include "synthmeter/parallel.hpp"

namespace synthmeter {

namespace detail {

inline constexpr std::size_t kHammingBlock = 256;

// Written as a branch-free reduction so the compiler vectorizes it.
inline std::size_t count_mismatches(const Code* a, const Code* b, std::size_t n) noexcept {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += static_cast<std::size_t>(a[i] != b[i]);
  return count;
}

inline void require_same_shape(const CodeMap& a, const CodeMap& b) {
  if (!a.same_shape(b)) {
    throw Error(Errc::ShapeMismatch,
                std::to_string(a.latent_width()) + "x" + std::to_string(a.latent_height()) + "/Q" +
                    std::to_string(a.q()) + " vs " + std::to_string(b.latent_width()) + "x" +
                    std::to_string(b.latent_height()) + "/Q" + std::to_string(b.q()));
  }
}

}  // namespace detail

/// Number of cells whose codes differ.
inline std::size_t hamming(const CodeMap& a, const CodeMap& b) {
  detail::require_same_shape(a, b);
  return detail::count_mismatches(a.codes().data(), b.codes().data(), a.cell_count());
}

/// hamming(a, b) if it is <= bound, nullopt otherwise. Stops scanning as soon
/// as the running count passes the bound.
inline std::optional<std::size_t> hamming_bounded(const CodeMap& a, const CodeMap& b, std::size_t bound) {
  detail::require_same_shape(a, b);
  const Code* pa = a.codes().data();
  const Code* pb = b.codes().data();
  const std::size_t n = a.cell_count();
  std::size_t count = 0;
  for (std::size_t start = 0; start < n; start += detail::kHammingBlock) {
    const std::size_t len = std::min(detail::kHammingBlock, n - start);
    count += detail::count_mismatches(pa + start, pb + start, len);
    if (count > bound) return std::nullopt;
  }
  return count;
}

struct NeighborProfile {
  std::size_t real_index = 0;
  std::size_t d1 = 0;  // distance to the nearest other real image
  std::size_t dk = 0;  // distance to the k-th nearest other real image
  std::size_t k = 0;

  friend bool operator==(const NeighborProfile&, const NeighborProfile&) = default;
};

enum class Band { Copy, RealBand, NonReal };

/// Band of a synthetic image at distance `distance` from the profiled real.
constexpr Band band_of(std::size_t distance, const NeighborProfile& profile) noexcept {
  if (distance < profile.d1) return Band::Copy;
  if (distance <= profile.dk) return Band::RealBand;
  return Band::NonReal;
}

struct SyntheticFlags {
  std::size_t synthetic_index = 0;
  bool in_any_copy = false;
  bool in_any_real_band = false;

  /// Privacy indicator: 0 iff the image copies some real image.
  int p() const noexcept { return in_any_copy ? 0 : 1; }
  /// Fidelity indicator: 1 iff the image lies in some copy or real band.
  int f() const noexcept { return (in_any_copy || in_any_real_band) ? 1 : 0; }
  /// Privacy-adjusted fidelity: 1 iff in some real band and no copy band.
  int fp() const noexcept { return (!in_any_copy && in_any_real_band) ? 1 : 0; }

  friend bool operator==(const SyntheticFlags&, const SyntheticFlags&) = default;
};

inline void require_uniform_shape(std::span<const CodeMap> maps, const char* what) {
  for (std::size_t i = 1; i < maps.size(); ++i) {
    if (!maps[i].same_shape(maps[0])) {
      throw Error(Errc::ShapeMismatch, std::string(what) + " " + std::to_string(i) + " differs from " + what + " 0");
    }
  }
}

/// Profiles every real image against the other M - 1. Requires M > k.
inline std::vector<NeighborProfile> build_neighbor_profiles(std::span<const CodeMap> reals, std::size_t k,
                                                            std::size_t workers = 1) {
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  const std::size_t m = reals.size();
  if (m < k + 1) {
    throw Error(Errc::TooFewReals, "need more than k=" + std::to_string(k) + " real images, have " + std::to_string(m));
  }
  require_uniform_shape(reals, "real map");

  // Upper triangle of the distance matrix, row-parallel; mirrored afterwards.
  std::vector<std::uint32_t> dist(m * m, 0);
  const std::size_t cells = reals[0].cell_count();
  parallel_for(m, workers, [&](std::size_t i) {
    const Code* a = reals[i].codes().data();
    for (std::size_t j = i + 1; j < m; ++j) {
      dist[i * m + j] =
          static_cast<std::uint32_t>(detail::count_mismatches(a, reals[j].codes().data(), cells));
    }
  });
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) dist[j * m + i] = dist[i * m + j];
  }

  std::vector<NeighborProfile> profiles(m);
  parallel_for(m, workers, [&](std::size_t i) {
    std::vector<std::uint32_t> row;
    row.reserve(m - 1);
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) row.push_back(dist[i * m + j]);
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    const std::uint32_t dk = row[k - 1];
    const std::uint32_t d1 = *std::min_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k));
    profiles[i] = NeighborProfile{i, d1, dk, k};
  });
  return profiles;
}

enum class Pruning { EarlyExit, Off };

/// Bands one synthetic image against every real image and aggregates flags.
inline SyntheticFlags classify_synthetic(const CodeMap& synthetic, std::span<const CodeMap> reals,
                                         std::span<const NeighborProfile> profiles,
                                         Pruning pruning = Pruning::EarlyExit, std::size_t synthetic_index = 0) {
  if (profiles.size() != reals.size()) {
    throw Error(Errc::ProfileMismatch, std::to_string(profiles.size()) + " profiles for " +
                                           std::to_string(reals.size()) + " real images");
  }
  SyntheticFlags flags;
  flags.synthetic_index = synthetic_index;
  for (std::size_t i = 0; i < reals.size(); ++i) {
    const NeighborProfile& profile = profiles[i];
    if (profile.real_index != i) {
      throw Error(Errc::ProfileMismatch, "profile " + std::to_string(i) + " belongs to real " +
                                             std::to_string(profile.real_index));
    }
    std::optional<std::size_t> distance;
    if (pruning == Pruning::EarlyExit) {
      distance = hamming_bounded(synthetic, reals[i], profile.dk);
    } else {
      distance = hamming(synthetic, reals[i]);
    }
    if (!distance) continue;  // beyond dk: non-real for this real image
    switch (band_of(*distance, profile)) {
      case Band::Copy: flags.in_any_copy = true; break;
      case Band::RealBand: flags.in_any_real_band = true; break;
      case Band::NonReal: break;
    }
    if (pruning == Pruning::EarlyExit && flags.in_any_copy && flags.in_any_real_band) break;
  }
  return flags;
}

/// classify_synthetic over a whole synthetic set, parallel over images.
inline std::vector<SyntheticFlags> classify_all(std::span<const CodeMap> synthetics, std::span<const CodeMap> reals,
                                                std::span<const NeighborProfile> profiles, std::size_t workers = 1,
                                                Pruning pruning = Pruning::EarlyExit) {
  std::vector<SyntheticFlags> flags(synthetics.size());
  parallel_for(synthetics.size(), workers, [&](std::size_t j) {
    flags[j] = classify_synthetic(synthetics[j], reals, profiles, pruning, j);
  });
  return flags;
}

}  // namespace synthmeter
