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

#include <zlib.h>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synthmeter/error.hpp"
#include "synthmeter/image.hpp"
#include "synthmeter/neighborhood.hpp"
#include "synthmeter/stats.hpp"

namespace synthmeter {

/// Identifier of the compressed-size proxy echoed in reports.
inline constexpr std::string_view kSizeProxy = "deflate-v1";
inline constexpr int kDeflateLevel = 9;

// ---------------------------------------------------------------------------
// Privacy and fidelity

struct FlagCounts {
  std::size_t n = 0;
  std::size_t copy = 0;            // in some copy band
  std::size_t real_band_only = 0;  // in some real band, no copy band
  std::size_t non_real = 0;        // in no band at all

  std::size_t faithful() const noexcept { return copy + real_band_only; }
};

inline FlagCounts count_flags(std::span<const SyntheticFlags> flags) {
  FlagCounts c;
  c.n = flags.size();
  for (const auto& f : flags) {
    if (f.in_any_copy) {
      ++c.copy;
    } else if (f.in_any_real_band) {
      ++c.real_band_only;
    } else {
      ++c.non_real;
    }
  }
  return c;
}

/// P = mean of p_j.
inline double privacy_score(std::span<const SyntheticFlags> flags) {
  if (flags.empty()) throw Error(Errc::EmptySyntheticSet, "privacy score of an empty synthetic set");
  const FlagCounts c = count_flags(flags);
  return static_cast<double>(c.n - c.copy) / static_cast<double>(c.n);
}

struct FidelityScores {
  double fidelity = 0.0;          // F
  double fidelity_private = 0.0;  // F^p
};

/// F = mean of f_j, F^p = mean of fp_j.
inline FidelityScores fidelity_scores(std::span<const SyntheticFlags> flags) {
  if (flags.empty()) throw Error(Errc::EmptySyntheticSet, "fidelity scores of an empty synthetic set");
  const FlagCounts c = count_flags(flags);
  const double n = static_cast<double>(c.n);
  return {static_cast<double>(c.faithful()) / n, static_cast<double>(c.real_band_only) / n};
}

// ---------------------------------------------------------------------------
// Variety

/// Exact per-pixel sums; partial accumulators over disjoint subsets merge
/// into the same result in any order.
class MeanAccumulator {
 public:
  void add(const GrayImage& img) {
    if (count_ == 0) {
      width_ = img.width();
      height_ = img.height();
      sums_.assign(img.size(), 0);
    } else if (img.width() != width_ || img.height() != height_) {
      throw Error(Errc::ShapeMismatch, std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                           " image in a " + std::to_string(width_) + "x" +
                                           std::to_string(height_) + " group");
    }
    const auto px = img.pixels();
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += px[i];
    ++count_;
  }

  void merge(const MeanAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    if (other.width_ != width_ || other.height_ != height_) throw Error(Errc::ShapeMismatch, "accumulator shapes differ");
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += other.sums_[i];
    count_ += other.count_;
  }

  std::size_t count() const noexcept { return count_; }

  /// Per-pixel sum / count, rounded half up.
  GrayImage mean() const {
    if (count_ == 0) throw Error(Errc::EmptyGroup, "mean of an empty group");
    std::vector<std::uint8_t> px(sums_.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
      px[i] = static_cast<std::uint8_t>((2 * sums_[i] + count_) / (2 * count_));
    }
    return GrayImage(width_, height_, std::move(px));
  }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> sums_;
};

inline GrayImage mean_image(std::span<const GrayImage> group) {
  if (group.empty()) throw Error(Errc::EmptyGroup, "mean of an empty group");
  MeanAccumulator acc;
  for (const auto& img : group) acc.add(img);
  return acc.mean();
}

/// Deflate (zlib, level 9) size of the raw row-major pixel buffer.
inline std::size_t compressed_size(const GrayImage& img) {
  if (img.empty()) throw Error(Errc::InvalidArgument, "compressed size of an empty image");
  uLongf dest_len = compressBound(static_cast<uLong>(img.size()));
  std::vector<Bytef> dest(dest_len);
  const int rc = compress2(dest.data(), &dest_len, img.pixels().data(), static_cast<uLong>(img.size()), kDeflateLevel);
  ensure(rc == Z_OK, "zlib compress2 failed");
  return static_cast<std::size_t>(dest_len);
}

enum class VarietyStatus {
  Normalized,
  SingleGroupNormalization,  // one group: raw size only
  DegenerateRange,           // all raw sizes equal
};

inline std::string_view variety_status_name(VarietyStatus s) {
  switch (s) {
    case VarietyStatus::Normalized: return "normalized";
    case VarietyStatus::SingleGroupNormalization: return "SingleGroupNormalization";
    case VarietyStatus::DegenerateRange: return "DegenerateRange";
  }
  return "?";
}

struct VarietyScore {
  std::string label;
  std::size_t raw = 0;                // compressed bytes of the group mean image
  std::optional<double> score;        // 1 - minmax-normalized raw; nullopt when undefined
};

struct VarietyResult {
  std::vector<VarietyScore> groups;
  VarietyStatus status = VarietyStatus::Normalized;
};

/// Normalizes raw sizes across the cohort: score = 1 - (raw - min)/(max - min).
inline VarietyResult variety_from_raw(std::vector<std::pair<std::string, std::size_t>> raw_sizes) {
  if (raw_sizes.empty()) throw Error(Errc::EmptyGroup, "no groups to score");
  VarietyResult out;
  std::vector<double> values;
  for (auto& [label, raw] : raw_sizes) {
    out.groups.push_back(VarietyScore{std::move(label), raw, std::nullopt});
    values.push_back(static_cast<double>(raw));
  }
  if (values.size() < 2) {
    out.status = VarietyStatus::SingleGroupNormalization;
    return out;
  }
  try {
    const auto normalized = stats::minmax_normalize(values);
    for (std::size_t g = 0; g < normalized.size(); ++g) out.groups[g].score = 1.0 - normalized[g];
    out.status = VarietyStatus::Normalized;
  } catch (const Error& e) {
    if (e.code() != Errc::DegenerateRange) throw;
    out.status = VarietyStatus::DegenerateRange;
  }
  return out;
}

inline VarietyResult variety_scores(std::span<const std::pair<std::string, std::vector<GrayImage>>> groups) {
  std::vector<std::pair<std::string, std::size_t>> raw;
  for (const auto& [label, images] : groups) {
    if (images.empty()) throw Error(Errc::EmptyGroup, "group '" + label + "' has no images");
    raw.emplace_back(label, compressed_size(mean_image(images)));
  }
  return variety_from_raw(std::move(raw));
}

// ---------------------------------------------------------------------------

struct GroupScores {
  std::string group;
  std::size_t n = 0;
  double privacy = 0.0;           // P
  double fidelity = 0.0;          // F
  double fidelity_private = 0.0;  // F^p
  std::size_t copy_count = 0;
  std::size_t real_band_count = 0;  // real band and no copy band
  std::size_t non_real_count = 0;
  std::size_t variety_raw = 0;
  std::optional<double> variety_score;
};

/// Privacy/fidelity half of GroupScores; variety is filled in by the caller
/// once the whole cohort is known.
inline GroupScores score_group(std::string label, std::span<const SyntheticFlags> flags) {
  const FlagCounts c = count_flags(flags);
  GroupScores s;
  s.group = std::move(label);
  s.n = c.n;
  s.privacy = privacy_score(flags);
  const FidelityScores fs = fidelity_scores(flags);
  s.fidelity = fs.fidelity;
  s.fidelity_private = fs.fidelity_private;
  s.copy_count = c.copy;
  s.real_band_count = c.real_band_only;
  s.non_real_count = c.non_real;
  ensure(s.copy_count + s.real_band_count + s.non_real_count == s.n, "band counts do not partition the group");
  ensure(s.fidelity_private <= s.fidelity && s.fidelity_private <= s.privacy, "F^p exceeds F or P");
  return s;
}

}  // namespace synthmeter
