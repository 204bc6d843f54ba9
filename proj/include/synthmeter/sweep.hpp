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

// Fidelity/variety trade-off sweep over synthetic groups derived from a real
// corpus.
//
// For collapse level alpha a seeded subset of round(alpha * M) images is
// replaced by the collapse target, the real image closest (L1) to the corpus
// mean image. Every other image gets uniform pixel noise of +-noise * 255.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "synthmeter/error.hpp"
#include "synthmeter/image.hpp"
#include "synthmeter/json_canonical.hpp"
#include "synthmeter/manifest.hpp"
#include "synthmeter/metrics.hpp"
#include "synthmeter/neighborhood.hpp"
#include "synthmeter/parallel.hpp"
#include "synthmeter/pipeline.hpp"
#include "synthmeter/quantize.hpp"
#include "synthmeter/random.hpp"
#include "synthmeter/stats.hpp"

namespace synthmeter {

struct SweepConfig {
  std::vector<double> alphas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> noise_levels{0.02};
  std::uint64_t seed = 17;
  std::size_t k = 5;
  std::uint32_t q = 256;
  LatentShape latent{64, 64};
  std::size_t workers = 1;
};

struct SweepRow {
  double alpha = 0.0;
  double noise = 0.0;
  std::size_t collapsed = 0;
  GroupScores scores;
};

struct SweepReport {
  SweepConfig config;
  std::string real_manifest;  // file name
  std::size_t real_count = 0;
  std::string collapse_target;
  std::vector<SweepRow> rows;
  VarietyStatus variety_status = VarietyStatus::Normalized;
  std::optional<stats::Correlation> fidelity_variety;
  std::string correlation_error;
};

inline std::string sweep_label(double alpha, double noise) {
  return "alpha" + format_number(alpha) + "_noise" + format_number(noise);
}

namespace detail {

struct NamedImage {
  std::string id;
  GrayImage image;
};

inline std::size_t collapse_target_index(std::span<const NamedImage> reals) {
  MeanAccumulator acc;
  for (const auto& r : reals) acc.add(r.image);
  const GrayImage mean = acc.mean();
  std::size_t best = 0;
  std::uint64_t best_distance = UINT64_MAX;
  for (std::size_t i = 0; i < reals.size(); ++i) {
    const auto a = reals[i].image.pixels();
    const auto b = mean.pixels();
    std::uint64_t d = 0;
    for (std::size_t p = 0; p < a.size(); ++p) d += static_cast<std::uint64_t>(std::abs(int{a[p]} - int{b[p]}));
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return best;
}

inline GrayImage add_uniform_noise(const GrayImage& img, double noise, PortableRng& rng) {
  std::vector<std::uint8_t> px(img.size());
  const auto src = img.pixels();
  const double amplitude = noise * 255.0;
  for (std::size_t p = 0; p < px.size(); ++p) {
    const double u = 2.0 * rng.uniform01() - 1.0;
    const double v = std::floor(static_cast<double>(src[p]) + u * amplitude + 0.5);
    px[p] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return GrayImage(img.width(), img.height(), std::move(px));
}

}  // namespace detail

/// Builds one synthetic group per (noise, alpha) pair and scores them all
/// against the real corpus in a single cohort.
inline SweepReport sweep_tradeoff(const std::filesystem::path& real_manifest, const SweepConfig& config) {
  if (config.alphas.size() < 2) throw Error(Errc::InvalidArgument, "sweep needs at least 2 alphas");
  for (double a : config.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw Error(Errc::InvalidArgument, "alpha " + format_number(a) + " outside [0,1]");
  }
  if (config.noise_levels.empty()) throw Error(Errc::InvalidArgument, "sweep needs at least one noise level");
  for (double n : config.noise_levels) {
    if (!(n >= 0.0 && n <= 1.0)) throw Error(Errc::InvalidArgument, "noise " + format_number(n) + " outside [0,1]");
  }
  const std::size_t workers = std::max<std::size_t>(1, config.workers);

  const DatasetManifest manifest = load_manifest(real_manifest);
  const std::string ctx = "real corpus '" + real_manifest.filename().string() + "'";
  std::vector<detail::NamedImage> reals(manifest.size());
  detail::with_context(ctx, [&] {
    parallel_for(manifest.size(), workers, [&](std::size_t i) {
      const auto& e = manifest.entries[i];
      reals[i] = {e.image_id, detail::with_context("image '" + e.image_id + "'", [&] { return load_gray_image(e.path); })};
    });
  });
  // Sorted by id so the sweep does not depend on manifest row order.
  std::sort(reals.begin(), reals.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  const std::size_t m = reals.size();
  if (m == 0) throw Error(Errc::TooFewReals, ctx + ": manifest has no entries");
  for (const auto& r : reals) {
    if (!r.image.same_shape(reals.front().image)) {
      throw Error(Errc::ShapeMismatch, ctx + ": image '" + r.id + "' differs in size from '" + reals.front().id + "'");
    }
  }

  std::vector<CodeMap> real_codes(m);
  parallel_for(m, workers, [&](std::size_t i) { real_codes[i] = quantize_blockwise(reals[i].image, config.latent, config.q); });
  const auto profiles = detail::with_context(ctx, [&] { return build_neighbor_profiles(real_codes, config.k, workers); });

  const std::size_t target = detail::collapse_target_index(reals);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  {
    PortableRng rng(config.seed, 0);
    for (std::size_t i = m; i-- > 1;) std::swap(order[i], order[rng.below(i + 1)]);
  }

  SweepReport report;
  report.config = config;
  report.real_manifest = real_manifest.filename().string();
  report.real_count = m;
  report.collapse_target = reals[target].id;

  std::vector<std::pair<std::string, std::size_t>> raw_sizes;
  for (std::size_t ni = 0; ni < config.noise_levels.size(); ++ni) {
    const double noise = config.noise_levels[ni];
    for (double alpha : config.alphas) {
      const auto collapsed = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(m) + 0.5));
      std::vector<char> is_collapsed(m, 0);
      for (std::size_t t = 0; t < collapsed; ++t) is_collapsed[order[t]] = 1;

      std::vector<GrayImage> synthetic(m);
      std::vector<CodeMap> codes(m);
      parallel_for(m, workers, [&](std::size_t j) {
        if (is_collapsed[j]) {
          synthetic[j] = reals[target].image;
        } else {
          PortableRng rng(config.seed, 1 + ni * m + j);
          synthetic[j] = detail::add_uniform_noise(reals[j].image, noise, rng);
        }
        codes[j] = quantize_blockwise(synthetic[j], config.latent, config.q);
      });
      const auto flags = classify_all(codes, real_codes, profiles, workers);
      SweepRow row;
      row.alpha = alpha;
      row.noise = noise;
      row.collapsed = collapsed;
      row.scores = score_group(sweep_label(alpha, noise), flags);
      row.scores.variety_raw = compressed_size(mean_image(synthetic));
      raw_sizes.emplace_back(row.scores.group, row.scores.variety_raw);
      report.rows.push_back(std::move(row));
    }
  }

  const VarietyResult variety = variety_from_raw(raw_sizes);
  report.variety_status = variety.status;
  for (std::size_t g = 0; g < report.rows.size(); ++g) report.rows[g].scores.variety_score = variety.groups[g].score;

  if (report.rows.size() < 3) {
    report.correlation_error = "TooFewGroups";
  } else if (variety.status != VarietyStatus::Normalized) {
    report.correlation_error = "VarietyUndefined";
  } else {
    std::vector<double> f;
    std::vector<double> v;
    for (const auto& r : report.rows) {
      f.push_back(r.scores.fidelity);
      v.push_back(*r.scores.variety_score);
    }
    try {
      report.fidelity_variety = stats::pearson(f, v);
    } catch (const Error& e) {
      report.correlation_error = std::string(errc_name(e.code()));
    }
  }
  return report;
}

inline Json to_json(const SweepReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    const auto& s = r.scores;
    rows.push_back({{"alpha", r.alpha},
                    {"collapsed", r.collapsed},
                    {"copy_count", s.copy_count},
                    {"fidelity", s.fidelity},
                    {"fidelity_private", s.fidelity_private},
                    {"group", s.group},
                    {"n", s.n},
                    {"noise", r.noise},
                    {"non_real_count", s.non_real_count},
                    {"privacy", s.privacy},
                    {"real_band_count", s.real_band_count},
                    {"variety_raw", s.variety_raw},
                    {"variety_score", optional_number(s.variety_score)}});
  }
  const auto& c = report.config;
  return Json{{"config",
               {{"alphas", c.alphas},
                {"collapse_target", report.collapse_target},
                {"k", c.k},
                {"latent", {{"height", c.latent.height}, {"width", c.latent.width}}},
                {"noise_levels", c.noise_levels},
                {"q", c.q},
                {"real_manifest", report.real_manifest},
                {"seed", c.seed}}},
              {"correlation",
               {{"error", report.correlation_error.empty() ? Json(nullptr) : Json(report.correlation_error)},
                {"p_value", report.fidelity_variety ? Json(report.fidelity_variety->p_value) : Json(nullptr)},
                {"r", report.fidelity_variety ? Json(report.fidelity_variety->r) : Json(nullptr)},
                {"x", "fidelity"},
                {"y", "variety_score"}}},
              {"real_count", report.real_count},
              {"rows", rows},
              {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
              {"variety", {{"size_proxy", kSizeProxy}, {"status", variety_status_name(report.variety_status)}}}};
}

/// alpha,noise,group,fidelity,fidelity_private,privacy,variety_raw,variety_score
inline std::string sweep_table_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "alpha,noise,group,fidelity,fidelity_private,privacy,variety_raw,variety_score\n";
  for (const auto& r : report.rows) {
    const auto& s = r.scores;
    out << format_number_exact(r.alpha) << ',' << format_number_exact(r.noise) << ',' << s.group << ','
        << format_number_exact(s.fidelity) << ',' << format_number_exact(s.fidelity_private) << ','
        << format_number_exact(s.privacy) << ',' << s.variety_raw << ','
        << (s.variety_score ? format_number_exact(*s.variety_score) : std::string()) << '\n';
  }
  return out.str();
}

}  // namespace synthmeter
