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

// End-to-end evaluation: manifests -> code maps -> neighbour profiles ->
// per-group privacy / fidelity / variety (+ optional utility) -> report.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "synthmeter/codemap.hpp"
#include "synthmeter/csv.hpp"
#include "synthmeter/error.hpp"
#include "synthmeter/image.hpp"
#include "synthmeter/json_canonical.hpp"
#include "synthmeter/manifest.hpp"
#include "synthmeter/metrics.hpp"
#include "synthmeter/neighborhood.hpp"
#include "synthmeter/parallel.hpp"
#include "synthmeter/quantize.hpp"
#include "synthmeter/stats.hpp"
#include "synthmeter/utility.hpp"

namespace synthmeter {

inline constexpr std::string_view kToolName = "synthmeter";
inline constexpr std::string_view kToolVersion = "1.0.0";

enum class CodeSource { BuiltinQuantizer, CodeMapFiles };

inline std::string_view code_source_name(CodeSource s) {
  return s == CodeSource::BuiltinQuantizer ? "builtin" : "codemap-files";
}

struct UtilityLink {
  std::filesystem::path records;
  std::string baseline_run;
  utility::Mode mode = utility::Mode::IntraTask;
};

struct EvalConfig {
  std::filesystem::path real_manifest;
  std::vector<std::filesystem::path> synthetic_manifests;
  std::size_t k = 5;
  std::uint32_t q = 256;
  LatentShape latent{64, 64};
  CodeSource code_source = CodeSource::BuiltinQuantizer;
  std::filesystem::path codes_index;  // image_id,smcm_path; used with CodeMapFiles
  std::size_t workers = 1;
  std::optional<UtilityLink> utility;  // groups whose label names a run get a utility result
  bool include_timing = false;
};

struct GroupResult {
  GroupScores scores;
  std::string manifest;  // file name of the manifest the group came from
  std::optional<utility::UtilityResult> utility;
};

struct CorrelationEntry {
  std::string x;
  std::string y;
  std::optional<stats::Correlation> value;
  std::string error;  // why value is absent
};

struct Timing {
  double load_seconds = 0.0;
  double profile_seconds = 0.0;
  double classify_seconds = 0.0;
  double total_seconds = 0.0;
};

struct MetricReport {
  EvalConfig config;
  std::size_t real_count = 0;
  LatentShape latent;  // effective code geometry
  std::uint32_t q = 0;
  std::vector<GroupResult> groups;
  VarietyStatus variety_status = VarietyStatus::Normalized;
  std::vector<CorrelationEntry> correlations;  // empty with fewer than 3 groups
  std::optional<Timing> timing;
};

// ---------------------------------------------------------------------------

/// Index CSV `image_id,smcm_path`; relative paths resolve against the index's
/// directory.
inline std::map<std::string, std::filesystem::path> load_codes_index(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  if (table.header != std::vector<std::string>{"image_id", "smcm_path"}) {
    throw Error(Errc::MalformedRow, path.string() + ": line 1: header must be 'image_id,smcm_path'");
  }
  std::map<std::string, std::filesystem::path> index;
  for (const auto& row : table.rows) {
    const std::string where = path.string() + ": line " + std::to_string(row.line);
    if (row.fields.size() != 2 || row.fields[0].empty() || row.fields[1].empty()) {
      throw Error(Errc::MalformedRow, where + ": expected 'image_id,smcm_path'");
    }
    const std::filesystem::path p(row.fields[1]);
    if (!index.emplace(row.fields[0], p.is_absolute() ? p : path.parent_path() / p).second) {
      throw Error(Errc::DuplicateId, where + ": " + row.fields[0]);
    }
  }
  return index;
}

inline void write_codes_index(const std::vector<std::pair<std::string, std::string>>& rows,
                              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << "image_id,smcm_path\n";
  for (const auto& [id, file] : rows) out << id << ',' << file << '\n';
  if (!out) throw Error(Errc::WriteFailure, path.string());
}

namespace detail {

template <typename Fn>
auto with_context(const std::string& context, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_context(context);
  }
}

struct SyntheticGroupSpec {
  std::string label;
  std::string manifest;
  std::vector<ManifestEntry> entries;
};

// Each manifest contributes one group per distinct `group` value, in order of
// first appearance. A label already taken by an earlier manifest gets a
// "#<n>" suffix.
inline std::vector<SyntheticGroupSpec> collect_groups(const std::vector<std::filesystem::path>& manifests) {
  std::vector<SyntheticGroupSpec> groups;
  std::map<std::string, std::size_t> label_uses;
  for (const auto& path : manifests) {
    const DatasetManifest m = load_manifest(path);
    if (m.empty()) throw Error(Errc::EmptySyntheticSet, path.string() + ": manifest has no entries");
    std::vector<SyntheticGroupSpec> local;
    for (const auto& e : m.entries) {
      auto it = std::find_if(local.begin(), local.end(), [&](const auto& g) { return g.label == e.group; });
      if (it == local.end()) {
        local.push_back(SyntheticGroupSpec{e.group, path.filename().string(), {}});
        it = std::prev(local.end());
      }
      it->entries.push_back(e);
    }
    for (auto& g : local) {
      const std::size_t uses = ++label_uses[g.label];
      if (uses > 1) g.label += "#" + std::to_string(uses);
      groups.push_back(std::move(g));
    }
  }
  return groups;
}

struct ImageDims {
  std::size_t width = 0;
  std::size_t height = 0;
  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

inline std::string dims_text(ImageDims d) { return std::to_string(d.width) + "x" + std::to_string(d.height); }

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline constexpr std::size_t kLoadChunk = 256;

}  // namespace detail

inline MetricReport run_eval(const EvalConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  if (config.k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  if (config.q < kMinCodebookSize || config.q > kMaxCodebookSize) {
    throw Error(Errc::InvalidQ, "Q=" + std::to_string(config.q));
  }
  if (config.synthetic_manifests.empty()) throw Error(Errc::InvalidArgument, "at least one synthetic manifest is required");
  const std::size_t workers = std::max<std::size_t>(1, config.workers);

  MetricReport report;
  report.config = config;

  const DatasetManifest real = load_manifest(config.real_manifest);
  const auto groups = detail::collect_groups(config.synthetic_manifests);

  std::map<std::string, std::filesystem::path> codes_index;
  if (config.code_source == CodeSource::CodeMapFiles) codes_index = load_codes_index(config.codes_index);

  auto code_for = [&](const ManifestEntry& e, const GrayImage* img) -> CodeMap {
    if (config.code_source == CodeSource::BuiltinQuantizer) return quantize_blockwise(*img, config.latent, config.q);
    const auto it = codes_index.find(e.image_id);
    if (it == codes_index.end()) throw Error(Errc::MissingFile, "no code map listed for '" + e.image_id + "'");
    return read_codemap(it->second);
  };

  std::optional<detail::ImageDims> corpus_dims;
  auto check_dims = [&](const ManifestEntry& e, detail::ImageDims dims, const std::string& where) {
    if (!corpus_dims) {
      corpus_dims = dims;
    } else if (dims != *corpus_dims) {
      throw Error(Errc::ShapeMismatch, where + ": image '" + e.image_id + "' is " + detail::dims_text(dims) +
                                           ", corpus is " + detail::dims_text(*corpus_dims));
    }
  };

  // Real corpus: codes only.
  const std::string real_ctx = "real corpus '" + config.real_manifest.filename().string() + "'";
  const std::size_t m = real.size();
  std::vector<CodeMap> real_codes(m);
  std::vector<detail::ImageDims> real_dims(m);
  detail::with_context(real_ctx, [&] {
    parallel_for(m, workers, [&](std::size_t i) {
      const auto& e = real.entries[i];
      detail::with_context("image '" + e.image_id + "'", [&] {
        if (config.code_source == CodeSource::BuiltinQuantizer) {
          const GrayImage img = load_gray_image(e.path);
          real_dims[i] = {img.width(), img.height()};
          real_codes[i] = code_for(e, &img);
        } else {
          real_codes[i] = code_for(e, nullptr);
        }
      });
    });
    if (config.code_source == CodeSource::BuiltinQuantizer) {
      for (std::size_t i = 0; i < m; ++i) check_dims(real.entries[i], real_dims[i], "real corpus");
    }
    require_uniform_shape(real_codes, "real code map");
  });

  // Synthetic groups: codes plus a running mean image, loaded in chunks.
  std::vector<std::vector<CodeMap>> group_codes(groups.size());
  std::vector<std::size_t> group_raw(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& spec = groups[g];
    detail::with_context("group '" + spec.label + "'", [&] {
      MeanAccumulator acc;
      auto& codes = group_codes[g];
      codes.resize(spec.entries.size());
      for (std::size_t start = 0; start < spec.entries.size(); start += detail::kLoadChunk) {
        const std::size_t len = std::min(detail::kLoadChunk, spec.entries.size() - start);
        std::vector<GrayImage> chunk(len);
        parallel_for(len, workers, [&](std::size_t t) {
          const auto& e = spec.entries[start + t];
          detail::with_context("image '" + e.image_id + "'", [&] {
            chunk[t] = load_gray_image(e.path);
            codes[start + t] = code_for(e, &chunk[t]);
          });
        });
        for (std::size_t t = 0; t < len; ++t) {
          check_dims(spec.entries[start + t], {chunk[t].width(), chunk[t].height()}, "synthetic corpus");
          acc.add(chunk[t]);
        }
      }
      for (const auto& c : codes) {
        if (!c.same_shape(real_codes.front())) {
          throw Error(Errc::ShapeMismatch, "synthetic code geometry differs from the real corpus");
        }
      }
      group_raw[g] = compressed_size(acc.mean());
    });
  }
  const double load_seconds = detail::seconds_since(t_start);

  const auto t_profile = Clock::now();
  const auto profiles =
      detail::with_context(real_ctx, [&] { return build_neighbor_profiles(real_codes, config.k, workers); });
  const double profile_seconds = detail::seconds_since(t_profile);

  const auto t_classify = Clock::now();
  std::vector<std::pair<std::string, std::size_t>> raw_sizes;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto flags = classify_all(group_codes[g], real_codes, profiles, workers);
    GroupResult result;
    result.scores = score_group(groups[g].label, flags);
    result.scores.variety_raw = group_raw[g];
    result.manifest = groups[g].manifest;
    report.groups.push_back(std::move(result));
    raw_sizes.emplace_back(groups[g].label, group_raw[g]);
  }
  const double classify_seconds = detail::seconds_since(t_classify);

  const VarietyResult variety = variety_from_raw(raw_sizes);
  report.variety_status = variety.status;
  for (std::size_t g = 0; g < report.groups.size(); ++g) report.groups[g].scores.variety_score = variety.groups[g].score;

  if (report.groups.size() >= 3) {
    const std::vector<std::pair<std::string, double GroupScores::*>> metrics = {
        {"fidelity", &GroupScores::fidelity},
        {"fidelity_private", &GroupScores::fidelity_private},
        {"privacy", &GroupScores::privacy},
    };
    auto series = [&](const std::string& name) -> std::optional<std::vector<double>> {
      std::vector<double> v;
      for (const auto& g : report.groups) {
        if (name == "variety_score") {
          if (!g.scores.variety_score) return std::nullopt;
          v.push_back(*g.scores.variety_score);
        } else {
          for (const auto& [n, member] : metrics) {
            if (n == name) v.push_back(g.scores.*member);
          }
        }
      }
      return v;
    };
    const std::vector<std::string> names = {"fidelity", "fidelity_private", "privacy", "variety_score"};
    for (std::size_t a = 0; a < names.size(); ++a) {
      for (std::size_t b = a + 1; b < names.size(); ++b) {
        CorrelationEntry entry{names[a], names[b], std::nullopt, ""};
        const auto xs = series(names[a]);
        const auto ys = series(names[b]);
        if (!xs || !ys) {
          entry.error = "VarietyUndefined";
        } else {
          try {
            entry.value = stats::pearson(*xs, *ys);
          } catch (const Error& e) {
            entry.error = std::string(errc_name(e.code()));
          }
        }
        report.correlations.push_back(std::move(entry));
      }
    }
  }

  if (config.utility) {
    const auto records = utility::load_accuracy_records(config.utility->records);
    for (auto& g : report.groups) {
      const bool has_run = std::any_of(records.begin(), records.end(),
                                       [&](const auto& r) { return r.run_id == g.scores.group; });
      if (!has_run) continue;
      g.utility = detail::with_context("group '" + g.scores.group + "'", [&] {
        return utility::utility_improvement(records, config.utility->baseline_run, g.scores.group,
                                            config.utility->mode);
      });
    }
  }

  report.real_count = m;
  report.latent = {real_codes.front().latent_width(), real_codes.front().latent_height()};
  report.q = real_codes.front().q();
  if (config.include_timing) {
    report.timing = Timing{load_seconds, profile_seconds, classify_seconds, detail::seconds_since(t_start)};
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

inline Json utility_to_json(const utility::UtilityResult& u) {
  return Json{{"absolute_diff", u.absolute_diff},
              {"all_zero_differences", u.test.all_zero_differences},
              {"augmented_mean", u.augmented_mean},
              {"baseline_mean", u.baseline_mean},
              {"improvement_pct", u.improvement_pct},
              {"method", stats::method_name(u.test.method)},
              {"mode", utility::mode_name(u.mode)},
              {"n_units", u.n_units},
              {"p_value", u.p_value},
              {"significant", u.significant},
              {"statistic", u.test.statistic}};
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const MetricReport& report) {
  Json config{{"code_source", code_source_name(report.config.code_source)},
              {"k", report.config.k},
              {"latent", {{"height", report.latent.height}, {"width", report.latent.width}}},
              {"q", report.q},
              {"real_manifest", report.config.real_manifest.filename().string()}};
  Json synthetic = Json::array();
  for (const auto& p : report.config.synthetic_manifests) synthetic.push_back(p.filename().string());
  config["synthetic_manifests"] = synthetic;
  if (report.config.utility) {
    config["utility"] = {{"baseline_run", report.config.utility->baseline_run},
                         {"mode", utility::mode_name(report.config.utility->mode)},
                         {"records", report.config.utility->records.filename().string()}};
  }

  Json groups = Json::array();
  Json cohort = Json::array();
  for (const auto& g : report.groups) {
    const auto& s = g.scores;
    groups.push_back({{"copy_count", s.copy_count},
                      {"fidelity", s.fidelity},
                      {"fidelity_private", s.fidelity_private},
                      {"label", s.group},
                      {"manifest", g.manifest},
                      {"n", s.n},
                      {"non_real_count", s.non_real_count},
                      {"privacy", s.privacy},
                      {"real_band_count", s.real_band_count},
                      {"utility", g.utility ? utility_to_json(*g.utility) : Json(nullptr)},
                      {"variety_raw", s.variety_raw},
                      {"variety_score", optional_number(s.variety_score)}});
    cohort.push_back(s.group);
  }

  Json correlations = nullptr;
  if (!report.correlations.empty()) {
    correlations = Json::array();
    for (const auto& c : report.correlations) {
      correlations.push_back({{"error", c.error.empty() ? Json(nullptr) : Json(c.error)},
                              {"p_value", c.value ? Json(c.value->p_value) : Json(nullptr)},
                              {"r", c.value ? Json(c.value->r) : Json(nullptr)},
                              {"x", c.x},
                              {"y", c.y}});
    }
  }

  Json out{{"config", config},
           {"correlations", correlations},
           {"groups", groups},
           {"real_count", report.real_count},
           {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
           {"variety",
            {{"cohort", cohort}, {"size_proxy", kSizeProxy}, {"status", variety_status_name(report.variety_status)}}}};
  if (report.timing) {
    out["timing"] = {{"classify_seconds", report.timing->classify_seconds},
                     {"load_seconds", report.timing->load_seconds},
                     {"profile_seconds", report.timing->profile_seconds},
                     {"total_seconds", report.timing->total_seconds}};
  }
  return out;
}

inline std::string render_report(const MetricReport& report) { return to_canonical_json(to_json(report)); }

}  // namespace synthmeter
