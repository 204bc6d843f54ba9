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
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "synthmeter/csv.hpp"
#include "synthmeter/error.hpp"
#include "synthmeter/stats.hpp"

namespace synthmeter::utility {

enum class Arm { Baseline, Augmented };
enum class Mode { IntraTask, CrossTask };

inline std::string_view arm_name(Arm a) { return a == Arm::Baseline ? "baseline" : "augmented"; }
inline std::string_view mode_name(Mode m) { return m == Mode::IntraTask ? "intra" : "cross"; }

struct AccuracyRecord {
  std::string run_id;
  Arm arm = Arm::Baseline;
  std::string unit_id;
  double accuracy = 0.0;
};

inline std::vector<AccuracyRecord> parse_accuracy_records(std::string_view text, const std::string& name = "<memory>") {
  const csv::Table table = csv::parse(text);
  if (table.header != std::vector<std::string>{"run_id", "arm", "unit_id", "accuracy"}) {
    throw Error(Errc::MalformedRow, name + ": line 1: header must be 'run_id,arm,unit_id,accuracy'");
  }
  std::vector<AccuracyRecord> records;
  std::set<std::tuple<std::string, Arm, std::string>> keys;
  for (const auto& row : table.rows) {
    const std::string where = name + ": line " + std::to_string(row.line);
    if (row.fields.size() != 4) throw Error(Errc::MalformedRow, where + ": expected 4 fields");
    AccuracyRecord r;
    r.run_id = row.fields[0];
    r.unit_id = row.fields[2];
    if (r.run_id.empty() || r.unit_id.empty()) throw Error(Errc::MalformedRow, where + ": empty run_id or unit_id");
    if (row.fields[1] == "baseline") {
      r.arm = Arm::Baseline;
    } else if (row.fields[1] == "augmented") {
      r.arm = Arm::Augmented;
    } else {
      throw Error(Errc::MalformedRow, where + ": arm must be 'baseline' or 'augmented'");
    }
    const auto acc = csv::parse_double(row.fields[3]);
    if (!acc) throw Error(Errc::MalformedRow, where + ": accuracy is not a number");
    if (*acc < 0.0 || *acc > 1.0) throw Error(Errc::AccuracyOutOfRange, where + ": " + row.fields[3]);
    r.accuracy = *acc;
    if (!keys.emplace(r.run_id, r.arm, r.unit_id).second) {
      throw Error(Errc::DuplicateKey, where + ": (" + r.run_id + ", " + row.fields[1] + ", " + r.unit_id + ")");
    }
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<AccuracyRecord> load_accuracy_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_accuracy_records(buffer.str(), path.string());
}

struct UtilityResult {
  Mode mode = Mode::IntraTask;
  double improvement_pct = 0.0;  // 100 * (mean_aug - mean_base) / mean_base
  double absolute_diff = 0.0;    // mean_aug - mean_base
  double baseline_mean = 0.0;
  double augmented_mean = 0.0;
  double p_value = 1.0;
  bool significant = false;  // p_value < 0.05
  std::size_t n_units = 0;
  stats::TestResult test;
};

namespace detail {
// Records of `run` on `arm`; when the run has no records on that arm, all of
// its records (so a single-arm run can stand on either side).
inline std::map<std::string, double> run_side(std::span<const AccuracyRecord> records, const std::string& run, Arm arm) {
  std::map<std::string, double> on_arm;
  std::map<std::string, double> any_arm;
  for (const auto& r : records) {
    if (r.run_id != run) continue;
    if (r.arm == arm) on_arm[r.unit_id] = r.accuracy;
    any_arm.emplace(r.unit_id, r.accuracy);
  }
  if (!on_arm.empty()) return on_arm;
  if (any_arm.empty()) throw Error(Errc::MissingRun, "run '" + run + "' has no records");
  // A single-arm run: if it had both arms on_arm would be non-empty.
  return any_arm;
}
}  // namespace detail

/// Relative accuracy improvement of `augmented_run` over `baseline_run`,
/// with a one-sided (greater) paired Wilcoxon test over shared units.
inline UtilityResult utility_improvement(std::span<const AccuracyRecord> records, const std::string& baseline_run,
                                         const std::string& augmented_run, Mode mode) {
  const auto base = detail::run_side(records, baseline_run, Arm::Baseline);
  const auto aug = detail::run_side(records, augmented_run, Arm::Augmented);
  if (base.size() != aug.size() ||
      !std::equal(base.begin(), base.end(), aug.begin(), [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw Error(Errc::UnpairedUnits, "units of '" + baseline_run + "' and '" + augmented_run + "' do not align 1:1");
  }
  std::vector<stats::PairedSample> pairs;
  double base_sum = 0.0;
  double aug_sum = 0.0;
  for (auto bi = base.begin(), ai = aug.begin(); bi != base.end(); ++bi, ++ai) {
    pairs.push_back(stats::PairedSample{bi->second, ai->second, bi->first});
    base_sum += bi->second;
    aug_sum += ai->second;
  }
  UtilityResult out;
  out.mode = mode;
  out.n_units = pairs.size();
  out.baseline_mean = base_sum / static_cast<double>(pairs.size());
  out.augmented_mean = aug_sum / static_cast<double>(pairs.size());
  if (out.baseline_mean == 0.0) throw Error(Errc::ZeroBaselineMean, "baseline run '" + baseline_run + "' has mean 0");
  out.absolute_diff = out.augmented_mean - out.baseline_mean;
  out.improvement_pct = 100.0 * out.absolute_diff / out.baseline_mean;
  out.test = stats::wilcoxon_signed_rank(pairs, stats::Alternative::Greater);
  out.p_value = out.test.p_value;
  out.significant = out.p_value < stats::kSignificanceLevel;
  return out;
}

// ---------------------------------------------------------------------------
// Linear probe

enum class Split { Train, Test };

struct FeatureSet {
  std::size_t dimension = 0;
  std::vector<std::vector<double>> vectors;
  std::vector<int> labels;  // 0 or 1
  std::vector<Split> splits;

  std::size_t size() const noexcept { return vectors.size(); }
};

inline FeatureSet parse_feature_set(std::string_view text, const std::string& name = "<memory>") {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  FeatureSet fs;
  std::size_t expected_rows = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw Error(Errc::MalformedRow, name + ": missing 'd n' header");
  {
    std::istringstream header(line);
    long long d = -1;
    long long n = -1;
    std::string extra;
    if (!(header >> d >> n) || (header >> extra) || d <= 0 || n < 0) {
      throw Error(Errc::MalformedRow, name + ": line " + std::to_string(line_no) + ": header must be 'd n'");
    }
    fs.dimension = static_cast<std::size_t>(d);
    expected_rows = static_cast<std::size_t>(n);
  }
  while (next_line()) {
    const std::string where = name + ": line " + std::to_string(line_no);
    std::istringstream row(line);
    std::string label;
    std::string split;
    if (!(row >> label >> split)) throw Error(Errc::MalformedRow, where + ": expected 'label split features...'");
    if (label != "0" && label != "1") throw Error(Errc::MalformedRow, where + ": label must be 0 or 1");
    if (split != "train" && split != "test") throw Error(Errc::MalformedRow, where + ": split must be train or test");
    std::vector<double> v;
    std::string token;
    while (row >> token) {
      const auto value = csv::parse_double(token);
      if (!value) throw Error(Errc::MalformedRow, where + ": bad feature value '" + token + "'");
      v.push_back(*value);
    }
    if (v.size() != fs.dimension) {
      throw Error(Errc::DimensionMismatch, where + ": " + std::to_string(v.size()) + " features, header says " +
                                               std::to_string(fs.dimension));
    }
    fs.vectors.push_back(std::move(v));
    fs.labels.push_back(label == "1" ? 1 : 0);
    fs.splits.push_back(split == "train" ? Split::Train : Split::Test);
  }
  if (fs.vectors.size() != expected_rows) {
    throw Error(Errc::MalformedRow, name + ": header declares " + std::to_string(expected_rows) + " rows, found " +
                                        std::to_string(fs.vectors.size()));
  }
  return fs;
}

inline FeatureSet load_feature_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_feature_set(buffer.str(), path.string());
}

struct ProbeConfig {
  std::size_t epochs = 500;
  double lambda = 1e-3;
  double step = 0.1;         // eta_t = step / (1 + decay * t)
  double step_decay = 0.01;
};

struct ProbeResult {
  double test_accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<double> weights;  // in standardized feature space
  double bias = 0.0;
};

/// L2-regularized hinge-loss linear classifier, full-batch subgradient
/// descent from zero. Features are standardized with train-split statistics.
/// Training rows are processed in a canonical (sorted) order so the result
/// does not depend on input row order. A score of exactly 0 predicts class 1.
inline ProbeResult train_linear_probe(const FeatureSet& features, const ProbeConfig& config = {}) {
  const std::size_t d = features.dimension;
  if (features.labels.size() != features.size() || features.splits.size() != features.size()) {
    throw Error(Errc::DimensionMismatch, "labels/splits do not match vector count");
  }
  for (const auto& v : features.vectors) {
    if (v.size() != d) throw Error(Errc::DimensionMismatch, "feature vector of dimension " + std::to_string(v.size()));
  }
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features.splits[i] == Split::Train) {
      train.push_back(i);
      (features.labels[i] == 1 ? has_pos : has_neg) = true;
    } else {
      test.push_back(i);
    }
  }
  if (!has_pos || !has_neg) throw Error(Errc::SingleClassTrain, "train split must contain both classes");

  std::sort(train.begin(), train.end(), [&](std::size_t a, std::size_t b) {
    if (features.vectors[a] != features.vectors[b]) return features.vectors[a] < features.vectors[b];
    return features.labels[a] < features.labels[b];
  });

  const double n_train = static_cast<double>(train.size());
  std::vector<double> mean(d, 0.0);
  std::vector<double> scale(d, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (auto i : train) sum += features.vectors[i][c];
    mean[c] = sum / n_train;
    double var = 0.0;
    for (auto i : train) {
      const double dx = features.vectors[i][c] - mean[c];
      var += dx * dx;
    }
    var /= n_train;
    scale[c] = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
  }
  auto standardize = [&](std::size_t i) {
    std::vector<double> x(d);
    for (std::size_t c = 0; c < d; ++c) x[c] = (features.vectors[i][c] - mean[c]) * scale[c];
    return x;
  };
  std::vector<std::vector<double>> x_train;
  std::vector<double> y_train;
  for (auto i : train) {
    x_train.push_back(standardize(i));
    y_train.push_back(features.labels[i] == 1 ? 1.0 : -1.0);
  }

  ProbeResult result;
  result.weights.assign(d, 0.0);
  double& b = result.bias;
  std::vector<double>& w = result.weights;
  std::vector<double> grad(d);
  for (std::size_t t = 0; t < config.epochs; ++t) {
    const double eta = config.step / (1.0 + config.step_decay * static_cast<double>(t));
    for (std::size_t c = 0; c < d; ++c) grad[c] = config.lambda * w[c];
    double grad_b = 0.0;
    for (std::size_t r = 0; r < x_train.size(); ++r) {
      double score = b;
      for (std::size_t c = 0; c < d; ++c) score += w[c] * x_train[r][c];
      if (y_train[r] * score < 1.0) {
        for (std::size_t c = 0; c < d; ++c) grad[c] -= y_train[r] * x_train[r][c] / n_train;
        grad_b -= y_train[r] / n_train;
      }
    }
    for (std::size_t c = 0; c < d; ++c) w[c] -= eta * grad[c];
    b -= eta * grad_b;
  }

  std::size_t correct = 0;
  for (auto i : test) {
    const auto x = standardize(i);
    double score = b;
    for (std::size_t c = 0; c < d; ++c) score += w[c] * x[c];
    const int predicted = score >= 0.0 ? 1 : 0;
    if (predicted == features.labels[i]) ++correct;
  }
  result.train_size = train.size();
  result.test_size = test.size();
  result.test_accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  return result;
}

}  // namespace synthmeter::utility
