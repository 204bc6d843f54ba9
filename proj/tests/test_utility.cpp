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

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace {

using namespace synthmeter;
using namespace synthmeter::utility;

template <typename Fn>
Errc error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no synthmeter::Error thrown";
  return Errc::InvariantViolation;
}

const char* kHeader = "run_id,arm,unit_id,accuracy\n";

TEST(Records, ParsesRows) {
  const auto r = parse_accuracy_records(std::string(kHeader) +
                                        "a1,baseline,u1,0.8\n"
                                        "a1,baseline,u2,0.7\n"
                                        "a1_syn,augmented,u1,0.9\n"
                                        "a1_syn,augmented,u2,1\n");
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[2].run_id, "a1_syn");
  EXPECT_EQ(r[2].arm, Arm::Augmented);
  EXPECT_EQ(r[3].accuracy, 1.0);
}

TEST(Records, Rejections) {
  const std::string h = kHeader;
  EXPECT_EQ(error_code([&] { parse_accuracy_records(h + "a,baseline,u,1.2\n"); }), Errc::AccuracyOutOfRange);
  EXPECT_EQ(error_code([&] { parse_accuracy_records(h + "a,baseline,u,-0.1\n"); }), Errc::AccuracyOutOfRange);
  EXPECT_EQ(error_code([&] { parse_accuracy_records(h + "a,baseline,u,0.1\na,baseline,u,0.2\n"); }),
            Errc::DuplicateKey);
  EXPECT_EQ(error_code([&] { parse_accuracy_records(h + "a,control,u,0.1\n"); }), Errc::MalformedRow);
  EXPECT_EQ(error_code([&] { parse_accuracy_records(h + "a,baseline,u,abc\n"); }), Errc::MalformedRow);
  EXPECT_EQ(error_code([&] { parse_accuracy_records("run,arm,unit,acc\n"); }), Errc::MalformedRow);
}

std::vector<AccuracyRecord> paired(const std::vector<double>& base, const std::vector<double>& aug) {
  std::vector<AccuracyRecord> out;
  for (std::size_t i = 0; i < base.size(); ++i) out.push_back({"base", Arm::Baseline, "u" + std::to_string(i), base[i]});
  for (std::size_t i = 0; i < aug.size(); ++i) out.push_back({"aug", Arm::Augmented, "u" + std::to_string(i), aug[i]});
  return out;
}

TEST(Improvement, RelativePercent) {
  const auto r = utility_improvement(paired({0.80, 0.80}, {0.88, 0.88}), "base", "aug", Mode::IntraTask);
  EXPECT_NEAR(r.improvement_pct, 10.0, 1e-12);
  EXPECT_NEAR(r.absolute_diff, 0.08, 1e-12);
  EXPECT_EQ(r.n_units, 2u);
  EXPECT_EQ(r.mode, Mode::IntraTask);
}

TEST(Improvement, FivePositiveUnitsSignificant) {
  const auto r = utility_improvement(paired({0.5, 0.5, 0.5, 0.5, 0.5}, {0.51, 0.52, 0.53, 0.54, 0.55}), "base", "aug",
                                     Mode::CrossTask);
  EXPECT_EQ(r.p_value, 0.03125);
  EXPECT_TRUE(r.significant);
  EXPECT_EQ(r.test.method, stats::TestMethod::Exact);
}

TEST(Improvement, IdenticalArms) {
  const auto r = utility_improvement(paired({0.6, 0.7, 0.8}, {0.6, 0.7, 0.8}), "base", "aug", Mode::IntraTask);
  EXPECT_EQ(r.improvement_pct, 0.0);
  EXPECT_TRUE(r.test.all_zero_differences);
  EXPECT_FALSE(r.significant);
}

TEST(Improvement, RunAgainstItself) {
  const auto records = paired({0.6, 0.7, 0.8}, {0.9, 0.1, 0.5});
  for (const std::string run : {"base", "aug"}) {
    const auto r = utility_improvement(records, run, run, Mode::IntraTask);
    EXPECT_EQ(r.improvement_pct, 0.0);
    EXPECT_FALSE(r.significant);
  }
}

TEST(Improvement, AntisymmetricInArms) {
  PortableRng rng(31);
  for (int t = 0; t < 50; ++t) {
    std::vector<AccuracyRecord> records;
    for (int u = 0; u < 12; ++u) {
      records.push_back({"x", Arm::Baseline, "u" + std::to_string(u), rng.uniform01()});
      records.push_back({"y", Arm::Baseline, "u" + std::to_string(u), rng.uniform01()});
    }
    const auto xy = utility_improvement(records, "x", "y", Mode::IntraTask);
    const auto yx = utility_improvement(records, "y", "x", Mode::IntraTask);
    ASSERT_NEAR(xy.absolute_diff, -yx.absolute_diff, 1e-12);
    // One-sided p of the swapped comparison is the other tail.
    std::vector<stats::PairedSample> pairs;
    for (int u = 0; u < 12; ++u) pairs.push_back({records[2 * u].accuracy, records[2 * u + 1].accuracy, ""});
    ASSERT_EQ(xy.p_value, stats::wilcoxon_signed_rank(pairs, stats::Alternative::Greater).p_value);
    ASSERT_EQ(yx.p_value, stats::wilcoxon_signed_rank(pairs, stats::Alternative::Less).p_value);
  }
}

TEST(Improvement, Errors) {
  auto records = paired({0.5, 0.6}, {0.5, 0.6});
  EXPECT_EQ(error_code([&] { utility_improvement(records, "base", "nope", Mode::IntraTask); }), Errc::MissingRun);
  records.push_back({"aug", Arm::Augmented, "u9", 0.5});
  EXPECT_EQ(error_code([&] { utility_improvement(records, "base", "aug", Mode::IntraTask); }), Errc::UnpairedUnits);
  EXPECT_EQ(error_code([&] { utility_improvement(paired({0, 0}, {0.5, 0.5}), "base", "aug", Mode::IntraTask); }),
            Errc::ZeroBaselineMean);
}

// --- linear probe -------------------------------------------------------------

TEST(FeatureFile, Parses) {
  const auto fs = parse_feature_set("2 3\n1 train 0.5 1\n0 test -1 2e-1\n\n1 train 3 4\n");
  EXPECT_EQ(fs.dimension, 2u);
  ASSERT_EQ(fs.size(), 3u);
  EXPECT_EQ(fs.labels, (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(fs.splits[1], Split::Test);
  EXPECT_EQ(fs.vectors[1][1], 0.2);
}

TEST(FeatureFile, Rejections) {
  EXPECT_EQ(error_code([] { parse_feature_set("2 1\n1 train 0.5\n"); }), Errc::DimensionMismatch);
  EXPECT_EQ(error_code([] { parse_feature_set("2 2\n1 train 0.5 1\n"); }), Errc::MalformedRow);
  EXPECT_EQ(error_code([] { parse_feature_set("1 1\n2 train 0.5\n"); }), Errc::MalformedRow);
  EXPECT_EQ(error_code([] { parse_feature_set("1 1\n1 dev 0.5\n"); }), Errc::MalformedRow);
  EXPECT_EQ(error_code([] { parse_feature_set(""); }), Errc::MalformedRow);
}

FeatureSet separable() {
  FeatureSet fs;
  fs.dimension = 2;
  auto add = [&](double a, double b, int label, Split s) {
    fs.vectors.push_back({a, b});
    fs.labels.push_back(label);
    fs.splits.push_back(s);
  };
  add(-5, -5, 0, Split::Train);
  add(-6, -4, 0, Split::Train);
  add(5, 5, 1, Split::Train);
  add(4, 6, 1, Split::Train);
  add(-5.5, -4.5, 0, Split::Test);
  add(-4, -6, 0, Split::Test);
  add(5.5, 4.5, 1, Split::Test);
  add(6, 4, 1, Split::Test);
  return fs;
}

TEST(Probe, SeparableIsPerfect) {
  const auto r = train_linear_probe(separable());
  EXPECT_EQ(r.test_accuracy, 1.0);
  EXPECT_EQ(r.train_size, 4u);
  EXPECT_EQ(r.test_size, 4u);
}

TEST(Probe, ZeroEpochsPredictsPositive) {
  ProbeConfig config;
  config.epochs = 0;
  FeatureSet fs = separable();
  fs.labels[4] = 1;  // test positives: 3 of 4
  const auto r = train_linear_probe(fs, config);
  EXPECT_EQ(r.weights, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(r.bias, 0.0);
  EXPECT_EQ(r.test_accuracy, 0.75);
}

TEST(Probe, RandomLabelsNearChance) {
  PortableRng rng(32);
  FeatureSet fs;
  fs.dimension = 8;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v;
    for (int c = 0; c < 8; ++c) v.push_back(rng.uniform(-1, 1));
    fs.vectors.push_back(v);
    fs.labels.push_back(i % 2);
    fs.splits.push_back(i < 100 ? Split::Train : Split::Test);
  }
  const auto r = train_linear_probe(fs);
  EXPECT_GE(r.test_accuracy, 0.35);
  EXPECT_LE(r.test_accuracy, 0.65);
}

TEST(Probe, RowOrderInvariant) {
  PortableRng rng(33);
  FeatureSet fs;
  fs.dimension = 3;
  for (int i = 0; i < 60; ++i) {
    const int label = static_cast<int>(rng.below(2));
    fs.vectors.push_back({rng.uniform(-1, 1) + label, rng.uniform(-1, 1), rng.uniform(-1, 1) - label});
    fs.labels.push_back(label);
    fs.splits.push_back(i % 3 == 0 ? Split::Test : Split::Train);
  }
  const auto a = train_linear_probe(fs);
  FeatureSet rev = fs;
  std::reverse(rev.vectors.begin(), rev.vectors.end());
  std::reverse(rev.labels.begin(), rev.labels.end());
  std::reverse(rev.splits.begin(), rev.splits.end());
  const auto b = train_linear_probe(rev);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.test_accuracy, b.test_accuracy);
}

TEST(Probe, SingleClassTrainRejected) {
  FeatureSet fs = separable();
  for (std::size_t i = 0; i < 4; ++i) fs.labels[i] = 1;
  EXPECT_EQ(error_code([&] { train_linear_probe(fs); }), Errc::SingleClassTrain);
}

}  // namespace
