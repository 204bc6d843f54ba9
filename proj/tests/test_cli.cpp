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
namespace ts = testing_support;
namespace fs = std::filesystem;

const fs::path kFixture = fs::path(SYNTHMETER_TEST_DATA) / "fixture";

std::string fixture_eval_args(const std::string& k = "5") {
  return "eval --real " + (kFixture / "real.csv").string() + " --synthetic " + (kFixture / "near.csv").string() +
         " --synthetic " + (kFixture / "far.csv").string() + " --k " + k + " --q 16 --latent 16x16";
}

TEST(Cli, HelpExitsZero) {
  const auto r = ts::run_cli("--help");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("eval"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(ts::run_cli("").exit_code, 2);  // a subcommand is required
  EXPECT_EQ(ts::run_cli("eval").exit_code, 2);
  EXPECT_EQ(ts::run_cli("bogus").exit_code, 2);
  EXPECT_EQ(ts::run_cli(fixture_eval_args() + " --mode sideways").exit_code, 2);
}

TEST(Cli, InputErrorsExitTwo) {
  const auto missing = ts::run_cli("eval --real /nonexistent.csv --synthetic /nonexistent2.csv");
  EXPECT_EQ(missing.exit_code, 2);
  EXPECT_NE(missing.err.find("MissingFile"), std::string::npos) << missing.err;
  const auto k = ts::run_cli(fixture_eval_args("40"));
  EXPECT_EQ(k.exit_code, 2);
  EXPECT_NE(k.err.find("TooFewReals"), std::string::npos) << k.err;
  EXPECT_EQ(ts::run_cli(fixture_eval_args() + " --latent 16").exit_code, 2);
  EXPECT_EQ(ts::run_cli(fixture_eval_args() + " --q 1").exit_code, 2);
}

TEST(Cli, EvalMatchesGolden) {
  const auto r = ts::run_cli(fixture_eval_args() + " --workers 3");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, ts::read_text(kFixture / "golden_report.json"));
}

TEST(Cli, EvalOutFileAndPlot) {
  ts::ScratchDir dir;
  const auto r = ts::run_cli(fixture_eval_args() + " --out " + (dir / "r.json").string() + " --plot " +
                             (dir / "p.csv").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(ts::read_text(dir / "r.json"), ts::read_text(kFixture / "golden_report.json"));
  const auto rows = parse_plot_data(ts::read_text(dir / "p.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].group, "near");

  const auto csv = ts::run_cli("--format csv " + fixture_eval_args());
  ASSERT_EQ(csv.exit_code, 0) << csv.err;
  EXPECT_EQ(csv.out, ts::read_text(dir / "p.csv"));
}

TEST(Cli, ThreadsFromEnvironment) {
  const std::string golden = ts::read_text(kFixture / "golden_report.json");
  const auto env = ts::run_cli(fixture_eval_args(), "SYNTHMETER_THREADS=4");
  ASSERT_EQ(env.exit_code, 0) << env.err;
  EXPECT_EQ(env.out, golden);
  const auto bad = ts::run_cli(fixture_eval_args(), "SYNTHMETER_THREADS=lots");
  EXPECT_EQ(bad.exit_code, 2);
  EXPECT_NE(bad.err.find("SYNTHMETER_THREADS"), std::string::npos) << bad.err;
  // The flag wins over the environment.
  EXPECT_EQ(ts::run_cli("--workers 2 " + fixture_eval_args(), "SYNTHMETER_THREADS=lots").exit_code, 0);
}

TEST(Cli, QuantizeWritesCodeMapsAndIndex) {
  ts::ScratchDir dir;
  const auto r = ts::run_cli("quantize --manifest " + (kFixture / "near.csv").string() + " --out-dir " +
                             (dir / "codes").string() + " --latent 64x64 --q 256");
  EXPECT_EQ(r.exit_code, 2);  // 32x32 images are smaller than the latent grid
  EXPECT_NE(r.err.find("LatentLargerThanImage"), std::string::npos) << r.err;

  const auto ok = ts::run_cli("quantize --manifest " + (kFixture / "near.csv").string() + " --out-dir " +
                              (dir / "codes").string() + " --latent 32x32 --q 256");
  ASSERT_EQ(ok.exit_code, 0) << ok.err;
  EXPECT_EQ(fs::file_size(dir / "codes" / "near_00.smcm"), 16u + 32u * 32u);
  const auto index = load_codes_index(dir / "codes" / "index.csv");
  EXPECT_EQ(index.size(), 30u);
  const CodeMap c = read_codemap(index.at("near_07"));
  EXPECT_EQ(c.q(), 256u);
  EXPECT_EQ(c, quantize_blockwise(load_gray_image(kFixture / "near" / "near_07.pgm"), {32, 32}, 256));
}

TEST(Cli, QuantizeEmptyManifestGivesEmptyIndex) {
  ts::ScratchDir dir;
  ts::write_text(dir / "empty.csv", "image_id,path,role,group,label\n");
  const auto r = ts::run_cli("quantize --manifest " + (dir / "empty.csv").string() + " --out-dir " +
                             (dir / "codes").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(ts::read_text(dir / "codes" / "index.csv"), "image_id,smcm_path\n");
}

TEST(Cli, QuantizeThenEvalFromCodes) {
  ts::ScratchDir dir;
  for (const std::string name : {"real.csv", "near.csv", "far.csv"}) {
    const auto r = ts::run_cli("quantize --manifest " + (kFixture / name).string() + " --out-dir " +
                               (dir / name.substr(0, name.size() - 4)).string() + " --latent 16x16 --q 16");
    ASSERT_EQ(r.exit_code, 0) << r.err;
  }
  // Merge the three indexes into one, paths relative to the merged file.
  std::string merged = "image_id,smcm_path\n";
  for (const std::string sub : {"real", "near", "far"}) {
    for (const auto& [id, path] : load_codes_index(dir / sub / "index.csv")) merged += id + "," + sub + "/" + id + ".smcm\n";
  }
  ts::write_text(dir / "index.csv", merged);
  const auto r = ts::run_cli(fixture_eval_args() + " --codes-index " + (dir / "index.csv").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  Json got = Json::parse(r.out);
  Json want = Json::parse(ts::read_text(kFixture / "golden_report.json"));
  EXPECT_EQ(got["config"]["code_source"], "codemap-files");
  got["config"].erase("code_source");
  want["config"].erase("code_source");
  EXPECT_EQ(got, want);
}

TEST(Cli, UtilityCommand) {
  ts::ScratchDir dir;
  ts::write_text(dir / "runs.csv",
                 "run_id,arm,unit_id,accuracy\n"
                 "b,baseline,u1,0.5\nb,baseline,u2,0.5\nb,baseline,u3,0.5\nb,baseline,u4,0.5\nb,baseline,u5,0.5\n"
                 "a,augmented,u1,0.6\na,augmented,u2,0.6\na,augmented,u3,0.6\na,augmented,u4,0.6\na,augmented,u5,0.6\n");
  const auto r = ts::run_cli("utility --records " + (dir / "runs.csv").string() + " --baseline b --augmented a");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["p_value"], 0.03125);
  EXPECT_EQ(j["significant"], true);
  EXPECT_NEAR(j["improvement_pct"].get<double>(), 20.0, 1e-9);
  EXPECT_EQ(ts::run_cli("utility --records " + (dir / "runs.csv").string() + " --baseline b --augmented zz").exit_code,
            2);
  EXPECT_EQ(ts::run_cli("utility --records " + (dir / "runs.csv").string()).exit_code, 2);
}

TEST(Cli, ProbeCommand) {
  ts::ScratchDir dir;
  ts::write_text(dir / "f.txt", "1 4\n0 train -2\n1 train 2\n0 test -1.5\n1 test 1.5\n");
  const auto r = ts::run_cli("utility probe --features " + (dir / "f.txt").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["test_accuracy"], 1.0);
}

TEST(Cli, StatsCommands) {
  ts::ScratchDir dir;
  ts::write_text(dir / "d.csv", "x,y,b,t\n1,2.1,0.5,0.51\n2,3.9,0.5,0.52\n3,2.5,0.5,0.53\n4,5.0,0.5,0.54\n5,4.1,0.5,0.55\n"
                                "6,7.2,0.5,0.5\n7,6.0,0.5,0.5\n8,6.1,0.5,0.5\n9,9.8,0.5,0.5\n10,7.7,0.5,0.5\n");
  const auto p = ts::run_cli("stats pearson --x x --y y --in " + (dir / "d.csv").string());
  ASSERT_EQ(p.exit_code, 0) << p.err;
  EXPECT_NEAR(Json::parse(p.out)["r"].get<double>(), 0.8829431089467614, 1e-11);

  const auto w = ts::run_cli("stats wilcoxon --baseline b --treated t --alternative greater --in " +
                             (dir / "d.csv").string());
  ASSERT_EQ(w.exit_code, 0) << w.err;
  const Json wj = Json::parse(w.out);
  EXPECT_EQ(wj["p_value"], 0.03125);
  EXPECT_EQ(wj["n_effective"], 5);
  EXPECT_EQ(wj["method"], "exact");

  const auto wc = ts::run_cli("--format csv stats wilcoxon --baseline b --treated t --method normal --in " +
                              (dir / "d.csv").string());
  ASSERT_EQ(wc.exit_code, 0) << wc.err;
  EXPECT_EQ(wc.out.substr(0, wc.out.find('\n')), "statistic,p_value,method,n_effective,all_zero_differences");

  EXPECT_EQ(ts::run_cli("stats pearson --x x --y nope --in " + (dir / "d.csv").string()).exit_code, 2);
  EXPECT_EQ(ts::run_cli("stats pearson --x b --y x --in " + (dir / "d.csv").string()).exit_code, 2);
}

TEST(Cli, TexturesThenSweep) {
  ts::ScratchDir dir;
  const auto t = ts::run_cli("textures --count 30 --out-dir " + (dir / "tex").string());
  ASSERT_EQ(t.exit_code, 0) << t.err;
  EXPECT_EQ(load_manifest(dir / "tex" / "manifest.csv").size(), 30u);

  const std::string manifest = (dir / "tex" / "manifest.csv").string();
  const auto s = ts::run_cli("sweep --real " + manifest + " --alphas 0,0.5,1 --table " + (dir / "t.csv").string());
  ASSERT_EQ(s.exit_code, 0) << s.err;
  const Json j = Json::parse(s.out);
  EXPECT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["real_count"], 30);

  const auto csv = ts::run_cli("--format csv sweep --real " + manifest + " --alphas 0,0.5,1");
  ASSERT_EQ(csv.exit_code, 0) << csv.err;
  EXPECT_EQ(csv.out, ts::read_text(dir / "t.csv"));

  const auto corr = ts::run_cli("stats pearson --x fidelity --y variety_score --in " + (dir / "t.csv").string());
  ASSERT_EQ(corr.exit_code, 0) << corr.err;
  EXPECT_EQ(Json::parse(corr.out)["r"], j["correlation"]["r"]);

  EXPECT_EQ(ts::run_cli("sweep --real " + manifest + " --alphas 0,x").exit_code, 2);
  EXPECT_EQ(ts::run_cli("sweep --real " + manifest + " --alphas 0.5").exit_code, 2);
}

}  // namespace
