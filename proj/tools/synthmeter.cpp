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

// synthmeter command-line front end.
//
// Exit status: 0 success, 2 input error, 3 internal invariant violation.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "synthmeter.hpp"

namespace fs = std::filesystem;
using namespace synthmeter;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

struct GlobalOptions {
  std::size_t workers = 0;  // 0: hardware concurrency
  std::string format = "json";

  std::size_t worker_count() const { return workers == 0 ? default_worker_count() : workers; }
};

void write_output(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream file(out, std::ios::binary);
  file << text;
  file.flush();
  if (!file) throw Error(Errc::WriteFailure, out);
}

LatentShape parse_latent(const std::string& text) {
  const auto x = text.find('x');
  std::size_t w = 0;
  std::size_t h = 0;
  if (x != std::string::npos) {
    const auto a = csv::parse_double(text.substr(0, x));
    const auto b = csv::parse_double(text.substr(x + 1));
    if (a && b && *a >= 1 && *b >= 1 && *a == std::floor(*a) && *b == std::floor(*b)) {
      w = static_cast<std::size_t>(*a);
      h = static_cast<std::size_t>(*b);
    }
  }
  if (w == 0 || h == 0) throw Error(Errc::InvalidArgument, "latent must look like WxH, got '" + text + "'");
  return LatentShape{w, h};
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& field : csv::split(text)) {
    const auto v = csv::parse_double(field);
    if (!v) throw Error(Errc::InvalidArgument, what + ": bad number '" + field + "'");
    out.push_back(*v);
  }
  return out;
}

utility::Mode parse_mode(const std::string& text) {
  if (text == "intra") return utility::Mode::IntraTask;
  if (text == "cross") return utility::Mode::CrossTask;
  throw Error(Errc::InvalidArgument, "mode must be intra or cross");
}

std::vector<double> read_column(const csv::Table& table, const std::string& column, const std::string& file) {
  const auto idx = table.column(column);
  if (!idx) throw Error(Errc::InvalidArgument, file + ": no column '" + column + "'");
  std::vector<double> out;
  for (const auto& row : table.rows) {
    const std::string where = file + ": line " + std::to_string(row.line);
    if (*idx >= row.fields.size()) throw Error(Errc::MalformedRow, where + ": missing column '" + column + "'");
    const auto v = csv::parse_double(row.fields[*idx]);
    if (!v) throw Error(Errc::MalformedRow, where + ": bad number '" + row.fields[*idx] + "'");
    out.push_back(*v);
  }
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out + '\n';
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------------------

struct QuantizeArgs {
  std::string manifest;
  std::string out_dir;
  std::string latent = "64x64";
  std::uint32_t q = 256;
};

void run_quantize(const QuantizeArgs& a, const GlobalOptions& g) {
  const DatasetManifest m = load_manifest(a.manifest);
  const LatentShape latent = parse_latent(a.latent);
  for (const auto& e : m.entries) {
    if (e.image_id.find_first_of("/\\") != std::string::npos || e.image_id == "." || e.image_id == "..") {
      throw Error(Errc::InvalidArgument, "image id '" + e.image_id + "' cannot be used as a file name");
    }
  }
  fs::create_directories(a.out_dir);
  parallel_for(m.size(), g.worker_count(), [&](std::size_t i) {
    const auto& e = m.entries[i];
    detail::with_context("image '" + e.image_id + "'", [&] {
      write_codemap(quantize_blockwise(load_gray_image(e.path), latent, a.q), fs::path(a.out_dir) / (e.image_id + ".smcm"));
    });
  });
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& e : m.entries) rows.emplace_back(e.image_id, e.image_id + ".smcm");
  write_codes_index(rows, fs::path(a.out_dir) / "index.csv");
}

struct EvalArgs {
  std::string real;
  std::vector<std::string> synthetic;
  std::size_t k = 5;
  std::uint32_t q = 256;
  std::string latent = "64x64";
  std::string codes_index;
  std::string records;
  std::string baseline;
  std::string mode = "intra";
  std::string out;
  std::string plot;
  bool timing = false;
};

void run_eval_command(const EvalArgs& a, const GlobalOptions& g) {
  EvalConfig config;
  config.real_manifest = a.real;
  for (const auto& s : a.synthetic) config.synthetic_manifests.emplace_back(s);
  config.k = a.k;
  config.q = a.q;
  config.latent = parse_latent(a.latent);
  if (!a.codes_index.empty()) {
    config.code_source = CodeSource::CodeMapFiles;
    config.codes_index = a.codes_index;
  }
  if (!a.records.empty()) {
    if (a.baseline.empty()) throw Error(Errc::InvalidArgument, "--records requires --baseline");
    config.utility = UtilityLink{a.records, a.baseline, parse_mode(a.mode)};
  }
  config.workers = g.worker_count();
  config.include_timing = a.timing;
  const MetricReport report = run_eval(config);
  if (!a.plot.empty()) emit_plot_data(report, a.plot);
  write_output(g.format == "csv" ? render_plot_data(report) : render_report(report), a.out);
}

struct SweepArgs {
  std::string real;
  std::string alphas = "0,0.2,0.4,0.6,0.8,1.0";
  std::string noise = "0.02";
  std::uint64_t seed = 17;
  std::size_t k = 5;
  std::uint32_t q = 256;
  std::string latent = "64x64";
  std::string out;
  std::string table;
};

void run_sweep_command(const SweepArgs& a, const GlobalOptions& g) {
  SweepConfig config;
  config.alphas = parse_list(a.alphas, "--alphas");
  config.noise_levels = parse_list(a.noise, "--noise");
  config.seed = a.seed;
  config.k = a.k;
  config.q = a.q;
  config.latent = parse_latent(a.latent);
  config.workers = g.worker_count();
  const SweepReport report = sweep_tradeoff(a.real, config);
  if (!a.table.empty()) write_output(sweep_table_csv(report), a.table);
  write_output(g.format == "csv" ? sweep_table_csv(report) : to_canonical_json(to_json(report)), a.out);
}

struct UtilityArgs {
  std::string records;
  std::string baseline;
  std::string augmented;
  std::string mode = "intra";
  std::string out;
};

void run_utility_command(const UtilityArgs& a, const GlobalOptions& g) {
  const auto records = utility::load_accuracy_records(a.records);
  const auto r = utility::utility_improvement(records, a.baseline, a.augmented, parse_mode(a.mode));
  if (g.format == "csv") {
    write_output(csv_line({"baseline", "augmented", "mode", "n_units", "baseline_mean", "augmented_mean",
                           "absolute_diff", "improvement_pct", "statistic", "p_value", "method", "significant"}) +
                     csv_line({a.baseline, a.augmented, std::string(utility::mode_name(r.mode)),
                               std::to_string(r.n_units), format_number_exact(r.baseline_mean),
                               format_number_exact(r.augmented_mean), format_number_exact(r.absolute_diff),
                               format_number_exact(r.improvement_pct), format_number_exact(r.test.statistic),
                               format_number_exact(r.p_value), std::string(stats::method_name(r.test.method)),
                               bool_text(r.significant)}),
                 a.out);
    return;
  }
  Json j = utility_to_json(r);
  j["augmented_run"] = a.augmented;
  j["baseline_run"] = a.baseline;
  write_output(to_canonical_json(j), a.out);
}

struct ProbeArgs {
  std::string features;
  std::size_t epochs = 500;
  double lambda = 1e-3;
  std::string out;
};

void run_probe_command(const ProbeArgs& a, const GlobalOptions& g) {
  utility::ProbeConfig config;
  config.epochs = a.epochs;
  config.lambda = a.lambda;
  const auto r = utility::train_linear_probe(utility::load_feature_set(a.features), config);
  if (g.format == "csv") {
    write_output(csv_line({"test_accuracy", "train_size", "test_size"}) +
                     csv_line({format_number_exact(r.test_accuracy), std::to_string(r.train_size),
                               std::to_string(r.test_size)}),
                 a.out);
    return;
  }
  write_output(to_canonical_json(Json{{"bias", r.bias},
                                      {"test_accuracy", r.test_accuracy},
                                      {"test_size", r.test_size},
                                      {"train_size", r.train_size},
                                      {"weights", r.weights}}),
               a.out);
}

struct PearsonArgs {
  std::string x;
  std::string y;
  std::string in;
  std::string out;
};

void run_pearson_command(const PearsonArgs& a, const GlobalOptions& g) {
  const csv::Table table = csv::read_file(a.in);
  const auto xs = read_column(table, a.x, a.in);
  const auto ys = read_column(table, a.y, a.in);
  const auto c = stats::pearson(xs, ys);
  if (g.format == "csv") {
    write_output(csv_line({"x", "y", "n", "r", "p_value"}) +
                     csv_line({a.x, a.y, std::to_string(c.n), format_number_exact(c.r), format_number_exact(c.p_value)}),
                 a.out);
    return;
  }
  write_output(to_canonical_json(Json{{"n", c.n}, {"p_value", c.p_value}, {"r", c.r}, {"x", a.x}, {"y", a.y}}), a.out);
}

struct WilcoxonArgs {
  std::string baseline;
  std::string treated;
  std::string in;
  std::string alternative = "two-sided";
  std::string method = "auto";
  std::string out;
};

void run_wilcoxon_command(const WilcoxonArgs& a, const GlobalOptions& g) {
  const csv::Table table = csv::read_file(a.in);
  const auto base = read_column(table, a.baseline, a.in);
  const auto treated = read_column(table, a.treated, a.in);
  std::vector<stats::PairedSample> pairs;
  for (std::size_t i = 0; i < base.size(); ++i) pairs.push_back({base[i], treated[i], std::to_string(i + 1)});
  const std::map<std::string, stats::Alternative> alternatives = {
      {"two-sided", stats::Alternative::TwoSided}, {"greater", stats::Alternative::Greater}, {"less", stats::Alternative::Less}};
  const std::map<std::string, stats::MethodChoice> methods = {
      {"auto", stats::MethodChoice::Auto}, {"exact", stats::MethodChoice::Exact}, {"normal", stats::MethodChoice::NormalApprox}};
  const auto r = stats::wilcoxon_signed_rank(pairs, alternatives.at(a.alternative), methods.at(a.method));
  if (g.format == "csv") {
    write_output(csv_line({"statistic", "p_value", "method", "n_effective", "all_zero_differences"}) +
                     csv_line({format_number_exact(r.statistic), format_number_exact(r.p_value),
                               std::string(stats::method_name(r.method)), std::to_string(r.n_effective),
                               bool_text(r.all_zero_differences)}),
                 a.out);
    return;
  }
  write_output(to_canonical_json(Json{{"all_zero_differences", r.all_zero_differences},
                                      {"alternative", a.alternative},
                                      {"method", stats::method_name(r.method)},
                                      {"n_effective", r.n_effective},
                                      {"p_value", r.p_value},
                                      {"statistic", r.statistic}}),
               a.out);
}

struct TexturesArgs {
  std::size_t count = 100;
  std::size_t size = 64;
  std::uint64_t seed = 17;
  std::string out_dir;
};

// Writes tex_NNN.pgm plus manifest.csv listing them as reals.
void run_textures_command(const TexturesArgs& a) {
  TextureCorpusOptions opt;
  opt.count = a.count;
  opt.size = a.size;
  opt.seed = a.seed;
  const auto images = make_texture_corpus(opt);
  fs::create_directories(a.out_dir);
  DatasetManifest m;
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "tex_%03zu", i);
    write_pgm(images[i], fs::path(a.out_dir) / (std::string(name) + ".pgm"));
    m.entries.push_back(ManifestEntry{name, std::string(name) + ".pgm", Role::Real, "real", std::nullopt});
  }
  write_manifest(m, fs::path(a.out_dir) / "manifest.csv");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthmeter: fidelity, variety, privacy and utility scores for synthetic image corpora"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  GlobalOptions global;
  auto* workers_opt = app.add_option("--workers", global.workers, "Worker threads (0: all cores; env SYNTHMETER_THREADS)")
                          ->check(CLI::NonNegativeNumber);
  app.add_option("--format", global.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.fallthrough();

  QuantizeArgs qa;
  auto* quantize = app.add_subcommand("quantize", "Write SMCM code maps and index.csv for a manifest");
  quantize->add_option("--manifest", qa.manifest)->required();
  quantize->add_option("--out-dir", qa.out_dir)->required();
  quantize->add_option("--latent", qa.latent, "WxH")->capture_default_str();
  quantize->add_option("--q", qa.q)->capture_default_str();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score synthetic groups against a real corpus");
  eval->add_option("--real", ea.real)->required();
  eval->add_option("--synthetic", ea.synthetic, "Synthetic manifest (repeatable)")->required();
  eval->add_option("--k", ea.k)->capture_default_str();
  eval->add_option("--q", ea.q)->capture_default_str();
  eval->add_option("--latent", ea.latent, "WxH")->capture_default_str();
  eval->add_option("--codes-index", ea.codes_index, "Index CSV image_id,smcm_path; use these codes instead of quantizing");
  eval->add_option("--records", ea.records, "Accuracy records; groups named like a run get utility");
  eval->add_option("--baseline", ea.baseline, "Baseline run id for --records");
  eval->add_option("--mode", ea.mode)->check(CLI::IsMember({"intra", "cross"}))->capture_default_str();
  eval->add_option("--out", ea.out, "Report path (default stdout)");
  eval->add_option("--plot", ea.plot, "Also write plot data CSV here");
  eval->add_flag("--timing", ea.timing, "Include timing metadata in the report");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Fidelity/variety trade-off sweep on a real corpus");
  sweep->add_option("--real", sa.real)->required();
  sweep->add_option("--alphas", sa.alphas)->capture_default_str();
  sweep->add_option("--noise", sa.noise)->capture_default_str();
  sweep->add_option("--seed", sa.seed)->capture_default_str();
  sweep->add_option("--k", sa.k)->capture_default_str();
  sweep->add_option("--q", sa.q)->capture_default_str();
  sweep->add_option("--latent", sa.latent, "WxH")->capture_default_str();
  sweep->add_option("--out", sa.out, "Report path (default stdout)");
  sweep->add_option("--table", sa.table, "Also write the CSV table here");

  UtilityArgs ua;
  auto* util = app.add_subcommand("utility", "Downstream accuracy improvement with a paired Wilcoxon test");
  util->require_subcommand(0, 1);
  util->add_option("--records", ua.records);
  util->add_option("--baseline", ua.baseline);
  util->add_option("--augmented", ua.augmented);
  util->add_option("--mode", ua.mode)->check(CLI::IsMember({"intra", "cross"}))->capture_default_str();
  util->add_option("--out", ua.out);
  ProbeArgs pa;
  auto* probe = util->add_subcommand("probe", "Linear probe accuracy on a feature file");
  probe->add_option("--features", pa.features)->required();
  probe->add_option("--epochs", pa.epochs)->capture_default_str();
  probe->add_option("--lambda", pa.lambda)->capture_default_str();
  probe->add_option("--out", pa.out);

  auto* stats_cmd = app.add_subcommand("stats", "Statistics on CSV columns");
  stats_cmd->require_subcommand(1);
  PearsonArgs pr;
  auto* pearson = stats_cmd->add_subcommand("pearson", "Pearson correlation of two columns");
  pearson->add_option("--x", pr.x)->required();
  pearson->add_option("--y", pr.y)->required();
  pearson->add_option("--in", pr.in)->required();
  pearson->add_option("--out", pr.out);
  WilcoxonArgs wa;
  auto* wilcoxon = stats_cmd->add_subcommand("wilcoxon", "Paired Wilcoxon signed-rank test of two columns");
  wilcoxon->add_option("--baseline", wa.baseline)->required();
  wilcoxon->add_option("--treated", wa.treated)->required();
  wilcoxon->add_option("--in", wa.in)->required();
  wilcoxon->add_option("--alternative", wa.alternative)
      ->check(CLI::IsMember({"two-sided", "greater", "less"}))
      ->capture_default_str();
  wilcoxon->add_option("--method", wa.method)->check(CLI::IsMember({"auto", "exact", "normal"}))->capture_default_str();
  wilcoxon->add_option("--out", wa.out);

  TexturesArgs ta;
  auto* textures = app.add_subcommand("textures", "Write a seeded texture corpus and its manifest");
  textures->add_option("--count", ta.count)->capture_default_str();
  textures->add_option("--size", ta.size)->capture_default_str();
  textures->add_option("--seed", ta.seed)->capture_default_str();
  textures->add_option("--out-dir", ta.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (workers_opt->count() == 0) {
      if (const char* env = std::getenv("SYNTHMETER_THREADS"); env != nullptr && *env != '\0') {
        const std::string_view text(env);
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), global.workers);
        if (ec != std::errc() || end != text.data() + text.size()) {
          throw Error(Errc::InvalidArgument, "SYNTHMETER_THREADS='" + std::string(text) + "' is not a thread count");
        }
      }
    }
    if (*quantize) {
      run_quantize(qa, global);
    } else if (*eval) {
      run_eval_command(ea, global);
    } else if (*sweep) {
      run_sweep_command(sa, global);
    } else if (*util) {
      if (*probe) {
        run_probe_command(pa, global);
      } else {
        if (ua.records.empty() || ua.baseline.empty() || ua.augmented.empty()) {
          throw Error(Errc::InvalidArgument, "utility needs --records, --baseline and --augmented");
        }
        run_utility_command(ua, global);
      }
    } else if (*pearson) {
      run_pearson_command(pr, global);
    } else if (*wilcoxon) {
      run_wilcoxon_command(wa, global);
    } else if (*textures) {
      run_textures_command(ta);
    }
  } catch (const Error& e) {
    std::cerr << "synthmeter: " << e.what() << '\n';
    return e.code() == Errc::InvariantViolation ? kExitInternal : kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "synthmeter: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "synthmeter: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
