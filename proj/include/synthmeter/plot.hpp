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

// Per-group scatter data for external plotters. Absent values are empty
// fields, never zero.

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "synthmeter/csv.hpp"
#include "synthmeter/error.hpp"
#include "synthmeter/json_canonical.hpp"
#include "synthmeter/pipeline.hpp"

namespace synthmeter {

inline constexpr std::string_view kPlotHeader =
    "group,fidelity,fidelity_private,privacy,variety_score,improvement_pct,significant";

struct PlotRow {
  std::string group;
  double fidelity = 0.0;
  double fidelity_private = 0.0;
  double privacy = 0.0;
  std::optional<double> variety_score;
  std::optional<double> improvement_pct;
  std::optional<bool> significant;

  friend bool operator==(const PlotRow&, const PlotRow&) = default;
};

inline std::vector<PlotRow> plot_rows(const MetricReport& report) {
  std::vector<PlotRow> rows;
  for (const auto& g : report.groups) {
    PlotRow row{g.scores.group, g.scores.fidelity, g.scores.fidelity_private, g.scores.privacy,
                g.scores.variety_score, std::nullopt, std::nullopt};
    if (g.utility) {
      row.improvement_pct = g.utility->improvement_pct;
      row.significant = g.utility->significant;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string render_plot_data(const MetricReport& report) {
  std::ostringstream out;
  out << kPlotHeader << '\n';
  for (const auto& r : plot_rows(report)) {
    out << r.group << ',' << format_number_exact(r.fidelity) << ',' << format_number_exact(r.fidelity_private) << ','
        << format_number_exact(r.privacy) << ','
        << (r.variety_score ? format_number_exact(*r.variety_score) : std::string()) << ','
        << (r.improvement_pct ? format_number_exact(*r.improvement_pct) : std::string()) << ','
        << (r.significant ? (*r.significant ? "true" : "false") : "") << '\n';
  }
  return out.str();
}

inline void emit_plot_data(const MetricReport& report, const std::filesystem::path& path) {
  const std::string text = render_plot_data(report);
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw Error(Errc::WriteFailure, path.string());
}

inline std::vector<PlotRow> parse_plot_data(std::string_view text, const std::string& name = "<memory>") {
  const csv::Table table = csv::parse(text);
  if (table.header != csv::split(kPlotHeader)) {
    throw Error(Errc::MalformedRow, name + ": line 1: header must be '" + std::string(kPlotHeader) + "'");
  }
  auto number = [](const std::string& field, const std::string& where) {
    const auto v = csv::parse_double(field);
    if (!v) throw Error(Errc::MalformedRow, where + ": bad number '" + field + "'");
    return *v;
  };
  auto optional_number = [&](const std::string& field, const std::string& where) -> std::optional<double> {
    if (field.empty()) return std::nullopt;
    return number(field, where);
  };
  std::vector<PlotRow> rows;
  for (const auto& row : table.rows) {
    const std::string where = name + ": line " + std::to_string(row.line);
    if (row.fields.size() != 7) throw Error(Errc::MalformedRow, where + ": expected 7 fields");
    const auto& f = row.fields;
    PlotRow r;
    r.group = f[0];
    r.fidelity = number(f[1], where);
    r.fidelity_private = number(f[2], where);
    r.privacy = number(f[3], where);
    r.variety_score = optional_number(f[4], where);
    r.improvement_pct = optional_number(f[5], where);
    if (f[6] == "true") {
      r.significant = true;
    } else if (f[6] == "false") {
      r.significant = false;
    } else if (!f[6].empty()) {
      throw Error(Errc::MalformedRow, where + ": significant must be true, false or empty");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace synthmeter
