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

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "synthmeter/csv.hpp"
#include "synthmeter/error.hpp"

namespace synthmeter {

enum class Role { Real, Synthetic };

inline std::string_view role_name(Role role) { return role == Role::Real ? "real" : "synthetic"; }

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path path;  // relative paths are resolved against the manifest's directory
  Role role = Role::Real;
  std::string group;
  std::optional<std::string> class_label;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::filesystem::path source;
  std::vector<ManifestEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
};

inline constexpr std::string_view kManifestHeader = "image_id,path,role,group,label";

inline DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                                      const std::string& name = "<memory>") {
  const csv::Table table = csv::parse(text);
  const std::vector<std::string> expected = csv::split(kManifestHeader);
  if (table.header != expected) {
    throw Error(Errc::MalformedRow, name + ": line 1: header must be '" + std::string(kManifestHeader) + "'");
  }
  DatasetManifest manifest;
  std::unordered_set<std::string> seen;
  for (const auto& row : table.rows) {
    const std::string where = name + ": line " + std::to_string(row.line);
    if (row.fields.size() != expected.size()) {
      throw Error(Errc::MalformedRow, where + ": expected 5 fields, got " + std::to_string(row.fields.size()));
    }
    ManifestEntry entry;
    entry.image_id = row.fields[0];
    if (entry.image_id.empty()) throw Error(Errc::MalformedRow, where + ": empty image_id");
    if (row.fields[1].empty()) throw Error(Errc::MalformedRow, where + ": empty path");
    const std::filesystem::path raw(row.fields[1]);
    entry.path = raw.is_absolute() ? raw : base_dir / raw;
    if (row.fields[2] == "real") {
      entry.role = Role::Real;
    } else if (row.fields[2] == "synthetic") {
      entry.role = Role::Synthetic;
    } else {
      throw Error(Errc::MalformedRow, where + ": role must be 'real' or 'synthetic'");
    }
    entry.group = row.fields[3];
    if (entry.group.empty()) throw Error(Errc::MalformedRow, where + ": empty group");
    if (!row.fields[4].empty()) entry.class_label = row.fields[4];
    if (!seen.insert(entry.image_id).second) throw Error(Errc::DuplicateId, where + ": " + entry.image_id);
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  DatasetManifest manifest = parse_manifest(buffer.str(), path.parent_path(), path.string());
  manifest.source = path;
  return manifest;
}

/// Writes entries with paths exactly as stored.
inline void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << kManifestHeader << '\n';
  for (const auto& e : manifest.entries) {
    out << e.image_id << ',' << e.path.generic_string() << ',' << role_name(e.role) << ',' << e.group << ','
        << e.class_label.value_or("") << '\n';
  }
  if (!out) throw Error(Errc::WriteFailure, path.string());
}

}  // namespace synthmeter
