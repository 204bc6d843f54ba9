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

// Canonical JSON rendering: object keys sorted bytewise, no whitespace,
// floating-point numbers with 12 significant digits, trailing newline.
// Parsing the output and rendering it again yields the same bytes.

#pragma once

#include <charconv>
#include <cmath>
#include <string>

#include "json.hpp"

namespace synthmeter {

using Json = nlohmann::json;

/// printf("%.12g")-equivalent, locale independent; -0 renders as 0 and
/// non-finite values as null.
inline std::string format_number(double value) {
  if (!std::isfinite(value)) return "null";
  if (value == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

/// Shortest representation that parses back to the same double.
inline std::string format_number_exact(double value) {
  if (!std::isfinite(value)) return "";
  if (value == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace detail {
inline void render_canonical(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::null: out += "null"; break;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
    case Json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
    case Json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
    case Json::value_t::number_float: out += format_number(j.get<double>()); break;
    case Json::value_t::string: out += j.dump(); break;
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : j) {
        if (!first) out += ',';
        first = false;
        render_canonical(item, out);
      }
      out += ']';
      break;
    }
    case Json::value_t::object: {
      // nlohmann's default object type is a std::map: iteration is sorted.
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        render_canonical(it.value(), out);
      }
      out += '}';
      break;
    }
    default: out += "null"; break;
  }
}
}  // namespace detail

inline std::string to_canonical_json(const Json& j) {
  std::string out;
  detail::render_canonical(j, out);
  out += '\n';
  return out;
}

}  // namespace synthmeter
