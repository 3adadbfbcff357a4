/*
 * Copyright (c) 2026, The Prism Curriculum Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <prism/error.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace prism::detail {

// 17 significant digits: enough for an exact binary64 round trip.
inline std::string format_real(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string format_real_array(const std::vector<double>& xs)
{
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_real(xs[i]);
  }
  out += "]";
  return out;
}

inline std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

inline nlohmann::json parse_json_document(const std::string& text, const std::string& what)
{
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::FormatError, what + ": " + e.what());
  }
}

template <class T>
T require_field(const nlohmann::json& doc, const char* field)
{
  if (!doc.is_object() || !doc.contains(field)) fail(ErrorKind::FormatError, std::string("missing field '") + field + "'");
  try {
    return doc.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::FormatError, std::string("field '") + field + "' has the wrong type");
  }
}

inline std::vector<double> require_real_array(const nlohmann::json& node, const std::string& field)
{
  if (!node.is_array()) fail(ErrorKind::FormatError, "field '" + field + "' must be an array");
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& x : node) {
    if (!x.is_number()) fail(ErrorKind::FormatError, "field '" + field + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace prism::detail

namespace prism::detail {

inline std::string csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace prism::detail
