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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace prism {

/// Unit-norm, finite vector in the question embedding space.
///
/// The only way to obtain one is through normalize(), so every instance
/// satisfies the unit-norm invariant up to rounding.
class EmbeddingVector {
 public:
  static constexpr double unit_tolerance = 1e-6;

  /// Adopt components that are already unit norm (within unit_tolerance)
  /// without rescaling them, so stored artifacts reload bit-exactly.
  static EmbeddingVector from_unit(std::vector<double> c);

  std::size_t dim() const noexcept { return components_.size(); }
  std::span<const double> components() const noexcept { return components_; }
  double operator[](std::size_t i) const { return components_[i]; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  explicit EmbeddingVector(std::vector<double> c) : components_(std::move(c)) {}
  std::vector<double> components_;

  friend EmbeddingVector normalize(std::span<const double> v);
};

inline double l2_norm(std::span<const double> v)
{
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline EmbeddingVector EmbeddingVector::from_unit(std::vector<double> c)
{
  if (c.empty()) fail(ErrorKind::ZeroVector, "empty vector");
  for (double x : c)
    if (!std::isfinite(x)) fail(ErrorKind::NonFinite, "vector has a NaN or infinite component");
  const double norm = l2_norm(c);
  if (std::abs(norm - 1.0) > unit_tolerance)
    fail(ErrorKind::NotNormalized, "vector norm " + std::to_string(norm) + " is not 1");
  return EmbeddingVector(std::move(c));
}

/// Scale v to unit L2 norm.
inline EmbeddingVector normalize(std::span<const double> v)
{
  if (v.empty()) fail(ErrorKind::ZeroVector, "empty vector");
  for (double x : v)
    if (!std::isfinite(x)) fail(ErrorKind::NonFinite, "vector has a NaN or infinite component");
  const double norm = l2_norm(v);
  if (norm < 1e-12) fail(ErrorKind::ZeroVector, "vector norm below 1e-12");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return EmbeddingVector(std::move(out));
}

inline EmbeddingVector normalize(std::initializer_list<double> v)
{
  return normalize(std::span<const double>(v.begin(), v.size()));
}

inline double dot(std::span<const double> u, std::span<const double> v)
{
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

/// Cosine similarity of two unit vectors, clamped to [-1, 1].
inline double cosine(const EmbeddingVector& u, const EmbeddingVector& v)
{
  if (u.dim() != v.dim())
    fail(ErrorKind::DimMismatch, "dims " + std::to_string(u.dim()) + " and " + std::to_string(v.dim()));
  return std::clamp(dot(u.components(), v.components()), -1.0, 1.0);
}

struct QuestionRecord {
  std::string id;
  EmbeddingVector vector;
  std::optional<std::string> text;
  std::optional<double> solvability;
};

/// Read a line-delimited JSON corpus. Vectors are renormalized on load and
/// the dimension of the first record is enforced on the rest. Blank lines
/// are skipped.
inline std::vector<QuestionRecord> load_corpus(std::istream& in)
{
  std::vector<QuestionRecord> corpus;
  std::unordered_set<std::string> seen;
  std::optional<std::size_t> dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno);

    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::ParseError, where + ": " + e.what());
    }
    if (!doc.is_object()) fail(ErrorKind::ParseError, where + ": record must be a JSON object");
    if (!doc.contains("id") || !doc["id"].is_string() || doc["id"].get<std::string>().empty())
      fail(ErrorKind::ParseError, where + ": 'id' must be a non-empty string");
    if (!doc.contains("vector") || !doc["vector"].is_array())
      fail(ErrorKind::ParseError, where + ": 'vector' must be an array of numbers");

    std::vector<double> raw;
    for (const auto& x : doc["vector"]) {
      if (!x.is_number()) fail(ErrorKind::ParseError, where + ": 'vector' must be an array of numbers");
      raw.push_back(x.get<double>());
    }
    if (raw.empty()) fail(ErrorKind::ParseError, where + ": 'vector' is empty");
    if (dim && raw.size() != *dim)
      fail(ErrorKind::DimMismatch,
           where + ": expected dim " + std::to_string(*dim) + ", got " + std::to_string(raw.size()));
    dim = raw.size();

    std::string id = doc["id"].get<std::string>();
    if (!seen.insert(id).second) fail(ErrorKind::DuplicateId, where + ": duplicate id '" + id + "'");

    std::optional<std::string> text;
    if (doc.contains("text") && !doc["text"].is_null()) {
      if (!doc["text"].is_string()) fail(ErrorKind::ParseError, where + ": 'text' must be a string");
      text = doc["text"].get<std::string>();
    }
    std::optional<double> solvability;
    if (doc.contains("solvability") && !doc["solvability"].is_null()) {
      if (!doc["solvability"].is_number()) fail(ErrorKind::ParseError, where + ": 'solvability' must be a number");
      solvability = doc["solvability"].get<double>();
      if (!(*solvability >= 0.0 && *solvability <= 1.0))
        fail(ErrorKind::ParseError, where + ": 'solvability' outside [0, 1]");
    }

    try {
      corpus.push_back(QuestionRecord{std::move(id), normalize(raw), std::move(text), solvability});
    } catch (const Error& e) {
      fail(e.kind(), where + ": " + e.what());
    }
  }
  return corpus;
}

}  // namespace prism
