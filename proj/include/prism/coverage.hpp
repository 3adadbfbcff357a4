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

#include <prism/detail/io.hpp>
#include <prism/error.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace prism {

/// Per-cluster EMA visit counts carried across batches and iterations.
///
/// Counts start uniform at alpha and follow n <- gamma * n + (1 - gamma) * m
/// once per batch, where m holds the batch's per-cluster tallies. With
/// alpha > 0 every count stays strictly positive, so the rarity
/// denominator never vanishes.
class CoverageState {
 public:
  static constexpr double default_alpha = 1.0;
  static constexpr double default_gamma = 0.99;

  static CoverageState init(std::size_t k, double alpha = default_alpha, double gamma = default_gamma)
  {
    if (k < 1) fail(ErrorKind::BadParam, "k must be at least 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::BadParam, "alpha must be positive");
    check_gamma(gamma, ErrorKind::BadParam);
    return CoverageState(alpha, gamma, std::vector<double>(k, alpha), 0);
  }

  std::size_t k() const noexcept { return counts_.size(); }
  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }
  const std::vector<double>& counts() const noexcept { return counts_; }
  std::uint64_t batches_seen() const noexcept { return batches_seen_; }

  double mean_count() const { return std::accumulate(counts_.begin(), counts_.end(), 0.0) / static_cast<double>(k()); }

  /// One EMA step with per-cluster tallies m.
  CoverageState update_batch(std::span<const std::int64_t> m) const
  {
    if (m.size() != k())
      fail(ErrorKind::LengthMismatch, "tallies have length " + std::to_string(m.size()) + ", state has k=" +
                                        std::to_string(k()));
    std::vector<double> next(k());
    for (std::size_t j = 0; j < k(); ++j) {
      if (m[j] < 0) fail(ErrorKind::BadParam, "tally for cluster " + std::to_string(j) + " is negative");
      next[j] = gamma_ * counts_[j] + (1.0 - gamma_) * static_cast<double>(m[j]);
    }
    return CoverageState(alpha_, gamma_, std::move(next), batches_seen_ + 1);
  }

  /// exp(-n_c / mean(n)), in (0, 1].
  double rarity(std::size_t c) const
  {
    if (c >= k()) fail(ErrorKind::IndexOutOfRange, "cluster " + std::to_string(c) + " not in [0, " + std::to_string(k()) + ")");
    return std::exp(-counts_[c] / mean_count());
  }

  /// State for the next iteration: counts and batches_seen carried over as-is.
  CoverageState warm_start() const { return *this; }

  friend bool operator==(const CoverageState&, const CoverageState&) = default;

  /// Raw constructor used by persistence; validates every invariant.
  static CoverageState from_parts(double alpha, double gamma, std::vector<double> counts, std::uint64_t batches_seen)
  {
    if (counts.empty()) fail(ErrorKind::FormatError, "field 'counts' is empty");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::FormatError, "field 'alpha' must be positive");
    check_gamma(gamma, ErrorKind::FormatError);
    for (std::size_t j = 0; j < counts.size(); ++j)
      if (!(counts[j] >= 0.0) || !std::isfinite(counts[j]))
        fail(ErrorKind::FormatError, "field 'counts' has invalid entry at index " + std::to_string(j));
    if (!(std::accumulate(counts.begin(), counts.end(), 0.0) > 0.0))
      fail(ErrorKind::FormatError, "field 'counts' is all zero");
    return CoverageState(alpha, gamma, std::move(counts), batches_seen);
  }

 private:
  CoverageState(double alpha, double gamma, std::vector<double> counts, std::uint64_t batches)
    : alpha_(alpha), gamma_(gamma), counts_(std::move(counts)), batches_seen_(batches)
  {
  }

  static void check_gamma(double gamma, ErrorKind kind)
  {
    if (!(gamma > 0.0 && gamma < 1.0)) fail(kind, "gamma must lie in the open interval (0, 1)");
  }

  double alpha_;
  double gamma_;
  std::vector<double> counts_;
  std::uint64_t batches_seen_;
};

inline std::string to_json_text(const CoverageState& s)
{
  std::string out = "{\n";
  out += "  \"k\": " + std::to_string(s.k()) + ",\n";
  out += "  \"alpha\": " + detail::format_real(s.alpha()) + ",\n";
  out += "  \"gamma\": " + detail::format_real(s.gamma()) + ",\n";
  out += "  \"counts\": " + detail::format_real_array(s.counts()) + ",\n";
  out += "  \"batches_seen\": " + std::to_string(s.batches_seen()) + "\n";
  out += "}\n";
  return out;
}

inline CoverageState coverage_state_from_json_text(const std::string& text)
{
  const auto doc = detail::parse_json_document(text, "coverage state");
  const auto k = detail::require_field<std::int64_t>(doc, "k");
  const auto alpha = detail::require_field<double>(doc, "alpha");
  const auto gamma = detail::require_field<double>(doc, "gamma");
  if (!doc.contains("counts")) fail(ErrorKind::FormatError, "missing field 'counts'");
  auto counts = detail::require_real_array(doc["counts"], "counts");
  if (k < 1 || static_cast<std::int64_t>(counts.size()) != k)
    fail(ErrorKind::FormatError, "field 'counts' length does not match 'k'");
  std::int64_t batches = 0;
  if (doc.contains("batches_seen")) {
    batches = detail::require_field<std::int64_t>(doc, "batches_seen");
    if (batches < 0) fail(ErrorKind::FormatError, "field 'batches_seen' is negative");
  }
  return CoverageState::from_parts(alpha, gamma, std::move(counts), static_cast<std::uint64_t>(batches));
}

inline void save_state(const CoverageState& s, const std::filesystem::path& path)
{
  detail::write_file(path, to_json_text(s));
}

inline CoverageState load_state(const std::filesystem::path& path)
{
  return coverage_state_from_json_text(detail::read_file(path));
}

}  // namespace prism
