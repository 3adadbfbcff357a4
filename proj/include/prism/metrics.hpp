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

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace prism {

struct LorenzPoint {
  double cluster_fraction = 0.0;
  double question_fraction = 0.0;
};

/// Coverage diagnostics of a per-cluster frequency vector. Zero-count
/// clusters take part in every statistic except active_clusters.
struct CoverageReport {
  std::size_t k = 0;
  std::uint64_t total = 0;
  std::size_t active_clusters = 0;
  double std_dev = 0.0;  // population std of raw counts
  double entropy_bits = 0.0;
  double normalized_entropy = 0.0;
  double gini = 0.0;
  double top10_share = 0.0;
  std::vector<LorenzPoint> lorenz;
};

/// entropy / log2(K); 0 when K == 1.
inline double normalized_entropy(double entropy_bits, std::size_t k)
{
  return k > 1 ? entropy_bits / std::log2(static_cast<double>(k)) : 0.0;
}

inline CoverageReport coverage_report(std::span<const std::uint64_t> counts)
{
  if (counts.empty()) fail(ErrorKind::BadParam, "coverage report needs K >= 1");
  CoverageReport r;
  r.k = counts.size();
  for (auto c : counts) {
    r.total += c;
    if (c > 0) ++r.active_clusters;
  }
  if (r.total == 0) fail(ErrorKind::AllZero, "all cluster counts are zero");

  const double total = static_cast<double>(r.total);
  const double kd = static_cast<double>(r.k);
  const double mean = total / kd;

  double var = 0.0;
  for (auto c : counts) var += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
  r.std_dev = std::sqrt(var / kd);

  for (auto c : counts) {
    if (c == 0) continue;
    const double f = static_cast<double>(c) / total;
    r.entropy_bits -= f * std::log2(f);
  }
  r.normalized_entropy = normalized_entropy(r.entropy_bits, r.k);

  std::vector<std::uint64_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());

  // Sorted form of sum_i sum_j |x_i - x_j| / (2 K sum x).
  double weighted = 0.0;
  for (std::size_t i = 0; i < r.k; ++i)
    weighted += (2.0 * static_cast<double>(i + 1) - kd - 1.0) * static_cast<double>(sorted[i]);
  r.gini = std::max(0.0, weighted / (kd * total));

  const std::size_t top = std::min<std::size_t>(10, r.k);
  std::uint64_t top_sum = 0;
  for (std::size_t i = 0; i < top; ++i) top_sum += sorted[r.k - 1 - i];
  r.top10_share = static_cast<double>(top_sum) / total;

  r.lorenz.reserve(r.k + 1);
  r.lorenz.push_back({0.0, 0.0});
  std::uint64_t cum = 0;
  for (std::size_t i = 0; i < r.k; ++i) {
    cum += sorted[i];
    r.lorenz.push_back({static_cast<double>(i + 1) / kd, static_cast<double>(cum) / total});
  }
  return r;
}

inline std::string lorenz_csv(const CoverageReport& r)
{
  std::string out = "cum_cluster_frac,cum_question_frac\n";
  for (const auto& pt : r.lorenz)
    out += detail::format_real(pt.cluster_fraction) + ',' + detail::format_real(pt.question_fraction) + '\n';
  return out;
}

inline nlohmann::json to_json(const CoverageReport& r)
{
  return {
    {"k", r.k},
    {"total", r.total},
    {"active_clusters", r.active_clusters},
    {"std_dev", r.std_dev},
    {"entropy_bits", r.entropy_bits},
    {"norm_entropy", r.normalized_entropy},
    {"gini", r.gini},
    {"top10_share", r.top10_share},
  };
}

}  // namespace prism
