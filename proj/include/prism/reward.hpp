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

#include <prism/cluster_space.hpp>
#include <prism/coverage.hpp>
#include <prism/detail/io.hpp>
#include <prism/embedding.hpp>
#include <prism/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace prism {

/// Difficulty window and diversity weight for the questioner reward.
struct RewardConfig {
  double p_star = 0.75;
  double delta = 0.4;
  double p_min = 0.5;
  double p_max = 0.9;
  double lambda = 5.0;

  void validate() const
  {
    if (!(0.0 <= p_min && p_min <= p_star && p_star <= p_max && p_max <= 1.0))
      fail(ErrorKind::BadParam, "need 0 <= p_min <= p_star <= p_max <= 1");
    if (!(delta > 0.0)) fail(ErrorKind::BadParam, "delta must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorKind::BadParam, "lambda must be non-negative");
  }

  bool in_window(double p) const { return p >= p_min && p <= p_max; }
};

/// Fraction of verifier verdicts that are correct.
inline double solvability(const std::vector<bool>& verdicts)
{
  if (verdicts.empty()) fail(ErrorKind::EmptyRollouts, "solvability needs at least one rollout");
  const auto correct = std::count(verdicts.begin(), verdicts.end(), true);
  return static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

/// Triangular ramp peaking at p_star, zeroed outside [p_min, p_max].
inline double zpd_gate(double p, const RewardConfig& cfg = {})
{
  if (!cfg.in_window(p)) return 0.0;
  return std::max(0.0, 1.0 - std::abs(p - cfg.p_star) / cfg.delta);
}

/// gate(p) * (1 + lambda * rarity). Zero whenever the gate is zero.
inline double final_reward(double p, double rarity_bonus, const RewardConfig& cfg = {})
{
  const double gate = zpd_gate(p, cfg);
  if (gate == 0.0) return 0.0;
  return gate * (1.0 + cfg.lambda * rarity_bonus);
}

struct ScoredQuestion {
  std::string id;
  double p = 0.0;
  std::optional<std::size_t> cluster;  // present iff p is inside the window
  double zpd = 0.0;
  std::optional<double> rarity;
  double reward = 0.0;
};

struct BatchItem {
  std::string id;
  std::vector<bool> verdicts;
  EmbeddingVector vector;
};

struct BatchScore {
  std::vector<ScoredQuestion> rows;
  std::vector<std::int64_t> tallies;
  CoverageState state;
};

/// Score one questioner batch against frozen counts, then apply a single
/// EMA update with the in-window tallies.
inline BatchScore score_batch(std::span<const BatchItem> batch, const ClusterSpace& space, const CoverageState& state,
                              const RewardConfig& cfg)
{
  cfg.validate();
  if (state.k() != space.k())
    fail(ErrorKind::LengthMismatch,
         "coverage state has k=" + std::to_string(state.k()) + ", cluster space has k=" + std::to_string(space.k()));

  BatchScore out{{}, std::vector<std::int64_t>(space.k(), 0), state};
  out.rows.reserve(batch.size());
  for (const auto& item : batch) {
    ScoredQuestion row;
    row.id = item.id;
    row.p = solvability(item.verdicts);
    row.zpd = zpd_gate(row.p, cfg);
    if (cfg.in_window(row.p)) {
      const auto c = assign(space, item.vector);
      row.cluster = c;
      row.rarity = state.rarity(c);
      row.reward = final_reward(row.p, *row.rarity, cfg);
      ++out.tallies[c];
    } else if (item.vector.dim() != space.dim()) {
      fail(ErrorKind::DimMismatch, "vector for '" + item.id + "' has dim " + std::to_string(item.vector.dim()));
    }
    out.rows.push_back(std::move(row));
  }
  out.state = state.update_batch(out.tallies);
  return out;
}

struct VerdictList {
  std::string id;
  std::vector<bool> verdicts;
};

inline BatchScore score_batch(std::span<const VerdictList> questions, const ClusterSpace& space,
                              const std::unordered_map<std::string, EmbeddingVector>& vectors,
                              const CoverageState& state, const RewardConfig& cfg)
{
  std::vector<BatchItem> batch;
  batch.reserve(questions.size());
  for (const auto& q : questions) {
    auto it = vectors.find(q.id);
    if (it == vectors.end()) fail(ErrorKind::MissingVector, "no embedding for '" + q.id + "'");
    batch.push_back(BatchItem{q.id, q.verdicts, it->second});
  }
  return score_batch(batch, space, state, cfg);
}

/// Embedding-similarity stand-in for a lexical repetition penalty:
/// 1 - (max cosine to any other batch member), clamped to [0, 1].
inline std::vector<double> repetition_penalty(std::span<const EmbeddingVector> batch)
{
  std::vector<double> factors(batch.size(), 1.0);
  if (batch.size() < 2) return factors;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    double nearest = -1.0;
    for (std::size_t j = 0; j < batch.size(); ++j)
      if (j != i) nearest = std::max(nearest, cosine(batch[i], batch[j]));
    factors[i] = std::clamp(1.0 - nearest, 0.0, 1.0);
  }
  return factors;
}

inline std::string reward_csv(std::span<const ScoredQuestion> rows)
{
  std::string out = "id,p,cluster,zpd,rarity,reward\n";
  for (const auto& r : rows) {
    out += detail::csv_field(r.id) + ',' + detail::format_real(r.p) + ',';
    if (r.cluster) out += std::to_string(*r.cluster);
    out += ',' + detail::format_real(r.zpd) + ',';
    if (r.rarity) out += detail::format_real(*r.rarity);
    out += ',' + detail::format_real(r.reward) + '\n';
  }
  return out;
}

}  // namespace prism
