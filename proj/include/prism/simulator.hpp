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
#include <prism/grpo.hpp>
#include <prism/metrics.hpp>
#include <prism/reward.hpp>
#include <prism/rng.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prism::sim {

enum class Mode { prism, zpd_only, zpd_repetition };

inline constexpr std::array<std::string_view, 3> mode_names{"prism", "zpd_only", "zpd_repetition"};

inline std::string_view to_string(Mode m) { return mode_names[static_cast<std::size_t>(m)]; }

inline Mode parse_mode(std::string_view name)
{
  for (std::size_t i = 0; i < mode_names.size(); ++i)
    if (mode_names[i] == name) return static_cast<Mode>(i);
  fail(ErrorKind::BadParam, "unknown mode '" + std::string(name) + "'; valid modes: prism, zpd_only, zpd_repetition");
}

/// Synthetic problem landscape: one unit centroid and one mean difficulty
/// per topic.
struct SimWorld {
  std::size_t k_sim = 0;
  std::size_t dim = 0;
  std::vector<EmbeddingVector> topic_centroids;
  std::vector<double> topic_difficulty_mean;
  double embed_noise = 0.0;
  double difficulty_noise = 0.0;
  std::uint64_t seed = 0;
};

/// Categorical topic policy.
struct QuestionerState {
  std::vector<double> logits;
  std::vector<double> difficulty_offset;

  static QuestionerState uniform(std::size_t k) { return {std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)}; }
};

/// Per-topic competence; success probability is logistic in skill - difficulty.
struct SolverState {
  std::vector<double> skill;
  double learn_rate = 0.004;
  double steepness = 5.0;
};

struct Question {
  std::size_t topic;
  double difficulty;
  EmbeddingVector embedding;
};

/// Difficulty means are evenly spaced over [0.2, 0.9] and then shuffled
/// across topics; centroids are normalized Gaussian draws.
inline SimWorld generate_world(std::size_t k_sim, std::size_t dim, std::uint64_t seed, double embed_noise = 0.1,
                               double difficulty_noise = 0.15)
{
  if (k_sim < 2) fail(ErrorKind::BadParam, "k_sim must be at least 2");
  if (dim < 2) fail(ErrorKind::BadParam, "dim must be at least 2");
  if (!(embed_noise >= 0.0)) fail(ErrorKind::BadParam, "embed_noise must be non-negative");
  if (!(difficulty_noise >= 0.0)) fail(ErrorKind::BadParam, "difficulty_noise must be non-negative");

  SimWorld w;
  w.k_sim = k_sim;
  w.dim = dim;
  w.embed_noise = embed_noise;
  w.difficulty_noise = difficulty_noise;
  w.seed = seed;

  auto rng = substream(seed, {0x776f726c64ULL});
  std::vector<double> raw(dim);
  while (w.topic_centroids.size() < k_sim) {
    for (double& x : raw) x = rng.normal();
    if (l2_norm(raw) < 1e-6) continue;
    auto c = normalize(raw);
    bool distinct = true;
    for (const auto& other : w.topic_centroids)
      if (cosine(c, other) > 1.0 - 1e-9) distinct = false;
    if (distinct) w.topic_centroids.push_back(std::move(c));
  }

  w.topic_difficulty_mean.resize(k_sim);
  for (std::size_t i = 0; i < k_sim; ++i)
    w.topic_difficulty_mean[i] = 0.2 + 0.7 * static_cast<double>(i) / static_cast<double>(k_sim - 1);
  for (std::size_t i = k_sim - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(w.topic_difficulty_mean[i], w.topic_difficulty_mean[j]);
  }
  return w;
}

inline std::size_t sample_categorical(std::span<const double> probs, SplitMix64& rng)
{
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    acc += probs[j];
    if (u < acc) return j;
  }
  // Rounding left u above the last partial sum; take the last supported topic.
  for (std::size_t j = probs.size(); j-- > 0;)
    if (probs[j] > 0.0) return j;
  return probs.size() - 1;
}

inline Question sample_question(std::span<const double> topic_probs, const QuestionerState& questioner,
                                const SimWorld& world, SplitMix64& rng)
{
  const std::size_t topic = sample_categorical(topic_probs, rng);
  const double noise = world.difficulty_noise > 0.0 ? world.difficulty_noise * rng.normal() : 0.0;
  const double difficulty =
    std::clamp(world.topic_difficulty_mean[topic] + questioner.difficulty_offset[topic] + noise, 0.0, 1.0);
  if (world.embed_noise == 0.0) return {topic, difficulty, world.topic_centroids[topic]};
  const auto centroid = world.topic_centroids[topic].components();
  std::vector<double> v(centroid.begin(), centroid.end());
  for (double& x : v) x += world.embed_noise * rng.normal();
  return {topic, difficulty, normalize(v)};
}

/// topic ~ softmax(logits); difficulty and embedding jittered around the topic.
inline Question sample_question(const QuestionerState& questioner, const SimWorld& world, SplitMix64& rng)
{
  const auto probs = softmax(questioner.logits);
  return sample_question(probs, questioner, world, rng);
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double success_probability(const SolverState& solver, std::size_t topic, double difficulty)
{
  return logistic(solver.steepness * (solver.skill[topic] - difficulty));
}

inline std::vector<bool> rollout_verdicts(const SolverState& solver, const Question& q, int n, SplitMix64& rng)
{
  if (n < 1) fail(ErrorKind::EmptyRollouts, "rollouts must be at least 1");
  const double ps = success_probability(solver, q.topic, q.difficulty);
  std::vector<bool> v(static_cast<std::size_t>(n));
  for (auto&& x : v) x = rng.uniform() < ps;
  return v;
}

struct PoolQuestion {
  std::size_t topic = 0;
  double difficulty = 0.0;
};

/// One skill increment toward 1 per pool question of a topic.
inline SolverState train_solver(SolverState solver, std::span<const PoolQuestion> pool)
{
  for (const auto& q : pool) {
    double& s = solver.skill.at(q.topic);
    s = std::clamp(s + solver.learn_rate * (1.0 - s), 0.0, 1.0);
  }
  return solver;
}

struct SimConfig {
  int iterations = 4;
  int questioner_steps = 6;
  int solver_steps = 20;
  int group_size = 8;
  int groups_per_step = 32;  // a questioner batch holds this many groups of group_size
  int rollouts = 8;
  int pool_size = 500;
  bool scale_advantages = true;  // divide each group's advantages by its std
  Mode mode = Mode::prism;
  bool solver_init_questioner = true;
  bool warm_start = true;
  RewardConfig reward{};
  double gamma = CoverageState::default_gamma;
  double alpha = CoverageState::default_alpha;
  PolicyUpdateConfig policy{0.2, 1e-4, 12.0, 1};
  std::size_t k_sim = 32;
  std::size_t dim = 16;
  double embed_noise = 0.1;
  double difficulty_noise = 0.15;
  double initial_skill = 0.6;
  double learn_rate = 0.004;
  double steepness = 5.0;
  std::uint64_t seed = 0;

  void validate() const
  {
    if (iterations < 1 || questioner_steps < 1 || solver_steps < 1 || rollouts < 1 || pool_size < 1)
      fail(ErrorKind::BadParam, "iteration, step, rollout and pool counts must be positive");
    if (group_size < 2) fail(ErrorKind::BadParam, "group_size must be at least 2");
    if (groups_per_step < 1) fail(ErrorKind::BadParam, "groups_per_step must be positive");
    reward.validate();
    policy.validate();
    if (!(alpha > 0.0)) fail(ErrorKind::BadParam, "alpha must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) fail(ErrorKind::BadParam, "gamma must lie in (0, 1)");
    if (k_sim < 2 || dim < 2) fail(ErrorKind::BadParam, "k_sim and dim must be at least 2");
    if (k_sim > 1'000'000 || dim > 100'000) fail(ErrorKind::BadParam, "k_sim or dim is implausibly large");
    if (!(initial_skill >= 0.0 && initial_skill <= 1.0)) fail(ErrorKind::BadParam, "initial_skill must lie in [0, 1]");
    if (!(learn_rate > 0.0)) fail(ErrorKind::BadParam, "learn_rate must be positive");
    if (!(steepness > 0.0)) fail(ErrorKind::BadParam, "steepness must be positive");
  }
};

struct IterationMetrics {
  int iteration = 0;
  Mode mode = Mode::prism;
  CoverageReport report;
  std::size_t pool_size = 0;  // questions that passed the solvability filter
  double mean_p = 0.0;        // over the filtered pool
  std::vector<std::uint64_t> topic_histogram;
  std::vector<double> coverage_in;
  std::vector<double> coverage_out;
};

struct UpdateRecord {
  int iteration = 0;
  int step = 0;
  std::vector<std::size_t> topics;
  std::vector<double> p;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> logits_before;
  std::vector<double> logits_after;
};

struct SimResult {
  SimConfig config;
  SimWorld world;
  std::vector<IterationMetrics> iterations;
  QuestionerState questioner;
  SolverState solver;
  CoverageState coverage = CoverageState::init(1);
  std::vector<UpdateRecord> updates;
};

namespace detail {

enum : std::uint64_t { stream_questioner = 1, stream_pool = 2 };

inline std::vector<double> step_rewards(const SimConfig& cfg, const std::vector<Question>& batch,
                                        const std::vector<std::vector<bool>>& verdicts, const ClusterSpace& topics,
                                        CoverageState& coverage, std::vector<double>& p)
{
  const std::size_t g = batch.size();
  std::vector<double> rewards(g, 0.0);
  p.assign(g, 0.0);
  for (std::size_t i = 0; i < g; ++i) p[i] = solvability(verdicts[i]);

  switch (cfg.mode) {
    case Mode::prism: {
      std::vector<BatchItem> items;
      items.reserve(g);
      for (std::size_t i = 0; i < g; ++i) items.push_back({std::to_string(i), verdicts[i], batch[i].embedding});
      auto scored = score_batch(items, topics, coverage, cfg.reward);
      for (std::size_t i = 0; i < g; ++i) rewards[i] = scored.rows[i].reward;
      coverage = std::move(scored.state);
      break;
    }
    case Mode::zpd_only:
      for (std::size_t i = 0; i < g; ++i) rewards[i] = zpd_gate(p[i], cfg.reward);
      break;
    case Mode::zpd_repetition: {
      std::vector<EmbeddingVector> vecs;
      vecs.reserve(g);
      for (const auto& q : batch) vecs.push_back(q.embedding);
      const auto penalty = repetition_penalty(vecs);
      for (std::size_t i = 0; i < g; ++i) rewards[i] = zpd_gate(p[i], cfg.reward) * penalty[i];
      break;
    }
  }
  return rewards;
}

}  // namespace detail

/// Alternating questioner/solver loop over a synthetic world.
///
/// Each iteration runs questioner_steps GRPO updates on groups of
/// group_size questions, then draws pool_size questions from the updated
/// questioner, keeps those inside the solvability window and trains the
/// solver on them. The coverage report of an iteration is taken over the
/// topic histogram of all pool_size generated questions.
inline SimResult run_coevolution(const SimConfig& cfg, bool record_updates = false)
{
  cfg.validate();
  SimResult res;
  res.config = cfg;
  res.world = generate_world(cfg.k_sim, cfg.dim, cfg.seed, cfg.embed_noise, cfg.difficulty_noise);
  const SimWorld& world = res.world;
  const ClusterSpace topics(world.topic_centroids, {{"source", "simulator topic centroids"}});

  res.questioner = QuestionerState::uniform(cfg.k_sim);
  res.solver = SolverState{std::vector<double>(cfg.k_sim, cfg.initial_skill), cfg.learn_rate, cfg.steepness};
  res.coverage = CoverageState::init(cfg.k_sim, cfg.alpha, cfg.gamma);

  const auto g = static_cast<std::size_t>(cfg.group_size);
  const auto batch_size = g * static_cast<std::size_t>(cfg.groups_per_step);
  for (int t = 1; t <= cfg.iterations; ++t) {
    const auto ti = static_cast<std::uint64_t>(t);
    // Stand-in for re-deriving the questioner from the solver: the solver
    // has no generative head here, so the topic prior resets to uniform.
    if (cfg.solver_init_questioner) res.questioner = QuestionerState::uniform(cfg.k_sim);
    if (!cfg.warm_start || t == 1) res.coverage = CoverageState::init(cfg.k_sim, cfg.alpha, cfg.gamma);

    IterationMetrics m;
    m.iteration = t;
    m.mode = cfg.mode;
    m.coverage_in = res.coverage.counts();

    const std::vector<double> ref_logits = res.questioner.logits;
    for (int s = 0; s < cfg.questioner_steps; ++s) {
      const auto si = static_cast<std::uint64_t>(s);
      const auto probs = softmax(res.questioner.logits);
      std::vector<Question> batch;
      std::vector<std::vector<bool>> verdicts;
      batch.reserve(batch_size);
      verdicts.reserve(batch_size);
      for (std::size_t i = 0; i < batch_size; ++i) {
        auto rng = substream(cfg.seed, {detail::stream_questioner, ti, si, i});
        batch.push_back(sample_question(probs, res.questioner, world, rng));
        verdicts.push_back(rollout_verdicts(res.solver, batch.back(), cfg.rollouts, rng));
      }

      std::vector<double> p;
      const auto rewards = detail::step_rewards(cfg, batch, verdicts, topics, res.coverage, p);
      // Advantages are relative to each group's own mean.
      std::vector<double> adv(batch_size);
      for (std::size_t begin = 0; begin < batch_size; begin += g) {
        const auto group = std::span<const double>(rewards).subspan(begin, g);
        const auto a = cfg.scale_advantages ? scaled_advantages(group) : advantages(group);
        std::copy(a.begin(), a.end(), adv.begin() + static_cast<std::ptrdiff_t>(begin));
      }
      std::vector<PolicySample> samples(batch_size);
      for (std::size_t i = 0; i < batch_size; ++i) samples[i] = {batch[i].topic, adv[i]};
      auto next = policy_step(res.questioner.logits, samples, cfg.policy, ref_logits);

      if (record_updates) {
        UpdateRecord u{t, s + 1, {}, p, rewards, adv, res.questioner.logits, next};
        for (const auto& q : batch) u.topics.push_back(q.topic);
        res.updates.push_back(std::move(u));
      }
      res.questioner.logits = std::move(next);
    }
    m.coverage_out = res.coverage.counts();

    const auto probs = softmax(res.questioner.logits);
    std::vector<PoolQuestion> pool;
    m.topic_histogram.assign(cfg.k_sim, 0);
    double p_sum = 0.0;
    for (int i = 0; i < cfg.pool_size; ++i) {
      auto rng = substream(cfg.seed, {detail::stream_pool, ti, static_cast<std::uint64_t>(i)});
      const auto q = sample_question(probs, res.questioner, world, rng);
      const double p = solvability(rollout_verdicts(res.solver, q, cfg.rollouts, rng));
      ++m.topic_histogram[q.topic];
      if (cfg.reward.in_window(p)) {
        pool.push_back({q.topic, q.difficulty});
        p_sum += p;
      }
    }
    m.pool_size = pool.size();
    m.mean_p = pool.empty() ? 0.0 : p_sum / static_cast<double>(pool.size());
    m.report = coverage_report(m.topic_histogram);

    // The filtered pool is consumed in solver_steps sequential minibatches.
    const std::size_t steps = static_cast<std::size_t>(cfg.solver_steps);
    const std::size_t chunk = (pool.size() + steps - 1) / steps;
    for (std::size_t begin = 0; begin < pool.size(); begin += chunk) {
      const std::size_t end = std::min(pool.size(), begin + chunk);
      res.solver = train_solver(std::move(res.solver), std::span<const PoolQuestion>(pool).subspan(begin, end - begin));
    }
    res.iterations.push_back(std::move(m));
  }
  return res;
}

/// Pool questions in iteration t that land on the most frequent pool topic
/// of iteration t-1 (index 0 of the result is iteration 2).
inline std::vector<std::uint64_t> dominant_topic_revisits(const SimResult& r)
{
  std::vector<std::uint64_t> out;
  for (std::size_t t = 1; t < r.iterations.size(); ++t) {
    const auto& prev = r.iterations[t - 1].topic_histogram;
    const auto dominant = static_cast<std::size_t>(std::max_element(prev.begin(), prev.end()) - prev.begin());
    out.push_back(r.iterations[t].topic_histogram[dominant]);
  }
  return out;
}

}  // namespace prism::sim
