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

#include <prism/coverage.hpp>
#include <prism/detail/io.hpp>
#include <prism/metrics.hpp>
#include <prism/simulator.hpp>

#include <json.hpp>

#include <set>
#include <string>

namespace prism::sim {

/// Labels attached to every simulator output so stand-ins are never
/// mistaken for the real mechanisms.
inline nlohmann::json proxy_labels()
{
  return {
    {"solver_init_questioner", "proxy: questioner topic logits reset to uniform at each iteration start"},
    {"zpd_repetition", "proxy: embedding-similarity repetition penalty in place of a lexical BLEU penalty"},
    {"train_solver", "proxy: per-topic skill increment per filtered pool question"},
  };
}

inline nlohmann::json to_json(const SimConfig& c)
{
  return {
    {"iterations", c.iterations},
    {"questioner_steps", c.questioner_steps},
    {"solver_steps", c.solver_steps},
    {"group_size", c.group_size},
    {"groups_per_step", c.groups_per_step},
    {"rollouts", c.rollouts},
    {"pool_size", c.pool_size},
    {"mode", std::string(to_string(c.mode))},
    {"solver_init_questioner", c.solver_init_questioner},
    {"warm_start", c.warm_start},
    {"scale_advantages", c.scale_advantages},
    {"reward",
     {{"p_star", c.reward.p_star},
      {"delta", c.reward.delta},
      {"p_min", c.reward.p_min},
      {"p_max", c.reward.p_max},
      {"lambda", c.reward.lambda}}},
    {"gamma", c.gamma},
    {"alpha", c.alpha},
    {"policy",
     {{"epsilon", c.policy.epsilon},
      {"beta", c.policy.beta},
      {"step_size", c.policy.step_size},
      {"epochs", c.policy.epochs}}},
    {"k_sim", c.k_sim},
    {"dim", c.dim},
    {"embed_noise", c.embed_noise},
    {"difficulty_noise", c.difficulty_noise},
    {"initial_skill", c.initial_skill},
    {"learn_rate", c.learn_rate},
    {"steepness", c.steepness},
    {"seed", c.seed},
  };
}

struct ParsedSimConfig {
  SimConfig config;
  bool has_seed = false;
};

namespace detail {

template <class T>
void read_opt(const nlohmann::json& obj, const char* key, T& out, const std::string& prefix)
{
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::BadParam, "config field '" + prefix + key + "' has the wrong type");
  }
}

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known, const std::string& prefix)
{
  for (const auto& [key, _] : obj.items())
    if (!known.count(key)) fail(ErrorKind::BadParam, "unknown config field '" + prefix + key + "'");
}

}  // namespace detail

/// Fields missing from the document keep their defaults; unknown fields are rejected.
inline ParsedSimConfig sim_config_from_json(const nlohmann::json& doc)
{
  if (!doc.is_object()) fail(ErrorKind::BadParam, "simulation config must be a JSON object");
  detail::reject_unknown(doc,
                         {"iterations", "questioner_steps", "solver_steps", "group_size", "groups_per_step", "rollouts",
                          "pool_size", "mode", "solver_init_questioner", "warm_start", "scale_advantages", "reward",
                          "gamma", "alpha", "policy", "k_sim", "dim", "embed_noise", "difficulty_noise",
                          "initial_skill", "learn_rate", "steepness", "seed"},
                         "");
  ParsedSimConfig out;
  SimConfig& c = out.config;
  detail::read_opt(doc, "iterations", c.iterations, "");
  detail::read_opt(doc, "questioner_steps", c.questioner_steps, "");
  detail::read_opt(doc, "solver_steps", c.solver_steps, "");
  detail::read_opt(doc, "group_size", c.group_size, "");
  detail::read_opt(doc, "groups_per_step", c.groups_per_step, "");
  detail::read_opt(doc, "rollouts", c.rollouts, "");
  detail::read_opt(doc, "pool_size", c.pool_size, "");
  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) fail(ErrorKind::BadParam, "config field 'mode' must be a string");
    c.mode = parse_mode(doc["mode"].get<std::string>());
  }
  detail::read_opt(doc, "solver_init_questioner", c.solver_init_questioner, "");
  detail::read_opt(doc, "warm_start", c.warm_start, "");
  detail::read_opt(doc, "scale_advantages", c.scale_advantages, "");
  if (doc.contains("reward")) {
    const auto& r = doc["reward"];
    if (!r.is_object()) fail(ErrorKind::BadParam, "config field 'reward' must be an object");
    detail::reject_unknown(r, {"p_star", "delta", "p_min", "p_max", "lambda"}, "reward.");
    detail::read_opt(r, "p_star", c.reward.p_star, "reward.");
    detail::read_opt(r, "delta", c.reward.delta, "reward.");
    detail::read_opt(r, "p_min", c.reward.p_min, "reward.");
    detail::read_opt(r, "p_max", c.reward.p_max, "reward.");
    detail::read_opt(r, "lambda", c.reward.lambda, "reward.");
  }
  detail::read_opt(doc, "gamma", c.gamma, "");
  detail::read_opt(doc, "alpha", c.alpha, "");
  if (doc.contains("policy")) {
    const auto& p = doc["policy"];
    if (!p.is_object()) fail(ErrorKind::BadParam, "config field 'policy' must be an object");
    detail::reject_unknown(p, {"epsilon", "beta", "step_size", "epochs"}, "policy.");
    detail::read_opt(p, "epsilon", c.policy.epsilon, "policy.");
    detail::read_opt(p, "beta", c.policy.beta, "policy.");
    detail::read_opt(p, "step_size", c.policy.step_size, "policy.");
    detail::read_opt(p, "epochs", c.policy.epochs, "policy.");
  }
  detail::read_opt(doc, "k_sim", c.k_sim, "");
  detail::read_opt(doc, "dim", c.dim, "");
  detail::read_opt(doc, "embed_noise", c.embed_noise, "");
  detail::read_opt(doc, "difficulty_noise", c.difficulty_noise, "");
  detail::read_opt(doc, "initial_skill", c.initial_skill, "");
  detail::read_opt(doc, "learn_rate", c.learn_rate, "");
  detail::read_opt(doc, "steepness", c.steepness, "");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<std::int64_t>() < 0)
      fail(ErrorKind::BadParam, "config field 'seed' must be a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
    out.has_seed = true;
  }
  return out;
}

inline std::string metrics_csv(const SimResult& r)
{
  std::string out = "iteration,mode,active,entropy_bits,norm_entropy,gini,top10_share,pool_size,mean_p\n";
  for (const auto& m : r.iterations) {
    out += std::to_string(m.iteration) + ',' + std::string(to_string(m.mode)) + ',' +
           std::to_string(m.report.active_clusters) + ',' + prism::detail::format_real(m.report.entropy_bits) + ',' +
           prism::detail::format_real(m.report.normalized_entropy) + ',' + prism::detail::format_real(m.report.gini) +
           ',' + prism::detail::format_real(m.report.top10_share) + ',' + std::to_string(m.pool_size) + ',' +
           prism::detail::format_real(m.mean_p) + '\n';
  }
  return out;
}

inline nlohmann::json final_state_json(const SimResult& r)
{
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& m : r.iterations) {
    iterations.push_back({
      {"iteration", m.iteration},
      {"report", prism::to_json(m.report)},
      {"topic_histogram", m.topic_histogram},
      {"coverage_in", m.coverage_in},
      {"coverage_out", m.coverage_out},
      {"pool_size", m.pool_size},
      {"mean_p", m.mean_p},
    });
  }
  return {
    {"config", to_json(r.config)},
    {"proxies", proxy_labels()},
    {"world", {{"k_sim", r.world.k_sim}, {"dim", r.world.dim}, {"topic_difficulty_mean", r.world.topic_difficulty_mean}}},
    {"questioner",
     {{"logits", r.questioner.logits},
      {"probabilities", softmax(r.questioner.logits)},
      {"difficulty_offset", r.questioner.difficulty_offset}}},
    {"solver", {{"skill", r.solver.skill}, {"learn_rate", r.solver.learn_rate}, {"steepness", r.solver.steepness}}},
    {"coverage",
     {{"k", r.coverage.k()},
      {"alpha", r.coverage.alpha()},
      {"gamma", r.coverage.gamma()},
      {"counts", r.coverage.counts()},
      {"batches_seen", r.coverage.batches_seen()}}},
    {"iterations", iterations},
    {"dominant_topic_revisits", dominant_topic_revisits(r)},
  };
}

/// One JSON object per questioner update.
inline std::string updates_jsonl(const SimResult& r)
{
  std::string out;
  for (const auto& u : r.updates) {
    nlohmann::json j = {
      {"iteration", u.iteration},   {"step", u.step},
      {"topics", u.topics},         {"p", u.p},
      {"rewards", u.rewards},       {"advantages", u.advantages},
      {"logits_before", u.logits_before}, {"logits_after", u.logits_after},
    };
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace prism::sim
