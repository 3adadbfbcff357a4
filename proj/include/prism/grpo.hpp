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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace prism {

/// Group-relative advantages: each reward minus the group mean.
inline std::vector<double> advantages(std::span<const double> rewards)
{
  if (rewards.size() < 2) fail(ErrorKind::GroupTooSmall, "a reward group needs at least two members");
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
  std::vector<double> out(rewards.size());
  for (std::size_t g = 0; g < rewards.size(); ++g) out[g] = rewards[g] - mean;
  return out;
}

/// Advantages divided by the group's population std; all zero when the
/// group's rewards are equal.
inline std::vector<double> scaled_advantages(std::span<const double> rewards)
{
  auto a = advantages(rewards);
  double var = 0.0;
  for (double x : a) var += x * x;
  const double sd = std::sqrt(var / static_cast<double>(a.size()));
  for (double& x : a) x = sd > 1e-12 ? x / sd : 0.0;
  return a;
}

inline double clip_ratio(double rho, double epsilon) { return std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon); }

/// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)
inline double clipped_term(double rho, double advantage, double epsilon)
{
  return std::min(rho * advantage, clip_ratio(rho, epsilon) * advantage);
}

/// KL(p || q) for categorical distributions, with 0 * log(0 / q) = 0.
inline double categorical_kl(std::span<const double> p, std::span<const double> q)
{
  if (p.size() != q.size()) fail(ErrorKind::LengthMismatch, "distributions differ in length");
  auto check = [](std::span<const double> d, const char* name) {
    double s = 0.0;
    for (double x : d) {
      if (!(x >= 0.0) || !std::isfinite(x)) fail(ErrorKind::NotNormalized, std::string(name) + " has a negative entry");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) fail(ErrorKind::NotNormalized, std::string(name) + " does not sum to 1");
  };
  check(p, "p");
  check(q, "q");
  double kl = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    if (q[j] == 0.0) fail(ErrorKind::SupportViolation, "q is zero where p is positive at index " + std::to_string(j));
    kl += p[j] * std::log(p[j] / q[j]);
  }
  return kl;
}

inline std::vector<double> log_softmax(std::span<const double> logits)
{
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double x : logits) z += std::exp(x - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) out[j] = logits[j] - lse;
  return out;
}

inline std::vector<double> softmax(std::span<const double> logits)
{
  auto out = log_softmax(logits);
  for (double& x : out) x = std::exp(x);
  return out;
}

struct PolicyUpdateConfig {
  double epsilon = 0.2;
  double beta = 1e-4;
  double step_size = 1.0;
  int epochs = 1;  // >1 reuses the same samples against the pre-step policy

  void validate() const
  {
    if (!(epsilon > 0.0 && epsilon < 1.0)) fail(ErrorKind::BadParam, "epsilon must lie in (0, 1)");
    if (!(beta >= 0.0)) fail(ErrorKind::BadParam, "beta must be non-negative");
    if (!(step_size > 0.0)) fail(ErrorKind::BadParam, "step_size must be positive");
    if (epochs < 1) fail(ErrorKind::BadParam, "epochs must be at least 1");
  }
};

struct PolicySample {
  std::size_t index = 0;
  double advantage = 0.0;
};

namespace detail {

inline void check_policy_args(std::span<const double> logits, std::span<const double> old_logits,
                              std::span<const PolicySample> samples, std::span<const double> ref_logits)
{
  if (logits.empty()) fail(ErrorKind::BadParam, "empty logits");
  if (old_logits.size() != logits.size() || ref_logits.size() != logits.size())
    fail(ErrorKind::LengthMismatch, "logit vectors differ in length");
  if (samples.empty()) fail(ErrorKind::BadParam, "policy update needs at least one sample");
  for (const auto& s : samples)
    if (s.index >= logits.size())
      fail(ErrorKind::IndexOutOfRange, "sample index " + std::to_string(s.index) + " outside the policy support");
}

}  // namespace detail

/// Mean clipped surrogate over samples minus beta * KL(pi || pi_ref), where
/// the importance ratio is taken against the policy given by old_logits.
inline double surrogate_objective(std::span<const double> logits, std::span<const double> old_logits,
                                  std::span<const PolicySample> samples, const PolicyUpdateConfig& cfg,
                                  std::span<const double> ref_logits)
{
  detail::check_policy_args(logits, old_logits, samples, ref_logits);
  const auto logp = log_softmax(logits);
  const auto logp_old = log_softmax(old_logits);
  double total = 0.0;
  for (const auto& s : samples) {
    const double rho = std::exp(logp[s.index] - logp_old[s.index]);
    total += clipped_term(rho, s.advantage, cfg.epsilon);
  }
  double objective = total / static_cast<double>(samples.size());
  if (cfg.beta > 0.0) {
    const auto logq = log_softmax(ref_logits);
    double kl = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) kl += std::exp(logp[j]) * (logp[j] - logq[j]);
    objective -= cfg.beta * kl;
  }
  return objective;
}

/// Exact gradient of surrogate_objective with respect to logits.
inline std::vector<double> surrogate_gradient(std::span<const double> logits, std::span<const double> old_logits,
                                              std::span<const PolicySample> samples, const PolicyUpdateConfig& cfg,
                                              std::span<const double> ref_logits)
{
  detail::check_policy_args(logits, old_logits, samples, ref_logits);
  const std::size_t k = logits.size();
  const auto logp = log_softmax(logits);
  const auto logp_old = log_softmax(old_logits);
  std::vector<double> p(k);
  for (std::size_t j = 0; j < k; ++j) p[j] = std::exp(logp[j]);

  std::vector<double> grad(k, 0.0);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const double rho = std::exp(logp[s.index] - logp_old[s.index]);
    const double clipped = clip_ratio(rho, cfg.epsilon);
    // The min picks the constant clipped branch only when rho is outside the
    // trust interval and that branch is strictly smaller.
    const bool active = rho == clipped || rho * s.advantage <= clipped * s.advantage;
    if (!active) continue;
    // d rho / d logits = rho * (e_i - p)
    const double w = inv_n * s.advantage * rho;
    for (std::size_t j = 0; j < k; ++j) grad[j] -= w * p[j];
    grad[s.index] += w;
  }

  if (cfg.beta > 0.0) {
    const auto logq = log_softmax(ref_logits);
    double kl = 0.0;
    for (std::size_t j = 0; j < k; ++j) kl += p[j] * (logp[j] - logq[j]);
    for (std::size_t j = 0; j < k; ++j) grad[j] -= cfg.beta * p[j] * (logp[j] - logq[j] - kl);
  }
  return grad;
}

/// Gradient ascent on the surrogate, cfg.epochs times over the same samples.
inline std::vector<double> policy_step(std::span<const double> logits, std::span<const PolicySample> samples,
                                       const PolicyUpdateConfig& cfg, std::span<const double> ref_logits)
{
  cfg.validate();
  std::vector<double> theta(logits.begin(), logits.end());
  for (int e = 0; e < cfg.epochs; ++e) {
    const auto g = surrogate_gradient(theta, logits, samples, cfg, ref_logits);
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] += cfg.step_size * g[j];
  }
  return theta;
}

}  // namespace prism
