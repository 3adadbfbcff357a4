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

// End-to-end walk through the library: cluster a synthetic corpus, score one
// questioner batch, audit the resulting coverage, then run a short simulation
// in each mode.

#include <prism/prism.hpp>

#include <cstdio>
#include <vector>

int main()
{
  // Three noisy directions in 4-d, twelve points each.
  prism::SplitMix64 rng(7);
  const std::vector<std::vector<double>> axes{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 1}};
  std::vector<prism::EmbeddingVector> corpus;
  for (const auto& axis : axes)
    for (int i = 0; i < 12; ++i) {
      std::vector<double> v = axis;
      for (double& x : v) x += 0.05 * rng.normal();
      corpus.push_back(prism::normalize(v));
    }

  auto fit = prism::kmeans_fit(std::span<const prism::EmbeddingVector>(corpus), {3, 42, 100, 1e-9});
  std::printf("k-means: %d iterations, objective %.6f\n", fit.iterations, fit.objective_trace.back());

  const prism::RewardConfig cfg;
  auto state = prism::CoverageState::init(fit.space.k());
  std::vector<prism::BatchItem> batch;
  const std::vector<std::vector<bool>> verdicts{
    {1, 1, 1, 0, 1, 1, 0, 1}, {1, 1, 1, 1, 1, 1, 1, 1}, {1, 0, 1, 0, 1, 1, 0, 1}, {1, 1, 0, 1, 1, 1, 0, 1}};
  for (std::size_t i = 0; i < verdicts.size(); ++i)
    batch.push_back({"q" + std::to_string(i), verdicts[i], corpus[i * 9]});
  const auto scored = prism::score_batch(batch, fit.space, state, cfg);
  std::printf("\n%s", prism::reward_csv(scored.rows).c_str());

  std::vector<std::uint64_t> counts(fit.space.k(), 0);
  for (auto label : fit.labels) ++counts[label];
  const auto report = prism::coverage_report(counts);
  std::printf("\ncorpus coverage: active %zu, entropy %.4f bits, gini %.4f\n", report.active_clusters,
              report.entropy_bits, report.gini);

  std::printf("\nmode            active  norm_entropy  gini\n");
  for (auto mode : {prism::sim::Mode::prism, prism::sim::Mode::zpd_only, prism::sim::Mode::zpd_repetition}) {
    prism::sim::SimConfig sc;
    sc.mode = mode;
    sc.seed = 1;
    const auto r = prism::sim::run_coevolution(sc);
    const auto& last = r.iterations.back().report;
    std::printf("%-15s %6zu  %12.4f  %.4f\n", std::string(prism::sim::to_string(mode)).c_str(), last.active_clusters,
                last.normalized_entropy, last.gini);
  }
}
