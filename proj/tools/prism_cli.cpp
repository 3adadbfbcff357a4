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

// prism: build cluster spaces, score batches, audit coverage, run simulations.

#include <prism/commands.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

// CLI11 has no std::optional<path> binding, so flags land in strings first.
std::optional<std::filesystem::path> opt_path(const std::string& s)
{
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"prism: coverage-regularised curriculum engine"};
  app.set_version_flag("--version", std::string(prism::engine_version));
  app.require_subcommand(1);

  prism::cli::BuildClustersArgs bc;
  std::string bc_out, bc_emb;
  std::uint64_t bc_seed = 0;
  auto* build = app.add_subcommand("build-clusters", "partition an embedding corpus with seeded k-means");
  build->add_option("--embeddings", bc_emb, "JSONL corpus")->required();
  build->add_option("--k", bc.k, "number of clusters")->capture_default_str();
  auto* bc_seed_opt = build->add_option("--seed", bc_seed, "random seed");
  build->add_option("--out", bc_out, "cluster-space JSON")->required();
  build->add_option("--max-iters", bc.max_iters)->capture_default_str();
  build->add_option("--tol", bc.tol)->capture_default_str();

  prism::cli::AssignArgs as;
  std::string as_space, as_emb, as_out;
  auto* assign = app.add_subcommand("assign", "map each record to its nearest centroid");
  assign->add_option("--space", as_space)->required();
  assign->add_option("--embeddings", as_emb)->required();
  assign->add_option("--out", as_out, "CSV id,cluster,cosine")->required();

  prism::cli::RewardArgs rw;
  std::string rw_space, rw_state, rw_batch, rw_config, rw_corpus, rw_out, rw_new_state;
  double rw_lambda = 0.0;
  auto* reward = app.add_subcommand("reward", "score a batch and emit the updated coverage state");
  reward->add_option("--space", rw_space)->required();
  reward->add_option("--state", rw_state)->required();
  reward->add_option("--batch", rw_batch, "JSONL: id, verdicts, vector")->required();
  reward->add_option("--config", rw_config, "reward config JSON");
  reward->add_option("--corpus", rw_corpus, "JSONL corpus for batch ids without inline vectors");
  reward->add_option("--out", rw_out, "reward CSV")->required();
  reward->add_option("--new-state", rw_new_state)->required();
  auto* rw_lambda_opt = reward->add_option("--lambda", rw_lambda);
  reward->add_option("--seed", "accepted for uniformity; scoring is deterministic");

  prism::cli::AuditArgs au;
  std::string au_assign, au_counts, au_out, au_lorenz;
  std::size_t au_k = 0;
  auto* audit = app.add_subcommand("audit", "coverage statistics over cluster counts");
  audit->add_option("--assignments", au_assign, "CSV with a cluster column");
  audit->add_option("--counts", au_counts, "JSON counts array");
  auto* au_k_opt = audit->add_option("--k", au_k);
  audit->add_option("--out", au_out, "report JSON")->required();
  audit->add_option("--lorenz", au_lorenz, "Lorenz curve CSV");

  prism::cli::SimulateArgs sm;
  std::string sm_config, sm_out, sm_mode;
  std::uint64_t sm_seed = 0;
  double sm_lambda = 0.0;
  auto* simulate = app.add_subcommand("simulate", "run the questioner/solver co-evolution simulator");
  simulate->add_option("--config", sm_config, "simulation config JSON");
  simulate->add_option("--out", sm_out, "output directory")->required();
  auto* sm_seed_opt = simulate->add_option("--seed", sm_seed);
  simulate->add_option("--mode", sm_mode, "prism | zpd_only | zpd_repetition");
  auto* sm_lambda_opt = simulate->add_option("--lambda", sm_lambda);
  simulate->add_flag("--no-warm-start", sm.no_warm_start, "reset coverage counts every iteration");
  simulate->add_flag("--dump-updates", sm.dump_updates, "write per-step policy updates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : prism::cli::exit_input_error;
  }

  if (build->parsed()) {
    bc.embeddings = bc_emb;
    bc.out = bc_out;
    if (bc_seed_opt->count() > 0) bc.seed = bc_seed;
    return prism::cli::cmd_build_clusters(bc, std::cerr);
  }
  if (assign->parsed()) {
    as.space = as_space;
    as.embeddings = as_emb;
    as.out = as_out;
    return prism::cli::cmd_assign(as, std::cerr);
  }
  if (reward->parsed()) {
    rw.space = rw_space;
    rw.state = rw_state;
    rw.batch = rw_batch;
    rw.config = opt_path(rw_config);
    rw.corpus = opt_path(rw_corpus);
    rw.out = rw_out;
    rw.new_state = rw_new_state;
    if (rw_lambda_opt->count() > 0) rw.lambda = rw_lambda;
    return prism::cli::cmd_reward(rw, std::cerr);
  }
  if (audit->parsed()) {
    au.assignments = opt_path(au_assign);
    au.counts = opt_path(au_counts);
    au.out = au_out;
    au.lorenz = opt_path(au_lorenz);
    if (au_k_opt->count() > 0) au.k = au_k;
    return prism::cli::cmd_audit(au, std::cerr);
  }
  sm.config = opt_path(sm_config);
  sm.out_dir = sm_out;
  if (sm_seed_opt->count() > 0) sm.seed = sm_seed;
  if (!sm_mode.empty()) sm.mode = sm_mode;
  if (sm_lambda_opt->count() > 0) sm.lambda = sm_lambda;
  return prism::cli::cmd_simulate(sm, std::cerr);
}
