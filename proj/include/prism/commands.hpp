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

// Command implementations behind the `prism` executable. Each returns the
// process exit code: 0 success, 2 input or contract error, 3 numeric failure.

#include <prism/cluster_space.hpp>
#include <prism/coverage.hpp>
#include <prism/detail/io.hpp>
#include <prism/embedding.hpp>
#include <prism/error.hpp>
#include <prism/metrics.hpp>
#include <prism/reward.hpp>
#include <prism/simulator.hpp>
#include <prism/simulator_io.hpp>
#include <prism/version.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace prism::cli {

namespace fs = std::filesystem;

inline constexpr int exit_ok = 0;
inline constexpr int exit_input_error = 2;
inline constexpr int exit_numeric_failure = 3;

namespace detail {

template <class Body>
int run_guarded(const char* command, std::ostream& err, Body&& body)
{
  try {
    body();
    return exit_ok;
  } catch (const Error& e) {
    err << command << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::NumericFailure ? exit_numeric_failure : exit_input_error;
  } catch (const std::exception& e) {
    err << command << ": " << e.what() << '\n';
    return exit_input_error;
  }
}

inline bool same_file(const fs::path& a, const fs::path& b)
{
  std::error_code ec;
  return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
}

inline void refuse_overwrite(const fs::path& output, std::initializer_list<fs::path> inputs)
{
  for (const auto& in : inputs)
    if (same_file(output, in)) fail(ErrorKind::BadParam, "output " + output.string() + " would overwrite an input file");
}

inline std::vector<QuestionRecord> load_corpus_file(const fs::path& path)
{
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  return load_corpus(in);
}

class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

  nlohmann::json config = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();

  void write(const fs::path& path) const
  {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    nlohmann::json doc = {
      {"command", command_},
      {"engine_version", engine_version},
      {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
      {"config", config},
      {"inputs", inputs},
      {"outputs", outputs},
      {"duration_seconds", seconds},
    };
    for (const auto& [k, v] : extra.items()) doc[k] = v;
    prism::detail::write_file(path, doc.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
};

inline fs::path manifest_path_for(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

// Split one CSV record, honouring double-quoted fields.
inline std::vector<std::string> split_csv(const std::string& line)
{
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

inline RewardConfig reward_config_from_json(const nlohmann::json& doc)
{
  if (!doc.is_object()) fail(ErrorKind::BadParam, "reward config must be a JSON object");
  RewardConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_number()) fail(ErrorKind::BadParam, "reward config field '" + key + "' must be a number");
    const double v = value.get<double>();
    if (key == "p_star") cfg.p_star = v;
    else if (key == "delta") cfg.delta = v;
    else if (key == "p_min") cfg.p_min = v;
    else if (key == "p_max") cfg.p_max = v;
    else if (key == "lambda") cfg.lambda = v;
    else fail(ErrorKind::BadParam, "unknown reward config field '" + key + "'");
  }
  return cfg;
}

inline nlohmann::json to_json(const RewardConfig& c)
{
  return {{"p_star", c.p_star}, {"delta", c.delta}, {"p_min", c.p_min}, {"p_max", c.p_max}, {"lambda", c.lambda}};
}

}  // namespace detail

struct BuildClustersArgs {
  fs::path embeddings;
  std::size_t k = 128;
  std::optional<std::uint64_t> seed;
  fs::path out;
  int max_iters = 100;
  double tol = 1e-6;
};

inline int cmd_build_clusters(const BuildClustersArgs& a, std::ostream& err)
{
  return detail::run_guarded("build-clusters", err, [&] {
    if (!a.seed) fail(ErrorKind::BadParam, "--seed is required");
    detail::refuse_overwrite(a.out, {a.embeddings});
    detail::Manifest manifest("build-clusters");
    const auto corpus = detail::load_corpus_file(a.embeddings);
    auto fit = kmeans_fit(std::span<const QuestionRecord>(corpus), KMeansOptions{a.k, *a.seed, a.max_iters, a.tol});
    auto provenance = fit.space.provenance();
    provenance["corpus"] = a.embeddings.filename().string();
    provenance["objective"] = fit.objective_trace.empty() ? 0.0 : fit.objective_trace.back();
    const ClusterSpace space(fit.space.centroids(), std::move(provenance));
    save_space(space, a.out);

    manifest.seed = a.seed;
    manifest.config = {{"k", a.k}, {"max_iters", a.max_iters}, {"tol", a.tol}};
    manifest.inputs = {{"embeddings", a.embeddings.string()}};
    manifest.outputs = {{"cluster_space", a.out.string()}};
    manifest.write(detail::manifest_path_for(a.out));
  });
}

struct AssignArgs {
  fs::path space;
  fs::path embeddings;
  fs::path out;
};

inline int cmd_assign(const AssignArgs& a, std::ostream& err)
{
  return detail::run_guarded("assign", err, [&] {
    detail::refuse_overwrite(a.out, {a.space, a.embeddings});
    detail::Manifest manifest("assign");
    const auto space = load_space(a.space);
    const auto corpus = detail::load_corpus_file(a.embeddings);
    std::string csv = "id,cluster,cosine\n";
    for (const auto& rec : corpus) {
      const auto hit = assign_scored(space, rec.vector);
      csv += prism::detail::csv_field(rec.id) + ',' + std::to_string(hit.cluster) + ',' +
             prism::detail::format_real(hit.cosine) + '\n';
    }
    prism::detail::write_file(a.out, csv);

    manifest.inputs = {{"space", a.space.string()}, {"embeddings", a.embeddings.string()}};
    manifest.outputs = {{"assignments", a.out.string()}};
    manifest.write(detail::manifest_path_for(a.out));
  });
}

struct RewardArgs {
  fs::path space;
  fs::path state;
  fs::path batch;
  std::optional<fs::path> config;
  std::optional<fs::path> corpus;  // vectors for batch lines without an inline "vector"
  fs::path out;
  fs::path new_state;
  std::optional<double> lambda;
};

/// Batch file: one JSON object per line with "id", "verdicts" (booleans or
/// 0/1) and either an inline "vector" or an id present in the corpus file.
inline std::vector<BatchItem> load_batch(std::istream& in, const std::unordered_map<std::string, EmbeddingVector>& corpus)
{
  std::vector<BatchItem> batch;
  std::unordered_map<std::string, bool> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "batch line " + std::to_string(lineno);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::ParseError, where + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string())
      fail(ErrorKind::ParseError, where + ": 'id' must be a string");
    const auto id = doc["id"].get<std::string>();
    if (seen[id]) fail(ErrorKind::DuplicateId, where + ": duplicate id '" + id + "'");
    seen[id] = true;
    if (!doc.contains("verdicts") || !doc["verdicts"].is_array())
      fail(ErrorKind::ParseError, where + ": 'verdicts' must be an array");
    std::vector<bool> verdicts;
    for (const auto& v : doc["verdicts"]) {
      if (v.is_boolean()) verdicts.push_back(v.get<bool>());
      else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) verdicts.push_back(v.get<int>() == 1);
      else fail(ErrorKind::ParseError, where + ": verdicts must be booleans or 0/1");
    }
    if (verdicts.empty()) fail(ErrorKind::EmptyRollouts, where + ": no verdicts for '" + id + "'");
    if (doc.contains("vector")) {
      std::vector<double> raw;
      if (!doc["vector"].is_array()) fail(ErrorKind::ParseError, where + ": 'vector' must be an array");
      for (const auto& x : doc["vector"]) {
        if (!x.is_number()) fail(ErrorKind::ParseError, where + ": 'vector' must hold numbers");
        raw.push_back(x.get<double>());
      }
      batch.push_back({id, std::move(verdicts), normalize(raw)});
    } else {
      auto it = corpus.find(id);
      if (it == corpus.end()) fail(ErrorKind::MissingVector, where + ": no embedding for '" + id + "'");
      batch.push_back({id, std::move(verdicts), it->second});
    }
  }
  return batch;
}

inline int cmd_reward(const RewardArgs& a, std::ostream& err)
{
  return detail::run_guarded("reward", err, [&] {
    std::vector<fs::path> inputs{a.space, a.state, a.batch};
    if (a.config) inputs.push_back(*a.config);
    if (a.corpus) inputs.push_back(*a.corpus);
    for (const auto& out : {a.out, a.new_state})
      for (const auto& in : inputs)
        if (detail::same_file(out, in)) fail(ErrorKind::BadParam, "output " + out.string() + " would overwrite an input file");
    detail::Manifest manifest("reward");

    RewardConfig cfg;
    if (a.config)
      cfg = detail::reward_config_from_json(prism::detail::parse_json_document(prism::detail::read_file(*a.config), "reward config"));
    if (a.lambda) cfg.lambda = *a.lambda;
    cfg.validate();

    const auto space = load_space(a.space);
    const auto state = load_state(a.state);
    if (state.k() != space.k())
      fail(ErrorKind::LengthMismatch,
           "coverage state k=" + std::to_string(state.k()) + " does not match cluster space k=" + std::to_string(space.k()));

    std::unordered_map<std::string, EmbeddingVector> vectors;
    if (a.corpus)
      for (auto& rec : detail::load_corpus_file(*a.corpus)) vectors.emplace(rec.id, rec.vector);
    std::ifstream in(a.batch);
    if (!in) fail(ErrorKind::IoError, "cannot open " + a.batch.string());
    const auto batch = load_batch(in, vectors);

    const auto scored = score_batch(batch, space, state, cfg);
    prism::detail::write_file(a.out, reward_csv(scored.rows));
    save_state(scored.state, a.new_state);

    manifest.config = detail::to_json(cfg);
    manifest.inputs = {{"space", a.space.string()}, {"state", a.state.string()}, {"batch", a.batch.string()}};
    if (a.config) manifest.inputs["config"] = a.config->string();
    if (a.corpus) manifest.inputs["corpus"] = a.corpus->string();
    manifest.outputs = {{"rewards", a.out.string()}, {"state", a.new_state.string()}};
    manifest.extra["tallies"] = scored.tallies;
    manifest.write(detail::manifest_path_for(a.out));
  });
}

struct AuditArgs {
  std::optional<fs::path> assignments;  // CSV with a "cluster" column
  std::optional<fs::path> counts;       // JSON array, or object with "counts"
  std::optional<std::size_t> k;
  fs::path out;
  std::optional<fs::path> lorenz;
};

inline std::vector<std::uint64_t> counts_from_assignments(std::istream& in, std::size_t k)
{
  std::vector<std::uint64_t> counts(k, 0);
  std::string line;
  if (!std::getline(in, line)) return counts;
  const auto header = detail::split_csv(line);
  const auto col = std::find(header.begin(), header.end(), "cluster");
  if (col == header.end()) fail(ErrorKind::FormatError, "assignments CSV has no 'cluster' column");
  const auto idx = static_cast<std::size_t>(col - header.begin());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() <= idx) fail(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": missing cluster field");
    if (fields[idx].empty()) continue;  // out-of-window rows in reward CSVs
    std::size_t pos = 0;
    unsigned long long c = 0;
    try {
      c = std::stoull(fields[idx], &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != fields[idx].size() || fields[idx].front() == '-')
      fail(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": bad cluster '" + fields[idx] + "'");
    if (c >= k)
      fail(ErrorKind::IndexOutOfRange, "line " + std::to_string(lineno) + ": cluster " + fields[idx] + " >= k");
    ++counts[c];
  }
  return counts;
}

inline std::vector<std::uint64_t> counts_from_json(const nlohmann::json& doc)
{
  const nlohmann::json* arr = &doc;
  if (doc.is_object()) {
    if (!doc.contains("counts")) fail(ErrorKind::FormatError, "missing field 'counts'");
    arr = &doc["counts"];
  }
  if (!arr->is_array()) fail(ErrorKind::FormatError, "counts must be an array");
  std::vector<std::uint64_t> counts;
  for (const auto& x : *arr) {
    if (!x.is_number_integer() || x.get<std::int64_t>() < 0)
      fail(ErrorKind::FormatError, "counts must be non-negative integers");
    counts.push_back(x.get<std::uint64_t>());
  }
  return counts;
}

inline int cmd_audit(const AuditArgs& a, std::ostream& err)
{
  return detail::run_guarded("audit", err, [&] {
    if (a.assignments.has_value() == a.counts.has_value())
      fail(ErrorKind::BadParam, "give exactly one of --assignments or --counts");
    std::vector<fs::path> inputs;
    if (a.assignments) inputs.push_back(*a.assignments);
    if (a.counts) inputs.push_back(*a.counts);
    for (const auto& in : inputs) {
      if (detail::same_file(a.out, in)) fail(ErrorKind::BadParam, "output would overwrite an input file");
      if (a.lorenz && detail::same_file(*a.lorenz, in)) fail(ErrorKind::BadParam, "output would overwrite an input file");
    }
    detail::Manifest manifest("audit");

    std::vector<std::uint64_t> counts;
    if (a.assignments) {
      if (!a.k || *a.k < 1) fail(ErrorKind::BadParam, "--k is required with --assignments");
      std::ifstream in(*a.assignments);
      if (!in) fail(ErrorKind::IoError, "cannot open " + a.assignments->string());
      counts = counts_from_assignments(in, *a.k);
    } else {
      counts = counts_from_json(prism::detail::parse_json_document(prism::detail::read_file(*a.counts), "counts"));
      if (a.k && *a.k != counts.size())
        fail(ErrorKind::LengthMismatch, "counts file has " + std::to_string(counts.size()) + " entries, --k is " +
                                          std::to_string(*a.k));
    }
    const auto report = coverage_report(counts);
    prism::detail::write_file(a.out, to_json(report).dump(2) + "\n");
    if (a.lorenz) prism::detail::write_file(*a.lorenz, lorenz_csv(report));

    manifest.config = {{"k", counts.size()}};
    manifest.inputs = a.assignments ? nlohmann::json{{"assignments", a.assignments->string()}}
                                    : nlohmann::json{{"counts", a.counts->string()}};
    manifest.outputs = {{"report", a.out.string()}};
    if (a.lorenz) manifest.outputs["lorenz"] = a.lorenz->string();
    manifest.write(detail::manifest_path_for(a.out));
  });
}

struct SimulateArgs {
  std::optional<fs::path> config;
  fs::path out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<double> lambda;
  bool no_warm_start = false;
  bool dump_updates = false;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& err)
{
  return detail::run_guarded("simulate", err, [&] {
    detail::Manifest manifest("simulate");
    sim::ParsedSimConfig parsed;
    if (a.config)
      parsed = sim::sim_config_from_json(prism::detail::parse_json_document(prism::detail::read_file(*a.config), "simulation config"));
    auto& cfg = parsed.config;
    if (a.seed) cfg.seed = *a.seed;
    if (!a.seed && !parsed.has_seed) fail(ErrorKind::BadParam, "a seed is required (--seed or config field 'seed')");
    if (a.mode) cfg.mode = sim::parse_mode(*a.mode);
    if (a.lambda) cfg.reward.lambda = *a.lambda;
    if (a.no_warm_start) cfg.warm_start = false;
    cfg.validate();

    const auto result = sim::run_coevolution(cfg, a.dump_updates);
    prism::detail::write_file(a.out_dir / "metrics.csv", sim::metrics_csv(result));
    prism::detail::write_file(a.out_dir / "final_state.json", sim::final_state_json(result).dump(2) + "\n");
    manifest.outputs = {{"metrics", (a.out_dir / "metrics.csv").string()},
                        {"final_state", (a.out_dir / "final_state.json").string()}};
    if (a.dump_updates) {
      prism::detail::write_file(a.out_dir / "updates.jsonl", sim::updates_jsonl(result));
      manifest.outputs["updates"] = (a.out_dir / "updates.jsonl").string();
    }

    manifest.seed = cfg.seed;
    manifest.config = sim::to_json(cfg);
    if (a.config) manifest.inputs["config"] = a.config->string();
    manifest.extra["proxies"] = sim::proxy_labels();
    manifest.write(a.out_dir / "manifest.json");
  });
}

}  // namespace prism::cli
