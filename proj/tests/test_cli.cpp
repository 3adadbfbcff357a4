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

#include <prism/cluster_space.hpp>
#include <prism/coverage.hpp>
#include <prism/detail/io.hpp>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("prism_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path write(const std::string& name, const std::string& text) const
  {
    prism::detail::write_file(path(name), text);
    return path(name);
  }

  static std::string read(const fs::path& p) { return prism::detail::read_file(p); }

  Outcome run(const std::string& args) const
  {
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + PRISM_CLI_PATH + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, fs::exists(err) ? read(err) : ""};
  }

  static std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

  // n random points in dim d, one JSON record per line.
  fs::path corpus(const std::string& name, int n, int d, unsigned seed = 1) const
  {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::string text;
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(static_cast<std::size_t>(d));
      for (double& x : v) x = nd(rng);
      text += R"({"id":"q)" + std::to_string(i) + R"(","vector":)" + prism::detail::format_real_array(v) + "}\n";
    }
    return write(name, text);
  }

  fs::path axis_space(const std::string& name, std::size_t k) const
  {
    std::vector<prism::EmbeddingVector> c;
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> v(k, 0.0);
      v[j] = 1.0;
      c.push_back(prism::normalize(v));
    }
    prism::save_space(prism::ClusterSpace(std::move(c)), path(name));
    return path(name);
  }

  fs::path dir_;
};

std::vector<std::string> lines(const std::string& text)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    out.push_back(text.substr(start, end - start));
    start = end == std::string::npos ? text.size() : end + 1;
  }
  return out;
}

}  // namespace

TEST_F(Cli, HelpAndUsageErrors)
{
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("simulate --help").code, 0);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("assign --space").code, 2);
}

TEST_F(Cli, BuildClustersWritesUnitCentroidsAndManifest)
{
  const auto emb = corpus("c.jsonl", 60, 5);
  const auto out = path("space.json");
  ASSERT_EQ(run("build-clusters --embeddings " + q(emb) + " --k 8 --seed 3 --out " + q(out)).code, 0);
  const auto space = prism::load_space(out);
  EXPECT_EQ(space.k(), 8u);
  for (const auto& c : space.centroids()) EXPECT_NEAR(prism::l2_norm(c.components()), 1.0, 1e-6);
  const auto manifest = nlohmann::json::parse(read(path("space.json.manifest.json")));
  EXPECT_EQ(manifest["command"], "build-clusters");
  EXPECT_EQ(manifest["seed"], 3);
  EXPECT_TRUE(manifest.contains("engine_version"));
  EXPECT_TRUE(manifest.contains("duration_seconds"));
  EXPECT_EQ(manifest["config"]["k"], 8);
}

TEST_F(Cli, BuildClustersDeterministic)
{
  const auto emb = corpus("c.jsonl", 80, 6);
  ASSERT_EQ(run("build-clusters --embeddings " + q(emb) + " --k 5 --seed 9 --out " + q(path("a.json"))).code, 0);
  ASSERT_EQ(run("build-clusters --embeddings " + q(emb) + " --k 5 --seed 9 --out " + q(path("b.json"))).code, 0);
  EXPECT_EQ(read(path("a.json")), read(path("b.json")));
}

TEST_F(Cli, BuildClustersErrors)
{
  const auto small = corpus("small.jsonl", 5, 3);
  const auto r = run("build-clusters --embeddings " + q(small) + " --k 8 --seed 0 --out " + q(path("s.json")));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("TooFewPoints"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("s.json")));

  std::string same;
  for (int i = 0; i < 6; ++i) same += R"({"id":"p)" + std::to_string(i) + R"(","vector":[1,2,3]})" + "\n";
  const auto dup = write("same.jsonl", same);
  EXPECT_EQ(run("build-clusters --embeddings " + q(dup) + " --k 3 --seed 0 --out " + q(path("s.json"))).code, 3);

  const auto emb = corpus("c.jsonl", 20, 3);
  EXPECT_EQ(run("build-clusters --embeddings " + q(emb) + " --k 3 --out " + q(path("s.json"))).code, 2);
  EXPECT_EQ(run("build-clusters --embeddings " + q(path("missing.jsonl")) + " --k 3 --seed 1 --out " + q(path("s.json"))).code, 2);
  EXPECT_EQ(run("build-clusters --embeddings " + q(emb) + " --k 3 --seed 1 --out " + q(emb)).code, 2);
}

TEST_F(Cli, AssignExactCentroid)
{
  const auto space = axis_space("space.json", 5);
  const auto emb = write("e.jsonl", R"({"id":"hit","vector":[0,0,0,2,0]})" "\n" R"({"id":"mix","vector":[1,0.5,0,0,0]})" "\n");
  ASSERT_EQ(run("assign --space " + q(space) + " --embeddings " + q(emb) + " --out " + q(path("a.csv"))).code, 0);
  const auto rows = lines(read(path("a.csv")));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "id,cluster,cosine");
  EXPECT_EQ(rows[1], "hit,3,1");
  EXPECT_EQ(rows[2].substr(0, 6), "mix,0,");
  EXPECT_TRUE(fs::exists(path("a.csv.manifest.json")));
}

TEST_F(Cli, AssignEmptyAndMismatch)
{
  const auto space = axis_space("space.json", 3);
  const auto empty = write("empty.jsonl", "");
  ASSERT_EQ(run("assign --space " + q(space) + " --embeddings " + q(empty) + " --out " + q(path("a.csv"))).code, 0);
  EXPECT_EQ(read(path("a.csv")), "id,cluster,cosine\n");
  const auto wide = write("wide.jsonl", R"({"id":"x","vector":[1,0,0,0]})" "\n");
  EXPECT_EQ(run("assign --space " + q(space) + " --embeddings " + q(wide) + " --out " + q(path("b.csv"))).code, 2);
}

TEST_F(Cli, RewardFreshClustersAndPurity)
{
  const auto space = axis_space("space.json", 4);
  prism::save_state(prism::CoverageState::init(4), path("state.json"));
  const auto state_before = read(path("state.json"));
  const auto corpus_file = write("corpus.jsonl", R"({"id":"c","vector":[0,0,1,0]})" "\n");
  const auto batch = write("batch.jsonl", R"({"id":"a","verdicts":[1,1,1,0,1,1,0,1],"vector":[1,0,0,0]})" "\n"
                                          R"({"id":"b","verdicts":[true,true,false,true],"vector":[0,3,0,0]})" "\n"
                                          R"({"id":"c","verdicts":[1,1,1,0]})" "\n");
  const std::string args = "reward --space " + q(space) + " --state " + q(path("state.json")) + " --batch " + q(batch) +
                           " --corpus " + q(corpus_file);
  ASSERT_EQ(run(args + " --out " + q(path("r1.csv")) + " --new-state " + q(path("s1.json"))).code, 0);
  EXPECT_EQ(read(path("state.json")), state_before);

  const auto rows = lines(read(path("r1.csv")));
  ASSERT_EQ(rows.size(), 4u);
  const double expected = 1.0 + 5.0 * std::exp(-1.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto reward = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
    EXPECT_NEAR(reward, expected, 1e-12) << rows[i];
  }
  const auto next = prism::load_state(path("s1.json"));
  EXPECT_EQ(next.batches_seen(), 1u);
  EXPECT_NEAR(next.counts()[3], 0.99, 1e-15);

  ASSERT_EQ(run(args + " --out " + q(path("r2.csv")) + " --new-state " + q(path("s2.json"))).code, 0);
  EXPECT_EQ(read(path("r1.csv")), read(path("r2.csv")));
  EXPECT_EQ(read(path("s1.json")), read(path("s2.json")));
}

TEST_F(Cli, RewardConfigAndLambdaOverride)
{
  const auto space = axis_space("space.json", 2);
  prism::save_state(prism::CoverageState::init(2), path("state.json"));
  const auto batch = write("batch.jsonl", R"({"id":"a","verdicts":[1,1,1,0],"vector":[1,0]})" "\n");
  const auto cfg = write("cfg.json", R"({"lambda": 0})");
  const std::string base = "reward --space " + q(space) + " --state " + q(path("state.json")) + " --batch " + q(batch) +
                           " --new-state " + q(path("s.json"));
  ASSERT_EQ(run(base + " --config " + q(cfg) + " --out " + q(path("r.csv"))).code, 0);
  EXPECT_EQ(lines(read(path("r.csv")))[1], "a,0.75,0,1,0.36787944117144233,1");
  ASSERT_EQ(run(base + " --config " + q(cfg) + " --lambda 1 --out " + q(path("r.csv"))).code, 0);
  EXPECT_EQ(lines(read(path("r.csv")))[1], "a,0.75,0,1,0.36787944117144233,1.3678794411714423");
  const auto bad = write("bad.json", R"({"lambda": 1, "mu": 2})");
  EXPECT_EQ(run(base + " --config " + q(bad) + " --out " + q(path("r.csv"))).code, 2);
}

TEST_F(Cli, RewardErrors)
{
  const auto space = axis_space("space.json", 128);
  prism::save_state(prism::CoverageState::init(64), path("state64.json"));
  std::vector<double> v(128, 0.0);
  v[0] = 1.0;
  const auto batch = write("batch.jsonl", R"({"id":"a","verdicts":[1,1,1,0],"vector":)" + prism::detail::format_real_array(v) + "}\n");
  const std::string tail = " --batch " + q(batch) + " --out " + q(path("r.csv")) + " --new-state " + q(path("s.json"));
  EXPECT_EQ(run("reward --space " + q(space) + " --state " + q(path("state64.json")) + tail).code, 2);

  prism::save_state(prism::CoverageState::init(128), path("state.json"));
  const auto nodata = write("nodata.jsonl", R"({"id":"a","verdicts":[1,1,1,0]})" "\n");
  EXPECT_EQ(run("reward --space " + q(space) + " --state " + q(path("state.json")) + " --batch " + q(nodata) +
                " --out " + q(path("r.csv")) + " --new-state " + q(path("s.json")))
              .code,
            2);
  const auto badv = write("badv.jsonl", R"({"id":"a","verdicts":[2],"vector":[1]})" "\n");
  EXPECT_EQ(run("reward --space " + q(space) + " --state " + q(path("state.json")) + " --batch " + q(badv) +
                " --out " + q(path("r.csv")) + " --new-state " + q(path("s.json")))
              .code,
            2);
  EXPECT_EQ(run("reward --space " + q(space) + " --state " + q(path("state.json")) + " --batch " + q(batch) +
                " --out " + q(path("r.csv")) + " --new-state " + q(path("state.json")))
              .code,
            2);
}

TEST_F(Cli, AuditUniformOneHotAndSkewed)
{
  std::vector<int> uniform(128, 4);
  const auto u = write("u.json", nlohmann::json(uniform).dump());
  ASSERT_EQ(run("audit --counts " + q(u) + " --out " + q(path("u_out.json")) + " --lorenz " + q(path("u.csv"))).code, 0);
  const auto ur = nlohmann::json::parse(read(path("u_out.json")));
  EXPECT_EQ(ur["gini"].get<double>(), 0.0);
  EXPECT_NEAR(ur["norm_entropy"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(lines(read(path("u.csv"))).size(), 130u);

  std::vector<int> onehot(128, 0);
  onehot[5] = 10;
  const auto o = write("o.json", nlohmann::json{{"counts", onehot}}.dump());
  ASSERT_EQ(run("audit --counts " + q(o) + " --k 128 --out " + q(path("o_out.json"))).code, 0);
  const auto orr = nlohmann::json::parse(read(path("o_out.json")));
  EXPECT_EQ(orr["active_clusters"], 1);
  EXPECT_EQ(orr["top10_share"].get<double>(), 1.0);

  // 220 * 0.92^j truncated over 128 clusters.
  std::vector<int> geo{220, 202, 186, 171, 157, 144, 133, 122, 112, 103, 95, 87, 80, 74, 68, 62, 57,
                       53,  49,  45,  41,  38,  35,  32,  29,  27,  25,  23, 21, 19, 18, 16, 15, 14,
                       12,  11,  10,  10,  9,   8,   7,   7,   6,   6,   5,  5,  4,  4,  4,  3,  3,
                       3,   2,   2,   2,   2,   2,   1,   1,   1,   1,   1,  1,  1,  1};
  geo.resize(128, 0);
  const auto g = write("g.json", nlohmann::json(geo).dump());
  ASSERT_EQ(run("audit --counts " + q(g) + " --out " + q(path("g_out.json"))).code, 0);
  EXPECT_NEAR(nlohmann::json::parse(read(path("g_out.json")))["norm_entropy"].get<double>(), 0.7086, 1e-4);
}

TEST_F(Cli, AuditFromAssignments)
{
  const auto csv = write("a.csv", "id,cluster,cosine\nx,2,0.9\n\"y,z\",0,0.8\nw,2,1\n");
  ASSERT_EQ(run("audit --assignments " + q(csv) + " --k 4 --out " + q(path("r.json"))).code, 0);
  const auto r = nlohmann::json::parse(read(path("r.json")));
  EXPECT_EQ(r["total"], 3);
  EXPECT_EQ(r["active_clusters"], 2);

  // Reward CSVs leave the cluster column empty for out-of-window rows.
  const auto rw = write("rw.csv", "id,p,cluster,zpd,rarity,reward\na,0.75,1,1,0.3,2\nb,0.1,,0,,0\n");
  ASSERT_EQ(run("audit --assignments " + q(rw) + " --k 2 --out " + q(path("rw.json"))).code, 0);
  EXPECT_EQ(nlohmann::json::parse(read(path("rw.json")))["total"], 1);

  EXPECT_EQ(run("audit --assignments " + q(csv) + " --k 2 --out " + q(path("r.json"))).code, 2);
  EXPECT_EQ(run("audit --assignments " + q(csv) + " --out " + q(path("r.json"))).code, 2);
}

TEST_F(Cli, AuditAllZero)
{
  const auto z = write("z.json", "[0,0,0,0]");
  EXPECT_EQ(run("audit --counts " + q(z) + " --out " + q(path("z_out.json"))).code, 2);
  const auto neg = write("n.json", "[1,-1]");
  EXPECT_EQ(run("audit --counts " + q(neg) + " --out " + q(path("n_out.json"))).code, 2);
}

TEST_F(Cli, SimulateDefaultConfig)
{
  const auto out = path("run");
  ASSERT_EQ(run("simulate --config " + q(PRISM_DEFAULT_CONFIG) + " --out " + q(out)).code, 0);
  const auto rows = lines(read(out / "metrics.csv"));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "iteration,mode,active,entropy_bits,norm_entropy,gini,top10_share,pool_size,mean_p");
  EXPECT_EQ(rows[1].substr(0, 8), "1,prism,");
  const auto manifest = nlohmann::json::parse(read(out / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 0);
  EXPECT_EQ(manifest["config"]["mode"], "prism");
  EXPECT_TRUE(manifest.contains("proxies"));
  EXPECT_TRUE(fs::exists(out / "final_state.json"));
  EXPECT_FALSE(fs::exists(out / "updates.jsonl"));
}

TEST_F(Cli, SimulateModesShareSchema)
{
  ASSERT_EQ(run("simulate --config " + q(PRISM_DEFAULT_CONFIG) + " --out " + q(path("a"))).code, 0);
  ASSERT_EQ(run("simulate --config " + q(PRISM_DEFAULT_CONFIG) + " --mode zpd_only --out " + q(path("b"))).code, 0);
  const auto a = lines(read(path("a") / "metrics.csv"));
  const auto b = lines(read(path("b") / "metrics.csv"));
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a[0], b[0]);
  EXPECT_NE(a, b);
  EXPECT_EQ(b[1].substr(0, 11), "1,zpd_only,");
}

TEST_F(Cli, SimulateDeterministicAndFlags)
{
  const std::string base = "simulate --seed 5 --lambda 2 --no-warm-start --dump-updates --out ";
  ASSERT_EQ(run(base + q(path("a"))).code, 0);
  ASSERT_EQ(run(base + q(path("b"))).code, 0);
  EXPECT_EQ(read(path("a") / "metrics.csv"), read(path("b") / "metrics.csv"));
  EXPECT_EQ(read(path("a") / "final_state.json"), read(path("b") / "final_state.json"));
  EXPECT_EQ(read(path("a") / "updates.jsonl"), read(path("b") / "updates.jsonl"));
  const auto manifest = nlohmann::json::parse(read(path("a") / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_EQ(manifest["config"]["reward"]["lambda"], 2.0);
  EXPECT_EQ(manifest["config"]["warm_start"], false);
  EXPECT_EQ(lines(read(path("a") / "updates.jsonl")).size(), 24u);
}

TEST_F(Cli, SimulateErrors)
{
  const auto r = run("simulate --seed 1 --mode greedy --out " + q(path("x")));
  EXPECT_EQ(r.code, 2);
  for (const char* mode : {"prism", "zpd_only", "zpd_repetition"}) EXPECT_NE(r.err.find(mode), std::string::npos);
  EXPECT_EQ(run("simulate --out " + q(path("x"))).code, 2);
  const auto noseed = write("noseed.json", R"({"iterations": 2})");
  EXPECT_EQ(run("simulate --config " + q(noseed) + " --out " + q(path("x"))).code, 2);
  EXPECT_EQ(run("simulate --config " + q(noseed) + " --seed 1 --out " + q(path("x"))).code, 0);
  const auto bad = write("bad.json", R"({"iterations": 0, "seed": 1})");
  EXPECT_EQ(run("simulate --config " + q(bad) + " --out " + q(path("y"))).code, 2);
  const auto unknown = write("unknown.json", R"({"iteratons": 2, "seed": 1})");
  EXPECT_EQ(run("simulate --config " + q(unknown) + " --out " + q(path("y"))).code, 2);
}
