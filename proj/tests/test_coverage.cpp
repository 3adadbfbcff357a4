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

#include "support.hpp"

#include <prism/coverage.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using prism::CoverageState;
using prism::ErrorKind;

namespace {

CoverageState with_counts(std::vector<double> counts, double gamma = 0.99)
{
  return CoverageState::from_parts(1.0, gamma, std::move(counts), 0);
}

ErrorKind kind_of(auto&& fn)
{
  try {
    fn();
  } catch (const prism::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no prism::Error thrown";
  return ErrorKind::NumericFailure;
}

}  // namespace

TEST(CoverageInit, CountsStartAtAlpha)
{
  const auto s = CoverageState::init(4, 1.0);
  EXPECT_EQ(s.counts(), (std::vector<double>{1.0, 1.0, 1.0, 1.0}));
  EXPECT_EQ(s.batches_seen(), 0u);
  EXPECT_EQ(CoverageState::init(1, 0.5).counts(), (std::vector<double>{0.5}));
}

TEST(CoverageInit, Contracts)
{
  EXPECT_EQ(kind_of([] { CoverageState::init(4, 0.0); }), ErrorKind::BadParam);
  EXPECT_EQ(kind_of([] { CoverageState::init(0); }), ErrorKind::BadParam);
  EXPECT_EQ(kind_of([] { CoverageState::init(4, 1.0, 1.0); }), ErrorKind::BadParam);
  EXPECT_EQ(kind_of([] { CoverageState::init(4, 1.0, 0.0); }), ErrorKind::BadParam);
}

TEST(CoverageUpdate, SingleClusterStep)
{
  const std::vector<std::int64_t> m{4};
  const auto next = with_counts({10.0}).update_batch(m);
  EXPECT_NEAR(next.counts()[0], 9.94, 1e-12);
  EXPECT_EQ(next.batches_seen(), 1u);
}

TEST(CoverageUpdate, ZeroTalliesDecay)
{
  const auto s = with_counts({3.0, 0.5, 8.0}, 0.9);
  const std::vector<std::int64_t> m{0, 0, 0};
  const auto next = s.update_batch(m);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(next.counts()[j], 0.9 * s.counts()[j]);
}

TEST(CoverageUpdate, FixedPointWhenTalliesEqualCounts)
{
  const auto s = with_counts({4.0, 7.0, 1.0});
  const std::vector<std::int64_t> m{4, 7, 1};
  const auto next = s.update_batch(m);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(next.counts()[j], s.counts()[j], 1e-12);
}

TEST(CoverageUpdate, Contracts)
{
  const auto s = CoverageState::init(3);
  const std::vector<std::int64_t> short_m{1, 2};
  const std::vector<std::int64_t> neg{1, -1, 0};
  EXPECT_EQ(kind_of([&] { s.update_batch(short_m); }), ErrorKind::LengthMismatch);
  EXPECT_EQ(kind_of([&] { s.update_batch(neg); }), ErrorKind::BadParam);
}

TEST(Rarity, Examples)
{
  const auto s = with_counts({2.0, 0.0, 4.0});  // mean 2
  EXPECT_NEAR(s.rarity(0), std::exp(-1.0), 1e-15);
  EXPECT_EQ(s.rarity(1), 1.0);
  EXPECT_NEAR(s.rarity(2), std::exp(-2.0), 1e-15);
  const auto flat = CoverageState::init(16, 3.0);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(flat.rarity(j), 0.36787944117144233, 1e-15);
  EXPECT_EQ(kind_of([&] { s.rarity(3); }), ErrorKind::IndexOutOfRange);
}

TEST(RarityProperty, ScaleInvariant)
{
  prism::testing::Gen gen(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto k = static_cast<std::size_t>(gen.integer(1, 64));
    const auto counts = gen.positive_counts(k);
    const auto base = with_counts(counts);
    for (double c : {0.1, 3.0, 1000.0}) {
      auto scaled = counts;
      for (double& x : scaled) x *= c;
      const auto s = with_counts(scaled);
      for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(s.rarity(j), base.rarity(j), 1e-12);
    }
  }
}

TEST(CoverageProperty, BatchUpdateEqualsDecayThenIncrement)
{
  prism::testing::Gen gen(22);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto k = static_cast<std::size_t>(gen.integer(1, 32));
    const double gamma = gen.uniform(0.5, 0.999);
    const auto s = with_counts(gen.positive_counts(k, 20.0), gamma);
    const auto n_questions = gen.integer(0, 64);
    std::vector<std::int64_t> m(k, 0);
    auto route = s.counts();
    for (double& x : route) x *= gamma;
    for (std::int64_t q = 0; q < n_questions; ++q) {
      const auto c = gen.index(k);
      ++m[c];
      route[c] += 1.0 - gamma;
    }
    const auto next = s.update_batch(m);
    for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(next.counts()[j], route[j], 1e-12);
  }
}

TEST(CoverageProperty, CountsStayPositive)
{
  prism::testing::Gen gen(23);
  auto s = CoverageState::init(8, 0.01, 0.9);
  for (int step = 0; step < 2000; ++step) {
    std::vector<std::int64_t> m(8, 0);
    if (gen.coin(0.3)) m[gen.index(8)] = gen.integer(0, 5);
    s = s.update_batch(m);
    for (double x : s.counts()) EXPECT_GT(x, 0.0);
    EXPECT_GT(s.mean_count(), 0.0);
  }
}

TEST(CoverageProperty, IdleClusterRarityRecovers)
{
  prism::testing::Gen gen(24);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = with_counts(gen.positive_counts(6, 10.0), gen.uniform(0.5, 0.99));
    double prev = s.rarity(0);
    for (int t = 0; t < 50; ++t) {
      std::vector<std::int64_t> m(6, 0);
      for (std::size_t j = 1; j < 6; ++j) m[j] = gen.integer(0, 10);
      s = s.update_batch(m);
      EXPECT_GE(s.rarity(0), prev - 1e-15);
      prev = s.rarity(0);
    }
  }
}

TEST(WarmStart, CarriesCountsExactly)
{
  const auto s = with_counts({5.0, 0.2, 1.0});
  EXPECT_EQ(s.warm_start().counts(), (std::vector<double>{5.0, 0.2, 1.0}));
  EXPECT_EQ(CoverageState::init(7).warm_start(), CoverageState::init(7));

  prism::testing::Gen gen(25);
  auto t = CoverageState::init(10);
  for (int b = 0; b < 50; ++b) {
    std::vector<std::int64_t> m(10);
    for (auto& x : m) x = gen.integer(0, 9);
    t = t.update_batch(m);
  }
  const auto carried = t.warm_start();
  EXPECT_EQ(carried, t);
  EXPECT_EQ(carried.batches_seen(), 50u);
}

TEST(CoverageIo, RoundTripAfterUpdates)
{
  prism::testing::Gen gen(26);
  auto s = CoverageState::init(12, 1.0, 0.97);
  for (int b = 0; b < 3; ++b) {
    std::vector<std::int64_t> m(12);
    for (auto& x : m) x = gen.integer(0, 7);
    s = s.update_batch(m);
  }
  const auto back = prism::coverage_state_from_json_text(prism::to_json_text(s));
  EXPECT_EQ(back, s);
  for (std::size_t j = 0; j < 12; ++j) EXPECT_NEAR(back.rarity(j), s.rarity(j), 1e-12);

  const auto path = std::filesystem::temp_directory_path() / "prism_state_roundtrip.json";
  prism::save_state(s, path);
  EXPECT_EQ(prism::load_state(path), s);
  std::filesystem::remove(path);
}

TEST(CoverageIo, RejectsInvalidFiles)
{
  const char* bad[] = {
    R"({"k":2,"alpha":1,"gamma":0.99,"counts":[1,-0.5]})",
    R"({"k":2,"alpha":1,"gamma":1.0,"counts":[1,1]})",
    R"({"k":2,"alpha":1,"gamma":0.99,"counts":[1]})",
    R"({"k":2,"alpha":0,"gamma":0.99,"counts":[1,1]})",
    R"({"k":2,"alpha":1,"gamma":0.99,"counts":[0,0]})",
    R"({"k":2,"alpha":1,"gamma":0.99})",
    R"(not json)",
  };
  for (const char* text : bad) EXPECT_EQ(kind_of([&] { prism::coverage_state_from_json_text(text); }), ErrorKind::FormatError) << text;
}
