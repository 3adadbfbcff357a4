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

// Hand-rolled generators for property tests. Each property draws its cases
// from a fixed seed so failures reproduce.

#include <prism/embedding.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace prism::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(eng_); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(n) - 1)); }
  bool coin(double p = 0.5) { return uniform() < p; }

  std::vector<double> gaussian_vector(std::size_t dim)
  {
    std::vector<double> v(dim);
    for (double& x : v) x = normal();
    return v;
  }

  EmbeddingVector unit_vector(std::size_t dim)
  {
    for (;;) {
      auto v = gaussian_vector(dim);
      if (l2_norm(v) > 1e-3) return normalize(v);
    }
  }

  std::vector<double> positive_counts(std::size_t k, double hi = 100.0)
  {
    std::vector<double> v(k);
    for (double& x : v) x = uniform(1e-3, hi);
    return v;
  }

  // Integer counts with a random fraction of zeros and a heavy tail.
  std::vector<std::uint64_t> sparse_counts(std::size_t k)
  {
    std::vector<std::uint64_t> v(k);
    const double zero_rate = uniform(0.0, 0.8);
    for (auto& x : v) x = coin(zero_rate) ? 0 : static_cast<std::uint64_t>(std::exp(uniform(0.0, 6.0)));
    if (std::all_of(v.begin(), v.end(), [](auto x) { return x == 0; })) v[index(k)] = 1;
    return v;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace prism::testing
