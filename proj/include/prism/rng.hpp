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

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace prism {

/// splitmix64 generator. Small state makes it cheap to open one stream per
/// (iteration, step, question) coordinate.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()()
  {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Box-Muller, one variate per call. Kept local instead of
  // std::normal_distribution so streams agree across standard libraries.
  double normal()
  {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::uint64_t state_;
};

/// Seed of the substream addressed by path under a run seed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
{
  std::uint64_t h = seed;
  for (auto p : path) {
    SplitMix64 mix(h ^ (p + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2)));
    h = mix();
  }
  return h;
}

inline SplitMix64 substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
{
  return SplitMix64(substream_seed(seed, path));
}

}  // namespace prism
