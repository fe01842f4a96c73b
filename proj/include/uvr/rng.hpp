// Copyright 2026 The uvr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UVR_RNG_HPP
#define UVR_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace uvr {

// Quantile of the standard normal distribution for p in (0, 1).
double normal_quantile(double p);

/// Seedable random source with platform-stable streams: the engine is
/// std::mt19937_64 (bit-exact by the standard) and all distributional
/// draws go through inverse CDFs instead of the implementation-defined
/// std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // In [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Strictly inside (0, 1); safe as a quantile argument.
  double uniform_open01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return mean + stddev * normal_quantile(uniform_open01());
  }

  // Unbiased draw from {0, ..., n-1}.
  std::uint64_t uniform_index(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Decorrelated child seed for stream `stream` of run `seed`.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace uvr

#endif  // UVR_RNG_HPP
