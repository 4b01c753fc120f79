// Copyright 2026 The IDSQS Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Draw helpers whose output depends only on the engine state. The standard
// distributions are implementation-defined, which would make seeded
// artifacts differ between standard libraries.

#ifndef IDSQS_RANDOM_H_
#define IDSQS_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace idsqs {

using Engine = std::mt19937_64;

// Engine keyed by (seed, stream); std::seed_seq's mixing is specified.
inline Engine DerivedEngine(uint64_t seed, uint64_t stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream),
                    static_cast<uint32_t>(stream >> 32)};
  return Engine(seq);
}

// [0, 1) with 53 random bits.
inline double Uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double Uniform(Engine& rng, double lo, double hi) {
  return lo + (hi - lo) * Uniform01(rng);
}

// Multiply-shift bounded integer in [0, n).
inline size_t UniformIndex(Engine& rng, size_t n) {
  const unsigned __int128 product =
      static_cast<unsigned __int128>(rng()) * static_cast<unsigned __int128>(n);
  return static_cast<size_t>(product >> 64);
}

// Box-Muller; one draw per call.
inline double Normal(Engine& rng, double mean, double sd) {
  const double u1 = 1.0 - Uniform01(rng);  // (0, 1]
  const double u2 = Uniform01(rng);
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) *
                    std::cos(2.0 * std::numbers::pi * u2);
}

// Fisher-Yates with UniformIndex.
template <typename Container>
void Shuffle(Container& c, Engine& rng) {
  for (size_t i = c.size(); i > 1; --i) {
    using std::swap;
    swap(c[i - 1], c[UniformIndex(rng, i)]);
  }
}

}  // namespace idsqs

#endif  // IDSQS_RANDOM_H_
