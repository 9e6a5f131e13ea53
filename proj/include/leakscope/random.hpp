// Copyright 2026 The leakscope Authors
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

#ifndef LEAKSCOPE_RANDOM_HPP_
#define LEAKSCOPE_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace leakscope {

// SplitMix64 finalizer. Used both as the engine step and to derive
// independent per-record streams from (seed, domain, index).
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Small counter-style engine; satisfies UniformRandomBitGenerator so it can
// drive <random> distributions.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// Seed for the stream identified by (seed, domain, index). Distinct domains
// keep e.g. anchor draws and noise draws of the same record independent.
constexpr std::uint64_t StreamSeed(std::uint64_t seed, std::uint64_t domain,
                                   std::uint64_t index) {
  return Mix64(Mix64(seed ^ Mix64(domain + 0x632be59bd9b4e019ULL)) + index);
}

// Uniform double in [0, 1) with 53 random bits.
inline double UniformUnit(SplitMix64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection, n > 0.
inline std::uint64_t UniformIndex(SplitMix64& rng, std::uint64_t n) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

// Fisher-Yates with the engine above. std::shuffle's exact sequence is
// library-defined, this one is fixed.
template <typename T>
void DeterministicShuffle(std::span<T> items, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = UniformIndex(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace leakscope

#endif  // LEAKSCOPE_RANDOM_HPP_
