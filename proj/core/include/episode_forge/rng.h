// Copyright 2026 The Episode Forge Authors
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

#ifndef EPISODE_FORGE_RNG_H_
#define EPISODE_FORGE_RNG_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace episode_forge {

// Counter-based random stream (Philox4x32-10). Every output is a pure
// function of (seed, stream id, draw index), so streams can be split by
// label and replayed from any position without shared mutable state.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  // Child stream whose id is derived from this stream's id and `label`.
  RandomStream Derive(std::string_view label) const;
  RandomStream Derive(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t position() const { return counter_; }
  void Seek(std::uint64_t position);

  std::uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi);
  // Uniform on {0, ..., n - 1}; n must be positive.
  std::size_t UniformIndex(std::size_t n);
  double Normal();

  // `count` distinct indices from {0, ..., n - 1} in random order.
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n,
                                                    std::size_t count);
  std::vector<int> Permutation(int n);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return NextU64(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

// 64-bit FNV-1a; stable across platforms, used for stream labels and ids.
std::uint64_t StableHash(std::string_view bytes);
std::uint64_t HashCombine(std::uint64_t a, std::uint64_t b);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_RNG_H_
