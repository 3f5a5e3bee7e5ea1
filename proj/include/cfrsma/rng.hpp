// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "cfrsma/types.hpp"

namespace cfrsma {

/// xoshiro256++ with splitmix64 seeding. Small state keeps per-stream seeding
/// cheap, which matters because engines are created per (instant, UE).
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 0) {
    for (auto& word : state_) {
      seed += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      word = z ^ (z >> 31);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  void discard(unsigned long long n) {
    for (; n > 0; --n) (*this)();
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_{};
};

using Engine = Xoshiro256pp;

/// Purpose tags for independent random streams. Every random quantity is drawn
/// from an engine keyed by (seed, drop, tag, ...), so results never depend on
/// evaluation order or worker count.
enum class Stream : std::uint64_t {
  kPositions = 1,
  kClustering,
  kPilots,
  kAnchor,
  kUlNoise,
  kInnovation,
  kDlCommonNoise,
  kDlPrivateNoise,
  kCommonSymbols,
  kPrivateSymbols,
  kUeNoise,
  kOracle,
};

/// Mixes the seed with a tag path into a 64-bit engine seed.
std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return Engine(stream_key(seed, path));
}

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

/// Draws CN(0, 1) and uniform phases.
class ComplexGaussian {
 public:
  cx operator()(Engine& eng) {
    const double re = normal_(eng);
    const double im = normal_(eng);
    return {re * kInvSqrt2, im * kInvSqrt2};
  }
  /// Uniform on [-pi, pi).
  double phase(Engine& eng) { return phase_(eng); }
  cx unit_phasor(Engine& eng) { return std::polar(1.0, phase_(eng)); }

 private:
  static constexpr double kInvSqrt2 = 0.70710678118654752440;
  boost::random::normal_distribution<double> normal_;
  boost::random::uniform_real_distribution<double> phase_{-kPi, kPi};
};

}  // namespace cfrsma
