// Copyright 2026 The cbl Authors.
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

#ifndef CBL_RNG_H_
#define CBL_RNG_H_

#include <cstdint>
#include <random>

namespace cbl {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent streams from
// (seed, index) pairs so per-item generation does not depend on order.
inline uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t DeriveSeed(uint64_t seed, uint64_t stream) {
  return MixSeed(MixSeed(seed) ^ (stream * 0xd1b54a32d192ed03ULL));
}

inline Rng MakeRng(uint64_t seed, uint64_t stream) {
  return Rng(DeriveSeed(seed, stream));
}

// Stream tags, so that e.g. the concept table and the noise of example 0
// never share a stream.
enum class Stream : uint64_t {
  kScene = 1,
  kConcepts = 2,
  kNoise = 3,
  kProjection = 4,
  kInit = 5,
  kShuffle = 6,
  kNegatives = 7,
  kTieBreak = 8,
  kHoldout = 9,
};

inline Rng MakeRng(uint64_t seed, Stream tag, uint64_t index = 0) {
  return MakeRng(DeriveSeed(seed, static_cast<uint64_t>(tag)), index);
}

}  // namespace cbl

#endif  // CBL_RNG_H_
