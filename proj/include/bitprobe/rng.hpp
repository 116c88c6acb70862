// Copyright 2026 The bitprobe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bitprobe {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Keyed mix of one more word into a running seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t word) {
  return splitmix64(seed ^ splitmix64(word + 0x632be59bd9b4e019ULL));
}

// Sub-stream tags for the independent draws made from one trial seed.
enum class Stream : std::uint64_t {
  kContext = 1,
  kScheme = 2,
  kTieBreak = 3,
  kBackend = 4,
  kConstant = 5,
  kBootstrap = 6,
};

constexpr std::uint64_t substream(std::uint64_t seed, Stream s) {
  return mix_seed(seed, static_cast<std::uint64_t>(s));
}

// Counter-based per-trial seed; independent of execution order and model.
constexpr std::uint64_t trial_seed(std::uint64_t master_seed,
                                   std::string_view function_id, int shots,
                                   int trial_index) {
  std::uint64_t s = mix_seed(master_seed, fnv1a64(function_id));
  s = mix_seed(s, static_cast<std::uint64_t>(shots));
  return mix_seed(s, static_cast<std::uint64_t>(trial_index));
}

// mt19937_64 with portable bounded draws (std distributions differ across
// standard libraries, which would break golden files).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bitprobe
