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
#include <stdexcept>
#include <string>
#include <string_view>

namespace bitprobe {

inline constexpr int kDefaultWidth = 8;
inline constexpr int kMinWidth = 2;
inline constexpr int kMaxWidth = 16;

// A fixed-width binary string. Position 0 is the leftmost (first written)
// bit and maps to the most significant bit of `value`.
class Bitstring {
 public:
  constexpr Bitstring() = default;
  constexpr Bitstring(std::uint32_t value, int width)
      : value_(value & mask(width)), width_(width) {}

  static Bitstring parse(std::string_view text);
  static constexpr Bitstring zeros(int width) { return {0u, width}; }
  static constexpr Bitstring ones(int width) { return {mask(width), width}; }

  constexpr std::uint32_t value() const { return value_; }
  constexpr int width() const { return width_; }

  constexpr bool bit(int pos) const {
    return ((value_ >> (width_ - 1 - pos)) & 1u) != 0;
  }
  constexpr Bitstring with_bit(int pos, bool b) const {
    const std::uint32_t m = 1u << (width_ - 1 - pos);
    return {b ? (value_ | m) : (value_ & ~m), width_};
  }
  constexpr Bitstring flipped(int pos) const {
    return {value_ ^ (1u << (width_ - 1 - pos)), width_};
  }

  int popcount() const;
  std::string str() const;

  static constexpr std::uint32_t mask(int width) {
    return width >= 32 ? ~0u : ((1u << width) - 1u);
  }

  friend constexpr bool operator==(Bitstring, Bitstring) = default;
  friend constexpr auto operator<=>(Bitstring a, Bitstring b) {
    return a.value_ <=> b.value_;
  }

 private:
  std::uint32_t value_ = 0;
  int width_ = 0;
};

inline void check_width(int width) {
  if (width < kMinWidth || width > kMaxWidth) {
    throw std::invalid_argument("bitstring width must be in [2, 16], got " +
                                std::to_string(width));
  }
}

// Number of distinct bitstrings of the given width.
inline std::uint32_t universe_size(int width) { return 1u << width; }

// Minority-bit count: min(#zeros, #ones).
int bitdiversity(Bitstring y);

}  // namespace bitprobe
