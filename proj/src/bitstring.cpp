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

#include "bitprobe/bitstring.hpp"

#include <algorithm>
#include <bit>

namespace bitprobe {

int Bitstring::popcount() const { return std::popcount(value_); }

std::string Bitstring::str() const {
  std::string s(static_cast<std::size_t>(width_), '0');
  for (int i = 0; i < width_; ++i) s[i] = bit(i) ? '1' : '0';
  return s;
}

Bitstring Bitstring::parse(std::string_view text) {
  check_width(static_cast<int>(text.size()));
  std::uint32_t v = 0;
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("not a bitstring: " + std::string(text));
    }
    v = (v << 1) | static_cast<std::uint32_t>(c == '1');
  }
  return {v, static_cast<int>(text.size())};
}

int bitdiversity(Bitstring y) {
  const int ones = y.popcount();
  return std::min(ones, y.width() - ones);
}

}  // namespace bitprobe
