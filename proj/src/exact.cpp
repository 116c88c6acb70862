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

#include <algorithm>
#include <map>
#include <numeric>

#include "bitprobe/eval.hpp"

namespace bitprobe {

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den_ == 0) throw std::invalid_argument("zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  const std::int64_t g = std::gcd(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

Rational& Rational::operator+=(const Rational& o) {
  const std::int64_t g = std::gcd(den_, o.den_);
  const std::int64_t l = den_ / g * o.den_;
  *this = Rational(num_ * (l / den_) + o.num_ * (l / o.den_), l);
  return *this;
}

Rational operator*(const Rational& a, const Rational& b) {
  const std::int64_t g1 = std::gcd(a.num_, b.den_);
  const std::int64_t g2 = std::gcd(b.num_, a.den_);
  return Rational((a.num_ / std::max<std::int64_t>(g1, 1)) * (b.num_ / std::max<std::int64_t>(g2, 1)),
                  (a.den_ / std::max<std::int64_t>(g2, 1)) * (b.den_ / std::max<std::int64_t>(g1, 1)));
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw std::invalid_argument("division by zero");
  return a * Rational(b.den_, b.num_);
}

Policy oracle_policy() {
  return [](const TaskFunction& f, std::span<const Bitstring>, Bitstring query) {
    return PredictionDistribution{{f(query), Rational(1)}};
  };
}

Policy mode_policy() {
  return [](const TaskFunction& f, std::span<const Bitstring> demos, Bitstring query) {
    const int k = query.width();
    std::map<std::uint32_t, int> counts;
    for (const auto& d : demos) ++counts[f(d).value()];
    int top = 0;
    for (const auto& [y, c] : counts) top = std::max(top, c);
    PredictionDistribution dist;
    if (counts.empty()) {
      const auto size = static_cast<std::int64_t>(universe_size(k));
      for (std::uint32_t y = 0; y < universe_size(k); ++y) {
        dist.emplace_back(Bitstring{y, k}, Rational(1, size));
      }
      return dist;
    }
    std::int64_t tied = 0;
    for (const auto& [y, c] : counts) tied += c == top ? 1 : 0;
    for (const auto& [y, c] : counts) {
      if (c == top) dist.emplace_back(Bitstring{y, k}, Rational(1, tied));
    }
    return dist;
  };
}

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  long double acc = 1;
  for (std::uint64_t i = 1; i <= r; ++i) acc = acc * (n - r + i) / i;
  return acc > 1.8e19L ? UINT64_MAX : static_cast<std::uint64_t>(acc + 0.5L);
}

}  // namespace

Rational exact_accuracy(const Policy& policy, const TaskFunction& f, int shots,
                        std::uint64_t budget) {
  const int k = f.width();
  const std::uint32_t size = universe_size(k);
  if (shots < 1 || static_cast<std::uint32_t>(shots) > size - 1) {
    throw std::invalid_argument("shot count out of range for exact enumeration");
  }
  const std::uint64_t subsets = binomial(size, static_cast<std::uint64_t>(shots));
  const std::uint64_t queries = size - static_cast<std::uint64_t>(shots);
  if (subsets == UINT64_MAX || subsets > budget / queries) {
    throw BudgetExceeded("exact enumeration needs C(" + std::to_string(size) + "," +
                         std::to_string(shots) + ")*" + std::to_string(queries) +
                         " contexts, over budget " + std::to_string(budget));
  }

  // Enumerate subsets as ascending index combinations.
  std::vector<std::uint32_t> idx(static_cast<std::size_t>(shots));
  std::iota(idx.begin(), idx.end(), 0u);
  std::vector<Bitstring> demos(idx.size());
  std::vector<bool> in_set(size);
  Rational total;
  for (;;) {
    std::fill(in_set.begin(), in_set.end(), false);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      demos[i] = Bitstring{idx[i], k};
      in_set[idx[i]] = true;
    }
    Rational per_set;
    for (std::uint32_t x = 0; x < size; ++x) {
      if (in_set[x]) continue;
      const Bitstring query{x, k};
      const Bitstring target = f(query);
      for (const auto& [y, p] : policy(f, demos, query)) {
        if (y == target) per_set += p;
      }
    }
    total += per_set;

    // Next combination.
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(idx.size()) - 1;
    while (i >= 0 && idx[i] == size - idx.size() + static_cast<std::size_t>(i)) --i;
    if (i < 0) break;
    ++idx[i];
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < idx.size(); ++j) {
      idx[j] = idx[j - 1] + 1;
    }
  }
  return total / Rational(static_cast<std::int64_t>(subsets * queries));
}

}  // namespace bitprobe
