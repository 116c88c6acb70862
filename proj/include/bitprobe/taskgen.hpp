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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bitprobe/bitstring.hpp"

namespace bitprobe {

enum class Primitive : std::uint8_t {
  kAlternatingStartOne,
  kAlternatingStartZero,
  kCenterMask,
  kDoubleRotl,
  kDoubleRotr,
  kEdgeMask,
  kFlipBits,
  kIdentity,
  kInvertPrefix,
  kInvertSuffix,
  kKeepEvenPositions,
  kKeepOddPositions,
  kLeftHalf,
  kMajority,
  kMetaConstant,
  kMinority,
  kMirrorHalf,
  kOnesIfPalindrome,
  kParityFill,
  kReverseBits,
  kRightHalf,
  kRotl1,
  kRotr1,
  kShiftLeftZero,
  kShiftRightZero,
  kSpreadFirstBit,
  kSpreadLastBit,
  kSwapHalves,
  kSwapPairs,
  kXorWithS0,
};

inline constexpr std::size_t kPrimitiveCount = 30;

enum class PrimitiveKind { kFirstStage, kSecondStageOnly };

std::string_view primitive_name(Primitive p);
Primitive primitive_from_name(std::string_view name);  // throws on unknown
PrimitiveKind primitive_kind(Primitive p);
const std::array<Primitive, kPrimitiveCount>& all_primitives();

class TaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `constant` is consulted only by meta_constant. `s0` must be present iff the
// primitive is second-stage-only.
Bitstring apply_primitive(Primitive p, Bitstring x,
                          std::optional<Bitstring> s0 = std::nullopt,
                          std::optional<Bitstring> constant = std::nullopt);
Bitstring apply_primitive(std::string_view name, Bitstring x,
                          std::optional<Bitstring> s0 = std::nullopt);

// A one- or two-stage composition with an eagerly materialized truth table.
// Immutable after construction.
class TaskFunction {
 public:
  static TaskFunction single(Primitive p, int width,
                             std::optional<Bitstring> constant = std::nullopt);
  static TaskFunction compose(Primitive first, Primitive second, int width,
                              std::optional<Bitstring> constant = std::nullopt);

  const std::string& id() const { return id_; }
  std::span<const Primitive> stages() const { return {stages_.data(), stage_count_}; }
  std::size_t stage_count() const { return stage_count_; }
  const std::optional<Bitstring>& constant() const { return constant_; }
  int width() const { return width_; }
  int bitload() const { return bitload_; }

  Bitstring operator()(Bitstring x) const { return {table_[x.value()], width_}; }
  std::span<const std::uint32_t> truth_table() const { return table_; }
  bool is_constant() const;

 private:
  TaskFunction() = default;
  void materialize();

  std::string id_;
  std::array<Primitive, 2> stages_{};
  std::size_t stage_count_ = 0;
  std::optional<Bitstring> constant_;
  int width_ = 0;
  int bitload_ = 0;
  std::vector<std::uint32_t> table_;
};

// Composition semantics: (first -> second)(x) = second(first(x)), where a
// second-stage xor_with_s0 sees the original input as s0.
TaskFunction compose(std::string_view first, std::string_view second,
                     int width = kDefaultWidth);

// Number of input positions whose flip changes some output bit, computed
// exhaustively over the truth table.
int bitload(std::span<const std::uint32_t> truth_table, int width);
inline int bitload(const TaskFunction& f) { return f.bitload(); }

std::string canonical_id(std::span<const Primitive> stages);

// The fixed list of function ids, in registry order.
std::span<const std::string_view> registry_function_ids();

class TaskRegistry {
 public:
  TaskRegistry(std::vector<TaskFunction> functions, std::uint64_t seed, int width);

  std::span<const TaskFunction> functions() const { return functions_; }
  std::size_t size() const { return functions_.size(); }
  const TaskFunction& operator[](std::size_t i) const { return functions_[i]; }
  const TaskFunction& at(std::string_view id) const;  // throws TaskError
  const TaskFunction* find(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;
  std::uint64_t seed() const { return seed_; }
  int width() const { return width_; }

  // Returns a registry restricted to the given ids (kept in registry order).
  TaskRegistry filtered(std::span<const std::string> ids) const;
  TaskRegistry filtered_by_bitload(std::span<const int> loads) const;

 private:
  std::vector<TaskFunction> functions_;
  std::uint64_t seed_ = 0;
  int width_ = kDefaultWidth;
};

struct DistinctnessViolation {
  std::string first;
  std::string second;
};

// Empty when every pair of functions differs on some input and ids are unique.
std::optional<DistinctnessViolation> find_collision(std::span<const TaskFunction> fs);

// Builds the 100 functions without the distinctness gate. meta_constant's
// constant is drawn from `seed` and redrawn while it collides with any other
// function's truth table.
std::vector<TaskFunction> build_function_set(std::uint64_t seed, int width);

// build_function_set plus verification; throws TaskError naming the colliding
// pair when distinctness cannot be met.
TaskRegistry build_registry(std::uint64_t seed, int width = kDefaultWidth);

// One record per function: id, stages, hex truth table, bitload.
void export_registry(const TaskRegistry& registry, std::ostream& out);

}  // namespace bitprobe
