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

#include "bitprobe/taskgen.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "bitprobe/rng.hpp"

namespace bitprobe {

namespace {

struct PrimitiveInfo {
  Primitive p;
  std::string_view name;
};

constexpr std::array<PrimitiveInfo, kPrimitiveCount> kPrimitives{{
    {Primitive::kAlternatingStartOne, "alternating_start_one"},
    {Primitive::kAlternatingStartZero, "alternating_start_zero"},
    {Primitive::kCenterMask, "center_mask"},
    {Primitive::kDoubleRotl, "double_rotl"},
    {Primitive::kDoubleRotr, "double_rotr"},
    {Primitive::kEdgeMask, "edge_mask"},
    {Primitive::kFlipBits, "flip_bits"},
    {Primitive::kIdentity, "identity"},
    {Primitive::kInvertPrefix, "invert_prefix"},
    {Primitive::kInvertSuffix, "invert_suffix"},
    {Primitive::kKeepEvenPositions, "keep_even_positions"},
    {Primitive::kKeepOddPositions, "keep_odd_positions"},
    {Primitive::kLeftHalf, "left_half"},
    {Primitive::kMajority, "majority"},
    {Primitive::kMetaConstant, "meta_constant"},
    {Primitive::kMinority, "minority"},
    {Primitive::kMirrorHalf, "mirror_half"},
    {Primitive::kOnesIfPalindrome, "ones_if_palindrome"},
    {Primitive::kParityFill, "parity_fill"},
    {Primitive::kReverseBits, "reverse_bits"},
    {Primitive::kRightHalf, "right_half"},
    {Primitive::kRotl1, "rotl1"},
    {Primitive::kRotr1, "rotr1"},
    {Primitive::kShiftLeftZero, "shift_left_zero"},
    {Primitive::kShiftRightZero, "shift_right_zero"},
    {Primitive::kSpreadFirstBit, "spread_first_bit"},
    {Primitive::kSpreadLastBit, "spread_last_bit"},
    {Primitive::kSwapHalves, "swap_halves"},
    {Primitive::kSwapPairs, "swap_pairs"},
    {Primitive::kXorWithS0, "xor_with_s0"},
}};

// Registry order: first appearance when reading the published function table
// column by column; duplicates dropped.
constexpr std::array<std::string_view, 100> kRegistryIds{
    "identity",
    "rotl1",
    "reverse_bits",
    "flip_bits",
    "swap_halves",
    "majority",
    "minority",
    "parity_fill",
    "alternating_start_one",
    "alternating_start_zero",
    "left_half",
    "right_half",
    "double_rotl",
    "rotr1",
    "double_rotr",
    "ones_if_palindrome",
    "mirror_half",
    "spread_first_bit",
    "spread_last_bit",
    "invert_prefix",
    "invert_suffix",
    "meta_constant",
    "shift_left_zero",
    "shift_right_zero",
    "swap_pairs",
    "keep_even_positions",
    "keep_odd_positions",
    "edge_mask",
    "center_mask",
    "xor_with_s0",
    "flip_bits->reverse_bits",
    "rotl1->reverse_bits",
    "reverse_bits->rotl1",
    "rotl1->flip_bits",
    "swap_halves->reverse_bits",
    "swap_halves->flip_bits",
    "double_rotl->flip_bits",
    "rotr1->flip_bits",
    "spread_first_bit->flip_bits",
    "spread_last_bit->flip_bits",
    "left_half->flip_bits",
    "right_half->flip_bits",
    "flip_bits->left_half",
    "flip_bits->right_half",
    "double_rotl->reverse_bits",
    "rotl1->swap_halves",
    "flip_bits->xor_with_s0",
    "ones_if_palindrome->flip_bits",
    "flip_bits->mirror_half",
    "invert_prefix->reverse_bits",
    "left_half->reverse_bits",
    "right_half->reverse_bits",
    "parity_fill->flip_bits",
    "rotl1->spread_first_bit",
    "shift_left_zero->flip_bits",
    "shift_right_zero->flip_bits",
    "flip_bits->shift_left_zero",
    "flip_bits->shift_right_zero",
    "swap_pairs->flip_bits",
    "shift_left_zero->reverse_bits",
    "shift_right_zero->reverse_bits",
    "shift_left_zero->edge_mask",
    "swap_halves->shift_left_zero",
    "swap_halves->shift_right_zero",
    "shift_left_zero->swap_halves",
    "shift_right_zero->swap_halves",
    "keep_even_positions->flip_bits",
    "keep_odd_positions->flip_bits",
    "flip_bits->keep_even_positions",
    "flip_bits->keep_odd_positions",
    "edge_mask->flip_bits",
    "center_mask->flip_bits",
    "shift_left_zero->keep_even_positions",
    "shift_left_zero->keep_odd_positions",
    "shift_right_zero->keep_even_positions",
    "shift_right_zero->keep_odd_positions",
    "keep_even_positions->reverse_bits",
    "keep_odd_positions->reverse_bits",
    "shift_left_zero->parity_fill",
    "shift_right_zero->parity_fill",
    "parity_fill->shift_left_zero",
    "parity_fill->shift_right_zero",
    "spread_first_bit->shift_left_zero",
    "spread_last_bit->shift_right_zero",
    "spread_first_bit->keep_even_positions",
    "spread_last_bit->keep_odd_positions",
    "spread_first_bit->edge_mask",
    "spread_last_bit->edge_mask",
    "spread_first_bit->center_mask",
    "spread_last_bit->center_mask",
    "rotl1->shift_left_zero",
    "rotl1->shift_right_zero",
    "shift_left_zero->rotl1",
    "shift_right_zero->rotl1",
    "reverse_bits->edge_mask",
    "reverse_bits->center_mask",
    "edge_mask->shift_left_zero",
    "edge_mask->shift_right_zero",
    "shift_left_zero->shift_left_zero",
    "shift_left_zero->swap_pairs",
};

Bitstring uniform(Bitstring x, bool b) {
  return b ? Bitstring::ones(x.width()) : Bitstring::zeros(x.width());
}

Bitstring rotate_left(Bitstring x, int by) {
  const int w = x.width();
  by %= w;
  const std::uint32_t v = x.value();
  return {(v << by) | (v >> (w - by)), w};
}

// Bits [begin, end) selected as a mask in value space.
std::uint32_t range_mask(int width, int begin, int end) {
  std::uint32_t m = 0;
  for (int i = begin; i < end; ++i) m |= 1u << (width - 1 - i);
  return m;
}

// Odd widths leave the center bit out of both halves.
std::uint32_t left_half_mask(int w) { return range_mask(w, 0, w / 2); }
std::uint32_t right_half_mask(int w) { return range_mask(w, w - w / 2, w); }

std::uint32_t alternating(int w, bool start_one) {
  std::uint32_t m = 0;
  for (int i = 0; i < w; ++i) {
    if ((i % 2 == 0) == start_one) m |= 1u << (w - 1 - i);
  }
  return m;
}

Bitstring reverse(Bitstring x) {
  Bitstring out = Bitstring::zeros(x.width());
  for (int i = 0; i < x.width(); ++i) out = out.with_bit(x.width() - 1 - i, x.bit(i));
  return out;
}

}  // namespace

std::string_view primitive_name(Primitive p) {
  return kPrimitives[static_cast<std::size_t>(p)].name;
}

Primitive primitive_from_name(std::string_view name) {
  for (const auto& info : kPrimitives) {
    if (info.name == name) return info.p;
  }
  throw TaskError("unknown primitive: " + std::string(name));
}

PrimitiveKind primitive_kind(Primitive p) {
  return p == Primitive::kXorWithS0 ? PrimitiveKind::kSecondStageOnly
                                    : PrimitiveKind::kFirstStage;
}

const std::array<Primitive, kPrimitiveCount>& all_primitives() {
  static const auto list = [] {
    std::array<Primitive, kPrimitiveCount> out{};
    for (std::size_t i = 0; i < kPrimitiveCount; ++i) out[i] = kPrimitives[i].p;
    return out;
  }();
  return list;
}

Bitstring apply_primitive(Primitive p, Bitstring x, std::optional<Bitstring> s0,
                          std::optional<Bitstring> constant) {
  const int w = x.width();
  check_width(w);
  if (primitive_kind(p) == PrimitiveKind::kSecondStageOnly) {
    if (!s0) throw TaskError("xor_with_s0 requires the original input s0");
    if (s0->width() != w) throw TaskError("s0 length does not match input length");
  } else if (s0) {
    throw TaskError(std::string(primitive_name(p)) + " does not take s0");
  }
  const std::uint32_t v = x.value();
  const std::uint32_t full = Bitstring::mask(w);
  switch (p) {
    case Primitive::kAlternatingStartOne:
      return {v ^ alternating(w, true), w};
    case Primitive::kAlternatingStartZero:
      return {v ^ alternating(w, false), w};
    case Primitive::kCenterMask:
      return {v & range_mask(w, 1, w - 1), w};
    case Primitive::kDoubleRotl:
      return rotate_left(x, 2);
    case Primitive::kDoubleRotr:
      return rotate_left(x, w - 2);
    case Primitive::kEdgeMask:
      return {v & (range_mask(w, 0, 1) | range_mask(w, w - 1, w)), w};
    case Primitive::kFlipBits:
      return {~v & full, w};
    case Primitive::kIdentity:
      return x;
    case Primitive::kInvertPrefix:
      return {v ^ left_half_mask(w), w};
    case Primitive::kInvertSuffix:
      return {v ^ right_half_mask(w), w};
    case Primitive::kKeepEvenPositions:
      return {v & alternating(w, true), w};
    case Primitive::kKeepOddPositions:
      return {v & alternating(w, false), w};
    case Primitive::kLeftHalf:
      return {v & ~right_half_mask(w), w};
    case Primitive::kMajority:
      return uniform(x, 2 * x.popcount() >= w);
    case Primitive::kMetaConstant:
      if (!constant) throw TaskError("meta_constant has no constant configured");
      if (constant->width() != w) throw TaskError("meta_constant width mismatch");
      return *constant;
    case Primitive::kMinority:
      return uniform(x, 2 * x.popcount() < w);
    case Primitive::kMirrorHalf: {
      Bitstring out = x;
      const int half = w / 2;
      for (int i = 0; i < half; ++i) out = out.with_bit(w - 1 - i, x.bit(i));
      return out;
    }
    case Primitive::kOnesIfPalindrome:
      return uniform(x, reverse(x) == x);
    case Primitive::kParityFill:
      return uniform(x, x.popcount() % 2 == 1);
    case Primitive::kReverseBits:
      return reverse(x);
    case Primitive::kRightHalf:
      return {v & ~left_half_mask(w), w};
    case Primitive::kRotl1:
      return rotate_left(x, 1);
    case Primitive::kRotr1:
      return rotate_left(x, w - 1);
    case Primitive::kShiftLeftZero:
      return {(v << 1) & full, w};
    case Primitive::kShiftRightZero:
      return {v >> 1, w};
    case Primitive::kSpreadFirstBit:
      return uniform(x, x.bit(0));
    case Primitive::kSpreadLastBit:
      return uniform(x, x.bit(w - 1));
    case Primitive::kSwapHalves: {
      const int half = w / 2;
      Bitstring out = x;
      for (int i = 0; i < half; ++i) {
        out = out.with_bit(i, x.bit(w - half + i)).with_bit(w - half + i, x.bit(i));
      }
      return out;
    }
    case Primitive::kSwapPairs: {
      Bitstring out = x;
      for (int i = 0; i + 1 < w; i += 2) {
        out = out.with_bit(i, x.bit(i + 1)).with_bit(i + 1, x.bit(i));
      }
      return out;
    }
    case Primitive::kXorWithS0:
      return {v ^ s0->value(), w};
  }
  throw TaskError("unhandled primitive");
}

Bitstring apply_primitive(std::string_view name, Bitstring x,
                          std::optional<Bitstring> s0) {
  return apply_primitive(primitive_from_name(name), x, s0);
}

std::string canonical_id(std::span<const Primitive> stages) {
  std::string id;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i) id += "->";
    id += primitive_name(stages[i]);
  }
  return id;
}

int bitload(std::span<const std::uint32_t> truth_table, int width) {
  int load = 0;
  for (int i = 0; i < width; ++i) {
    const std::uint32_t flip = 1u << (width - 1 - i);
    for (std::uint32_t x = 0; x < truth_table.size(); ++x) {
      if (truth_table[x] != truth_table[x ^ flip]) {
        ++load;
        break;
      }
    }
  }
  return load;
}

TaskFunction TaskFunction::single(Primitive p, int width,
                                  std::optional<Bitstring> constant) {
  check_width(width);
  TaskFunction f;
  f.stages_[0] = p;
  f.stage_count_ = 1;
  f.width_ = width;
  if (p == Primitive::kMetaConstant) f.constant_ = constant;
  f.id_ = canonical_id(f.stages());
  f.materialize();
  return f;
}

TaskFunction TaskFunction::compose(Primitive first, Primitive second, int width,
                                   std::optional<Bitstring> constant) {
  check_width(width);
  if (primitive_kind(first) == PrimitiveKind::kSecondStageOnly) {
    throw TaskError("xor_with_s0 cannot be the first stage");
  }
  TaskFunction f;
  f.stages_ = {first, second};
  f.stage_count_ = 2;
  f.width_ = width;
  if (first == Primitive::kMetaConstant || second == Primitive::kMetaConstant) {
    f.constant_ = constant;
  }
  f.id_ = canonical_id(f.stages());
  f.materialize();
  return f;
}

void TaskFunction::materialize() {
  const std::uint32_t size = universe_size(width_);
  table_.resize(size);
  for (std::uint32_t v = 0; v < size; ++v) {
    const Bitstring s0{v, width_};
    Bitstring y = s0;
    for (std::size_t i = 0; i < stage_count_; ++i) {
      const Primitive p = stages_[i];
      // Standalone xor_with_s0 reads its own input as s0: XOR(x, x).
      const bool wants_s0 = primitive_kind(p) == PrimitiveKind::kSecondStageOnly;
      y = apply_primitive(p, y, wants_s0 ? std::optional{s0} : std::nullopt, constant_);
    }
    table_[v] = y.value();
  }
  bitload_ = bitprobe::bitload(table_, width_);
}

bool TaskFunction::is_constant() const {
  return std::all_of(table_.begin(), table_.end(),
                     [&](std::uint32_t y) { return y == table_.front(); });
}

TaskFunction compose(std::string_view first, std::string_view second, int width) {
  return TaskFunction::compose(primitive_from_name(first), primitive_from_name(second),
                               width);
}

std::span<const std::string_view> registry_function_ids() { return kRegistryIds; }

TaskRegistry::TaskRegistry(std::vector<TaskFunction> functions, std::uint64_t seed,
                           int width)
    : functions_(std::move(functions)), seed_(seed), width_(width) {}

const TaskFunction* TaskRegistry::find(std::string_view id) const {
  for (const auto& f : functions_) {
    if (f.id() == id) return &f;
  }
  return nullptr;
}

const TaskFunction& TaskRegistry::at(std::string_view id) const {
  if (const auto* f = find(id)) return *f;
  throw TaskError("unknown function id: " + std::string(id));
}

std::optional<std::size_t> TaskRegistry::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    if (functions_[i].id() == id) return i;
  }
  return std::nullopt;
}

TaskRegistry TaskRegistry::filtered(std::span<const std::string> ids) const {
  for (const auto& id : ids) at(id);
  std::vector<TaskFunction> kept;
  for (const auto& f : functions_) {
    if (std::find(ids.begin(), ids.end(), f.id()) != ids.end()) kept.push_back(f);
  }
  return {std::move(kept), seed_, width_};
}

TaskRegistry TaskRegistry::filtered_by_bitload(std::span<const int> loads) const {
  std::vector<TaskFunction> kept;
  for (const auto& f : functions_) {
    if (std::find(loads.begin(), loads.end(), f.bitload()) != loads.end()) {
      kept.push_back(f);
    }
  }
  return {std::move(kept), seed_, width_};
}

std::optional<DistinctnessViolation> find_collision(std::span<const TaskFunction> fs) {
  std::unordered_map<std::string_view, std::size_t> ids;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    auto [it, inserted] = ids.emplace(fs[i].id(), i);
    if (!inserted) return DistinctnessViolation{fs[it->second].id(), fs[i].id()};
  }
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (std::size_t j = i + 1; j < fs.size(); ++j) {
      if (std::ranges::equal(fs[i].truth_table(), fs[j].truth_table())) {
        return DistinctnessViolation{fs[i].id(), fs[j].id()};
      }
    }
  }
  return std::nullopt;
}

namespace {

TaskFunction from_id(std::string_view id, int width, std::optional<Bitstring> constant) {
  const auto arrow = id.find("->");
  if (arrow == std::string_view::npos) {
    return TaskFunction::single(primitive_from_name(id), width, constant);
  }
  return TaskFunction::compose(primitive_from_name(id.substr(0, arrow)),
                               primitive_from_name(id.substr(arrow + 2)), width,
                               constant);
}

bool uses_constant(std::string_view id) {
  return id.find("meta_constant") != std::string_view::npos;
}

}  // namespace

std::vector<TaskFunction> build_function_set(std::uint64_t seed, int width) {
  check_width(width);
  std::vector<TaskFunction> fs;
  fs.reserve(kRegistryIds.size());
  std::vector<std::size_t> constant_slots;
  for (auto id : kRegistryIds) {
    if (uses_constant(id)) {
      constant_slots.push_back(fs.size());
      fs.push_back(from_id(id, width, Bitstring::zeros(width)));
    } else {
      fs.push_back(from_id(id, width, std::nullopt));
    }
  }

  Rng rng(substream(seed, Stream::kConstant));
  const std::uint32_t size = universe_size(width);
  for (std::size_t slot : constant_slots) {
    // Each redraw is an independent uniform draw; give up once every constant
    // has had a fair chance.
    bool placed = false;
    for (std::uint32_t attempt = 0; attempt < 64 * size && !placed; ++attempt) {
      const Bitstring c{static_cast<std::uint32_t>(rng.below(size)), width};
      TaskFunction candidate = from_id(fs[slot].id(), width, c);
      placed = std::none_of(fs.begin(), fs.end(), [&](const TaskFunction& g) {
        return &g != &fs[slot] &&
               std::ranges::equal(g.truth_table(), candidate.truth_table());
      });
      if (placed) fs[slot] = std::move(candidate);
    }
    if (!placed) {
      throw TaskError("no collision-free constant exists for " + fs[slot].id());
    }
  }
  return fs;
}

TaskRegistry build_registry(std::uint64_t seed, int width) {
  auto fs = build_function_set(seed, width);
  if (auto clash = find_collision(fs)) {
    throw TaskError("registry distinctness violated: " + clash->first + " and " +
                    clash->second + " have identical truth tables");
  }
  return {std::move(fs), seed, width};
}

void export_registry(const TaskRegistry& registry, std::ostream& out) {
  const int hex_digits = (registry.width() + 3) / 4;
  out << "# bitprobe registry v1 width=" << registry.width()
      << " seed=" << registry.seed() << " functions=" << registry.size() << '\n';
  char buf[8];
  for (const auto& f : registry.functions()) {
    out << f.id() << '\t';
    for (std::size_t i = 0; i < f.stage_count(); ++i) {
      out << (i ? "," : "") << primitive_name(f.stages()[i]);
    }
    out << '\t';
    for (std::uint32_t y : f.truth_table()) {
      std::snprintf(buf, sizeof buf, "%0*x", hex_digits, y);
      out << buf;
    }
    out << '\t' << f.bitload() << '\n';
  }
}

}  // namespace bitprobe
