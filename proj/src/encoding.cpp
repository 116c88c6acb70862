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

#include "bitprobe/encoding.hpp"

#include <algorithm>
#include <set>

#include "bitprobe/taskgen.hpp"

namespace bitprobe {

std::string_view modality_name(Modality m) {
  return m == Modality::kGenomic ? "genomic" : "linguistic";
}

Modality modality_from_name(std::string_view name) {
  if (name == "genomic") return Modality::kGenomic;
  if (name == "linguistic") return Modality::kLinguistic;
  throw std::invalid_argument("unknown modality: " + std::string(name));
}

std::string_view modality_alphabet(Modality m) {
  return m == Modality::kGenomic ? "ATCG" : "0123456789";
}

EncodingScheme EncodingScheme::make(Modality modality, char zero, char one,
                                    char separator) {
  const auto alphabet = modality_alphabet(modality);
  for (char c : {zero, one, separator}) {
    if (alphabet.find(c) == std::string_view::npos) {
      throw EncodingError(std::string("symbol '") + c + "' is not in the " +
                          std::string(modality_name(modality)) + " alphabet");
    }
  }
  if (zero == one || zero == separator || one == separator) {
    throw EncodingError("encoding symbols must be pairwise distinct");
  }
  return {modality, zero, one, separator};
}

std::string EncodingScheme::encode(Bitstring x) const {
  std::string out(static_cast<std::size_t>(x.width()), zero_);
  for (int i = 0; i < x.width(); ++i) {
    if (x.bit(i)) out[i] = one_;
  }
  return out;
}

EncodingScheme sample_encoding(Modality modality, Rng& rng) {
  std::string pool(modality_alphabet(modality));
  // Partial Fisher-Yates: the first three slots become zero, one, separator.
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  return EncodingScheme::make(modality, pool[0], pool[1], pool[2]);
}

Prompt encode_trial(const TaskFunction& f, std::span<const Bitstring> demos,
                    Bitstring query, const EncodingScheme& scheme) {
  const int k = f.width();
  if (query.width() != k) throw EncodingError("query width does not match the task");
  std::set<std::uint32_t> seen;
  for (const auto& d : demos) {
    if (d.width() != k) throw EncodingError("demo width does not match the task");
    if (!seen.insert(d.value()).second) throw EncodingError("demos must be distinct");
  }
  if (seen.contains(query.value())) throw EncodingError("query collides with a demo");

  Prompt p;
  p.expected_length = k;
  p.text.reserve(prompt_length(demos.size(), k));
  for (const auto& d : demos) {
    p.text += scheme.encode(d);
    p.text += scheme.encode(f(d));
    p.text += scheme.separator_symbol();
  }
  p.text += scheme.encode(query);
  return p;
}

std::string_view reason_name(DecodeFailure::Reason r) {
  switch (r) {
    case DecodeFailure::Reason::kTruncated:
      return "truncated";
    case DecodeFailure::Reason::kInvalidSymbol:
      return "invalid_symbol";
    case DecodeFailure::Reason::kBackendError:
      return "backend_error";
  }
  return "unknown";
}

Decoded decode_completion(std::string_view text, const EncodingScheme& scheme,
                          int width) {
  if (text.size() < static_cast<std::size_t>(width)) {
    return DecodeFailure{DecodeFailure::Reason::kTruncated, text.size()};
  }
  Bitstring out = Bitstring::zeros(width);
  for (int i = 0; i < width; ++i) {
    if (text[i] == scheme.one_symbol()) {
      out = out.with_bit(i, true);
    } else if (text[i] != scheme.zero_symbol()) {
      return DecodeFailure{DecodeFailure::Reason::kInvalidSymbol,
                           static_cast<std::size_t>(i)};
    }
  }
  return out;
}

namespace {

Bitstring read_bits(std::string_view text, std::size_t at, const EncodingScheme& scheme,
                    int width) {
  auto d = decode_completion(text.substr(at), scheme, width);
  if (auto* fail = std::get_if<DecodeFailure>(&d)) {
    throw EncodingError("malformed prompt at offset " +
                        std::to_string(at + fail->position));
  }
  return std::get<Bitstring>(d);
}

}  // namespace

ParsedPrompt parse_prompt(std::string_view text, const EncodingScheme& scheme,
                          int width) {
  const std::size_t w = static_cast<std::size_t>(width);
  const std::size_t block = 2 * w + 1;
  if (text.size() < w || (text.size() - w) % block != 0) {
    throw EncodingError("prompt length " + std::to_string(text.size()) +
                        " does not fit the grammar at width " + std::to_string(width));
  }
  ParsedPrompt parsed;
  const std::size_t shots = (text.size() - w) / block;
  parsed.demos.reserve(shots);
  for (std::size_t i = 0; i < shots; ++i) {
    const std::size_t at = i * block;
    if (text[at + 2 * w] != scheme.separator_symbol()) {
      throw EncodingError("missing separator at offset " + std::to_string(at + 2 * w));
    }
    parsed.demos.emplace_back(read_bits(text, at, scheme, width),
                              read_bits(text, at + w, scheme, width));
  }
  parsed.query = read_bits(text, shots * block, scheme, width);
  return parsed;
}

}  // namespace bitprobe
