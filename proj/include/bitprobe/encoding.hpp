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

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bitprobe/bitstring.hpp"
#include "bitprobe/rng.hpp"

namespace bitprobe {

class TaskFunction;

enum class Modality { kLinguistic, kGenomic };

std::string_view modality_name(Modality m);
Modality modality_from_name(std::string_view name);  // throws std::invalid_argument
std::string_view modality_alphabet(Modality m);

// Symbol assignment for one trial. Constructed only through sample_encoding
// or make(), both of which enforce pairwise-distinct members of the alphabet.
class EncodingScheme {
 public:
  static EncodingScheme make(Modality modality, char zero, char one, char separator);

  Modality modality() const { return modality_; }
  char zero_symbol() const { return zero_; }
  char one_symbol() const { return one_; }
  char separator_symbol() const { return separator_; }

  char symbol(bool bit) const { return bit ? one_ : zero_; }
  std::string encode(Bitstring x) const;

  friend bool operator==(const EncodingScheme&, const EncodingScheme&) = default;

 private:
  EncodingScheme(Modality m, char z, char o, char s)
      : modality_(m), zero_(z), one_(o), separator_(s) {}

  Modality modality_;
  char zero_;
  char one_;
  char separator_;
};

// Draws zero, one and separator symbols without replacement.
EncodingScheme sample_encoding(Modality modality, Rng& rng);

struct Prompt {
  std::string text;
  int expected_length = 0;
};

class EncodingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// enc(x1) enc(f(x1)) SEP ... enc(xn) enc(f(xn)) SEP enc(query); no whitespace
// and nothing after the query.
Prompt encode_trial(const TaskFunction& f, std::span<const Bitstring> demos,
                    Bitstring query, const EncodingScheme& scheme);

// Length of an n-shot prompt at width k.
constexpr std::size_t prompt_length(std::size_t shots, int width) {
  return shots * (2 * static_cast<std::size_t>(width) + 1) +
         static_cast<std::size_t>(width);
}

struct DecodeFailure {
  enum class Reason { kTruncated, kInvalidSymbol, kBackendError };
  Reason reason = Reason::kTruncated;
  std::size_t position = 0;  // first offending character (kInvalidSymbol)

  friend bool operator==(const DecodeFailure&, const DecodeFailure&) = default;
};

std::string_view reason_name(DecodeFailure::Reason r);

using Decoded = std::variant<Bitstring, DecodeFailure>;

// Reads exactly the first `width` characters of `text`.
Decoded decode_completion(std::string_view text, const EncodingScheme& scheme, int width);

// Inverse of encode_trial given the scheme: recovers (input, output) demo pairs
// and the query. Throws EncodingError when the text does not match the grammar.
struct ParsedPrompt {
  std::vector<std::pair<Bitstring, Bitstring>> demos;
  Bitstring query;
};
ParsedPrompt parse_prompt(std::string_view text, const EncodingScheme& scheme, int width);

}  // namespace bitprobe
