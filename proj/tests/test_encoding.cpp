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

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>

#include "bitprobe/encoding.hpp"
#include "bitprobe/eval.hpp"
#include "bitprobe/taskgen.hpp"
#include "json.hpp"
#include "reference.hpp"
#include "test_support.hpp"

namespace bitprobe {
namespace {

const TaskRegistry& registry() {
  static const TaskRegistry r = build_registry(0);
  return r;
}

// Prompt rebuilt from the trial with the reference semantics.
std::string reference_prompt(const Trial& t, const std::string& constant) {
  auto enc = [&](const std::string& bits) {
    std::string s;
    for (char c : bits) s += c == '1' ? t.scheme.one_symbol() : t.scheme.zero_symbol();
    return s;
  };
  std::string out;
  for (const auto& d : t.demos) {
    out += enc(d.str()) + enc(reference::evaluate(t.function_id, d.str(), constant)) +
           t.scheme.separator_symbol();
  }
  return out + enc(t.query.str());
}

TEST(Scheme, RejectsOutOfAlphabetAndRepeatedSymbols) {
  EXPECT_THROW(EncodingScheme::make(Modality::kGenomic, 'A', 'A', 'C'), EncodingError);
  EXPECT_THROW(EncodingScheme::make(Modality::kGenomic, 'A', 'C', '0'), EncodingError);
  EXPECT_THROW(EncodingScheme::make(Modality::kLinguistic, '0', '1', 'A'), EncodingError);
  EXPECT_NO_THROW(EncodingScheme::make(Modality::kLinguistic, '0', '1', '2'));
}

TEST(Scheme, AlphabetsAndNames) {
  EXPECT_EQ(modality_alphabet(Modality::kGenomic), "ATCG");
  EXPECT_EQ(modality_alphabet(Modality::kLinguistic), "0123456789");
  EXPECT_EQ(modality_from_name("genomic"), Modality::kGenomic);
  EXPECT_EQ(modality_from_name("linguistic"), Modality::kLinguistic);
  EXPECT_THROW(modality_from_name("protein"), std::invalid_argument);
}

TEST(Scheme, SamplingIsDistinctAndCoversAlphabet) {
  for (auto m : {Modality::kGenomic, Modality::kLinguistic}) {
    Rng rng(42);
    std::set<char> zeros;
    for (int i = 0; i < 2000; ++i) {
      const auto s = sample_encoding(m, rng);
      EXPECT_NE(s.zero_symbol(), s.one_symbol());
      EXPECT_NE(s.zero_symbol(), s.separator_symbol());
      EXPECT_NE(s.one_symbol(), s.separator_symbol());
      zeros.insert(s.zero_symbol());
    }
    EXPECT_EQ(zeros.size(), modality_alphabet(m).size());
  }
}

TEST(Prompt, WorkedExample) {
  const auto scheme = EncodingScheme::make(Modality::kLinguistic, '0', '1', '2');
  const std::vector<Bitstring> demos{Bitstring::parse("0101"), Bitstring::parse("1100")};
  const auto f4 = TaskFunction::single(Primitive::kFlipBits, 4);
  const auto p = encode_trial(f4, demos, Bitstring::parse("1110"), scheme);
  EXPECT_EQ(p.text, "0101101021100001121110");
  EXPECT_EQ(p.expected_length, 4);
}

TEST(Prompt, LengthAndGrammarProperty) {
  Rng rng(7);
  for (const auto& f : registry().functions()) {
    for (int n : {1, 2, 5, 17, 128, 255}) {
      const auto ctx = sample_context(n, 8, rng);
      const auto scheme = sample_encoding(Modality::kGenomic, rng);
      const auto p = encode_trial(f, ctx.demos, ctx.query, scheme);
      ASSERT_EQ(p.text.size(), prompt_length(n, 8));
      ASSERT_EQ(p.text.size(), static_cast<std::size_t>(n * 17 + 8));
      for (int i = 0; i < n; ++i) ASSERT_EQ(p.text[i * 17 + 16], scheme.separator_symbol());
      ASSERT_EQ(std::count(p.text.begin(), p.text.end(), scheme.separator_symbol()), n);
      const auto parsed = parse_prompt(p.text, scheme, 8);
      ASSERT_EQ(parsed.demos.size(), static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        EXPECT_EQ(parsed.demos[i].first, ctx.demos[i]);
        EXPECT_EQ(parsed.demos[i].second, f(ctx.demos[i]));
      }
      EXPECT_EQ(parsed.query, ctx.query);
    }
  }
}

TEST(Prompt, RejectsInvalidContexts) {
  const auto& f = registry().at("identity");
  const auto scheme = EncodingScheme::make(Modality::kGenomic, 'A', 'C', 'G');
  const auto x = Bitstring::parse("00000001");
  const auto y = Bitstring::parse("00000010");
  const std::vector<Bitstring> dup{x, x};
  EXPECT_THROW(encode_trial(f, dup, y, scheme), EncodingError);
  const std::vector<Bitstring> has_query{x, y};
  EXPECT_THROW(encode_trial(f, has_query, y, scheme), EncodingError);
  const std::vector<Bitstring> narrow{Bitstring::parse("0101")};
  EXPECT_THROW(encode_trial(f, narrow, y, scheme), EncodingError);
}

TEST(Prompt, ParseRejectsMalformedText) {
  const auto scheme = EncodingScheme::make(Modality::kGenomic, 'A', 'C', 'G');
  EXPECT_THROW(parse_prompt("ACAC", scheme, 8), EncodingError);
  EXPECT_THROW(parse_prompt("ACACACACACACACACTACACACAC", scheme, 8), EncodingError);
}

TEST(Decode, ReadsExactlyWidthSymbols) {
  const auto scheme = EncodingScheme::make(Modality::kGenomic, 'T', 'G', 'A');
  const auto ok = decode_completion("GTTTGGGGAAAA", scheme, 8);
  ASSERT_TRUE(std::holds_alternative<Bitstring>(ok));
  EXPECT_EQ(std::get<Bitstring>(ok).str(), "10001111");

  const auto short_text = decode_completion("GTT", scheme, 8);
  ASSERT_TRUE(std::holds_alternative<DecodeFailure>(short_text));
  EXPECT_EQ(std::get<DecodeFailure>(short_text).reason, DecodeFailure::Reason::kTruncated);

  const auto sep = decode_completion("GTTAGGGG", scheme, 8);
  ASSERT_TRUE(std::holds_alternative<DecodeFailure>(sep));
  EXPECT_EQ(std::get<DecodeFailure>(sep).reason, DecodeFailure::Reason::kInvalidSymbol);
  EXPECT_EQ(std::get<DecodeFailure>(sep).position, 3u);

  const auto foreign = decode_completion("GTTTGGGC", scheme, 8);
  EXPECT_EQ(std::get<DecodeFailure>(foreign).position, 7u);
  EXPECT_EQ(reason_name(DecodeFailure::Reason::kTruncated), "truncated");
}

TEST(Decode, RoundTripsEveryBitstring) {
  for (auto m : {Modality::kGenomic, Modality::kLinguistic}) {
    Rng rng(3);
    const auto scheme = sample_encoding(m, rng);
    for (std::uint32_t v = 0; v < 256; ++v) {
      const Bitstring x(v, 8);
      EXPECT_EQ(std::get<Bitstring>(decode_completion(scheme.encode(x), scheme, 8)), x);
    }
  }
}

TEST(Trials, ModalitiesShareContexts) {
  const auto& f = registry().at("swap_pairs");
  for (int t = 0; t < 20; ++t) {
    const auto g = make_trial(f, 16, t, 99, Modality::kGenomic);
    const auto l = make_trial(f, 16, t, 99, Modality::kLinguistic);
    EXPECT_EQ(g.demos, l.demos);
    EXPECT_EQ(g.query, l.query);
    EXPECT_EQ(g.seed, l.seed);
    EXPECT_EQ(g.scheme.modality(), Modality::kGenomic);
    EXPECT_EQ(l.scheme.modality(), Modality::kLinguistic);
  }
}

constexpr std::uint64_t kGoldenSeed = 2026;

std::vector<Trial> golden_trials() {
  std::vector<Trial> out;
  for (const char* id : {"identity", "meta_constant", "flip_bits->right_half", "swap_pairs",
                         "flip_bits->xor_with_s0", "shift_left_zero->swap_pairs"}) {
    for (int n : {1, 2, 4}) {
      for (int t : {0, 1}) {
        for (auto m : {Modality::kGenomic, Modality::kLinguistic}) {
          out.push_back(make_trial(registry().at(id), n, t, kGoldenSeed, m));
        }
      }
    }
  }
  return out;
}

// Frozen prompts; regenerate with BITPROBE_WRITE_GOLDEN=1 only after an
// intended change to seeding or encoding.
TEST(Golden, PromptsAreStable) {
  const auto path = testing_support::data_path("prompts_golden.jsonl");
  const auto constant = registry().at("meta_constant").constant()->str();
  const auto trials = golden_trials();
  std::string fresh;
  for (const auto& t : trials) {
    const auto p = encode_trial(registry().at(t.function_id), t.demos, t.query, t.scheme);
    EXPECT_EQ(p.text, reference_prompt(t, constant)) << t.function_id;
    nlohmann::ordered_json j;
    j["function_id"] = t.function_id;
    j["n"] = t.shots;
    j["t"] = t.trial_index;
    j["modality"] = modality_name(t.scheme.modality());
    j["seed"] = t.seed;
    j["prompt"] = p.text;
    fresh += j.dump() + "\n";
  }
  if (std::getenv("BITPROBE_WRITE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << fresh;
    GTEST_SKIP() << "wrote " << path;
  }
  EXPECT_EQ(testing_support::slurp(path), fresh);
}

}  // namespace
}  // namespace bitprobe
