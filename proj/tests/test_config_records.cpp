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

#include <algorithm>
#include <cstdlib>

#include "bitprobe/backends.hpp"
#include "bitprobe/config.hpp"
#include "bitprobe/records.hpp"
#include "test_support.hpp"

namespace bitprobe {
namespace {

const char* kMinimal = R"({"config_version":1,"backend":"builtin:oracle","output_dir":"out"})";

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& path) {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.rfind(path, 0) == 0; });
}

TEST(Config, DefaultsFromMinimalFile) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.k, 8);
  EXPECT_EQ(c.m, 8);
  EXPECT_EQ(c.shot_set, (std::vector<int>{1, 2, 4, 8, 16, 32, 64, 128}));
  EXPECT_EQ(c.modality, Modality::kGenomic);
  EXPECT_EQ(c.bootstrap_replicates, 5000);
}

TEST(Config, RoundTripsThroughJson) {
  auto c = parse_config(
      R"({"config_version":1,"backend":"exec:python adapter.py","output_dir":"o","k":6,
          "shot_set":[1,3,9],"m":2,"modality":"linguistic","workers":3,"registry_seed":4,
          "master_seed":5,"bootstrap_replicates":100,"bootstrap_seed":6,"max_retries":1,
          "timeout_ms":500,"filter":{"function_ids":["identity"],"bitloads":[0,6]}})");
  const auto again = parse_config(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
  EXPECT_EQ(again.function_ids, std::vector<std::string>{"identity"});
  EXPECT_EQ(again.bitloads, (std::vector<int>{0, 6}));
  EXPECT_EQ(again.modality, Modality::kLinguistic);
}

TEST(Config, EveryProblemIsReportedWithItsPath) {
  const auto p = problems_of(
      R"({"config_version":1,"backend":"","output_dir":"o","m":0,"shot_set":[4,2,300],
          "modality":"protein","colour":"red","filter":{"bitload":[1]}})");
  EXPECT_TRUE(mentions(p, "$.backend"));
  EXPECT_TRUE(mentions(p, "$.m"));
  EXPECT_TRUE(mentions(p, "$.shot_set[1]"));
  EXPECT_TRUE(mentions(p, "$.shot_set[2]"));
  EXPECT_TRUE(mentions(p, "$.modality"));
  EXPECT_TRUE(mentions(p, "$.colour"));
  EXPECT_TRUE(mentions(p, "$.filter.bitload"));
}

TEST(Config, RequiredVersionAndTypes) {
  EXPECT_TRUE(mentions(problems_of(R"({"backend":"b","output_dir":"o"})"), "$.config_version"));
  EXPECT_TRUE(mentions(problems_of(R"({"config_version":2,"backend":"b","output_dir":"o"})"),
                       "$.config_version"));
  EXPECT_TRUE(mentions(problems_of(R"({"config_version":1,"backend":"b","output_dir":"o","k":"8"})"),
                       "$.k"));
  EXPECT_TRUE(mentions(problems_of(R"({"config_version":1,"output_dir":"o"})"), "$.backend"));
  EXPECT_TRUE(mentions(problems_of("[1,2]"), "$"));
  EXPECT_TRUE(mentions(problems_of("{"), "$"));
  EXPECT_TRUE(mentions(
      problems_of(R"({"config_version":1,"backend":"b","output_dir":"o","shot_set":[]})"),
      "$.shot_set"));
}

TEST(Config, ShotSetBoundDependsOnWidth) {
  EXPECT_TRUE(problems_of(R"({"config_version":1,"backend":"b","output_dir":"o","k":3,"shot_set":[7]})").empty());
  EXPECT_FALSE(problems_of(R"({"config_version":1,"backend":"b","output_dir":"o","k":3,"shot_set":[8]})").empty());
}

TEST(Config, OutputRootFromEnvironment) {
  auto c = parse_config(kMinimal);
  ::setenv("BITPROBE_OUTPUT", "/tmp/root", 1);
  EXPECT_EQ(resolve_output_dir(c), std::filesystem::path("/tmp/root/out"));
  c.output_dir = "/abs";
  EXPECT_EQ(resolve_output_dir(c), std::filesystem::path("/abs"));
  ::unsetenv("BITPROBE_OUTPUT");
  c.output_dir = "rel";
  EXPECT_EQ(resolve_output_dir(c), std::filesystem::path("rel"));
}

std::vector<TrialRecord> sample_records() {
  auto r = std::make_shared<const TaskRegistry>(build_registry(0));
  auto oracle = oracle_backend(r);
  auto random = random_backend();
  std::vector<TrialRecord> out;
  const auto trials = plan_trials(*r, 4, 2, 3, Modality::kLinguistic);
  for (auto* b : {oracle.get(), random.get()}) {
    for (auto& o : run_trials(*b, trials, *r, {}).completed) out.push_back({b->id(), 3, o});
  }
  // One decode failure.
  out.back().outcome.raw_completion = "012";
  out.back().outcome.prediction = DecodeFailure{DecodeFailure::Reason::kTruncated, 0};
  out.back().outcome.correct = false;
  return out;
}

TEST(Records, JsonLineRoundTrip) {
  for (const auto& rec : sample_records()) {
    const auto line = to_json_line(rec);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    const auto back = trial_record_from_json(line, 8);
    EXPECT_EQ(to_json_line(back), line);
    EXPECT_EQ(back.outcome.trial.demos, rec.outcome.trial.demos);
    EXPECT_EQ(back.outcome.trial.scheme, rec.outcome.trial.scheme);
  }
  EXPECT_THROW(trial_record_from_json("{}", 8), RecordError);
  EXPECT_THROW(trial_record_from_json(to_json_line(sample_records()[0]), 6), RecordError);
}

TEST(Records, RecordsAreSelfContained) {
  // Seeds and demos in the record regenerate the same trial.
  const auto r = build_registry(0);
  for (const auto& rec : sample_records()) {
    const auto& t = rec.outcome.trial;
    const auto again = make_trial(r.at(t.function_id), t.shots, t.trial_index, rec.master_seed,
                                  t.scheme.modality());
    EXPECT_EQ(again.seed, t.seed);
    EXPECT_EQ(again.demos, t.demos);
    EXPECT_EQ(again.query, t.query);
  }
}

TEST(TrialLog, AppendLoadAndKeys) {
  const auto dir = testing_support::scratch_dir("log");
  TrialLog log(dir / "trials.jsonl");
  const auto recs = sample_records();
  log.append(std::span(recs).first(10));
  log.append(std::span(recs).subspan(10));
  EXPECT_EQ(log.load(8).size(), recs.size());
  EXPECT_EQ(log.keys().size(), recs.size() / 2);  // two models share keys
}

TEST(TrialLog, TornTailIsDropped) {
  const auto dir = testing_support::scratch_dir("torn");
  const auto path = dir / "trials.jsonl";
  const auto recs = sample_records();
  {
    TrialLog log(path);
    log.append(std::span(recs).first(3));
  }
  {
    std::ofstream out(path, std::ios::app);
    out << R"({"model_id":"builtin:oracle","function_id":"iden)";
  }
  TrialLog reopened(path);
  EXPECT_EQ(reopened.load(8).size(), 3u);
  reopened.append(std::span(recs).subspan(3, 1));
  EXPECT_EQ(reopened.load(8).size(), 4u);
}

TEST(Files, AtomicWriteReplaces) {
  const auto dir = testing_support::scratch_dir("atomic");
  write_atomically(dir / "a.txt", "one");
  write_atomically(dir / "a.txt", "two");
  EXPECT_EQ(read_file(dir / "a.txt"), "two");
  EXPECT_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
  EXPECT_THROW(read_file(dir / "missing"), RecordError);
}

}  // namespace
}  // namespace bitprobe
