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
#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "bitprobe/report.hpp"
#include "test_support.hpp"

namespace {

using testing_support::scratch_dir;
using testing_support::slurp;

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args, const std::filesystem::path& root = {}) {
  std::string cmd;
  if (!root.empty()) cmd += "BITPROBE_OUTPUT='" + root.string() + "' ";
  cmd += std::string(BITPROBE_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path write_config(const std::filesystem::path& dir, const std::string& body) {
  const auto path = dir / "config.json";
  std::ofstream(path) << body;
  return path;
}

const char* kSmallOracle =
    R"({"config_version":1,"backend":"builtin:oracle","output_dir":"run","m":2,
        "shot_set":[1,4,16],"bootstrap_replicates":200})";

TEST(Cli, RegistryCommands) {
  const auto verify = cli("registry verify --expected-bitloads " +
                          testing_support::data_path("bitloads_k8.tsv").string());
  EXPECT_EQ(verify.code, 0);
  EXPECT_NE(verify.out.find("30 singles"), std::string::npos);

  const auto dir = scratch_dir("cli_registry");
  std::ofstream(dir / "wrong.tsv") << "identity\t7\n";
  EXPECT_EQ(cli("registry verify --expected-bitloads " + (dir / "wrong.tsv").string()).code, 4);
  // Distinctness cannot hold at k=3.
  EXPECT_EQ(cli("registry build --k 3").code, 4);

  const auto exported = cli("registry export --seed 3");
  EXPECT_EQ(exported.code, 0);
  EXPECT_EQ(std::count(exported.out.begin(), exported.out.end(), '\n'), 101);
  EXPECT_EQ(cli("registry build --seed 3 --out " + (dir / "reg.tsv").string()).code, 0);
  EXPECT_EQ(slurp(dir / "reg.tsv"), exported.out);
}

TEST(Cli, UsageAndConfigErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  const auto dir = scratch_dir("cli_badconfig");
  const auto cfg = write_config(dir, R"({"config_version":1,"backend":"builtin:oracle","output_dir":"x","m":0,"extra":1})");
  EXPECT_EQ(cli("eval run --config " + cfg.string(), dir).code, 2);
  EXPECT_EQ(cli("eval run --config " + (dir / "missing.json").string(), dir).code, 2);
  const auto bad_backend = write_config(dir, R"({"config_version":1,"backend":"builtin:nope","output_dir":"y"})");
  EXPECT_EQ(cli("eval run --config " + bad_backend.string(), dir).code, 2);
}

TEST(Cli, OracleRunWritesArtifactsAndRerunIsIdempotent) {
  const auto root = scratch_dir("cli_oracle");
  const auto cfg = write_config(root, kSmallOracle);
  const auto first = cli("eval run --config " + cfg.string(), root);
  ASSERT_EQ(first.code, 0);
  EXPECT_NE(first.out.find("100.0±0.0"), std::string::npos);
  const auto run = root / "run";
  for (const char* f : {"run_config.json", "trials.jsonl", "summary.jsonl", "accuracy_table.md",
                        "plots/accuracy_vs_shots.tsv"}) {
    EXPECT_TRUE(std::filesystem::exists(run / f)) << f;
  }
  const auto summary = slurp(run / "summary.jsonl");
  const auto trials = slurp(run / "trials.jsonl");
  EXPECT_EQ(std::count(trials.begin(), trials.end(), '\n'), 600);

  const auto again = cli("eval run --config " + cfg.string(), root);
  ASSERT_EQ(again.code, 0);
  EXPECT_NE(again.out.find("0 trials run, 600 already present"), std::string::npos);
  EXPECT_EQ(slurp(run / "summary.jsonl"), summary);
  EXPECT_EQ(slurp(run / "trials.jsonl"), trials);

  // Same directory, different config.
  const auto other = write_config(root, R"({"config_version":1,"backend":"builtin:oracle","output_dir":"run","m":3})");
  EXPECT_EQ(cli("eval run --config " + other.string(), root).code, 2);
}

TEST(Cli, InterruptedRunResumesToTheSameBundle) {
  const auto root = scratch_dir("cli_resume");
  const std::string body =
      R"({"config_version":1,"backend":"builtin:consistent","m":2,"shot_set":[1,2,8],"bootstrap_replicates":200,"output_dir":)";
  const auto a = write_config(root, body + "\"full\"}");
  ASSERT_EQ(cli("eval run --config " + a.string(), root).code, 0);
  std::filesystem::rename(root / "config.json", root / "full.json");
  const auto b = write_config(root, body + "\"cut\"}");
  ASSERT_EQ(cli("eval run --config " + b.string(), root).code, 0);

  // Simulate a crash: keep 250 complete lines plus a torn one, drop reports.
  const auto log = root / "cut" / "trials.jsonl";
  std::istringstream in(slurp(log));
  std::string line, kept;
  for (int i = 0; i < 250 && std::getline(in, line); ++i) kept += line + "\n";
  std::getline(in, line);
  kept += line.substr(0, line.size() / 2);
  std::ofstream(log, std::ios::trunc) << kept;
  std::filesystem::remove(root / "cut" / "summary.jsonl");

  const auto resumed = cli("eval resume " + (root / "cut").string(), root);
  ASSERT_EQ(resumed.code, 0);
  EXPECT_NE(resumed.out.find("250 already present"), std::string::npos);
  EXPECT_EQ(slurp(root / "cut" / "summary.jsonl"), slurp(root / "full" / "summary.jsonl"));
  EXPECT_EQ(slurp(root / "cut" / "accuracy_table.md"), slurp(root / "full" / "accuracy_table.md"));
}

TEST(Cli, ModeSolvesConstantOnlyRegistry) {
  const auto root = scratch_dir("cli_mode");
  const auto cfg = write_config(root,
      R"({"config_version":1,"backend":"builtin:mode","output_dir":"run","m":4,"bootstrap_replicates":100,
          "filter":{"function_ids":["meta_constant"]}})");
  ASSERT_EQ(cli("eval run --config " + cfg.string(), root).code, 0);
  for (const auto& s : bitprobe::parse_summary_records(slurp(root / "run" / "summary.jsonl"))) {
    EXPECT_EQ(s.estimate.overall, 1.0) << "n=" << s.shots;
  }
  const auto unknown = write_config(root,
      R"({"config_version":1,"backend":"builtin:mode","output_dir":"run2","filter":{"function_ids":["nope"]}})");
  EXPECT_EQ(cli("eval run --config " + unknown.string(), root).code, 2);
}

TEST(Cli, BackendFailureExitsThreeAndKeepsCompletedTrials) {
  const auto root = scratch_dir("cli_backend");
  const auto cfg = write_config(root,
      R"({"config_version":1,"backend":"builtin:oracle","output_dir":"run","m":1,"shot_set":[1,2],"max_retries":0,"timeout_ms":2000})");
  const std::string adapter = BITPROBE_FAKE_ADAPTER;
  EXPECT_EQ(cli("eval run --config " + cfg.string() + " --backend 'exec:" + adapter +
                    " --mode die-after:150' --output died",
                root)
                .code,
            3);
  const auto log = root / "died" / "trials.jsonl";
  ASSERT_TRUE(std::filesystem::exists(log));
  const auto kept = slurp(log);
  EXPECT_GE(std::count(kept.begin(), kept.end(), '\n'), 100);
}

TEST(Cli, StatsAndReportCommands) {
  const auto root = scratch_dir("cli_stats");
  const auto cfg = write_config(root, kSmallOracle);
  ASSERT_EQ(cli("eval run --config " + cfg.string(), root).code, 0);
  const auto run = (root / "run").string();

  const auto boot = cli("stats bootstrap " + run + " --n 4 --replicates 100");
  EXPECT_EQ(boot.code, 0);
  EXPECT_NE(boot.out.find("estimate 1"), std::string::npos);
  EXPECT_EQ(cli("stats bootstrap " + run + " --n 3").code, 2);

  const auto reg = cli("stats regress --dir " + run);
  EXPECT_EQ(reg.code, 0);
  EXPECT_NE(reg.out.find("p_one_sided 0.5"), std::string::npos);
  std::ofstream(root / "pts.txt") << "1 0.1\n2 0.1346574\n4 0.1693147\n";
  EXPECT_NE(cli("stats regress --points " + (root / "pts.txt").string()).out.find("slope 0.05"),
            std::string::npos);

  const auto cmp = cli("stats compare --model 0.411 --model-se 0.033 --baseline 0.2 --baseline-se 0.02");
  EXPECT_EQ(cmp.code, 0);
  EXPECT_NE(cmp.out.find("z 5.468"), std::string::npos);

  const auto table = cli("report table --fixture " + testing_support::data_path("accuracy_fixture.tsv").string() + " --markdown");
  EXPECT_EQ(table.code, 0);
  EXPECT_NE(table.out.find("**41.1±3.3**"), std::string::npos);
  EXPECT_NE(table.out.find("**14.0±2.4**"), std::string::npos);
  EXPECT_NE(cli("report table " + run).out.find("100.0±0.0"), std::string::npos);

  const auto plots = cli("report plots " + run + " --out " + (root / "p").string() + " --bar-shots 4");
  EXPECT_EQ(plots.code, 0);
  EXPECT_NE(slurp(root / "p" / "function_bars.tsv").find("builtin:oracle\t4\tidentity"),
            std::string::npos);
}

}  // namespace
