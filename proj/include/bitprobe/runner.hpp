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

#include <filesystem>
#include <ostream>
#include <string>

#include "bitprobe/config.hpp"
#include "bitprobe/records.hpp"
#include "bitprobe/report.hpp"

namespace bitprobe {

inline constexpr const char* kConfigFile = "run_config.json";
inline constexpr const char* kTrialsFile = "trials.jsonl";
inline constexpr const char* kSummaryFile = "summary.jsonl";
inline constexpr const char* kTableFile = "accuracy_table.md";
inline constexpr const char* kPlotDir = "plots";

// The registry a config evaluates, after its filters.
TaskRegistry registry_for(const RunConfig& config);

struct RunResult {
  std::filesystem::path output_dir;
  std::string model_id;
  int trials_run = 0;
  int trials_skipped = 0;  // already present in the trial log
  ReportBundle bundle;
};

// Runs every (function, n, t) key missing from the output directory, then
// rewrites the summary and report files from the full trial log. A directory
// holding a different config is a ConfigError. On a backend failure the
// completed trials are persisted before the error propagates.
RunResult run(const RunConfig& config, std::ostream* progress = nullptr);

// Reloads the config stored in `dir` and continues it.
RunResult resume(const std::filesystem::path& dir, std::ostream* progress = nullptr);

// Rebuilds the bundle of a finished directory from its trial log alone.
ReportBundle bundle_from_dir(const std::filesystem::path& dir);

}  // namespace bitprobe
