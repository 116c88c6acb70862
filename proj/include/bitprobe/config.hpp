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

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitprobe/encoding.hpp"
#include "bitprobe/stats.hpp"

namespace bitprobe {

inline constexpr int kConfigVersion = 1;

struct RunConfig {
  int config_version = kConfigVersion;
  std::uint64_t registry_seed = 0;
  std::uint64_t master_seed = 0;
  int k = kDefaultWidth;
  std::vector<int> shot_set = kDefaultShotSet;
  int m = kDefaultTrialsPerFunction;
  Modality modality = Modality::kGenomic;
  std::string backend;
  int workers = 0;
  std::string output_dir;
  int bootstrap_replicates = stats::kDefaultReplicates;
  std::uint64_t bootstrap_seed = 0;
  int max_retries = 3;
  int timeout_ms = 120000;
  std::vector<std::string> function_ids;  // registry filter; empty keeps all
  std::vector<int> bitloads;              // registry filter; empty keeps all
};

// Every problem found, each prefixed with its field path (e.g. "$.shot_set[2]").
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config);

// output_dir, resolved against $BITPROBE_OUTPUT when relative.
std::filesystem::path resolve_output_dir(const RunConfig& config);

}  // namespace bitprobe
