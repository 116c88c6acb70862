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
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bitprobe/eval.hpp"

namespace bitprobe {

// One persisted trial: the outcome plus the run-level keys needed to
// recompute every report number from the record alone.
struct TrialRecord {
  std::string model_id;
  std::uint64_t master_seed = 0;
  TrialOutcome outcome;
};

std::string to_json_line(const TrialRecord& record);
TrialRecord trial_record_from_json(std::string_view line, int width);

class RecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Append-only line-delimited trial log. A torn final line (no trailing
// newline) from an interrupted run is dropped on open.
class TrialLog {
 public:
  explicit TrialLog(std::filesystem::path path);

  std::vector<TrialRecord> load(int width) const;
  std::set<TrialKey> keys() const;
  void append(std::span<const TrialRecord> records);
  const std::filesystem::path& path() const { return path_; }

 private:
  void repair_tail();
  std::filesystem::path path_;
};

// Writes `text` to a sibling temp file and renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& text);

std::string read_file(const std::filesystem::path& path);

}  // namespace bitprobe
