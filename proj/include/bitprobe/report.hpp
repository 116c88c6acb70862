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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bitprobe/eval.hpp"
#include "bitprobe/records.hpp"
#include "bitprobe/stats.hpp"

namespace bitprobe {

struct DiversityBin {
  int target_count = 0;     // trials whose f(query) has this BitDiversity
  int predicted_count = 0;  // decoded predictions with this BitDiversity
  int correct_count = 0;    // correct trials among target_count
};

// Everything reported for one (model, n).
struct ShotSummary {
  std::string model_id;
  std::string family;
  int shots = 0;
  int trials_per_function = 0;
  AccuracyEstimate estimate;
  stats::BootstrapResult bootstrap;
  double mode_baseline = 0.0;
  stats::BootstrapResult mode_bootstrap;
  stats::BaselineComparison vs_mode;
  double understandable_mistake_rate = 0.0;
  double decode_failure_rate = 0.0;
  std::map<int, stats::GroupSummary> by_bitload;
  std::map<int, DiversityBin> by_bitdiversity;
};

struct ReportBundle {
  std::vector<ShotSummary> rows;                      // ordered by (model, n)
  std::map<std::string, stats::RegressionFit> shots_fit;  // per model, when >= 3 shot counts
};

struct BundleOptions {
  int replicates = stats::kDefaultReplicates;
  std::uint64_t bootstrap_seed = 0;
  std::string family;  // defaults to the records' modality
};

// Built from persisted records alone.
ReportBundle build_bundle(std::span<const TrialRecord> records, const TaskRegistry& registry,
                          const BundleOptions& options);

// One JSON object per line, one line per (model, n).
std::string summary_records(const ReportBundle& bundle);
std::vector<ShotSummary> parse_summary_records(std::string_view text);

struct TableCell {
  double mean = 0.0;  // fraction in [0, 1]
  double se = 0.0;
};

struct TableRow {
  std::string model;
  std::string family;
  std::map<int, TableCell> cells;  // by shot count
};

std::vector<TableRow> table_rows(std::span<const ShotSummary> summaries);

// "41.1±3.3": percent, one decimal.
std::string format_cell(const TableCell& cell);

struct RenderedCell {
  std::string text;
  bool bold = false;  // column maximum within the row's family (ties all bold)
};

struct AccuracyTable {
  std::vector<int> shots;
  std::vector<std::string> models;
  std::vector<std::vector<std::optional<RenderedCell>>> cells;  // [row][column]
};

AccuracyTable build_accuracy_table(std::span<const TableRow> rows);

// Plain text with "**...**" around bold cells when markdown is set.
std::string render_accuracy_table(std::span<const TableRow> rows, bool markdown = false);

// Reads "family<TAB>model<TAB>shots<TAB>mean%<TAB>se%" lines ('#' comments).
std::vector<TableRow> read_table_fixture(std::string_view text);

struct PlotOptions {
  int bar_shots = 128;
};

// Writes tab-separated plot inputs into `dir`; returns the files written.
std::vector<std::filesystem::path> emit_plot_data(const ReportBundle& bundle,
                                                  const std::filesystem::path& dir,
                                                  const PlotOptions& options = {});

}  // namespace bitprobe
