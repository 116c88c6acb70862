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

#include "bitprobe/runner.hpp"

#include <algorithm>
#include <chrono>

namespace bitprobe {

namespace {

std::shared_ptr<const TaskRegistry> shared_registry(const RunConfig& config) {
  return std::make_shared<const TaskRegistry>(registry_for(config));
}

void write_reports(const std::filesystem::path& dir, const ReportBundle& bundle) {
  write_atomically(dir / kSummaryFile, summary_records(bundle));
  const auto rows = table_rows(bundle.rows);
  if (!rows.empty()) write_atomically(dir / kTableFile, render_accuracy_table(rows, true));
  emit_plot_data(bundle, dir / kPlotDir);
}

BundleOptions bundle_options(const RunConfig& config) {
  BundleOptions o;
  o.replicates = config.bootstrap_replicates;
  o.bootstrap_seed = config.bootstrap_seed;
  return o;
}

}  // namespace

TaskRegistry registry_for(const RunConfig& config) {
  TaskRegistry registry = build_registry(config.registry_seed, config.k);
  if (!config.function_ids.empty()) {
    std::vector<std::string> missing;
    for (const auto& id : config.function_ids) {
      if (!registry.find(id)) missing.push_back("$.filter.function_ids: unknown function " + id);
    }
    if (!missing.empty()) throw ConfigError(missing);
    registry = registry.filtered(config.function_ids);
  }
  if (!config.bitloads.empty()) registry = registry.filtered_by_bitload(config.bitloads);
  if (registry.size() == 0) throw ConfigError({"$.filter: no registry function matches"});
  return registry;
}

RunResult run(const RunConfig& config, std::ostream* progress) {
  const auto dir = resolve_output_dir(config);
  std::filesystem::create_directories(dir);
  const std::string config_text = to_json(config);
  const auto config_path = dir / kConfigFile;
  if (std::filesystem::exists(config_path)) {
    if (read_file(config_path) != config_text) {
      throw ConfigError({"$.output_dir: " + dir.string() +
                         " already holds a run with a different config"});
    }
  } else {
    write_atomically(config_path, config_text);
  }

  const auto registry = shared_registry(config);
  ExternalOptions external;
  external.timeout = std::chrono::milliseconds(config.timeout_ms);
  auto backend = make_backend(config.backend, registry, external);

  EvalOptions options;
  options.modality = config.modality;
  options.workers = config.workers;
  options.retry.max_retries = config.max_retries;

  TrialLog log(dir / kTrialsFile);
  const auto done = log.keys();
  RunResult result;
  result.output_dir = dir;
  result.model_id = backend->id();

  for (int n : config.shot_set) {
    auto planned = plan_trials(*registry, n, config.m, config.master_seed, config.modality);
    std::vector<Trial> todo;
    for (auto& t : planned) {
      if (done.contains({t.function_id, t.shots, t.trial_index})) {
        ++result.trials_skipped;
      } else {
        todo.push_back(std::move(t));
      }
    }
    if (todo.empty()) continue;
    auto batch = run_trials(*backend, todo, *registry, options);
    std::vector<TrialRecord> records;
    records.reserve(batch.completed.size());
    for (auto& o : batch.completed) {
      records.push_back({backend->id(), config.master_seed, std::move(o)});
    }
    log.append(records);
    result.trials_run += static_cast<int>(records.size());
    if (batch.failure) throw BackendError(*batch.failure);
    if (progress) {
      *progress << "n=" << n << ": " << records.size() << " trials\n";
    }
  }

  result.bundle = bundle_from_dir(dir);
  write_reports(dir, result.bundle);
  return result;
}

RunResult resume(const std::filesystem::path& dir, std::ostream* progress) {
  RunConfig config = load_config(dir / kConfigFile);
  // The stored output_dir may be relative to a different output root.
  auto stored = resolve_output_dir(config);
  if (!std::filesystem::exists(stored / kConfigFile) ||
      !std::filesystem::equivalent(stored, dir)) {
    throw ConfigError({"$.output_dir: stored config points at " + stored.string() +
                       ", not " + dir.string()});
  }
  return run(config, progress);
}

ReportBundle bundle_from_dir(const std::filesystem::path& dir) {
  const RunConfig config = load_config(dir / kConfigFile);
  const TaskRegistry registry = registry_for(config);
  const auto records = TrialLog(dir / kTrialsFile).load(config.k);
  return build_bundle(records, registry, bundle_options(config));
}

}  // namespace bitprobe
