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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bitprobe/bitstring.hpp"
#include "bitprobe/eval.hpp"
#include "bitprobe/taskgen.hpp"

namespace bitprobe::stats {

// Most frequent demo output; ties among the maximal outputs (ordered by value)
// are broken with the trial's tie-break stream. With no demos every bitstring
// ties.
Bitstring mode_prediction(const TaskFunction& f, std::span<const Bitstring> demos,
                          std::uint64_t trial_seed);

// Mean of 1[mode prediction == f(query)] over the trials.
double mode_baseline_accuracy(const TaskRegistry& registry, std::span<const Trial> trials);

// True iff some other registry function agrees with f on every demo and maps
// the query to y. A correct y is never a mistake.
bool understandable_mistake(const TaskRegistry& registry, std::span<const Bitstring> demos,
                            Bitstring query, Bitstring y, const TaskFunction& f);

inline constexpr int kDefaultReplicates = 5000;

struct BootstrapResult {
  double point_estimate = 0.0;
  double standard_error = 0.0;
  int replicates = 0;
  std::uint64_t seed = 0;
  bool degenerate = false;  // fewer than two clusters
};

// Outcome indicators grouped by function (cluster).
using Clusters = std::vector<std::vector<std::uint8_t>>;

// Two-stage resampling: clusters with replacement, then each drawn cluster's
// outcomes with replacement. SE is the sample SD (divisor R - 1) of the
// replicate means. Replicate r draws from (seed, r) only.
BootstrapResult cluster_bootstrap_se(const Clusters& clusters,
                                     int replicates = kDefaultReplicates,
                                     std::uint64_t seed = 0,
                                     Execution execution = Execution::kParallel);

// Serial reference for the kernel above.
BootstrapResult cluster_bootstrap_se_serial(const Clusters& clusters, int replicates,
                                            std::uint64_t seed);

enum class Covariate { kLogShots, kLogParams };
std::string_view covariate_name(Covariate c);

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double one_sided_p = 0.5;  // H1: slope > 0
  Covariate covariate = Covariate::kLogShots;
  int points = 0;
};

class StatsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// OLS of accuracy on ln(covariate); t-test with points - 2 dof.
RegressionFit fit_log_regression(std::span<const std::pair<double, double>> points,
                                 Covariate covariate);

struct BaselineComparison {
  double z = 0.0;
  double one_sided_p = 0.5;  // H1: model > baseline
  bool degenerate = false;
};

BaselineComparison compare_to_baseline(double model, double model_se, double baseline,
                                       double baseline_se);

struct GroupSummary {
  double mean = 0.0;
  double se = 0.0;
  int count = 0;
  bool singleton = false;
};

std::map<int, GroupSummary> aggregate_by_bitload(
    std::span<const std::pair<std::string, double>> per_function,
    const TaskRegistry& registry);

// Mean and standard error of the mean (sample SD / sqrt(n)).
GroupSummary summarize_group(std::span<const double> values);

// Clusters of correctness indicators, in registry order.
Clusters clusters_from_outcomes(std::span<const TrialOutcome> outcomes,
                                const TaskRegistry& registry, bool mode_baseline = false);

}  // namespace bitprobe::stats
