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

#include "bitprobe/stats.hpp"

#include <omp.h>

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "bitprobe/rng.hpp"

namespace bitprobe::stats {

Bitstring mode_prediction(const TaskFunction& f, std::span<const Bitstring> demos,
                          std::uint64_t trial_seed) {
  const int k = f.width();
  std::vector<std::uint32_t> outputs;
  outputs.reserve(demos.size());
  for (const auto& d : demos) outputs.push_back(f(d).value());
  std::sort(outputs.begin(), outputs.end());

  // Run-length scan over the sorted outputs keeps the tied maxima in
  // ascending order.
  std::vector<std::uint32_t> tied;
  std::size_t best = 0;
  for (std::size_t i = 0; i < outputs.size();) {
    std::size_t j = i;
    while (j < outputs.size() && outputs[j] == outputs[i]) ++j;
    const std::size_t run = j - i;
    if (run > best) {
      best = run;
      tied.assign(1, outputs[i]);
    } else if (run == best) {
      tied.push_back(outputs[i]);
    }
    i = j;
  }

  Rng rng(substream(trial_seed, Stream::kTieBreak));
  if (tied.empty()) {
    return {static_cast<std::uint32_t>(rng.below(universe_size(k))), k};
  }
  if (tied.size() == 1) return {tied.front(), k};
  return {tied[rng.below(tied.size())], k};
}

double mode_baseline_accuracy(const TaskRegistry& registry, std::span<const Trial> trials) {
  if (trials.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& t : trials) {
    const TaskFunction& f = registry.at(t.function_id);
    hits += mode_prediction(f, t.demos, t.seed) == f(t.query) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(trials.size());
}

bool understandable_mistake(const TaskRegistry& registry, std::span<const Bitstring> demos,
                            Bitstring query, Bitstring y, const TaskFunction& f) {
  if (y == f(query)) return false;
  for (const auto& g : registry.functions()) {
    if (g.id() == f.id() || g(query) != y) continue;
    const bool agrees = std::all_of(demos.begin(), demos.end(),
                                    [&](Bitstring e) { return g(e) == f(e); });
    if (agrees) return true;
  }
  return false;
}

namespace {

void check_clusters(const Clusters& clusters, int replicates) {
  if (clusters.empty()) throw StatsError("bootstrap needs at least one cluster");
  for (const auto& c : clusters) {
    if (c.empty()) throw StatsError("bootstrap clusters must be nonempty");
  }
  if (replicates < 1) throw StatsError("bootstrap needs at least one replicate");
}

double aggregate(const Clusters& clusters) {
  double sum = 0.0;
  for (const auto& c : clusters) {
    double s = 0.0;
    for (auto v : c) s += v;
    sum += s / static_cast<double>(c.size());
  }
  return sum / static_cast<double>(clusters.size());
}

// One two-stage replicate; identical draw order in both kernels.
double replicate_mean(const Clusters& clusters, std::uint64_t base, int r) {
  Rng rng(mix_seed(base, static_cast<std::uint64_t>(r)));
  const std::size_t n_clusters = clusters.size();
  double sum = 0.0;
  for (std::size_t j = 0; j < n_clusters; ++j) {
    const auto& c = clusters[rng.below(n_clusters)];
    std::uint64_t hits = 0;
    for (std::size_t i = 0; i < c.size(); ++i) hits += c[rng.below(c.size())];
    sum += static_cast<double>(hits) / static_cast<double>(c.size());
  }
  return sum / static_cast<double>(n_clusters);
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

BootstrapResult finish(const Clusters& clusters, std::span<const double> values,
                       int replicates, std::uint64_t seed) {
  BootstrapResult out;
  out.point_estimate = aggregate(clusters);
  out.standard_error = sample_sd(values);
  out.replicates = replicates;
  out.seed = seed;
  out.degenerate = clusters.size() < 2;
  return out;
}

}  // namespace

BootstrapResult cluster_bootstrap_se_serial(const Clusters& clusters, int replicates,
                                            std::uint64_t seed) {
  check_clusters(clusters, replicates);
  const std::uint64_t base = substream(seed, Stream::kBootstrap);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(replicates));
  for (int r = 0; r < replicates; ++r) values.push_back(replicate_mean(clusters, base, r));
  return finish(clusters, values, replicates, seed);
}

BootstrapResult cluster_bootstrap_se(const Clusters& clusters, int replicates,
                                     std::uint64_t seed, Execution execution) {
  if (execution == Execution::kSerial) {
    return cluster_bootstrap_se_serial(clusters, replicates, seed);
  }
  check_clusters(clusters, replicates);
  const std::uint64_t base = substream(seed, Stream::kBootstrap);
  std::vector<double> values(static_cast<std::size_t>(replicates));
#pragma omp parallel for schedule(static)
  for (int r = 0; r < replicates; ++r) values[r] = replicate_mean(clusters, base, r);
  return finish(clusters, values, replicates, seed);
}

std::string_view covariate_name(Covariate c) {
  return c == Covariate::kLogShots ? "log_shots" : "log_params";
}

RegressionFit fit_log_regression(std::span<const std::pair<double, double>> points,
                                 Covariate covariate) {
  if (points.size() < 3) {
    throw StatsError("regression needs at least 3 points, got " +
                     std::to_string(points.size()));
  }
  const auto n = static_cast<double>(points.size());
  std::vector<double> xs;
  xs.reserve(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [c, y] : points) {
    if (!(c > 0.0)) throw StatsError("log covariate values must be positive");
    xs.push_back(std::log(c));
    mx += xs.back();
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (points[i].second - my);
  }
  if (sxx <= 0.0) throw StatsError("covariate has zero variance");

  RegressionFit fit;
  fit.covariate = covariate;
  fit.points = static_cast<int>(points.size());
  const bool flat = std::all_of(points.begin(), points.end(), [&](const auto& p) {
    return p.second == points.front().second;
  });
  if (flat) {
    fit.slope = 0.0;
    fit.intercept = points.front().second;
    fit.slope_se = 0.0;
    fit.one_sided_p = 0.5;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = points[i].second - (fit.intercept + fit.slope * xs[i]);
    ssr += r * r;
  }
  const double dof = n - 2.0;
  fit.slope_se = std::sqrt(ssr / dof / sxx);
  if (fit.slope_se == 0.0) {
    fit.one_sided_p = fit.slope > 0 ? 0.0 : (fit.slope < 0 ? 1.0 : 0.5);
    return fit;
  }
  const double t = fit.slope / fit.slope_se;
  if (!std::isfinite(t)) {
    fit.one_sided_p = t > 0 ? 0.0 : 1.0;
    return fit;
  }
  const boost::math::students_t dist(dof);
  fit.one_sided_p = boost::math::cdf(boost::math::complement(dist, t));
  return fit;
}

BaselineComparison compare_to_baseline(double model, double model_se, double baseline,
                                       double baseline_se) {
  if (!std::isfinite(model_se) || !std::isfinite(baseline_se) || model_se < 0 ||
      baseline_se < 0) {
    throw StatsError("standard errors must be finite and non-negative");
  }
  BaselineComparison out;
  const double pooled = std::sqrt(model_se * model_se + baseline_se * baseline_se);
  const double diff = model - baseline;
  if (pooled == 0.0) {
    out.degenerate = true;
    if (diff == 0.0) {
      out.z = 0.0;
      out.one_sided_p = 0.5;
    } else {
      out.z = diff > 0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      out.one_sided_p = diff > 0 ? 0.0 : 1.0;
    }
    return out;
  }
  out.z = diff / pooled;
  out.one_sided_p = 0.5 * std::erfc(out.z / std::sqrt(2.0));
  return out;
}

GroupSummary summarize_group(std::span<const double> values) {
  GroupSummary g;
  g.count = static_cast<int>(values.size());
  if (values.empty()) return g;
  double sum = 0.0;
  for (double v : values) sum += v;
  g.mean = sum / static_cast<double>(values.size());
  g.singleton = values.size() == 1;
  g.se = g.singleton ? 0.0 : sample_sd(values) / std::sqrt(static_cast<double>(values.size()));
  return g;
}

std::map<int, GroupSummary> aggregate_by_bitload(
    std::span<const std::pair<std::string, double>> per_function,
    const TaskRegistry& registry) {
  std::map<int, std::vector<double>> groups;
  for (const auto& [id, acc] : per_function) {
    const TaskFunction* f = registry.find(id);
    if (f == nullptr) throw StatsError("unknown function id: " + id);
    groups[f->bitload()].push_back(acc);
  }
  std::map<int, GroupSummary> out;
  for (const auto& [load, values] : groups) out[load] = summarize_group(values);
  return out;
}

Clusters clusters_from_outcomes(std::span<const TrialOutcome> outcomes,
                                const TaskRegistry& registry, bool mode_baseline) {
  Clusters clusters(registry.size());
  for (const auto& o : outcomes) {
    const auto idx = registry.index_of(o.trial.function_id);
    if (!idx) throw StatsError("outcome for unknown function " + o.trial.function_id);
    clusters[*idx].push_back(mode_baseline ? o.mode_correct : o.correct);
  }
  std::erase_if(clusters, [](const auto& c) { return c.empty(); });
  return clusters;
}

}  // namespace bitprobe::stats
