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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bitprobe/backends.hpp"
#include "bitprobe/eval.hpp"
#include "bitprobe/report.hpp"
#include "bitprobe/stats.hpp"
#include "bitprobe/taskgen.hpp"
#include "reference.hpp"
#include "test_support.hpp"

using namespace bitprobe;

namespace {

// Tolerances and limits.
constexpr double kBitloadSeconds = 1.0;
constexpr double kRegistrySeconds = 1.0;
constexpr double kOracleSeconds = 10.0;
constexpr int kOracleTrials = 8;
constexpr int kMcTrials = 2000;
constexpr int kMcShots = 2;
constexpr double kMcTolerance = 0.03;
constexpr int kBootClusters = 100;
constexpr int kBootPerCluster = 8;
constexpr double kBootP = 0.5;
constexpr int kBootReplicates = 5000;
constexpr double kBootRelTolerance = 0.15;
constexpr double kRegressionTolerance = 1e-9;
constexpr double kRegressionMaxP = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome bitload_table() {
  const auto expected = testing_support::expected_bitloads();
  const auto t0 = std::chrono::steady_clock::now();
  const auto registry = build_registry(0);
  std::map<std::string, int> got;
  for (const auto& f : registry.functions()) got[f.id()] = f.bitload();
  const double secs = seconds_since(t0);

  int matches = 0;
  int oracle_matches = 0;
  for (const auto& [id, load] : expected) {
    auto it = got.find(id);
    if (it == got.end()) continue;
    matches += it->second == load ? 1 : 0;
    const auto& f = registry.at(id);
    const std::string c = f.constant() ? f.constant()->str() : std::string(8, '0');
    oracle_matches += reference::bitload(id, 8, c) == load ? 1 : 0;
  }
  const bool anchors = got["identity"] == 8 && got["meta_constant"] == 0 && got["edge_mask"] == 2 &&
                       got["shift_left_zero"] == 7 && got["xor_with_s0"] == 0 &&
                       got["left_half"] == 4;
  return {matches == 100 && expected.size() == 100 && anchors && secs < kBitloadSeconds,
          std::to_string(matches) + "/100 match, reference " + std::to_string(oracle_matches) +
              "/100, anchors " + (anchors ? "ok" : "wrong") + fmt(", %.3f s", secs)};
}

Outcome registry_integrity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto registry = build_registry(0);
  int singles = 0;
  int composed = 0;
  std::set<std::vector<std::uint32_t>> tables;
  for (const auto& f : registry.functions()) {
    (f.stages().size() == 1 ? singles : composed)++;
    std::vector<std::uint32_t> t;
    for (std::uint32_t v = 0; v < 256; ++v) t.push_back(f(Bitstring(v, 8)).value());
    tables.insert(std::move(t));
  }
  const bool lib_distinct = !find_collision(registry.functions());
  const double secs = seconds_since(t0);
  return {registry.size() == 100 && singles == 30 && composed == 70 && tables.size() == 100 &&
              lib_distinct && secs < kRegistrySeconds,
          std::to_string(registry.size()) + " functions, " + std::to_string(singles) + " single, " +
              std::to_string(composed) + " composed, " + std::to_string(tables.size()) +
              " distinct truth tables" + fmt(", %.3f s", secs)};
}

Outcome primitive_ground_truth() {
  const auto b = [](const char* s) { return Bitstring::parse(s); };
  const bool ex1 = apply_primitive("shift_right_zero", b("01010000")) == b("00101000");
  const bool ex2 = compose("flip_bits", "right_half")(b("01011100")) == b("00000011");
  int failures = 0;
  const auto registry = build_registry(0);
  const std::string c = registry.at("meta_constant").constant()->str();
  for (std::uint32_t v = 0; v < 256; ++v) {
    const Bitstring x(v, 8);
    const auto ap = [&](const char* n, Bitstring y) { return apply_primitive(n, y); };
    for (const char* inv : {"identity", "flip_bits", "reverse_bits", "swap_halves", "swap_pairs"}) {
      failures += ap(inv, ap(inv, x)) != x;
    }
    failures += ap("rotr1", ap("rotl1", x)) != x;
    failures += ap("double_rotr", ap("double_rotl", x)) != x;
    failures += ap("rotl1", ap("rotl1", x)) != ap("double_rotl", x);
    Bitstring y = x;
    for (int i = 0; i < 8; ++i) y = ap("rotl1", y);
    failures += y != x;
    const auto l = ap("left_half", x), r = ap("right_half", x);
    failures += (l.value() | r.value()) != x.value() || (l.value() & r.value()) != 0;
    const auto e = ap("keep_even_positions", x), o = ap("keep_odd_positions", x);
    failures += (e.value() | o.value()) != x.value() || (e.value() & o.value()) != 0;
    failures += (ap("edge_mask", x).value() | ap("center_mask", x).value()) != x.value();
    failures += ap("invert_prefix", ap("invert_suffix", x)) != ap("flip_bits", x);
    // Every registry function against the character-level reference.
    for (const auto& f : registry.functions()) {
      failures += f(x).str() != reference::evaluate(f.id(), x.str(), c);
    }
  }
  return {ex1 && ex2 && failures == 0,
          std::string("worked examples ") + (ex1 && ex2 ? "ok" : "wrong") + ", " +
              std::to_string(failures) + " property/reference failures over 256 inputs"};
}

Outcome oracle_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto registry = std::make_shared<const TaskRegistry>(build_registry(0));
  auto oracle = oracle_backend(registry);
  double worst = 1.0;
  for (int n : kDefaultShotSet) {
    worst = std::min(worst, estimate_accuracy(*oracle, *registry, n, kOracleTrials, 0).overall);
  }
  const double secs = seconds_since(t0);
  return {worst == 1.0 && secs < kOracleSeconds, fmt("min accuracy %.3f over 8 shot counts, %.2f s", worst, secs)};
}

Outcome mode_dual_path() {
  const auto registry = std::make_shared<const TaskRegistry>(build_registry(0));
  auto mode = mode_backend();
  std::string detail;
  bool ok = true;
  for (int n : {1, 8, 64}) {
    const auto trials = plan_trials(*registry, n, kDefaultTrialsPerFunction, 0, Modality::kGenomic);
    const auto batch = run_trials(*mode, trials, *registry, {});
    std::size_t hits = 0;
    for (const auto& o : batch.completed) hits += o.correct ? 1 : 0;
    const double pipeline = static_cast<double>(hits) / static_cast<double>(trials.size());
    const double direct = stats::mode_baseline_accuracy(*registry, trials);
    ok = ok && !batch.failure && batch.completed.size() == trials.size() && pipeline == direct;
    detail += fmt("n=%g %.6f/%.6f ", n, pipeline, direct);
  }
  return {ok, detail + "(pipeline/direct)"};
}

Outcome monte_carlo_convergence() {
  const TaskRegistry r3(build_function_set(0, 3), 0, 3);
  auto mode = mode_backend();
  const auto est = estimate_accuracy(*mode, r3, kMcShots, kMcTrials, 0);
  double worst = 0.0;
  std::string worst_id;
  for (std::size_t i = 0; i < r3.size(); ++i) {
    const double exact = exact_accuracy(mode_policy(), r3[i], kMcShots).to_double();
    const double gap = std::abs(est.per_function[i].second - exact);
    if (gap > worst) {
      worst = gap;
      worst_id = r3[i].id();
    }
  }
  return {worst < kMcTolerance && est.per_function.size() == r3.size(),
          std::to_string(r3.size()) + " functions at k=3, n=2, max |MC - exact| " +
              fmt("%.4f", worst) + " (" + worst_id + ")"};
}

Outcome bootstrap_calibration() {
  std::mt19937_64 rng(20261019);
  std::bernoulli_distribution coin(kBootP);
  stats::Clusters cs(kBootClusters, std::vector<std::uint8_t>(kBootPerCluster));
  for (auto& c : cs) {
    for (auto& v : c) v = coin(rng) ? 1 : 0;
  }
  const auto b = stats::cluster_bootstrap_se(cs, kBootReplicates, 1);

  const double C = kBootClusters, m = kBootPerCluster, p = kBootP;
  const double expected = std::sqrt(p * (1 - p) / C * ((C - 1) / (C * m) + (m - 1) / (m * m)));
  double mean = 0;
  std::vector<double> a;
  for (const auto& c : cs) {
    double s = 0;
    for (auto v : c) s += v;
    a.push_back(s / m);
    mean += s / m;
  }
  mean /= C;
  double between = 0, within = 0;
  for (double ai : a) {
    between += (ai - mean) * (ai - mean);
    within += ai * (1 - ai) / m;
  }
  const double conditional = std::sqrt((between / C + within / C) / C);
  const double rel_expected = std::abs(b.standard_error / expected - 1);
  const double rel_conditional = std::abs(b.standard_error / conditional - 1);
  return {rel_expected < kBootRelTolerance && rel_conditional < kBootRelTolerance,
          fmt("bootstrap SE %.5f, expected %.5f, data-conditional %.5f", b.standard_error, expected,
              conditional)};
}

Outcome regression_recovery() {
  std::vector<std::pair<double, double>> pts, flat;
  for (int n : kDefaultShotSet) {
    pts.emplace_back(n, 0.1 + 0.05 * std::log(static_cast<double>(n)));
    flat.emplace_back(n, 0.3);
  }
  const auto fit = stats::fit_log_regression(pts, stats::Covariate::kLogShots);
  const auto ffit = stats::fit_log_regression(flat, stats::Covariate::kLogShots);
  const bool ok = std::abs(fit.slope - 0.05) < kRegressionTolerance &&
                  std::abs(fit.intercept - 0.1) < kRegressionTolerance &&
                  fit.one_sided_p < kRegressionMaxP && ffit.one_sided_p == 0.5;
  return {ok, fmt("slope err %.2e, intercept err %.2e, p %.2e", std::abs(fit.slope - 0.05),
                  std::abs(fit.intercept - 0.1), fit.one_sided_p) +
                  fmt(", flat p %.3f", ffit.one_sided_p)};
}

Outcome understandable_mistakes() {
  const auto registry = build_registry(0);
  const auto& f = registry.at("identity");
  const std::vector<Bitstring> demos{Bitstring::zeros(8)};
  const auto query = Bitstring::parse("10110100");
  // Consistent functions, found directly.
  std::set<std::uint32_t> explained;
  int consistent = 0;
  for (const auto& g : registry.functions()) {
    if (g(demos[0]) != f(demos[0])) continue;
    ++consistent;
    if (g.id() != f.id()) explained.insert(g(query).value());
  }
  explained.erase(f(query).value());
  bool positives = !explained.empty();
  for (auto y : explained) {
    positives = positives && stats::understandable_mistake(registry, demos, query, Bitstring(y, 8), f);
  }
  int false_hits = 0;
  int outside = 0;
  for (std::uint32_t y = 0; y < 256; ++y) {
    if (explained.count(y) || y == f(query).value()) continue;
    ++outside;
    false_hits += stats::understandable_mistake(registry, demos, query, Bitstring(y, 8), f);
  }
  return {consistent >= 2 && positives && false_hits == 0,
          std::to_string(consistent) + " consistent functions, " + std::to_string(explained.size()) +
              " wrong-but-consistent outputs flagged " + (positives ? "true" : "incorrectly") +
              ", " + std::to_string(false_hits) + "/" + std::to_string(outside) +
              " unexplained outputs flagged"};
}

Outcome report_fixture() {
  const auto rows = read_table_fixture(testing_support::slurp(testing_support::data_path("accuracy_fixture.tsv")));
  const auto text = render_accuracy_table(rows);
  const bool a = text.find("41.1±3.3") != std::string::npos;
  const bool b = text.find("14.0±2.4") != std::string::npos;
  return {a && b, std::string("41.1±3.3 ") + (a ? "found" : "missing") + ", 14.0±2.4 " +
                      (b ? "found" : "missing")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"bitload_table", bitload_table},
      {"registry_integrity", registry_integrity},
      {"primitive_ground_truth", primitive_ground_truth},
      {"oracle_end_to_end", oracle_end_to_end},
      {"mode_dual_path", mode_dual_path},
      {"monte_carlo_convergence", monte_carlo_convergence},
      {"bootstrap_calibration", bootstrap_calibration},
      {"regression_recovery", regression_recovery},
      {"understandable_mistake", understandable_mistakes},
      {"report_fixture", report_fixture},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
