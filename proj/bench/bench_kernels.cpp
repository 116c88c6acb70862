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

// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "bitprobe/backends.hpp"
#include "bitprobe/eval.hpp"
#include "bitprobe/stats.hpp"
#include "bitprobe/taskgen.hpp"

namespace {

using namespace bitprobe;

std::shared_ptr<const TaskRegistry> registry() {
  static const auto r = std::make_shared<const TaskRegistry>(build_registry(0));
  return r;
}

void BM_RunTrials(benchmark::State& state) {
  const auto r = registry();
  auto mode = mode_backend();
  const auto trials = plan_trials(*r, static_cast<int>(state.range(1)), 8, 0, Modality::kGenomic);
  EvalOptions options;
  options.execution = state.range(0) ? Execution::kParallel : Execution::kSerial;
  for (auto _ : state) {
    auto batch = run_trials(*mode, trials, *r, options);
    benchmark::DoNotOptimize(batch.completed.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trials.size()));
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}
BENCHMARK(BM_RunTrials)->ArgsProduct({{0, 1}, {8, 128}})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Bootstrap(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution coin(0.4);
  stats::Clusters cs(100, std::vector<std::uint8_t>(8));
  for (auto& c : cs) {
    for (auto& v : c) v = coin(rng);
  }
  for (auto _ : state) {
    const auto b = state.range(0)
                       ? stats::cluster_bootstrap_se(cs, 5000, 0, Execution::kParallel)
                       : stats::cluster_bootstrap_se_serial(cs, 5000, 0);
    benchmark::DoNotOptimize(b.standard_error);
  }
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}
BENCHMARK(BM_Bootstrap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
