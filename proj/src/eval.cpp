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

#include "bitprobe/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <numeric>
#include <thread>

#include "bitprobe/stats.hpp"

namespace bitprobe {

Context sample_context(int shots, int width, Rng& rng) {
  check_width(width);
  const std::uint32_t size = universe_size(width);
  if (shots < 1 || static_cast<std::uint32_t>(shots) > size - 1) {
    throw std::invalid_argument("shot count " + std::to_string(shots) +
                                " outside [1, " + std::to_string(size - 1) + "]");
  }
  std::vector<std::uint32_t> pool(size);
  std::iota(pool.begin(), pool.end(), 0u);
  // Partial Fisher-Yates: slots [0, n) are the ordered demos, slot n the query.
  const auto n = static_cast<std::uint32_t>(shots);
  for (std::uint32_t i = 0; i <= n; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.below(size - i));
    std::swap(pool[i], pool[j]);
  }
  Context ctx;
  ctx.demos.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) ctx.demos.emplace_back(pool[i], width);
  ctx.query = Bitstring{pool[n], width};
  return ctx;
}

Trial make_trial(const TaskFunction& f, int shots, int trial_index,
                 std::uint64_t master_seed, Modality modality) {
  Trial t;
  t.function_id = f.id();
  t.shots = shots;
  t.trial_index = trial_index;
  t.seed = trial_seed(master_seed, f.id(), shots, trial_index);
  Rng context_rng(substream(t.seed, Stream::kContext));
  auto ctx = sample_context(shots, f.width(), context_rng);
  t.demos = std::move(ctx.demos);
  t.query = ctx.query;
  Rng scheme_rng(substream(t.seed, Stream::kScheme));
  t.scheme = sample_encoding(modality, scheme_rng);
  return t;
}

std::string prompt_hash(std::string_view prompt) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(prompt)));
  return buf;
}

namespace {

std::string describe(const TrialKey& key) {
  return key.function_id + " n=" + std::to_string(key.shots) +
         " t=" + std::to_string(key.trial_index);
}

}  // namespace

TrialFailure::TrialFailure(const TrialKey& key, const std::string& what)
    : BackendError("trial " + describe(key) + ": " + what), key_(key) {}

TrialOutcome run_trial(ModelBackend& backend, const Trial& trial,
                       const TaskRegistry& registry, const RetryPolicy& retry) {
  const TaskFunction& f = registry.at(trial.function_id);
  const int k = f.width();
  const Prompt prompt = encode_trial(f, trial.demos, trial.query, trial.scheme);

  CompletionRequest request;
  request.request_id = trial.function_id + "/" + std::to_string(trial.shots) + "/" +
                       std::to_string(trial.trial_index);
  request.prompt = prompt.text;
  request.max_symbols = prompt.expected_length;
  const TrialContext context{&trial.scheme, k, trial.function_id, trial.seed};

  TrialOutcome out;
  out.trial = trial;
  out.prompt_hash = prompt_hash(prompt.text);

  CompletionResponse response;
  auto backoff = retry.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      response = backend.complete(request, &context);
      break;
    } catch (const TransportError& e) {
      if (attempt >= retry.max_retries) {
        throw TrialFailure(out.key(), std::string(e.what()) + " (after " +
                                          std::to_string(attempt) + " retries)");
      }
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    } catch (const BackendError& e) {
      throw TrialFailure(out.key(), e.what());
    }
  }

  out.raw_completion = response.completion;
  if (response.error) {
    out.prediction = DecodeFailure{DecodeFailure::Reason::kBackendError, 0};
  } else {
    out.prediction = decode_completion(response.completion, trial.scheme, k);
  }
  const Bitstring target = f(trial.query);
  if (const auto* y = std::get_if<Bitstring>(&out.prediction)) {
    out.correct = *y == target;
    out.understandable_mistake =
        !out.correct &&
        stats::understandable_mistake(registry, trial.demos, trial.query, *y, f);
  }
  out.mode_prediction = stats::mode_prediction(f, trial.demos, trial.seed);
  out.mode_correct = out.mode_prediction == target;
  return out;
}

std::vector<Trial> plan_trials(const TaskRegistry& registry, int shots,
                               int trials_per_function, std::uint64_t master_seed,
                               Modality modality) {
  if (trials_per_function < 1) throw std::invalid_argument("m must be >= 1");
  std::vector<Trial> trials;
  trials.reserve(registry.size() * static_cast<std::size_t>(trials_per_function));
  for (const auto& f : registry.functions()) {
    for (int t = 0; t < trials_per_function; ++t) {
      trials.push_back(make_trial(f, shots, t, master_seed, modality));
    }
  }
  return trials;
}

namespace {

int resolve_workers(const ModelBackend& backend, int requested) {
  const int limit = std::max(1, backend.max_in_flight());
  if (requested > 0) return std::min(requested, limit);
  return std::min(limit, std::max(1, omp_get_max_threads()));
}

void sort_by_key(std::vector<TrialOutcome>& outcomes) {
  std::sort(outcomes.begin(), outcomes.end(),
            [](const TrialOutcome& a, const TrialOutcome& b) { return a.key() < b.key(); });
}

BatchResult run_trials_serial(ModelBackend& backend, std::span<const Trial> trials,
                              const TaskRegistry& registry, const RetryPolicy& retry) {
  BatchResult result;
  for (const auto& trial : trials) {
    try {
      result.completed.push_back(run_trial(backend, trial, registry, retry));
    } catch (const std::exception& e) {
      result.failure = e.what();
      break;
    }
  }
  sort_by_key(result.completed);
  return result;
}

BatchResult run_trials_parallel(ModelBackend& backend, std::span<const Trial> trials,
                                const TaskRegistry& registry, const RetryPolicy& retry,
                                int workers) {
  const auto count = static_cast<std::ptrdiff_t>(trials.size());
  std::vector<std::optional<TrialOutcome>> slots(trials.size());
  std::vector<std::optional<std::string>> errors(trials.size());
  std::atomic<bool> stop{false};

#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    if (stop.load(std::memory_order_relaxed)) continue;
    try {
      slots[i] = run_trial(backend, trials[i], registry, retry);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      stop.store(true, std::memory_order_relaxed);
    }
  }

  BatchResult result;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) result.completed.push_back(std::move(*slots[i]));
    if (errors[i] && !result.failure) result.failure = *errors[i];
  }
  sort_by_key(result.completed);
  return result;
}

}  // namespace

BatchResult run_trials(ModelBackend& backend, std::span<const Trial> trials,
                       const TaskRegistry& registry, const EvalOptions& options) {
  if (options.execution == Execution::kSerial) {
    return run_trials_serial(backend, trials, registry, options.retry);
  }
  return run_trials_parallel(backend, trials, registry, options.retry,
                             resolve_workers(backend, options.workers));
}

AccuracyEstimate summarize(std::span<const TrialOutcome> outcomes,
                           const TaskRegistry& registry, int shots,
                           const std::string& model_id) {
  std::vector<int> correct(registry.size(), 0);
  std::vector<int> total(registry.size(), 0);
  for (const auto& o : outcomes) {
    if (o.trial.shots != shots) continue;
    const auto idx = registry.index_of(o.trial.function_id);
    if (!idx) throw std::invalid_argument("outcome for unknown function " + o.trial.function_id);
    total[*idx] += 1;
    correct[*idx] += o.correct ? 1 : 0;
  }
  AccuracyEstimate est;
  est.model_id = model_id;
  est.shots = shots;
  est.trials_per_function =
      registry.size() ? *std::min_element(total.begin(), total.end()) : 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < registry.size(); ++i) {
    if (total[i] == 0) {
      throw std::invalid_argument("no outcomes for function " + registry[i].id());
    }
    const double acc = static_cast<double>(correct[i]) / total[i];
    est.per_function.emplace_back(registry[i].id(), acc);
    sum += acc;
  }
  est.overall = registry.size() ? sum / static_cast<double>(registry.size()) : 0.0;
  return est;
}

AccuracyEstimate estimate_accuracy(ModelBackend& backend, const TaskRegistry& registry,
                                   int shots, int trials_per_function,
                                   std::uint64_t master_seed, const EvalOptions& options) {
  const auto trials =
      plan_trials(registry, shots, trials_per_function, master_seed, options.modality);
  auto batch = run_trials(backend, trials, registry, options);
  if (batch.failure) throw BackendError(*batch.failure);
  auto est = summarize(batch.completed, registry, shots, backend.id());
  est.trials_per_function = trials_per_function;
  return est;
}

std::vector<AccuracyEstimate> sweep(ModelBackend& backend, const TaskRegistry& registry,
                                    std::span<const int> shot_set, int trials_per_function,
                                    std::uint64_t master_seed, const EvalOptions& options) {
  if (shot_set.empty()) throw std::invalid_argument("shot set is empty");
  std::vector<AccuracyEstimate> out;
  out.reserve(shot_set.size());
  for (int n : shot_set) {
    out.push_back(
        estimate_accuracy(backend, registry, n, trials_per_function, master_seed, options));
  }
  return out;
}

}  // namespace bitprobe
