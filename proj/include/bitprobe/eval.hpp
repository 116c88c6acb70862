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

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bitprobe/backends.hpp"
#include "bitprobe/bitstring.hpp"
#include "bitprobe/encoding.hpp"
#include "bitprobe/rng.hpp"
#include "bitprobe/taskgen.hpp"

namespace bitprobe {

inline constexpr int kDefaultTrialsPerFunction = 8;
inline const std::vector<int> kDefaultShotSet{1, 2, 4, 8, 16, 32, 64, 128};

struct Context {
  std::vector<Bitstring> demos;  // sampled order is the presentation order
  Bitstring query;
};

// Uniform size-n subset of S in uniformly random order, then a query uniform
// over the rest. Requires 1 <= n <= |S| - 1.
Context sample_context(int shots, int width, Rng& rng);

struct Trial {
  std::string function_id;
  int shots = 0;
  std::vector<Bitstring> demos;
  Bitstring query;
  EncodingScheme scheme = EncodingScheme::make(Modality::kGenomic, 'A', 'C', 'G');
  int trial_index = 0;
  std::uint64_t seed = 0;
};

// Deterministic in (master_seed, function id, shots, trial index). The scheme
// comes from its own sub-stream, so both modalities see the same contexts.
Trial make_trial(const TaskFunction& f, int shots, int trial_index,
                 std::uint64_t master_seed, Modality modality);

struct TrialKey {
  std::string function_id;
  int shots = 0;
  int trial_index = 0;
  friend auto operator<=>(const TrialKey&, const TrialKey&) = default;
};

struct TrialOutcome {
  Trial trial;
  std::string prompt_hash;
  std::string raw_completion;
  Decoded prediction;
  bool correct = false;
  Bitstring mode_prediction;
  bool mode_correct = false;
  bool understandable_mistake = false;

  TrialKey key() const { return {trial.function_id, trial.shots, trial.trial_index}; }
};

std::string prompt_hash(std::string_view prompt);

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{100};
};

class TrialFailure : public BackendError {
 public:
  TrialFailure(const TrialKey& key, const std::string& what);
  const TrialKey& key() const { return key_; }

 private:
  TrialKey key_;
};

// Encode, query for exactly k symbols, decode, score. Transport failures are
// retried with exponential backoff and then rethrown as TrialFailure.
TrialOutcome run_trial(ModelBackend& backend, const Trial& trial,
                       const TaskRegistry& registry, const RetryPolicy& retry = {});

enum class Execution { kSerial, kParallel };

struct EvalOptions {
  Modality modality = Modality::kGenomic;
  Execution execution = Execution::kParallel;
  int workers = 0;  // 0: min(backend in-flight limit, hardware threads)
  RetryPolicy retry;
};

struct BatchResult {
  std::vector<TrialOutcome> completed;  // sorted by key
  std::optional<std::string> failure;   // first failure, if any
};

// Runs trials independently. Completed outcomes are returned in key order
// regardless of execution order.
BatchResult run_trials(ModelBackend& backend, std::span<const Trial> trials,
                       const TaskRegistry& registry, const EvalOptions& options);

std::vector<Trial> plan_trials(const TaskRegistry& registry, int shots, int trials_per_function,
                               std::uint64_t master_seed, Modality modality);

struct AccuracyEstimate {
  std::string model_id;
  int shots = 0;
  int trials_per_function = 0;
  std::vector<std::pair<std::string, double>> per_function;  // registry order
  double overall = 0.0;
  std::optional<double> bootstrap_se;
};

// Per-function means and their unweighted mean. Functions with no outcomes
// are an error.
AccuracyEstimate summarize(std::span<const TrialOutcome> outcomes,
                           const TaskRegistry& registry, int shots,
                           const std::string& model_id);

AccuracyEstimate estimate_accuracy(ModelBackend& backend, const TaskRegistry& registry,
                                   int shots, int trials_per_function,
                                   std::uint64_t master_seed, const EvalOptions& options = {});

std::vector<AccuracyEstimate> sweep(ModelBackend& backend, const TaskRegistry& registry,
                                    std::span<const int> shot_set, int trials_per_function,
                                    std::uint64_t master_seed, const EvalOptions& options = {});

// Exact non-negative rational with 64-bit parts; enough for small-k
// enumeration.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);
  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  Rational& operator+=(const Rational& o);
  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// A predictor that is a pure function of (demos, query), returning each
// possible prediction with its probability.
using PredictionDistribution = std::vector<std::pair<Bitstring, Rational>>;
using Policy = std::function<PredictionDistribution(
    const TaskFunction& f, std::span<const Bitstring> demos, Bitstring query)>;

Policy oracle_policy();
Policy mode_policy();

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Average accuracy over every size-n demo set and every held-out query.
Rational exact_accuracy(const Policy& policy, const TaskFunction& f, int shots,
                        std::uint64_t budget = 20'000'000);

}  // namespace bitprobe
