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

#include "bitprobe/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>

#include "bitprobe/records.hpp"
#include "json.hpp"

namespace bitprobe {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const nlohmann::json& root) : root_(root) {}

  template <typename T>
  void field(const char* key, T& target, bool required,
             const std::function<std::string(const T&)>& check = {}) {
    seen_.push_back(key);
    const std::string path = std::string("$.") + key;
    auto it = root_.find(key);
    if (it == root_.end()) {
      if (required) problems_.push_back(path + ": required field is missing");
      return;
    }
    T value;
    try {
      value = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      problems_.push_back(path + ": wrong type");
      return;
    }
    if (check) {
      if (auto msg = check(value); !msg.empty()) {
        problems_.push_back(path + msg);
        return;
      }
    }
    target = std::move(value);
  }

  void mark(const char* key) { seen_.push_back(key); }

  void reject_unknown() {
    for (const auto& [key, _] : root_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        problems_.push_back("$." + key + ": unknown field");
      }
    }
  }

  std::vector<std::string>& problems() { return problems_; }

 private:
  const nlohmann::json& root_;
  std::vector<std::string> seen_;
  std::vector<std::string> problems_;
};

std::function<std::string(const int&)> at_least(int lo) {
  return [lo](const int& v) {
    return v >= lo ? std::string() : ": must be >= " + std::to_string(lo);
  };
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument("invalid config: " + join(problems)),
      problems_(std::move(problems)) {}

RunConfig parse_config(std::string_view json_text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("$: not valid JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"$: config must be a JSON object"});

  RunConfig c;
  Reader r(root);
  r.field<int>("config_version", c.config_version, true, [](const int& v) {
    return v == kConfigVersion ? std::string()
                               : ": unsupported version " + std::to_string(v);
  });
  r.field<std::uint64_t>("registry_seed", c.registry_seed, false);
  r.field<std::uint64_t>("master_seed", c.master_seed, false);
  r.field<int>("k", c.k, false, [](const int& v) {
    return v >= kMinWidth && v <= kMaxWidth ? std::string() : ": must be in [2, 16]";
  });
  r.field<std::vector<int>>("shot_set", c.shot_set, false);
  r.field<int>("m", c.m, false, at_least(1));
  std::string modality(modality_name(c.modality));
  r.field<std::string>("modality", modality, false, [](const std::string& v) {
    return v == "genomic" || v == "linguistic" ? std::string()
                                               : ": must be genomic or linguistic";
  });
  r.field<std::string>("backend", c.backend, true, [](const std::string& v) {
    return v.empty() ? ": must be nonempty" : std::string();
  });
  r.field<int>("workers", c.workers, false, at_least(0));
  r.field<std::string>("output_dir", c.output_dir, true);
  r.field<int>("bootstrap_replicates", c.bootstrap_replicates, false, at_least(1));
  r.field<std::uint64_t>("bootstrap_seed", c.bootstrap_seed, false);
  r.field<int>("max_retries", c.max_retries, false, at_least(0));
  r.field<int>("timeout_ms", c.timeout_ms, false, at_least(1));

  if (auto it = root.find("filter"); it != root.end()) {
    if (!it->is_object()) {
      r.problems().push_back("$.filter: must be an object");
    } else {
      Reader fr(*it);
      fr.field<std::vector<std::string>>("function_ids", c.function_ids, false);
      fr.field<std::vector<int>>("bitloads", c.bitloads, false);
      fr.reject_unknown();
      for (auto p : fr.problems()) r.problems().push_back("$.filter" + p.substr(1));
    }
  }
  r.mark("filter");
  r.reject_unknown();

  c.modality = modality == "linguistic" ? Modality::kLinguistic : Modality::kGenomic;

  if (c.shot_set.empty()) r.problems().push_back("$.shot_set: must be nonempty");
  const auto max_shots = static_cast<int>(universe_size(std::clamp(c.k, kMinWidth, kMaxWidth))) - 1;
  for (std::size_t i = 0; i < c.shot_set.size(); ++i) {
    const std::string path = "$.shot_set[" + std::to_string(i) + "]";
    if (c.shot_set[i] < 1 || c.shot_set[i] > max_shots) {
      r.problems().push_back(path + ": must be in [1, " + std::to_string(max_shots) + "]");
    }
    if (i > 0 && c.shot_set[i] <= c.shot_set[i - 1]) {
      r.problems().push_back(path + ": shot_set must be strictly ascending");
    }
  }
  for (std::size_t i = 0; i < c.bitloads.size(); ++i) {
    if (c.bitloads[i] < 0 || c.bitloads[i] > c.k) {
      r.problems().push_back("$.filter.bitloads[" + std::to_string(i) +
                             "]: must be in [0, k]");
    }
  }
  if (!r.problems().empty()) throw ConfigError(r.problems());
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const RecordError& e) {
    throw ConfigError({std::string("$: ") + e.what()});
  }
  return parse_config(text);
}

std::string to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["config_version"] = c.config_version;
  j["registry_seed"] = c.registry_seed;
  j["master_seed"] = c.master_seed;
  j["k"] = c.k;
  j["shot_set"] = c.shot_set;
  j["m"] = c.m;
  j["modality"] = modality_name(c.modality);
  j["backend"] = c.backend;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  j["bootstrap_replicates"] = c.bootstrap_replicates;
  j["bootstrap_seed"] = c.bootstrap_seed;
  j["max_retries"] = c.max_retries;
  j["timeout_ms"] = c.timeout_ms;
  if (!c.function_ids.empty() || !c.bitloads.empty()) {
    nlohmann::ordered_json f = nlohmann::ordered_json::object();
    if (!c.function_ids.empty()) f["function_ids"] = c.function_ids;
    if (!c.bitloads.empty()) f["bitloads"] = c.bitloads;
    j["filter"] = std::move(f);
  }
  return j.dump(2) + "\n";
}

std::filesystem::path resolve_output_dir(const RunConfig& config) {
  std::filesystem::path p(config.output_dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("BITPROBE_OUTPUT"); root && *root) {
      return std::filesystem::path(root) / p;
    }
  }
  return p;
}

}  // namespace bitprobe
