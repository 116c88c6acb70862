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

#include "bitprobe/records.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bitprobe {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string scheme_symbols(const EncodingScheme& s) {
  return {s.zero_symbol(), s.one_symbol(), s.separator_symbol()};
}

Bitstring bits(const nlohmann::json& j, int width) {
  auto b = Bitstring::parse(j.get<std::string>());
  if (b.width() != width) throw RecordError("bitstring width does not match run width");
  return b;
}

}  // namespace

std::string to_json_line(const TrialRecord& r) {
  const auto& o = r.outcome;
  const auto& t = o.trial;
  ordered_json j;
  j["model_id"] = r.model_id;
  j["function_id"] = t.function_id;
  j["n"] = t.shots;
  j["t"] = t.trial_index;
  j["master_seed"] = r.master_seed;
  j["seed"] = t.seed;
  j["modality"] = modality_name(t.scheme.modality());
  j["scheme"] = scheme_symbols(t.scheme);
  auto demos = ordered_json::array();
  for (const auto& d : t.demos) demos.push_back(d.str());
  j["demos"] = std::move(demos);
  j["query"] = t.query.str();
  j["prompt_hash"] = o.prompt_hash;
  j["raw_completion"] = o.raw_completion;
  if (const auto* y = std::get_if<Bitstring>(&o.prediction)) {
    j["prediction"] = y->str();
    j["decode_failure"] = nullptr;
  } else {
    const auto& f = std::get<DecodeFailure>(o.prediction);
    j["prediction"] = nullptr;
    j["decode_failure"] = {{"reason", reason_name(f.reason)}, {"position", f.position}};
  }
  j["correct"] = o.correct;
  j["mode_prediction"] = o.mode_prediction.str();
  j["mode_correct"] = o.mode_correct;
  j["understandable_mistake"] = o.understandable_mistake;
  return j.dump();
}

TrialRecord trial_record_from_json(std::string_view line, int width) {
  try {
    const auto j = nlohmann::json::parse(line);
    TrialRecord r;
    r.model_id = j.at("model_id").get<std::string>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    auto& o = r.outcome;
    auto& t = o.trial;
    t.function_id = j.at("function_id").get<std::string>();
    t.shots = j.at("n").get<int>();
    t.trial_index = j.at("t").get<int>();
    t.seed = j.at("seed").get<std::uint64_t>();
    const auto symbols = j.at("scheme").get<std::string>();
    if (symbols.size() != 3) throw RecordError("scheme must have three symbols");
    t.scheme = EncodingScheme::make(modality_from_name(j.at("modality").get<std::string>()),
                                    symbols[0], symbols[1], symbols[2]);
    for (const auto& d : j.at("demos")) t.demos.push_back(bits(d, width));
    t.query = bits(j.at("query"), width);
    o.prompt_hash = j.at("prompt_hash").get<std::string>();
    o.raw_completion = j.at("raw_completion").get<std::string>();
    if (!j.at("prediction").is_null()) {
      o.prediction = bits(j.at("prediction"), width);
    } else {
      const auto& f = j.at("decode_failure");
      const auto reason = f.at("reason").get<std::string>();
      DecodeFailure failure;
      failure.position = f.at("position").get<std::size_t>();
      if (reason == "truncated") {
        failure.reason = DecodeFailure::Reason::kTruncated;
      } else if (reason == "invalid_symbol") {
        failure.reason = DecodeFailure::Reason::kInvalidSymbol;
      } else if (reason == "backend_error") {
        failure.reason = DecodeFailure::Reason::kBackendError;
      } else {
        throw RecordError("unknown decode failure reason " + reason);
      }
      o.prediction = failure;
    }
    o.correct = j.at("correct").get<bool>();
    o.mode_prediction = bits(j.at("mode_prediction"), width);
    o.mode_correct = j.at("mode_correct").get<bool>();
    o.understandable_mistake = j.at("understandable_mistake").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw RecordError(std::string("malformed trial record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw RecordError(std::string("malformed trial record: ") + e.what());
  }
}

TrialLog::TrialLog(std::filesystem::path path) : path_(std::move(path)) { repair_tail(); }

void TrialLog::repair_tail() {
  if (!std::filesystem::exists(path_)) return;
  const std::string text = read_file(path_);
  if (text.empty() || text.back() == '\n') return;
  const auto last = text.rfind('\n');
  const auto keep = last == std::string::npos ? 0 : last + 1;
  std::filesystem::resize_file(path_, keep);
}

std::vector<TrialRecord> TrialLog::load(int width) const {
  std::vector<TrialRecord> out;
  if (!std::filesystem::exists(path_)) return out;
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(trial_record_from_json(line, width));
  }
  return out;
}

std::set<TrialKey> TrialLog::keys() const {
  std::set<TrialKey> out;
  if (!std::filesystem::exists(path_)) return out;
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.insert({j.at("function_id").get<std::string>(), j.at("n").get<int>(),
                  j.at("t").get<int>()});
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(std::string("malformed trial record: ") + e.what());
    }
  }
  return out;
}

void TrialLog::append(std::span<const TrialRecord> records) {
  if (records.empty()) return;
  std::string buf;
  for (const auto& r : records) {
    buf += to_json_line(r);
    buf += '\n';
  }
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << buf;
  out.flush();
  if (!out) throw RecordError("cannot append to " + path_.string());
}

void write_atomically(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    out << text;
    out.flush();
    if (!out) throw RecordError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RecordError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bitprobe
