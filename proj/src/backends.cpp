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

#include "bitprobe/backends.hpp"

#include <algorithm>
#include <map>
#include <vector>

#include "bitprobe/rng.hpp"
#include "bitprobe/taskgen.hpp"
#include "json.hpp"

namespace bitprobe {

namespace {

using ordered_json = nlohmann::ordered_json;

const TrialContext& require_context(const TrialContext* ctx, const std::string& id) {
  if (ctx == nullptr || ctx->scheme == nullptr) {
    throw ProtocolError(id + " needs the trial context");
  }
  return *ctx;
}

CompletionResponse reply(const CompletionRequest& req, const EncodingScheme& scheme,
                         Bitstring y) {
  std::string text = scheme.encode(y);
  text.resize(std::min<std::size_t>(text.size(), static_cast<std::size_t>(req.max_symbols)));
  return {req.request_id, std::move(text), std::nullopt, std::nullopt};
}

class BuiltinBackend : public ModelBackend {
 public:
  explicit BuiltinBackend(std::string id) : id_(std::move(id)) {}
  const std::string& id() const override { return id_; }
  BackendKind kind() const override { return BackendKind::kBuiltin; }
  int max_in_flight() const override { return kBuiltinMaxInFlight; }

 private:
  std::string id_;
};

class VersionSpaceBackend final : public BuiltinBackend {
 public:
  VersionSpaceBackend(std::string id, std::shared_ptr<const TaskRegistry> registry,
                      bool prefer_trial_function)
      : BuiltinBackend(std::move(id)),
        registry_(std::move(registry)),
        prefer_trial_function_(prefer_trial_function) {
    for (const auto& f : registry_->functions()) by_id_.emplace(f.id(), &f);
  }

  CompletionResponse complete(const CompletionRequest& req,
                              const TrialContext* context) override {
    const auto& ctx = require_context(context, id());
    ParsedPrompt parsed;
    try {
      parsed = parse_prompt(req.prompt, *ctx.scheme, ctx.width);
    } catch (const EncodingError& e) {
      throw ProtocolError(id() + ": unparseable prompt: " + e.what());
    }
    auto consistent = [&](const TaskFunction& f) {
      return std::all_of(parsed.demos.begin(), parsed.demos.end(),
                         [&](const auto& d) { return f(d.first) == d.second; });
    };
    if (prefer_trial_function_ && !ctx.function_id.empty()) {
      if (const auto* f = registry_->find(ctx.function_id); f && consistent(*f)) {
        return reply(req, *ctx.scheme, (*f)(parsed.query));
      }
    }
    // by_id_ iterates in lexicographic id order.
    for (const auto& [fid, f] : by_id_) {
      if (consistent(*f)) return reply(req, *ctx.scheme, (*f)(parsed.query));
    }
    // No registry function explains the demos; fall back to echoing the query.
    return reply(req, *ctx.scheme, parsed.query);
  }

 private:
  std::shared_ptr<const TaskRegistry> registry_;
  std::map<std::string, const TaskFunction*, std::less<>> by_id_;
  bool prefer_trial_function_;
};

class ModeBackend final : public BuiltinBackend {
 public:
  ModeBackend() : BuiltinBackend("builtin:mode") {}

  CompletionResponse complete(const CompletionRequest& req,
                              const TrialContext* context) override {
    const auto& ctx = require_context(context, id());
    const auto& scheme = *ctx.scheme;
    const std::size_t w = static_cast<std::size_t>(ctx.width);
    const std::size_t block = 2 * w + 1;
    const std::string_view text = req.prompt;
    if (text.size() < w || (text.size() - w) % block != 0) {
      throw ProtocolError("builtin:mode: prompt does not fit the grammar");
    }
    // Count demo outputs straight from the prompt text.
    std::map<std::string, int> counts;
    for (std::size_t at = 0; at + w < text.size(); at += block) {
      ++counts[std::string(text.substr(at + w, w))];
    }
    std::vector<std::string> best;
    int top = 0;
    for (const auto& [out, c] : counts) {
      if (c > top) {
        top = c;
        best.clear();
      }
      if (c == top) best.push_back(out);
    }
    if (best.empty()) {
      // No demos: every output ties at zero.
      Rng rng(substream(ctx.seed, Stream::kTieBreak));
      const auto v = static_cast<std::uint32_t>(rng.below(universe_size(ctx.width)));
      return reply(req, scheme, Bitstring{v, ctx.width});
    }
    // Ties are ordered by the bitstring they encode, not by symbol text.
    std::vector<Bitstring> tied;
    for (const auto& s : best) {
      auto d = decode_completion(s, scheme, ctx.width);
      if (!std::holds_alternative<Bitstring>(d)) {
        throw ProtocolError("builtin:mode: demo output is not a bitstring");
      }
      tied.push_back(std::get<Bitstring>(d));
    }
    std::sort(tied.begin(), tied.end());
    std::size_t pick = 0;
    if (tied.size() > 1) {
      Rng rng(substream(ctx.seed, Stream::kTieBreak));
      pick = rng.below(tied.size());
    }
    return reply(req, scheme, tied[pick]);
  }
};

class RandomBackend final : public BuiltinBackend {
 public:
  RandomBackend() : BuiltinBackend("builtin:random") {}

  CompletionResponse complete(const CompletionRequest& req,
                              const TrialContext* context) override {
    const auto& ctx = require_context(context, id());
    Rng rng(substream(ctx.seed, Stream::kBackend));
    const auto v = static_cast<std::uint32_t>(rng.below(universe_size(ctx.width)));
    return reply(req, *ctx.scheme, Bitstring{v, ctx.width});
  }
};

class ConstantBackend final : public BuiltinBackend {
 public:
  explicit ConstantBackend(std::optional<Bitstring> output)
      : BuiltinBackend(output ? "builtin:constant:" + output->str() : "builtin:constant"),
        output_(output) {}

  CompletionResponse complete(const CompletionRequest& req,
                              const TrialContext* context) override {
    const auto& ctx = require_context(context, id());
    Bitstring y = Bitstring::zeros(ctx.width);
    if (output_) {
      if (output_->width() != ctx.width) {
        throw ProtocolError(id() + ": constant width does not match the trial");
      }
      y = *output_;
    }
    return reply(req, *ctx.scheme, y);
  }

 private:
  std::optional<Bitstring> output_;
};

template <typename T>
T get_field(const nlohmann::json& j, const char* key, std::string_view what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ProtocolError(std::string(what) + " is missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError(std::string(what) + " field '" + key + "' has the wrong type");
  }
}

nlohmann::json parse_object(std::string_view line, std::string_view what) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string(what) + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ProtocolError(std::string(what) + " is not a JSON object");
  return j;
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                    std::string_view what) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ProtocolError(std::string(what) + " has unknown field '" + key + "'");
    }
  }
}

}  // namespace

std::unique_ptr<ModelBackend> oracle_backend(std::shared_ptr<const TaskRegistry> registry) {
  return std::make_unique<VersionSpaceBackend>("builtin:oracle", std::move(registry), true);
}

std::unique_ptr<ModelBackend> consistent_backend(
    std::shared_ptr<const TaskRegistry> registry) {
  return std::make_unique<VersionSpaceBackend>("builtin:consistent", std::move(registry),
                                               false);
}

std::unique_ptr<ModelBackend> mode_backend() { return std::make_unique<ModeBackend>(); }

std::unique_ptr<ModelBackend> random_backend() { return std::make_unique<RandomBackend>(); }

std::unique_ptr<ModelBackend> constant_backend(std::optional<Bitstring> output) {
  return std::make_unique<ConstantBackend>(output);
}

std::unique_ptr<ModelBackend> make_backend(const std::string& spec,
                                           std::shared_ptr<const TaskRegistry> registry,
                                           ExternalOptions options) {
  if (spec == "builtin:oracle") return oracle_backend(std::move(registry));
  if (spec == "builtin:consistent") return consistent_backend(std::move(registry));
  if (spec == "builtin:mode") return mode_backend();
  if (spec == "builtin:random") return random_backend();
  if (spec == "builtin:constant") return constant_backend(std::nullopt);
  if (spec.starts_with("builtin:constant:")) {
    return constant_backend(Bitstring::parse(spec.substr(17)));
  }
  if (spec.starts_with("exec:") || spec.starts_with("tcp:")) {
    return external_backend(spec, options);
  }
  throw std::invalid_argument("unknown backend spec: " + spec);
}

std::string serialize_request(const CompletionRequest& r) {
  ordered_json j;
  j["request_id"] = r.request_id;
  j["prompt"] = r.prompt;
  j["max_symbols"] = r.max_symbols;
  j["decoding"] = r.decoding;
  return j.dump();
}

CompletionRequest parse_request(std::string_view line) {
  const auto j = parse_object(line, "request");
  reject_unknown(j, {"request_id", "prompt", "max_symbols", "decoding"}, "request");
  CompletionRequest r;
  r.request_id = get_field<std::string>(j, "request_id", "request");
  r.prompt = get_field<std::string>(j, "prompt", "request");
  r.max_symbols = get_field<int>(j, "max_symbols", "request");
  r.decoding = get_field<std::string>(j, "decoding", "request");
  if (r.max_symbols < 1) throw ProtocolError("request max_symbols must be >= 1");
  if (r.decoding != "greedy") throw ProtocolError("only greedy decoding is supported");
  return r;
}

std::string serialize_response(const CompletionResponse& r) {
  ordered_json j;
  j["request_id"] = r.request_id;
  j["completion"] = r.completion;
  if (r.error) j["error"] = *r.error;
  if (r.backend_meta) j["backend_meta"] = ordered_json::parse(*r.backend_meta);
  return j.dump();
}

CompletionResponse parse_response(std::string_view line) {
  const auto j = parse_object(line, "response");
  reject_unknown(j, {"request_id", "completion", "error", "backend_meta"}, "response");
  CompletionResponse r;
  r.request_id = get_field<std::string>(j, "request_id", "response");
  if (j.contains("error")) {
    r.error = get_field<std::string>(j, "error", "response");
    if (j.contains("completion")) r.completion = get_field<std::string>(j, "completion", "response");
  } else {
    r.completion = get_field<std::string>(j, "completion", "response");
  }
  if (j.contains("backend_meta")) r.backend_meta = j["backend_meta"].dump();
  return r;
}

std::string serialize_handshake(const Handshake& h) {
  ordered_json j;
  j["protocol_version"] = h.protocol_version;
  j["model_id"] = h.model_id;
  j["max_in_flight"] = h.max_in_flight;
  return j.dump();
}

Handshake parse_handshake(std::string_view line) {
  const auto j = parse_object(line, "handshake");
  Handshake h;
  h.protocol_version = get_field<int>(j, "protocol_version", "handshake");
  h.model_id = get_field<std::string>(j, "model_id", "handshake");
  h.max_in_flight = get_field<int>(j, "max_in_flight", "handshake");
  if (h.protocol_version != kProtocolVersion) {
    throw ProtocolError("unsupported protocol version " +
                        std::to_string(h.protocol_version));
  }
  if (h.max_in_flight < 1) throw ProtocolError("handshake max_in_flight must be >= 1");
  return h;
}

}  // namespace bitprobe
