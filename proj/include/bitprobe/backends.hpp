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
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bitprobe/bitstring.hpp"
#include "bitprobe/encoding.hpp"

namespace bitprobe {

class TaskRegistry;

inline constexpr int kProtocolVersion = 1;
inline constexpr int kBuiltinMaxInFlight = 1024;
inline constexpr int kExternalMaxInFlight = 4;

struct CompletionRequest {
  std::string request_id;
  std::string prompt;
  int max_symbols = 0;
  std::string decoding = "greedy";
};

struct CompletionResponse {
  std::string request_id;
  std::string completion;
  std::optional<std::string> error;         // adapter-reported failure
  std::optional<std::string> backend_meta;  // opaque JSON text
};

// Trial facts handed to builtin backends out-of-band. External backends never
// see this.
struct TrialContext {
  const EncodingScheme* scheme = nullptr;
  int width = kDefaultWidth;
  std::string_view function_id;  // empty when unknown
  std::uint64_t seed = 0;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Connection-level failure; callers may retry.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

// The peer spoke, but not the protocol.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

enum class BackendKind { kBuiltin, kExternal };

// A shareable model handle. complete() is safe to call concurrently up to
// max_in_flight() callers.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  virtual const std::string& id() const = 0;
  virtual BackendKind kind() const = 0;
  virtual int max_in_flight() const = 0;
  virtual CompletionResponse complete(const CompletionRequest& request,
                                      const TrialContext* context) = 0;
};

// Emits f(query) for the trial's own function when the context names one,
// otherwise for the lexicographically-first registry function consistent with
// every demo in the prompt.
std::unique_ptr<ModelBackend> oracle_backend(std::shared_ptr<const TaskRegistry> registry);

// Always the lexicographically-first consistent function; a version-space
// learner that makes understandable mistakes.
std::unique_ptr<ModelBackend> consistent_backend(
    std::shared_ptr<const TaskRegistry> registry);

// Most frequent demo output; ties broken by the trial's tie-break stream.
std::unique_ptr<ModelBackend> mode_backend();

// Uniform over all bitstrings, seeded by the trial.
std::unique_ptr<ModelBackend> random_backend();

std::unique_ptr<ModelBackend> constant_backend(std::optional<Bitstring> output);

struct ExternalOptions {
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
};

// Endpoints: "exec:<shell command>" speaks over the child's stdin/stdout;
// "tcp:<host>:<port>" over a socket. The session opens with the peer's
// handshake line.
std::unique_ptr<ModelBackend> external_backend(const std::string& endpoint,
                                               ExternalOptions options = {});

// builtin:oracle | builtin:consistent | builtin:mode | builtin:random |
// builtin:constant[:BITS] | exec:... | tcp:...
std::unique_ptr<ModelBackend> make_backend(const std::string& spec,
                                           std::shared_ptr<const TaskRegistry> registry,
                                           ExternalOptions options = {});

// Wire format, one JSON object per line.
std::string serialize_request(const CompletionRequest& request);
CompletionRequest parse_request(std::string_view line);
std::string serialize_response(const CompletionResponse& response);
CompletionResponse parse_response(std::string_view line);

struct Handshake {
  int protocol_version = kProtocolVersion;
  std::string model_id;
  int max_in_flight = kExternalMaxInFlight;
};
std::string serialize_handshake(const Handshake& handshake);
Handshake parse_handshake(std::string_view line);

}  // namespace bitprobe
