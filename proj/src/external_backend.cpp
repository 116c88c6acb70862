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

#include <fcntl.h>
#include <netdb.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <future>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "bitprobe/backends.hpp"

namespace bitprobe {

namespace {

// Owns a read fd and a write fd (identical for sockets) plus an optional child.
class Channel {
 public:
  Channel(int read_fd, int write_fd, pid_t child)
      : read_fd_(read_fd), write_fd_(write_fd), child_(child) {}
  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  ~Channel() {
    shutdown();
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (child_ > 0) {
      ::kill(child_, SIGTERM);
      ::waitpid(child_, nullptr, 0);
    }
  }

  // Unblocks a reader stuck in read().
  void shutdown() {
    if (write_fd_ == read_fd_) {
      ::shutdown(read_fd_, SHUT_RDWR);
    } else if (write_fd_ >= 0) {
      ::close(write_fd_);
      write_fd_ = -1;
      if (child_ > 0) ::kill(child_, SIGTERM);
    }
  }

  void write_line(const std::string& line) {
    std::string buf = line;
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = send_or_write(write_fd_, buf.data() + off, buf.size() - off,
                                        write_fd_ == read_fd_);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  // False on EOF.
  bool read_line(std::string& line) {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return true;
      }
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  static ssize_t send_or_write(int fd, const char* data, std::size_t len, bool socket) {
    return socket ? ::send(fd, data, len, MSG_NOSIGNAL) : ::write(fd, data, len);
  }

  int read_fd_;
  int write_fd_;
  pid_t child_;
  std::string buffer_;
};

std::unique_ptr<Channel> spawn(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0) {
    throw TransportError(std::string("pipe failed: ") + std::strerror(errno));
  }
  // Built before fork; the child must not allocate. "exec" lets signals reach
  // the adapter rather than an intermediate shell.
  const std::string script = "exec " + command;
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", script.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  // A dead child must surface as EPIPE, not kill the process.
  ::signal(SIGPIPE, SIG_IGN);
  return std::make_unique<Channel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<Channel> dial(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("tcp endpoint needs host:port");
  const std::string host = address.substr(0, colon);
  const std::string port = address.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + address + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("cannot connect to " + address);
  return std::make_unique<Channel>(fd, fd, -1);
}

class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count) {}
  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int count_;
};

// One live connection: the handshake, a reader thread and the pending map.
class Session {
 public:
  explicit Session(std::unique_ptr<Channel> channel) : channel_(std::move(channel)) {
    std::string line;
    if (!channel_->read_line(line)) throw TransportError("peer closed before handshake");
    handshake_ = parse_handshake(line);
    reader_ = std::thread([this] { read_loop(); });
  }

  ~Session() {
    channel_->shutdown();
    if (reader_.joinable()) reader_.join();
  }

  const Handshake& handshake() const { return handshake_; }
  bool alive() const { return alive_.load(); }

  std::future<CompletionResponse> submit(const CompletionRequest& request) {
    std::promise<CompletionResponse> promise;
    auto future = promise.get_future();
    {
      std::lock_guard lock(mu_);
      if (!alive_) throw TransportError("session is closed");
      if (pending_.contains(request.request_id)) {
        throw std::invalid_argument("duplicate in-flight request id " + request.request_id);
      }
      pending_.emplace(request.request_id, std::move(promise));
    }
    try {
      std::lock_guard lock(write_mu_);
      channel_->write_line(serialize_request(request));
    } catch (...) {
      std::lock_guard lock(mu_);
      pending_.erase(request.request_id);
      throw;
    }
    return future;
  }

  void abandon(const std::string& request_id) {
    std::lock_guard lock(mu_);
    pending_.erase(request_id);
  }

 private:
  void read_loop() {
    std::string line;
    while (channel_->read_line(line)) {
      CompletionResponse response;
      try {
        response = parse_response(line);
      } catch (const ProtocolError& e) {
        fail_all<ProtocolError>(std::string("malformed response: ") + e.what());
        return;
      }
      std::lock_guard lock(mu_);
      auto it = pending_.find(response.request_id);
      if (it == pending_.end()) {
        alive_ = false;
        for (auto& [id, p] : pending_) {
          p.set_exception(std::make_exception_ptr(
              ProtocolError("request_id mismatch: got '" + response.request_id + "'")));
        }
        pending_.clear();
        return;
      }
      it->second.set_value(std::move(response));
      pending_.erase(it);
    }
    fail_all<TransportError>("connection closed by peer");
  }

  template <typename E>
  void fail_all(const std::string& what) {
    std::lock_guard lock(mu_);
    alive_ = false;
    for (auto& [id, p] : pending_) p.set_exception(std::make_exception_ptr(E(what)));
    pending_.clear();
  }

  std::unique_ptr<Channel> channel_;
  Handshake handshake_;
  std::thread reader_;
  std::mutex mu_;
  std::mutex write_mu_;
  std::atomic<bool> alive_{true};
  std::unordered_map<std::string, std::promise<CompletionResponse>> pending_;
};

class ExternalBackend final : public ModelBackend {
 public:
  ExternalBackend(std::string endpoint, ExternalOptions options)
      : endpoint_(std::move(endpoint)), options_(options) {
    session_ = open();
    id_ = session_->handshake().model_id;
    max_in_flight_ = session_->handshake().max_in_flight;
    slots_ = std::make_unique<Semaphore>(max_in_flight_);
  }

  const std::string& id() const override { return id_; }
  BackendKind kind() const override { return BackendKind::kExternal; }
  int max_in_flight() const override { return max_in_flight_; }

  CompletionResponse complete(const CompletionRequest& request,
                              const TrialContext* /*context*/) override {
    slots_->acquire();
    struct Release {
      Semaphore* s;
      ~Release() { s->release(); }
    } release{slots_.get()};

    CompletionRequest req = request;
    if (req.request_id.empty()) req.request_id = "r-" + std::to_string(next_id_++);

    std::shared_ptr<Session> session = current_session();
    auto future = session->submit(req);
    if (future.wait_for(options_.timeout) != std::future_status::ready) {
      session->abandon(req.request_id);
      throw TransportError("timed out waiting for " + req.request_id);
    }
    CompletionResponse response = future.get();
    if (response.request_id != req.request_id) {
      throw ProtocolError("request_id mismatch");
    }
    return response;
  }

 private:
  std::shared_ptr<Session> open() {
    if (endpoint_.starts_with("exec:")) {
      return std::make_shared<Session>(spawn(endpoint_.substr(5)));
    }
    if (endpoint_.starts_with("tcp:")) {
      return std::make_shared<Session>(dial(endpoint_.substr(4)));
    }
    throw std::invalid_argument("unknown endpoint: " + endpoint_);
  }

  // Reconnects once the previous session has died so retries can succeed.
  std::shared_ptr<Session> current_session() {
    std::lock_guard lock(session_mu_);
    if (!session_->alive()) {
      session_ = open();
      if (session_->handshake().model_id != id_) {
        throw ProtocolError("model id changed across reconnect");
      }
    }
    return session_;
  }

  std::string endpoint_;
  ExternalOptions options_;
  std::string id_;
  int max_in_flight_ = kExternalMaxInFlight;
  std::unique_ptr<Semaphore> slots_;
  std::mutex session_mu_;
  std::shared_ptr<Session> session_;
  std::atomic<std::uint64_t> next_id_{1};
};

}  // namespace

std::unique_ptr<ModelBackend> external_backend(const std::string& endpoint,
                                               ExternalOptions options) {
  return std::make_unique<ExternalBackend>(endpoint, options);
}

}  // namespace bitprobe
