// Copyright 2026 The hti Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The external-agent wire protocol: newline-delimited JSON objects, each with
// a "kind" discriminator.
//
//   engine -> agent   upload_batch  {batch_index, is_last, items: [{id, position, media?}]}
//                     turn_request  {budget_remaining}
//                     verdict       {verdict: yes|no|unsure|skip, violation?}
//                     episode_end   {outcome}
//   agent -> engine   agent_action  {exactly one of ask_value, ask_text, guess, ack}
//
// The agent answers every upload_batch except the last one (an `ack` is the
// expected reply; anything else is a premature output) and every
// turn_request. Item descriptors never carry labels.

#ifndef HTI_WIRE_HPP_
#define HTI_WIRE_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hti/agents.hpp"
#include "hti/protocol.hpp"

namespace hti::wire {

/// Lines longer than this are a protocol error rather than a memory hazard.
inline constexpr std::size_t kMaxLineBytes = 1 << 20;

struct UploadItem {
  std::string id;
  std::size_t position = 1;
  std::optional<std::string> media;

  bool operator==(const UploadItem&) const = default;
};

struct UploadBatch {
  int batch_index = 0;
  bool is_last = true;
  std::vector<UploadItem> items;

  bool operator==(const UploadBatch&) const = default;
};

struct TurnRequest {
  int budget_remaining = 0;
  bool operator==(const TurnRequest&) const = default;
};

struct VerdictMessage {
  Verdict verdict = Verdict::yes();
  bool operator==(const VerdictMessage&) const = default;
};

struct EpisodeEnd {
  std::string outcome;
  bool operator==(const EpisodeEnd&) const = default;
};

using EngineMessage = std::variant<UploadBatch, TurnRequest, VerdictMessage, EpisodeEnd>;

/// Single line, no trailing newline.
std::string encode(const EngineMessage& message);
std::string encode_action(const AgentAction& action);

/// Strict decoding. Throws kMalformedInput.
EngineMessage decode_engine_message(std::string_view line);
/// Strict decoding of an agent line. Throws kAgentProtocolError on anything
/// but a JSON object {"kind": "agent_action"} with exactly one action key of
/// the right type (guess: integer, optionally with "forced": bool; ack: true).
AgentAction decode_action(std::string_view line);

/// A bidirectional line channel.
class Channel {
 public:
  virtual ~Channel() = default;
  /// Appends the newline. Throws kAgentProtocolError (peer gone) or kTimeout.
  virtual void send_line(std::string_view line) = 0;
  /// Without the newline. A non-positive timeout waits forever. Throws
  /// kAgentProtocolError (EOF, oversized line) or kTimeout.
  virtual std::string receive_line(std::chrono::milliseconds timeout) = 0;
};

/// A channel over a pair of file descriptors using poll() for deadlines.
class FdChannel : public Channel {
 public:
  FdChannel(int read_fd, int write_fd, bool owns_fds);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void send_line(std::string_view line) override;
  std::string receive_line(std::chrono::milliseconds timeout) override;

  /// Bounds how long a send may block on a peer that stops reading.
  void set_send_timeout(std::chrono::milliseconds timeout) { send_timeout_ = timeout; }

 protected:
  void close_fds();

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
  std::string buffer_;
  std::chrono::milliseconds send_timeout_{std::chrono::seconds(120)};
};

/// Dials host:port. Throws kIo.
std::unique_ptr<FdChannel> connect_tcp(const std::string& host, std::uint16_t port);
/// "host:port". Throws kInvalidConfig.
std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint);

class TcpListener {
 public:
  /// Binds 127.0.0.1:port (0 picks a free port). Throws kIo.
  explicit TcpListener(std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  /// Blocks until a peer connects or the timeout passes (kTimeout).
  std::unique_ptr<FdChannel> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Runs `command` under /bin/sh with its stdin/stdout wired to the channel.
/// The child is killed and reaped on destruction.
class SubprocessChannel : public FdChannel {
 public:
  /// Throws kIo.
  explicit SubprocessChannel(const std::string& command);
  ~SubprocessChannel() override;

 private:
  struct Spawned {
    int read_fd;
    int write_fd;
    int pid;
  };
  static Spawned spawn(const std::string& command);
  explicit SubprocessChannel(Spawned spawned);

  int pid_ = -1;
};

/// In-process channel: every sent line is handed to `responder`, whose
/// returned lines become readable. Reading with nothing queued raises
/// kTimeout at once, standing in for an agent that never answers.
class LoopbackChannel : public Channel {
 public:
  using Responder = std::function<std::vector<std::string>(std::string_view sent)>;
  explicit LoopbackChannel(Responder responder) : responder_(std::move(responder)) {}

  void send_line(std::string_view line) override;
  std::string receive_line(std::chrono::milliseconds timeout) override;

 private:
  Responder responder_;
  std::vector<std::string> queue_;
  std::size_t next_ = 0;
};

}  // namespace hti::wire

#endif  // HTI_WIRE_HPP_
