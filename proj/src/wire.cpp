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

#include "hti/wire.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include <nlohmann/json.hpp>

#include "hti/error.hpp"

namespace hti::wire {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr int kMaxDepth = 16;

[[noreturn]] void protocol_error(const std::string& what) { throw Error(ErrorCode::kAgentProtocolError, what); }

/// Nesting depth outside string literals; rejects pathological inputs before
/// they reach the JSON parser.
bool too_deep(std::string_view line) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (const char c : line) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      if (++depth > kMaxDepth) return true;
    } else if (c == '}' || c == ']') {
      --depth;
    }
  }
  return false;
}

std::optional<json> parse_object(std::string_view line) {
  if (line.size() > kMaxLineBytes || too_deep(line)) return std::nullopt;
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left < 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

}  // namespace

std::string encode(const EngineMessage& message) {
  json j;
  if (const auto* b = std::get_if<UploadBatch>(&message)) {
    json items = json::array();
    for (const UploadItem& item : b->items) {
      json entry = {{"id", item.id}, {"position", item.position}};
      if (item.media) entry["media"] = *item.media;
      items.push_back(std::move(entry));
    }
    j = {{"kind", "upload_batch"}, {"batch_index", b->batch_index}, {"is_last", b->is_last}, {"items", items}};
  } else if (const auto* t = std::get_if<TurnRequest>(&message)) {
    j = {{"kind", "turn_request"}, {"budget_remaining", t->budget_remaining}};
  } else if (const auto* v = std::get_if<VerdictMessage>(&message)) {
    j = {{"kind", "verdict"}, {"verdict", to_string(v->verdict.answer())}};
    if (v->verdict.violation()) j["violation"] = to_string(*v->verdict.violation());
  } else {
    j = {{"kind", "episode_end"}, {"outcome", std::get<EpisodeEnd>(message).outcome}};
  }
  return j.dump();
}

std::string encode_action(const AgentAction& action) {
  json j = {{"kind", "agent_action"}};
  if (const auto* a = std::get_if<AskValue>(&action)) {
    j["ask_value"] = a->value_id;
  } else if (const auto* t = std::get_if<AskText>(&action)) {
    j["ask_text"] = t->text;
  } else if (const auto* g = std::get_if<Guess>(&action)) {
    j["guess"] = g->index;
    if (g->forced) j["forced"] = true;
  } else {
    j["ack"] = true;
  }
  return j.dump();
}

EngineMessage decode_engine_message(std::string_view line) {
  const auto parsed = parse_object(line);
  if (!parsed) throw Error(ErrorCode::kMalformedInput, "engine message is not a JSON object");
  const json& j = *parsed;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "upload_batch") {
      UploadBatch b;
      b.batch_index = j.at("batch_index").get<int>();
      b.is_last = j.at("is_last").get<bool>();
      for (const json& item : j.at("items")) {
        UploadItem u{item.at("id").get<std::string>(), item.at("position").get<std::size_t>(), std::nullopt};
        if (item.contains("media")) u.media = item.at("media").get<std::string>();
        b.items.push_back(std::move(u));
      }
      return b;
    }
    if (kind == "turn_request") return TurnRequest{j.at("budget_remaining").get<int>()};
    if (kind == "verdict") {
      const auto answer = answer_from_string(j.at("verdict").get<std::string>());
      if (!answer) throw Error(ErrorCode::kMalformedInput, "unknown verdict");
      std::optional<ViolationKind> violation;
      if (j.contains("violation")) {
        violation = violation_from_string(j.at("violation").get<std::string>());
        if (!violation) throw Error(ErrorCode::kMalformedInput, "unknown violation");
      }
      try {
        return VerdictMessage{Verdict::make(*answer, violation)};
      } catch (const Error& e) {
        throw Error(ErrorCode::kMalformedInput, e.what());
      }
    }
    if (kind == "episode_end") return EpisodeEnd{j.at("outcome").get<std::string>()};
    throw Error(ErrorCode::kMalformedInput, "unknown message kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, e.what());
  }
}

AgentAction decode_action(std::string_view line) {
  const auto parsed = parse_object(line);
  if (!parsed) protocol_error("agent message is not a JSON object");
  const json& j = *parsed;
  const auto kind = j.find("kind");
  if (kind == j.end() || !kind->is_string() || kind->get<std::string>() != "agent_action") {
    protocol_error("expected kind 'agent_action'");
  }
  int actions = 0;
  for (const auto& [key, value] : j.items()) {
    if (key == "ask_value" || key == "ask_text" || key == "guess" || key == "ack") {
      ++actions;
    } else if (key != "kind" && key != "forced") {
      protocol_error("unexpected field '" + key + "'");
    }
  }
  if (actions != 1) protocol_error("agent_action needs exactly one of ask_value, ask_text, guess, ack");
  if (j.contains("forced") && (!j.contains("guess") || !j.at("forced").is_boolean())) {
    protocol_error("'forced' is a boolean that only accompanies a guess");
  }
  if (const auto it = j.find("ask_value"); it != j.end()) {
    if (!it->is_string()) protocol_error("ask_value must be a string");
    return AskValue{it->get<std::string>()};
  }
  if (const auto it = j.find("ask_text"); it != j.end()) {
    if (!it->is_string()) protocol_error("ask_text must be a string");
    return AskText{it->get<std::string>()};
  }
  if (const auto it = j.find("guess"); it != j.end()) {
    if (!it->is_number_integer()) protocol_error("guess must be an integer");
    const auto wide = it->get<long long>();
    if (wide < 1 || wide > (1 << 30)) protocol_error("guess index out of range");
    return Guess{static_cast<int>(wide), j.value("forced", false)};
  }
  const json& ack = j.at("ack");
  if (!ack.is_boolean() || !ack.get<bool>()) protocol_error("ack must be true");
  return SignalEndAck{};
}

// --- FdChannel -------------------------------------------------------------

FdChannel::FdChannel(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds) {}

FdChannel::~FdChannel() { close_fds(); }

void FdChannel::close_fds() {
  if (!owns_) return;
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  read_fd_ = write_fd_ = -1;
}

void FdChannel::send_line(std::string_view line) {
  std::string data(line);
  data.push_back('\n');
  const auto deadline = Clock::now() + send_timeout_;
  std::size_t sent = 0;
  while (sent < data.size()) {
    pollfd pfd{write_fd_, POLLOUT, 0};
    const int ready = ::poll(&pfd, 1, remaining_ms(deadline));
    if (ready < 0) {
      if (errno == EINTR) continue;
      protocol_error(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) throw Error(ErrorCode::kTimeout, "agent stopped reading");
    if (pfd.revents & (POLLERR | POLLHUP | POLLNVAL)) protocol_error("agent closed the connection");
    // MSG_NOSIGNAL only applies to sockets; pipes rely on SIGPIPE being ignored.
    const ssize_t n = ::write(write_fd_, data.data() + sent, data.size() - sent);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      protocol_error(std::string("write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string FdChannel::receive_line(std::chrono::milliseconds timeout) {
  const bool bounded = timeout.count() > 0;
  const auto deadline = Clock::now() + timeout;
  char chunk[4096];
  while (true) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (buffer_.size() > kMaxLineBytes) protocol_error("agent line exceeds the length limit");
    pollfd pfd{read_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, bounded ? remaining_ms(deadline) : -1);
    if (ready < 0) {
      if (errno == EINTR) continue;
      protocol_error(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) throw Error(ErrorCode::kTimeout, "agent did not answer in time");
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      protocol_error(std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) protocol_error(buffer_.empty() ? "agent closed the connection" : "truncated agent message");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

// --- TCP -------------------------------------------------------------------

std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::kInvalidConfig, "expected host:port, got '" + std::string(endpoint) + "'");
  }
  const std::string_view port_text = endpoint.substr(colon + 1);
  unsigned port = 0;
  const auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || end != port_text.data() + port_text.size() || port == 0 || port > 65535) {
    throw Error(ErrorCode::kInvalidConfig, "bad port in '" + std::string(endpoint) + "'");
  }
  std::string_view host = endpoint.substr(0, colon);
  if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  return {std::string(host), static_cast<std::uint16_t>(port)};
}

std::unique_ptr<FdChannel> connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    throw Error(ErrorCode::kIo, "cannot resolve '" + host + "': " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* a = found; a != nullptr; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot connect to " + host + ":" + service);
  ::signal(SIGPIPE, SIG_IGN);
  return std::make_unique<FdChannel>(fd, fd, true);
}

TcpListener::TcpListener(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error(ErrorCode::kIo, "socket failed");
  const int yes = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 16) != 0) {
    ::close(fd_);
    throw Error(ErrorCode::kIo, "cannot listen on port " + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  ::signal(SIGPIPE, SIG_IGN);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<FdChannel> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, timeout.count() > 0 ? static_cast<int>(timeout.count()) : -1);
  if (ready == 0) throw Error(ErrorCode::kTimeout, "no agent connected");
  if (ready < 0) throw Error(ErrorCode::kIo, "poll failed on listener");
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw Error(ErrorCode::kIo, "accept failed");
  return std::make_unique<FdChannel>(fd, fd, true);
}

// --- Subprocess ------------------------------------------------------------

SubprocessChannel::Spawned SubprocessChannel::spawn(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw Error(ErrorCode::kIo, "pipe failed");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error(ErrorCode::kIo, "pipe failed");
  }
  ::signal(SIGPIPE, SIG_IGN);
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::kIo, "fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return {from_child[0], to_child[1], pid};
}

SubprocessChannel::SubprocessChannel(const std::string& command) : SubprocessChannel(spawn(command)) {}

SubprocessChannel::SubprocessChannel(Spawned s) : FdChannel(s.read_fd, s.write_fd, true), pid_(s.pid) {}

SubprocessChannel::~SubprocessChannel() {
  close_fds();
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
}

// --- Loopback --------------------------------------------------------------

void LoopbackChannel::send_line(std::string_view line) {
  for (std::string& reply : responder_(line)) queue_.push_back(std::move(reply));
}

std::string LoopbackChannel::receive_line(std::chrono::milliseconds) {
  if (next_ >= queue_.size()) throw Error(ErrorCode::kTimeout, "agent did not answer");
  std::string line = std::move(queue_[next_++]);
  if (line.size() > kMaxLineBytes) protocol_error("agent line exceeds the length limit");
  return line;
}

}  // namespace hti::wire
