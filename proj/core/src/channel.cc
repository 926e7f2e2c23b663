// Copyright 2026 The advfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "advfuzz/channel.h"

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace advfuzz {
namespace {

[[noreturn]] void ThrowErrno(const std::string& what) {
  throw std::runtime_error(what + ": " + std::strerror(errno));
}

void SetNonBlocking(int fd) {
  const int flags = fcntl(fd, F_GETFL, 0);
  if (flags < 0 || fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0) {
    ThrowErrno("fcntl");
  }
}

sockaddr_un MakeAddr(const std::filesystem::path& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  const std::string s = path.string();
  if (s.size() >= sizeof(addr.sun_path)) {
    throw std::invalid_argument("socket path too long: " + s);
  }
  std::memcpy(addr.sun_path, s.c_str(), s.size() + 1);
  return addr;
}

constexpr size_t kReadChunk = 64 * 1024;

}  // namespace

std::pair<SocketChannel, SocketChannel> SocketChannel::Pair() {
  int fds[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    ThrowErrno("socketpair");
  }
  return {SocketChannel(fds[0]), SocketChannel(fds[1])};
}

SocketChannel SocketChannel::Connect(const std::filesystem::path& socket_path) {
  int fd = socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) ThrowErrno("socket");
  sockaddr_un addr = MakeAddr(socket_path);
  if (connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int e = errno;
    close(fd);
    errno = e;
    ThrowErrno("connect " + socket_path.string());
  }
  return SocketChannel(fd);
}

SocketChannel::SocketChannel(int fd) : fd_(fd) { SetNonBlocking(fd_); }

SocketChannel::SocketChannel(SocketChannel&& other) noexcept {
  *this = std::move(other);
}

SocketChannel& SocketChannel::operator=(SocketChannel&& other) noexcept {
  if (this != &other) {
    Reset();
    fd_ = std::exchange(other.fd_, -1);
    next_seq_ = other.next_seq_;
    outbox_ = std::move(other.outbox_);
    outbox_pos_ = other.outbox_pos_;
    inbox_ = std::move(other.inbox_);
    inbox_pos_ = other.inbox_pos_;
    peer_closed_ = other.peer_closed_;
    write_closed_ = other.write_closed_;
  }
  return *this;
}

SocketChannel::~SocketChannel() { Reset(); }

void SocketChannel::Reset() {
  if (fd_ >= 0) close(fd_);
  fd_ = -1;
}

uint64_t SocketChannel::Send(Payload payload) {
  if (fd_ < 0 || write_closed_) throw ChannelClosedError("send on closed channel");
  Message msg{next_seq_, NowMicros(), std::move(payload)};
  outbox_ += EncodeWire(msg);
  ++next_seq_;
  Flush();
  return msg.seq;
}

bool SocketChannel::Flush() {
  if (fd_ < 0) throw ChannelClosedError("flush on closed channel");
  while (outbox_pos_ < outbox_.size()) {
    const ssize_t n = send(fd_, outbox_.data() + outbox_pos_,
                           outbox_.size() - outbox_pos_, MSG_NOSIGNAL);
    if (n > 0) {
      outbox_pos_ += static_cast<size_t>(n);
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) break;
    if (n < 0 && (errno == EPIPE || errno == ECONNRESET)) {
      throw ChannelClosedError("peer closed the channel");
    }
    ThrowErrno("send");
  }
  if (outbox_pos_ == outbox_.size()) {
    outbox_.clear();
    outbox_pos_ = 0;
    return true;
  }
  // Keep the buffer from growing without bound on long backlogs.
  if (outbox_pos_ > (1u << 20)) {
    outbox_.erase(0, outbox_pos_);
    outbox_pos_ = 0;
  }
  return false;
}

bool SocketChannel::FlushFor(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!Flush()) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return false;
    pollfd p{fd_, POLLOUT, 0};
    poll(&p, 1, static_cast<int>(left.count()));
  }
  return true;
}

bool SocketChannel::FillInbox(int timeout_ms) {
  if (fd_ < 0) throw ChannelClosedError("recv on closed channel");
  if (peer_closed_) return false;
  if (timeout_ms != 0) {
    pollfd p{fd_, POLLIN, 0};
    int r;
    do {
      r = poll(&p, 1, timeout_ms);
    } while (r < 0 && errno == EINTR);
    if (r == 0) return false;
  }
  if (inbox_pos_ > 0 && inbox_pos_ == inbox_.size()) {
    inbox_.clear();
    inbox_pos_ = 0;
  }
  bool got = false;
  char buf[kReadChunk];
  for (;;) {
    const ssize_t n = recv(fd_, buf, sizeof(buf), 0);
    if (n > 0) {
      inbox_.append(buf, static_cast<size_t>(n));
      got = true;
      if (static_cast<size_t>(n) < sizeof(buf)) break;
      continue;
    }
    if (n == 0) {
      peer_closed_ = true;
      break;
    }
    if (errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK) break;
    if (errno == ECONNRESET) {
      peer_closed_ = true;
      break;
    }
    ThrowErrno("recv");
  }
  return got;
}

std::optional<Message> SocketChannel::PopLine() {
  const size_t nl = inbox_.find('\n', inbox_pos_);
  if (nl == std::string::npos) return std::nullopt;
  std::string_view line(inbox_.data() + inbox_pos_, nl - inbox_pos_);
  inbox_pos_ = nl + 1;
  Message msg = DecodeWire(line);
  if (inbox_pos_ > (1u << 20)) {
    inbox_.erase(0, inbox_pos_);
    inbox_pos_ = 0;
  }
  return msg;
}

std::optional<Message> SocketChannel::TryRecv() {
  if (auto m = PopLine()) return m;
  if (outbox_bytes() > 0 && !write_closed_) Flush();
  FillInbox(0);
  if (auto m = PopLine()) return m;
  if (peer_closed_) throw ChannelClosedError("peer closed the channel");
  return std::nullopt;
}

std::optional<Message> SocketChannel::RecvFor(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto m = TryRecv()) return m;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    FillInbox(static_cast<int>(left.count()));
  }
}

Message SocketChannel::Recv() {
  for (;;) {
    if (auto m = TryRecv()) return *m;
    FillInbox(-1);
  }
}

void SocketChannel::Close() {
  if (fd_ < 0 || write_closed_) return;
  try {
    FlushFor(std::chrono::milliseconds(1000));
  } catch (const ChannelClosedError&) {
  }
  shutdown(fd_, SHUT_WR);
  write_closed_ = true;
}

UnixListener::UnixListener(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
  fd_ = socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) ThrowErrno("socket");
  sockaddr_un addr = MakeAddr(path_);
  if (bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      listen(fd_, 16) != 0) {
    const int e = errno;
    close(fd_);
    errno = e;
    ThrowErrno("bind/listen " + path_.string());
  }
}

UnixListener::~UnixListener() {
  if (fd_ >= 0) close(fd_);
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

SocketChannel UnixListener::Accept() {
  int fd;
  do {
    fd = accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  } while (fd < 0 && errno == EINTR);
  if (fd < 0) ThrowErrno("accept");
  return SocketChannel(fd);
}

size_t ChannelMux::Add(SocketChannel* channel) {
  channels_.push_back(channel);
  open_.push_back(true);
  return channels_.size() - 1;
}

size_t ChannelMux::open_count() const {
  size_t n = 0;
  for (bool o : open_) n += o;
  return n;
}

std::optional<std::pair<size_t, Message>> ChannelMux::RecvFor(
    std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (open_count() == 0) throw ChannelClosedError("all channels closed");
    // Round-robin so one busy sender cannot starve the other.
    for (size_t k = 0; k < channels_.size(); ++k) {
      const size_t i = (next_ + k) % channels_.size();
      if (!open_[i]) continue;
      try {
        if (auto m = channels_[i]->TryRecv()) {
          next_ = (i + 1) % channels_.size();
          return std::make_pair(i, std::move(*m));
        }
      } catch (const ChannelClosedError&) {
        open_[i] = false;
      }
    }
    if (open_count() == 0) throw ChannelClosedError("all channels closed");
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    std::vector<pollfd> fds;
    for (size_t i = 0; i < channels_.size(); ++i) {
      if (open_[i]) fds.push_back({channels_[i]->fd(), POLLIN, 0});
    }
    poll(fds.data(), fds.size(), static_cast<int>(left.count()));
  }
}

}  // namespace advfuzz
