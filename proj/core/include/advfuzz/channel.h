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

// Ordered message transport over a local stream socket, plus a small
// blocking queue used for the signal journal.
#ifndef ADVFUZZ_CHANNEL_H_
#define ADVFUZZ_CHANNEL_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "advfuzz/message.h"

namespace advfuzz {

class ChannelClosedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One end of a bidirectional connection. Not thread-safe; each end belongs
// to exactly one thread. Sends never block: records that the kernel buffer
// cannot take yet wait in an outbox and go out on the next Send/Flush/Recv.
class SocketChannel {
 public:
  static std::pair<SocketChannel, SocketChannel> Pair();
  static SocketChannel Connect(const std::filesystem::path& socket_path);

  SocketChannel() = default;
  explicit SocketChannel(int fd);
  SocketChannel(SocketChannel&& other) noexcept;
  SocketChannel& operator=(SocketChannel&& other) noexcept;
  SocketChannel(const SocketChannel&) = delete;
  SocketChannel& operator=(const SocketChannel&) = delete;
  ~SocketChannel();

  // Stamps seq and sent_at (seq counts from 1 per channel end), queues the
  // record and writes as much as the socket accepts. Returns the seq.
  uint64_t Send(Payload payload);
  // Non-blocking drain of the outbox; true when it is empty.
  bool Flush();
  // Blocks until the outbox is empty or the timeout passes.
  bool FlushFor(std::chrono::milliseconds timeout);

  // nullopt when nothing is available right now.
  std::optional<Message> TryRecv();
  Message Recv();
  std::optional<Message> RecvFor(std::chrono::milliseconds timeout);

  // Half-closes the write side after flushing what it can; the peer's
  // receives then end with ChannelClosedError once drained.
  void Close();

  bool is_open() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  size_t outbox_bytes() const { return outbox_.size() - outbox_pos_; }
  uint64_t last_seq() const { return next_seq_ - 1; }

 private:
  // Reads whatever is available; true if any new bytes arrived.
  bool FillInbox(int timeout_ms);
  std::optional<Message> PopLine();
  void Reset();

  int fd_ = -1;
  uint64_t next_seq_ = 1;
  std::string outbox_;
  size_t outbox_pos_ = 0;
  std::string inbox_;
  size_t inbox_pos_ = 0;
  bool peer_closed_ = false;
  bool write_closed_ = false;
};

// Listening unix-domain socket for peers living in another process.
class UnixListener {
 public:
  explicit UnixListener(std::filesystem::path path);
  UnixListener(const UnixListener&) = delete;
  UnixListener& operator=(const UnixListener&) = delete;
  ~UnixListener();

  SocketChannel Accept();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

// Receives from several channels, tagging each message with the index of
// the channel it came from. Closed channels drop out; Recv throws
// ChannelClosedError when all are closed.
class ChannelMux {
 public:
  size_t Add(SocketChannel* channel);
  std::optional<std::pair<size_t, Message>> RecvFor(
      std::chrono::milliseconds timeout);
  size_t open_count() const;

 private:
  std::vector<SocketChannel*> channels_;
  std::vector<bool> open_;
  size_t next_ = 0;
};

template <typename T>
class BlockingQueue {
 public:
  void Push(T item) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      items_.push_back(std::move(item));
    }
    cv_.notify_one();
  }
  // nullopt once closed and drained.
  std::optional<T> Pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }
  void Close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
  bool closed_ = false;
};

}  // namespace advfuzz

#endif  // ADVFUZZ_CHANNEL_H_
