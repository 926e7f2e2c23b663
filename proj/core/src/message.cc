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

#include "advfuzz/message.h"

#include <charconv>
#include <chrono>
#include <type_traits>
#include <vector>

namespace advfuzz {
namespace {

template <typename T>
T ParseInt(std::string_view s, std::string_view what) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw WireFormatError("bad " + std::string(what) + ": '" + std::string(s) +
                          "'");
  }
  return v;
}

// Splits into exactly n fields on ',', the last one taking the remainder.
std::vector<std::string_view> SplitN(std::string_view s, size_t n) {
  std::vector<std::string_view> out;
  while (out.size() + 1 < n) {
    size_t c = s.find(',');
    if (c == std::string_view::npos) {
      throw WireFormatError("payload has too few fields");
    }
    out.push_back(s.substr(0, c));
    s.remove_prefix(c + 1);
  }
  out.push_back(s);
  return out;
}

void AppendBlob(std::string& out, const Blob& b) {
  if (b.is_file()) {
    out += "file,";
    out += b.file;
  } else {
    out += "inline,";
    out += Base64Encode(b.data);
  }
}

Blob ParseBlob(std::string_view mode, std::string_view body) {
  Blob b;
  if (mode == "file") {
    if (body.empty()) throw WireFormatError("empty file ref");
    b.file = std::string(body);
  } else if (mode == "inline") {
    auto decoded = Base64Decode(body);
    if (!decoded) throw WireFormatError("bad base64 payload");
    b.data = std::move(*decoded);
  } else {
    throw WireFormatError("unknown blob mode '" + std::string(mode) + "'");
  }
  return b;
}

}  // namespace

Bytes Blob::Resolve() const {
  if (is_file()) return ReadFileBytes(file);
  return data;
}

std::string_view KindName(const Payload& payload) {
  static constexpr std::string_view kNames[] = {
      "NEW_INPUT", "NEW_EDGE", "CYCLE_END", "PRIORITY_TARGET", "CANDIDATE",
      "SHUTDOWN"};
  return kNames[payload.index()];
}

std::string EncodeWire(const Message& msg) {
  std::string out = std::to_string(msg.seq);
  out += '|';
  out += KindName(msg.payload);
  out += '|';
  out += std::to_string(msg.sent_at_us);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NewInput>) {
          out += ',' + std::to_string(p.entry_id) + ',';
          AppendBlob(out, p.input);
        } else if constexpr (std::is_same_v<T, NewEdge>) {
          out += ',' + std::to_string(p.edge);
        } else if constexpr (std::is_same_v<T, CycleEnd>) {
          out += ',' + std::to_string(p.cycle);
        } else if constexpr (std::is_same_v<T, PriorityTarget>) {
          out += ',' + std::to_string(p.edge);
        } else if constexpr (std::is_same_v<T, Candidate>) {
          out += ',' + std::to_string(p.target_edge) + ',' +
                 std::to_string(p.seed_id) + ',';
          AppendBlob(out, p.input);
        }
      },
      msg.payload);
  if (out.find('\n') != std::string::npos) {
    throw WireFormatError("newline inside wire record");
  }
  out += '\n';
  return out;
}

Message DecodeWire(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  const size_t a = line.find('|');
  const size_t b = a == std::string_view::npos ? a : line.find('|', a + 1);
  if (b == std::string_view::npos) throw WireFormatError("missing separators");

  Message msg;
  msg.seq = ParseInt<uint64_t>(line.substr(0, a), "seq");
  const std::string_view kind = line.substr(a + 1, b - a - 1);
  const std::string_view payload = line.substr(b + 1);

  auto fields = [&](size_t n) {
    auto f = SplitN(payload, n);
    msg.sent_at_us = ParseInt<int64_t>(f[0], "timestamp");
    return f;
  };
  if (kind == "NEW_INPUT") {
    auto f = fields(4);
    msg.payload = NewInput{ParseInt<uint64_t>(f[1], "entry id"),
                           ParseBlob(f[2], f[3])};
  } else if (kind == "NEW_EDGE") {
    auto f = fields(2);
    msg.payload = NewEdge{ParseInt<uint32_t>(f[1], "edge")};
  } else if (kind == "CYCLE_END") {
    auto f = fields(2);
    msg.payload = CycleEnd{ParseInt<uint64_t>(f[1], "cycle")};
  } else if (kind == "PRIORITY_TARGET") {
    auto f = fields(2);
    msg.payload = PriorityTarget{ParseInt<uint32_t>(f[1], "edge")};
  } else if (kind == "CANDIDATE") {
    auto f = fields(5);
    Candidate c;
    c.target_edge = ParseInt<uint32_t>(f[1], "target edge");
    c.seed_id = ParseInt<uint64_t>(f[2], "seed id");
    c.input = ParseBlob(f[3], f[4]);
    msg.payload = std::move(c);
  } else if (kind == "SHUTDOWN") {
    if (payload.find(',') != std::string_view::npos) {
      throw WireFormatError("SHUTDOWN takes no fields");
    }
    msg.sent_at_us = ParseInt<int64_t>(payload, "timestamp");
    msg.payload = Shutdown{};
  } else {
    throw WireFormatError("unknown message kind '" + std::string(kind) + "'");
  }
  return msg;
}

Blob MakeBlob(Bytes data, size_t inline_limit,
              const std::filesystem::path* exchange_dir, std::string_view stem) {
  Blob b;
  if (data.size() > inline_limit && exchange_dir != nullptr) {
    std::filesystem::create_directories(*exchange_dir);
    const auto path = *exchange_dir / std::string(stem);
    WriteFileBytes(path, data);
    b.file = path.string();
  } else {
    b.data = std::move(data);
  }
  return b;
}

int64_t NowMicros() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace advfuzz
