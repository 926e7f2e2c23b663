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

// Messages exchanged between the fuzz loop and the ML component, and their
// line-oriented wire encoding:
//
//   <seq>|<KIND>|<sent_at_us>,<field>,...,<blob>\n
//
// where a blob is either `inline,<base64>` or `file,<path>`. The path always
// comes last so it may itself contain commas.
#ifndef ADVFUZZ_MESSAGE_H_
#define ADVFUZZ_MESSAGE_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "advfuzz/bytes.h"

namespace advfuzz {

inline constexpr size_t kDefaultInlineLimit = 4096;

class WireFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bytes carried either inline or as a path to a file holding them.
struct Blob {
  Bytes data;
  std::string file;  // non-empty means file ref

  bool is_file() const { return !file.empty(); }
  // Returns the bytes, reading the file for file refs.
  Bytes Resolve() const;
  friend bool operator==(const Blob&, const Blob&) = default;
};

struct NewInput {
  uint64_t entry_id = 0;
  Blob input;
  friend bool operator==(const NewInput&, const NewInput&) = default;
};
struct NewEdge {
  uint32_t edge = 0;
  friend bool operator==(const NewEdge&, const NewEdge&) = default;
};
struct CycleEnd {
  uint64_t cycle = 0;
  friend bool operator==(const CycleEnd&, const CycleEnd&) = default;
};
struct PriorityTarget {
  uint32_t edge = 0;
  friend bool operator==(const PriorityTarget&, const PriorityTarget&) = default;
};
struct Candidate {
  Blob input;
  uint32_t target_edge = 0;
  uint64_t seed_id = 0;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};
struct Shutdown {
  friend bool operator==(const Shutdown&, const Shutdown&) = default;
};

using Payload =
    std::variant<NewInput, NewEdge, CycleEnd, PriorityTarget, Candidate, Shutdown>;

struct Message {
  uint64_t seq = 0;
  int64_t sent_at_us = 0;  // microseconds since the unix epoch
  Payload payload;
  friend bool operator==(const Message&, const Message&) = default;
};

std::string_view KindName(const Payload& payload);

// One wire record including the trailing newline.
std::string EncodeWire(const Message& msg);
// Parses one record; a trailing newline is tolerated.
Message DecodeWire(std::string_view line);

// Inline when small enough, otherwise written to
// <exchange_dir>/<stem> and referenced by path. Without an exchange dir
// everything travels inline.
Blob MakeBlob(Bytes data, size_t inline_limit,
              const std::filesystem::path* exchange_dir, std::string_view stem);

int64_t NowMicros();

}  // namespace advfuzz

#endif  // ADVFUZZ_MESSAGE_H_
