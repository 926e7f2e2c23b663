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

#include "advfuzz/harness.h"

namespace advfuzz {
namespace {

constexpr uint32_t kEntry = 0x1d2b;
constexpr uint32_t kBody = 0x7a41;
constexpr uint32_t kExit = 0x3c96;

class LoopTarget final : public FuzzTarget {
 public:
  std::string_view name() const override { return "loop"; }

  void Run(std::span<const uint8_t> input, TraceSink& sink) const override {
    sink.Visit(kEntry);
    // Little-endian trip count from the first two bytes.
    int n = input.empty() ? 0 : input[0];
    if (input.size() > 1) n |= input[1] << 8;
    for (int i = 0; i < n; ++i) sink.Visit(kBody);
    sink.Visit(kExit);
  }

  const std::vector<BugInfo>& manifest() const override { return manifest_; }
  std::vector<Bytes> seeds() const override { return {Bytes{1}}; }

 private:
  std::vector<BugInfo> manifest_;
};

}  // namespace

const FuzzTarget& BuiltinLoop() {
  static const LoopTarget target;
  return target;
}

}  // namespace advfuzz
