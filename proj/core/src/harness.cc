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

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace advfuzz {

void CoverageMap::Clear() { std::memset(hits_.data(), 0, hits_.size()); }

std::vector<uint32_t> CoverageMap::CoveredEdges() const {
  std::vector<uint32_t> edges;
  const uint64_t* words = reinterpret_cast<const uint64_t*>(hits_.data());
  for (size_t w = 0; w < kMapSize / 8; ++w) {
    if (!words[w]) continue;
    for (size_t i = w * 8; i < w * 8 + 8; ++i) {
      if (hits_[i]) edges.push_back(static_cast<uint32_t>(i));
    }
  }
  return edges;
}

size_t CoverageMap::CountCovered() const {
  return static_cast<size_t>(
      std::count_if(hits_.begin(), hits_.end(), [](uint8_t c) { return c; }));
}

void TraceSink::CheckDeadline() const {
  if (Clock::now() > deadline_) throw internal::TimeoutSignal{};
}

std::string ToString(const Outcome& outcome) {
  switch (outcome.kind) {
    case OutcomeKind::kOk:
      return "ok";
    case OutcomeKind::kCrash:
      return "crash(" + std::to_string(outcome.bug_id) + ")";
    case OutcomeKind::kTimeout:
      return "timeout";
  }
  return "?";
}

Executor::Executor(const FuzzTarget& target, std::chrono::microseconds timeout)
    : target_(target), timeout_(timeout) {
  if (timeout.count() <= 0) {
    throw std::invalid_argument("execution timeout must be positive");
  }
}

const ExecutionResult& Executor::Execute(std::span<const uint8_t> input) {
  using Clock = TraceSink::Clock;
  result_.coverage.Clear();
  const auto start = Clock::now();
  TraceSink sink(result_.coverage, start + timeout_);
  try {
    target_.Run(input, sink);
    result_.outcome = Outcome::Ok();
  } catch (const internal::CrashSignal& crash) {
    result_.outcome = Outcome::Crash(crash.bug_id);
  } catch (const internal::TimeoutSignal&) {
    result_.outcome = Outcome::Timeout();
  }
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
                          Clock::now() - start)
                          .count();
  result_.exec_micros = std::max<int64_t>(1, micros);
  return result_;
}

ExecutionResult Execute(const FuzzTarget& target,
                        std::span<const uint8_t> input,
                        std::chrono::microseconds timeout) {
  Executor executor(target, timeout);
  return executor.Execute(input);
}

const FuzzTarget* FindTarget(std::string_view name) {
  if (name == BuiltinGoat().name()) return &BuiltinGoat();
  if (name == BuiltinLoop().name()) return &BuiltinLoop();
  return nullptr;
}

std::vector<std::string> BuiltinTargetNames() {
  return {std::string(BuiltinGoat().name()), std::string(BuiltinLoop().name())};
}

}  // namespace advfuzz
