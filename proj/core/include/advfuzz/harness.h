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

// In-process execution of fuzz targets under edge instrumentation.
//
// A target reports control flow by calling TraceSink::Visit() with a location
// id at every instrumentation point. The sink turns consecutive locations into
// AFL-style edge ids and bumps a saturating 8-bit counter per edge. Targets
// report seeded bugs through TraceSink::Crash(); the executor catches that and
// returns a Crash outcome, so a crashing input never unwinds past Execute().
#ifndef ADVFUZZ_HARNESS_H_
#define ADVFUZZ_HARNESS_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advfuzz/bytes.h"

namespace advfuzz {

inline constexpr size_t kMapSize = size_t{1} << 16;

// ((prev >> 1) XOR cur) mod map size.
constexpr uint32_t EdgeIndex(uint32_t prev_loc, uint32_t cur_loc) {
  return ((prev_loc >> 1) ^ cur_loc) & static_cast<uint32_t>(kMapSize - 1);
}

class CoverageMap {
 public:
  CoverageMap() : hits_(kMapSize, 0) {}

  void Clear();
  // Saturates at 255.
  void Hit(uint32_t edge) {
    uint8_t& c = hits_[edge];
    c += (c != 255);
  }

  uint8_t operator[](size_t edge) const { return hits_[edge]; }
  std::span<const uint8_t> hits() const { return hits_; }
  const uint8_t* data() const { return hits_.data(); }
  static constexpr size_t size() { return kMapSize; }

  // Edge ids with a non-zero counter, ascending.
  std::vector<uint32_t> CoveredEdges() const;
  size_t CountCovered() const;

  friend bool operator==(const CoverageMap&, const CoverageMap&) = default;

 private:
  std::vector<uint8_t> hits_;
};

namespace internal {
struct CrashSignal {
  int bug_id;
};
struct TimeoutSignal {};
}  // namespace internal

class TraceSink {
 public:
  using Clock = std::chrono::steady_clock;

  TraceSink(CoverageMap& map, Clock::time_point deadline)
      : map_(map), deadline_(deadline) {}

  void Visit(uint32_t location) {
    map_.Hit(EdgeIndex(prev_, location));
    prev_ = location;
    if ((++events_ & kDeadlineCheckMask) == 0) CheckDeadline();
  }

  // Reports a seeded bug; never returns.
  [[noreturn]] void Crash(int bug_id) { throw internal::CrashSignal{bug_id}; }

  uint64_t events() const { return events_; }

 private:
  static constexpr uint64_t kDeadlineCheckMask = 0x3FF;
  void CheckDeadline() const;

  CoverageMap& map_;
  Clock::time_point deadline_;
  uint32_t prev_ = 0;
  uint64_t events_ = 0;
};

enum class OutcomeKind { kOk, kCrash, kTimeout };

struct Outcome {
  OutcomeKind kind = OutcomeKind::kOk;
  int bug_id = 0;  // >= 1 when kind == kCrash

  static Outcome Ok() { return {}; }
  static Outcome Crash(int id) { return {OutcomeKind::kCrash, id}; }
  static Outcome Timeout() { return {OutcomeKind::kTimeout, 0}; }
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

std::string ToString(const Outcome& outcome);

struct ExecutionResult {
  CoverageMap coverage;
  Outcome outcome;
  int64_t exec_micros = 1;
};

struct BugInfo {
  int id;
  std::string description;
  Bytes trigger;
};

class FuzzTarget {
 public:
  virtual ~FuzzTarget() = default;

  virtual std::string_view name() const = 0;
  // Must be deterministic in `input`. Report bugs with sink.Crash().
  virtual void Run(std::span<const uint8_t> input, TraceSink& sink) const = 0;
  virtual const std::vector<BugInfo>& manifest() const = 0;
  // Initial corpus for campaigns against this target.
  virtual std::vector<Bytes> seeds() const = 0;
};

inline constexpr std::chrono::microseconds kDefaultExecTimeout{50'000};

// Reusable single-threaded executor. Each Execute() starts from a zeroed map;
// the returned reference stays valid until the next call.
class Executor {
 public:
  explicit Executor(const FuzzTarget& target,
                    std::chrono::microseconds timeout = kDefaultExecTimeout);

  const ExecutionResult& Execute(std::span<const uint8_t> input);

  const FuzzTarget& target() const { return target_; }

 private:
  const FuzzTarget& target_;
  std::chrono::microseconds timeout_;
  ExecutionResult result_;
};

// One-shot execution with a fresh map. Throws std::invalid_argument when
// timeout is not positive.
ExecutionResult Execute(const FuzzTarget& target,
                        std::span<const uint8_t> input,
                        std::chrono::microseconds timeout = kDefaultExecTimeout);

// Built-in targets.
const FuzzTarget& BuiltinGoat();
// Loops input[0] times over one edge; used for hit-count tests.
const FuzzTarget& BuiltinLoop();

// Number of instrumentation points compiled into the goat parser.
size_t GoatLocationCount();

// Lookup by name ("goat", "loop"); nullptr when unknown.
const FuzzTarget* FindTarget(std::string_view name);
std::vector<std::string> BuiltinTargetNames();

}  // namespace advfuzz

#endif  // ADVFUZZ_HARNESS_H_
