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

// Global coverage, the seed queue, crash deduplication and campaign
// statistics.
#ifndef ADVFUZZ_CORPUS_H_
#define ADVFUZZ_CORPUS_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "advfuzz/bytes.h"
#include "advfuzz/harness.h"

namespace advfuzz {

// Hit-count class: 0, 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128-255 -> 0..8.
int Bucket(int hit_count);
inline constexpr int kNumBuckets = 9;

enum class Source { kSeed, kDeterministic, kHavoc, kAdversarial };
std::string_view SourceName(Source source);

struct QueueEntry {
  uint64_t id = 0;
  Bytes input;
  int depth = 0;  // "level of mutation"; 0 for initial seeds
  std::optional<uint64_t> parent_id;
  Source source = Source::kSeed;
  std::chrono::microseconds discovered_at{0};
  int64_t exec_micros = 0;
  std::vector<uint32_t> edges;  // covered edge ids, ascending
};

// Accumulated (edge, bucket) observations plus per-edge queue frequencies.
class GlobalCoverage {
 public:
  GlobalCoverage();

  // True iff some edge of `cov` falls in a bucket not yet claimed.
  bool IsInteresting(const CoverageMap& cov) const;
  // Claims every bucket bit in `cov`; returns edges never seen before.
  std::vector<uint32_t> Claim(const CoverageMap& cov);

  // Bitmask of claimed buckets for one edge (bit b-1 for bucket b >= 1).
  uint16_t claimed(uint32_t edge) const { return claimed_[edge]; }
  size_t edges_seen() const { return edges_seen_; }
  size_t claimed_bits() const;

  uint32_t edge_frequency(uint32_t edge) const { return frequency_[edge]; }
  std::span<const uint32_t> edge_frequencies() const { return frequency_; }
  void CountEntry(std::span<const uint32_t> edges);

 private:
  std::vector<uint16_t> claimed_;
  std::vector<uint32_t> frequency_;
  size_t edges_seen_ = 0;
};

// The n edges with the smallest positive frequency, ties by ascending id.
std::vector<uint32_t> RarestEdges(std::span<const uint32_t> frequency,
                                  size_t n);

struct TimelineRow {
  double t = 0;
  uint64_t execs = 0;
  double execs_per_sec = 0;
  uint64_t paths = 0;
  uint64_t crashes = 0;
  uint64_t edges = 0;
  int max_depth = 0;
};

struct CampaignStats {
  uint64_t execs_total = 0;
  double execs_per_sec = 0;
  double elapsed_secs = 0;
  uint64_t paths_found = 0;
  uint64_t unique_crashes = 0;
  uint64_t total_crashes = 0;
  uint64_t timeouts = 0;
  int max_depth = 0;
  uint64_t edges_covered = 0;
  uint64_t cycles_done = 0;
  uint64_t candidates_received = 0;
  uint64_t candidates_accepted = 0;
  uint64_t retrain_events = 0;
  uint64_t retrains_after_cycle_end = 0;
  bool ml_degraded = false;
  std::vector<TimelineRow> timeline;
};

// Immutable copy of the queue handed to the ML side.
struct CorpusSnapshot {
  struct Entry {
    uint64_t id;
    Bytes input;
    std::vector<uint32_t> edges;
    int depth;
  };
  uint64_t snapshot_id = 0;
  std::vector<Entry> entries;
  std::vector<uint32_t> edge_frequency;  // kMapSize counters

  std::vector<uint32_t> RarestEdges(size_t n) const {
    return advfuzz::RarestEdges(edge_frequency, n);
  }
};

class Corpus {
 public:
  struct Options {
    // When set, queue/ and crashes/ are created and written under it.
    std::optional<std::filesystem::path> out_dir;
  };

  explicit Corpus(Options options = {});

  bool IsInteresting(const CoverageMap& cov) const {
    return global_.IsInteresting(cov);
  }

  struct Added {
    const QueueEntry* entry;
    std::vector<uint32_t> new_edges;
  };
  // Appends an entry and claims its coverage. Returns nullopt (and changes
  // nothing) when the exact input bytes are already queued. `entry` stays
  // valid until the next AddEntry().
  std::optional<Added> AddEntry(Bytes input, std::optional<uint64_t> parent_id,
                                Source source, const ExecutionResult& result,
                                std::chrono::microseconds discovered_at = {});

  // Returns true when (bug_id, covered-edge-set hash) is new.
  bool RecordCrash(std::span<const uint8_t> input, int bug_id,
                   const CoverageMap& cov);

  std::vector<uint32_t> RarestEdges(size_t n) const {
    return advfuzz::RarestEdges(global_.edge_frequencies(), n);
  }

  bool Contains(std::span<const uint8_t> input) const;

  const std::vector<QueueEntry>& entries() const { return entries_; }
  const QueueEntry& entry(uint64_t id) const { return entries_.at(id); }
  const std::vector<Bytes>& inputs() const { return inputs_; }
  const GlobalCoverage& global() const { return global_; }
  size_t size() const { return entries_.size(); }
  uint64_t unique_crashes() const { return crash_keys_.size(); }
  int max_depth() const { return max_depth_; }

  std::filesystem::path QueuePath(const QueueEntry& entry) const;
  std::optional<std::filesystem::path> queue_dir() const;
  std::optional<std::filesystem::path> crash_dir() const;

  CorpusSnapshot Snapshot() const;

  static uint64_t EdgeSetHash(const CoverageMap& cov);

 private:
  Options options_;
  GlobalCoverage global_;
  std::vector<QueueEntry> entries_;
  std::vector<Bytes> inputs_;
  std::unordered_set<std::string> input_set_;
  std::set<std::pair<int, uint64_t>> crash_keys_;
  int max_depth_ = 0;
};

}  // namespace advfuzz

#endif  // ADVFUZZ_CORPUS_H_
