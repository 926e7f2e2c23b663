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

#include "advfuzz/corpus.h"

#include <algorithm>
#include <array>
#include <bit>
#include <stdexcept>
#include <string>

namespace advfuzz {

namespace {

constexpr std::array<uint8_t, 256> MakeBucketTable() {
  std::array<uint8_t, 256> t{};
  for (int c = 0; c < 256; ++c) {
    if (c <= 3) t[c] = static_cast<uint8_t>(c);
    else if (c <= 7) t[c] = 4;
    else if (c <= 15) t[c] = 5;
    else if (c <= 31) t[c] = 6;
    else if (c <= 127) t[c] = 7;
    else t[c] = 8;
  }
  return t;
}

constexpr auto kBucketTable = MakeBucketTable();

inline uint16_t BucketBit(uint8_t count) {
  return static_cast<uint16_t>(1u << (kBucketTable[count] - 1));
}

}  // namespace

int Bucket(int hit_count) {
  if (hit_count < 0 || hit_count > 255) {
    throw std::out_of_range("hit count outside [0, 255]");
  }
  return kBucketTable[hit_count];
}

std::string_view SourceName(Source source) {
  switch (source) {
    case Source::kSeed: return "seed";
    case Source::kDeterministic: return "det";
    case Source::kHavoc: return "havoc";
    case Source::kAdversarial: return "adv";
  }
  return "unknown";
}

GlobalCoverage::GlobalCoverage()
    : claimed_(kMapSize, 0), frequency_(kMapSize, 0) {}

bool GlobalCoverage::IsInteresting(const CoverageMap& cov) const {
  const uint64_t* words = reinterpret_cast<const uint64_t*>(cov.data());
  for (size_t w = 0; w < kMapSize / 8; ++w) {
    if (!words[w]) continue;
    const size_t base = w * 8;
    for (size_t i = base; i < base + 8; ++i) {
      const uint8_t c = cov[i];
      if (c && !(claimed_[i] & BucketBit(c))) return true;
    }
  }
  return false;
}

std::vector<uint32_t> GlobalCoverage::Claim(const CoverageMap& cov) {
  std::vector<uint32_t> fresh;
  const uint64_t* words = reinterpret_cast<const uint64_t*>(cov.data());
  for (size_t w = 0; w < kMapSize / 8; ++w) {
    if (!words[w]) continue;
    const size_t base = w * 8;
    for (size_t i = base; i < base + 8; ++i) {
      const uint8_t c = cov[i];
      if (!c) continue;
      if (!claimed_[i]) {
        fresh.push_back(static_cast<uint32_t>(i));
        ++edges_seen_;
      }
      claimed_[i] |= BucketBit(c);
    }
  }
  return fresh;
}

size_t GlobalCoverage::claimed_bits() const {
  size_t n = 0;
  for (uint16_t m : claimed_) n += std::popcount(m);
  return n;
}

void GlobalCoverage::CountEntry(std::span<const uint32_t> edges) {
  for (uint32_t e : edges) ++frequency_[e];
}

std::vector<uint32_t> RarestEdges(std::span<const uint32_t> frequency,
                                  size_t n) {
  if (n == 0) throw std::invalid_argument("RarestEdges requires n >= 1");
  std::vector<std::pair<uint32_t, uint32_t>> present;  // (freq, edge)
  for (size_t e = 0; e < frequency.size(); ++e) {
    if (frequency[e]) present.emplace_back(frequency[e], static_cast<uint32_t>(e));
  }
  const size_t k = std::min(n, present.size());
  std::partial_sort(present.begin(), present.begin() + k, present.end());
  std::vector<uint32_t> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.push_back(present[i].second);
  return out;
}

Corpus::Corpus(Options options) : options_(std::move(options)) {
  if (options_.out_dir) {
    std::filesystem::create_directories(*options_.out_dir / "queue");
    std::filesystem::create_directories(*options_.out_dir / "crashes");
  }
}

std::optional<std::filesystem::path> Corpus::queue_dir() const {
  if (!options_.out_dir) return std::nullopt;
  return *options_.out_dir / "queue";
}

std::optional<std::filesystem::path> Corpus::crash_dir() const {
  if (!options_.out_dir) return std::nullopt;
  return *options_.out_dir / "crashes";
}

std::filesystem::path Corpus::QueuePath(const QueueEntry& entry) const {
  const std::string name = "id_" + std::to_string(entry.id) + "_" +
                           std::string(SourceName(entry.source));
  return options_.out_dir ? *options_.out_dir / "queue" / name
                          : std::filesystem::path(name);
}

bool Corpus::Contains(std::span<const uint8_t> input) const {
  return input_set_.count(ToString(input)) != 0;
}

std::optional<Corpus::Added> Corpus::AddEntry(
    Bytes input, std::optional<uint64_t> parent_id, Source source,
    const ExecutionResult& result, std::chrono::microseconds discovered_at) {
  if (!input_set_.insert(ToString(input)).second) return std::nullopt;

  QueueEntry entry;
  entry.id = entries_.size();
  entry.depth = 0;
  if (parent_id) {
    entry.depth = entries_.at(*parent_id).depth + 1;
    entry.parent_id = parent_id;
  }
  entry.source = source;
  entry.discovered_at = discovered_at;
  entry.exec_micros = result.exec_micros;
  entry.edges = result.coverage.CoveredEdges();
  entry.input = std::move(input);

  Added added{nullptr, global_.Claim(result.coverage)};
  global_.CountEntry(entry.edges);
  max_depth_ = std::max(max_depth_, entry.depth);
  if (options_.out_dir) WriteFileBytes(QueuePath(entry), entry.input);

  inputs_.push_back(entry.input);
  entries_.push_back(std::move(entry));
  added.entry = &entries_.back();
  return added;
}

uint64_t Corpus::EdgeSetHash(const CoverageMap& cov) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (uint32_t e : cov.CoveredEdges()) {
    const uint8_t le[4] = {static_cast<uint8_t>(e), static_cast<uint8_t>(e >> 8),
                           static_cast<uint8_t>(e >> 16),
                           static_cast<uint8_t>(e >> 24)};
    h = Fnv1a64(le, h);
  }
  return h;
}

bool Corpus::RecordCrash(std::span<const uint8_t> input, int bug_id,
                         const CoverageMap& cov) {
  const uint64_t hash = EdgeSetHash(cov);
  if (!crash_keys_.emplace(bug_id, hash).second) return false;
  if (options_.out_dir) {
    WriteFileBytes(*options_.out_dir / "crashes" /
                       ("bug" + std::to_string(bug_id) + "_" + Hex64(hash)),
                   input);
  }
  return true;
}

CorpusSnapshot Corpus::Snapshot() const {
  CorpusSnapshot snap;
  snap.snapshot_id = entries_.size();
  snap.entries.reserve(entries_.size());
  for (const QueueEntry& e : entries_) {
    snap.entries.push_back({e.id, e.input, e.edges, e.depth});
  }
  snap.edge_frequency.assign(global_.edge_frequencies().begin(),
                             global_.edge_frequencies().end());
  return snap;
}

}  // namespace advfuzz
