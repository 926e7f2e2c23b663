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

#include "advfuzz/mutators.h"

#include <algorithm>
#include <cstring>

namespace advfuzz {

namespace {

uint64_t ReadInt(const Bytes& buf, size_t pos, int width, bool big_endian) {
  uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    const uint8_t b = buf[pos + (big_endian ? i : width - 1 - i)];
    v = (v << 8) | b;
  }
  return v;
}

void WriteInt(Bytes& buf, size_t pos, int width, bool big_endian, uint64_t v) {
  for (int i = 0; i < width; ++i) {
    const uint8_t b = static_cast<uint8_t>(v >> (8 * i));
    buf[pos + (big_endian ? width - 1 - i : i)] = b;
  }
}

int64_t InterestingValue(int width, size_t index) {
  switch (width) {
    case 1: return kInteresting8[index];
    case 2: return kInteresting16[index];
    default: return kInteresting32[index];
  }
}

size_t InterestingCount(int width) {
  switch (width) {
    case 1: return kInteresting8.size();
    case 2: return kInteresting16.size();
    default: return kInteresting32.size();
  }
}

}  // namespace

void ApplyOp(Bytes& buf, const MutationOp& op) {
  switch (op.kind) {
    case MutationKind::kBitFlip:
      for (int i = 0; i < op.width; ++i) {
        const size_t bit = op.position + i;
        buf[bit >> 3] ^= static_cast<uint8_t>(0x80 >> (bit & 7));
      }
      break;
    case MutationKind::kByteFlip:
      for (int i = 0; i < op.width; ++i) buf[op.position + i] ^= 0xFF;
      break;
    case MutationKind::kArith: {
      const uint64_t v = ReadInt(buf, op.position, op.width, op.big_endian);
      WriteInt(buf, op.position, op.width, op.big_endian,
               v + static_cast<uint64_t>(op.value));
      break;
    }
    case MutationKind::kInteresting:
      WriteInt(buf, op.position, op.width, op.big_endian,
               static_cast<uint64_t>(op.value));
      break;
    default:
      break;
  }
}

// ---- deterministic ----------------------------------------------------------

namespace {

struct PhaseShape {
  MutationKind kind;
  int width;        // bits for flips of single bits, bytes otherwise
  bool bit_level;
  size_t steps;     // ops per position
};

constexpr PhaseShape kShapes[] = {
    {MutationKind::kBitFlip, 1, true, 1},
    {MutationKind::kBitFlip, 2, true, 1},
    {MutationKind::kBitFlip, 4, true, 1},
    {MutationKind::kByteFlip, 1, false, 1},
    {MutationKind::kByteFlip, 2, false, 1},
    {MutationKind::kByteFlip, 4, false, 1},
    {MutationKind::kArith, 1, false, 2 * kArithMax},
    {MutationKind::kArith, 2, false, 4 * kArithMax},
    {MutationKind::kArith, 4, false, 4 * kArithMax},
    {MutationKind::kInteresting, 1, false, kInteresting8.size()},
    {MutationKind::kInteresting, 2, false, 2 * kInteresting16.size()},
    {MutationKind::kInteresting, 4, false, 2 * kInteresting32.size()},
};
constexpr size_t kNumPhases = std::size(kShapes);

size_t PositionsFor(const PhaseShape& s, size_t len) {
  const size_t units = s.bit_level ? len * 8 : len;
  return units >= static_cast<size_t>(s.width) ? units - s.width + 1 : 0;
}

}  // namespace

DeterministicStage::DeterministicStage(Bytes input) : buf_(std::move(input)) {}

size_t DeterministicStage::CountFor(size_t len) {
  size_t total = 0;
  for (const PhaseShape& s : kShapes) total += PositionsFor(s, len) * s.steps;
  return total;
}

void DeterministicStage::Restore() {
  if (op_.kind == MutationKind::kBitFlip) {
    const size_t first = op_.position >> 3;
    const size_t last = (op_.position + op_.width - 1) >> 3;
    for (size_t i = first; i <= last; ++i) buf_[i] = saved_[i - first];
  } else {
    for (int i = 0; i < op_.width; ++i) buf_[op_.position + i] = saved_[i];
  }
}

bool DeterministicStage::Advance() {
  if (started_) {
    ++step_;
  } else {
    started_ = true;
  }
  for (;;) {
    const size_t phase = static_cast<size_t>(phase_);
    if (phase >= kNumPhases) return false;
    const PhaseShape& s = kShapes[phase];
    if (step_ >= s.steps) {
      step_ = 0;
      ++pos_;
    }
    if (pos_ >= PositionsFor(s, buf_.size())) {
      phase_ = static_cast<Phase>(phase + 1);
      pos_ = 0;
      step_ = 0;
      continue;
    }
    op_ = MutationOp{};
    op_.kind = s.kind;
    op_.width = s.width;
    op_.position = pos_;
    switch (s.kind) {
      case MutationKind::kArith: {
        const size_t variants = s.width == 1 ? 2 : 4;
        const int64_t delta = static_cast<int64_t>(step_ / variants) + 1;
        const size_t v = step_ % variants;
        op_.value = (v % 2 == 0) ? delta : -delta;
        op_.big_endian = v >= 2;
        break;
      }
      case MutationKind::kInteresting: {
        const size_t variants = s.width == 1 ? 1 : 2;
        op_.value = InterestingValue(s.width, step_ / variants);
        op_.big_endian = (step_ % variants) == 1;
        break;
      }
      default:
        break;
    }
    return true;
  }
}

const Bytes* DeterministicStage::Next() {
  if (applied_) {
    Restore();
    applied_ = false;
  }
  if (!Advance()) return nullptr;
  if (op_.kind == MutationKind::kBitFlip) {
    const size_t first = op_.position >> 3;
    const size_t last = (op_.position + op_.width - 1) >> 3;
    for (size_t i = first; i <= last; ++i) saved_[i - first] = buf_[i];
  } else {
    for (int i = 0; i < op_.width; ++i) saved_[i] = buf_[op_.position + i];
  }
  ApplyOp(buf_, op_);
  applied_ = true;
  ++emitted_;
  return &buf_;
}

// ---- havoc ------------------------------------------------------------------

HavocStage::HavocStage(const Bytes& input, Rng& rng,
                       std::span<const Bytes> splice_pool, size_t budget,
                       HavocOptions options)
    : input_(input),
      rng_(rng),
      pool_(splice_pool),
      budget_(budget),
      options_(options) {}

size_t HavocStage::ChooseBlockLen(size_t limit) {
  size_t lo = 1;
  size_t hi = 32;
  const int ranks = std::clamp(options_.block_size_ranks, 1, 3);
  switch (rng_.Below(static_cast<uint64_t>(ranks))) {
    case 0: lo = 1; hi = 32; break;
    case 1: lo = 32; hi = 128; break;
    default: lo = 128; hi = 1500; break;
  }
  if (lo > limit) lo = 1;
  hi = std::min(hi, limit);
  return lo + rng_.Below(hi - lo + 1);
}

void HavocStage::ApplyRandomOp() {
  MutationOp op;
  const size_t len = buf_.size();
  // Widest integer that fits at a random position.
  auto pick_width = [&]() -> int {
    const int widths[] = {1, 2, 4};
    int w = widths[rng_.Below(3)];
    while (static_cast<size_t>(w) > len) w /= 2;
    return w;
  };

  switch (rng_.Below(8)) {
    case 0:
      op.kind = MutationKind::kBitFlip;
      op.position = rng_.Below(len * 8);
      ApplyOp(buf_, op);
      break;

    case 1:
      op.kind = MutationKind::kRandomByte;
      op.position = rng_.Below(len);
      op.value = 1 + static_cast<int64_t>(rng_.Below(255));
      buf_[op.position] ^= static_cast<uint8_t>(op.value);
      break;

    case 2: {
      op.kind = MutationKind::kArith;
      op.width = pick_width();
      op.position = rng_.Below(len - op.width + 1);
      const int64_t delta = 1 + static_cast<int64_t>(rng_.Below(kArithMax));
      op.value = rng_.Coin() ? delta : -delta;
      op.big_endian = op.width > 1 && rng_.Coin();
      ApplyOp(buf_, op);
      break;
    }

    case 3:
      op.kind = MutationKind::kInteresting;
      op.width = pick_width();
      op.position = rng_.Below(len - op.width + 1);
      op.value = InterestingValue(op.width, rng_.Below(InterestingCount(op.width)));
      op.big_endian = op.width > 1 && rng_.Coin();
      ApplyOp(buf_, op);
      break;

    case 4: {
      op.kind = MutationKind::kHavocInsert;
      if (len >= options_.max_len) {
        op.skipped = true;
        break;
      }
      const size_t block = ChooseBlockLen(options_.max_len - len);
      const size_t at = rng_.Below(len + 1);
      op.position = at;
      op.value = static_cast<int64_t>(block);
      Bytes chunk;
      if (rng_.Below(4) != 0 && block <= len) {
        const size_t from = rng_.Below(len - block + 1);
        chunk.assign(buf_.begin() + from, buf_.begin() + from + block);
      } else {
        const uint8_t fill = rng_.Coin() ? static_cast<uint8_t>(rng_.Below(256))
                                         : buf_[rng_.Below(len)];
        chunk.assign(block, fill);
      }
      buf_.insert(buf_.begin() + at, chunk.begin(), chunk.end());
      break;
    }

    case 5: {
      op.kind = MutationKind::kHavocDelete;
      if (len <= 1) {
        op.skipped = true;
        break;
      }
      const size_t block = ChooseBlockLen(len - 1);
      const size_t at = rng_.Below(len - block + 1);
      op.position = at;
      op.value = static_cast<int64_t>(block);
      buf_.erase(buf_.begin() + at, buf_.begin() + at + block);
      break;
    }

    case 6: {
      op.kind = MutationKind::kHavocOverwrite;
      if (len < 2) {
        op.skipped = true;
        break;
      }
      const size_t block = ChooseBlockLen(len - 1);
      const size_t to = rng_.Below(len - block + 1);
      op.position = to;
      op.value = static_cast<int64_t>(block);
      if (rng_.Below(4) != 0) {
        const size_t from = rng_.Below(len - block + 1);
        std::memmove(buf_.data() + to, buf_.data() + from, block);
      } else {
        const uint8_t fill = rng_.Coin() ? static_cast<uint8_t>(rng_.Below(256))
                                         : buf_[rng_.Below(len)];
        std::memset(buf_.data() + to, fill, block);
      }
      break;
    }

    default: {
      op.kind = MutationKind::kHavocSplice;
      if (pool_.empty()) {
        op.skipped = true;
        break;
      }
      const Bytes& other = pool_[rng_.Below(pool_.size())];
      const size_t cut_self = rng_.Below(len + 1);
      const size_t cut_other = rng_.Below(other.size() + 1);
      const size_t total = cut_self + (other.size() - cut_other);
      if (total == 0) {
        op.skipped = true;
        break;
      }
      op.position = cut_self;
      op.value = static_cast<int64_t>(cut_other);
      buf_.resize(cut_self);
      buf_.insert(buf_.end(), other.begin() + cut_other, other.end());
      if (buf_.size() > options_.max_len) buf_.resize(options_.max_len);
      break;
    }
  }
  stack_.push_back(op);
}

const Bytes* HavocStage::Next() {
  if (emitted_ >= budget_ || input_.empty()) return nullptr;
  buf_.assign(input_.begin(),
              input_.begin() + std::min(input_.size(), options_.max_len));
  stack_.clear();
  const size_t depth = size_t{1} << rng_.Below(options_.max_stack_log2 + 1);
  for (size_t i = 0; i < depth; ++i) ApplyRandomOp();
  ++emitted_;
  return &buf_;
}

}  // namespace advfuzz
