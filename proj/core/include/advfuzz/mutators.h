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

// AFL-style deterministic and havoc mutation stages.
#ifndef ADVFUZZ_MUTATORS_H_
#define ADVFUZZ_MUTATORS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "advfuzz/bytes.h"

namespace advfuzz {

inline constexpr int kArithMax = 35;

inline constexpr std::array<int8_t, 9> kInteresting8 = {
    -128, -1, 0, 1, 16, 32, 64, 100, 127};
inline constexpr std::array<int16_t, 19> kInteresting16 = {
    -128, -1, 0, 1, 16, 32, 64, 100, 127,
    -32768, -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767};
inline constexpr std::array<int32_t, 27> kInteresting32 = {
    -128, -1, 0, 1, 16, 32, 64, 100, 127,
    -32768, -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767,
    -2147483647 - 1, -100663046, -32769, 32768, 65535, 65536, 100663045,
    2147483647};

enum class MutationKind {
  kBitFlip,
  kByteFlip,
  kArith,
  kInteresting,
  kRandomByte,
  kHavocInsert,
  kHavocDelete,
  kHavocOverwrite,
  kHavocSplice,
};

struct MutationOp {
  MutationKind kind = MutationKind::kBitFlip;
  int width = 1;          // bits for kBitFlip, bytes otherwise
  size_t position = 0;    // bit index for kBitFlip, byte index otherwise
  int64_t value = 0;      // arith delta / interesting value / block length
  bool big_endian = false;
  bool skipped = false;   // havoc op that could not apply to this buffer

  friend bool operator==(const MutationOp&, const MutationOp&) = default;
};

// Applies a deterministic op in place. Flipping twice or applying the inverse
// arith restores the buffer; interesting values need the saved bytes.
void ApplyOp(Bytes& buf, const MutationOp& op);

// Walks the fixed deterministic schedule over one input: 1/2/4-bit flips,
// 1/2/4-byte flips, 8/16/32-bit arithmetic (+-1..35, both endiannesses for
// multi-byte), then 8/16/32-bit interesting values. Each Next() restores the
// previous mutation before applying the next one.
class DeterministicStage {
 public:
  explicit DeterministicStage(Bytes input);

  // Returns the working buffer holding the next mutant, or nullptr when the
  // schedule is exhausted (the buffer then equals the original input).
  const Bytes* Next();

  const MutationOp& current_op() const { return op_; }
  const Bytes& buffer() const { return buf_; }
  size_t emitted() const { return emitted_; }

  // Number of mutants the schedule emits for an input of `len` bytes.
  static size_t CountFor(size_t len);

 private:
  enum class Phase {
    kFlip1, kFlip2, kFlip4, kByte1, kByte2, kByte4,
    kArith8, kArith16, kArith32, kInt8, kInt16, kInt32, kDone,
  };

  void Restore();
  bool Advance();  // positions op_ at the next applicable op

  Bytes buf_;
  Phase phase_ = Phase::kFlip1;
  size_t pos_ = 0;
  size_t step_ = 0;  // inner index within a position
  bool started_ = false;
  bool applied_ = false;
  MutationOp op_;
  std::array<uint8_t, 4> saved_{};
  size_t emitted_ = 0;
};

struct HavocOptions {
  size_t max_len = 4096;
  // Stack depth is 2^k with k uniform in [0, max_stack_log2]: 1..64.
  int max_stack_log2 = 6;
  // How many block-size classes insert/overwrite may draw from: 1 = 1..32,
  // 2 adds 32..128, 3 adds 128..1500. Campaigns start at 1 and widen.
  int block_size_ranks = 3;
};

// Randomized stacked mutations. Stream contents depend only on (input, rng
// state, pool, options).
class HavocStage {
 public:
  HavocStage(const Bytes& input, Rng& rng, std::span<const Bytes> splice_pool,
             size_t budget, HavocOptions options = {});

  // Next mutant or nullptr after `budget` mutants.
  const Bytes* Next();

  // Ops applied to produce the last mutant.
  const std::vector<MutationOp>& last_stack() const { return stack_; }
  size_t emitted() const { return emitted_; }

 private:
  void ApplyRandomOp();
  size_t ChooseBlockLen(size_t limit);

  const Bytes& input_;
  Rng& rng_;
  std::span<const Bytes> pool_;
  size_t budget_;
  HavocOptions options_;
  Bytes buf_;
  std::vector<MutationOp> stack_;
  size_t emitted_ = 0;
};

}  // namespace advfuzz

#endif  // ADVFUZZ_MUTATORS_H_
