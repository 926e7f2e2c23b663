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

#include <gtest/gtest.h>

#include "advfuzz/mutators.h"

namespace advfuzz {
namespace {

// Straight-line enumeration of the deterministic schedule.
std::vector<Bytes> EnumerateDeterministic(const Bytes& in) {
  std::vector<Bytes> out;
  const size_t len = in.size();
  for (int w : {1, 2, 4}) {
    for (size_t bit = 0; bit + w <= len * 8; ++bit) {
      Bytes m = in;
      for (int k = 0; k < w; ++k) {
        m[(bit + k) / 8] ^= static_cast<uint8_t>(1u << (7 - (bit + k) % 8));
      }
      out.push_back(m);
    }
  }
  for (int w : {1, 2, 4}) {
    for (size_t p = 0; p + w <= len; ++p) {
      Bytes m = in;
      for (int k = 0; k < w; ++k) m[p + k] = static_cast<uint8_t>(~m[p + k]);
      out.push_back(m);
    }
  }
  auto put = [](Bytes& m, size_t p, int w, bool be, uint64_t v) {
    for (int k = 0; k < w; ++k) {
      m[p + (be ? w - 1 - k : k)] = static_cast<uint8_t>(v >> (8 * k));
    }
  };
  auto get = [](const Bytes& m, size_t p, int w, bool be) {
    uint64_t v = 0;
    for (int k = 0; k < w; ++k) {
      v |= uint64_t{m[p + (be ? w - 1 - k : k)]} << (8 * k);
    }
    return v;
  };
  for (int w : {1, 2, 4}) {
    for (size_t p = 0; p + w <= len; ++p) {
      for (int d = 1; d <= 35; ++d) {
        for (bool be : {false, true}) {
          if (be && w == 1) continue;
          for (int sign : {1, -1}) {
            Bytes m = in;
            put(m, p, w, be, get(in, p, w, be) + static_cast<uint64_t>(sign * d));
            out.push_back(m);
          }
        }
      }
    }
  }
  auto interesting = [&](int w, const auto& values) {
    for (size_t p = 0; p + w <= len; ++p) {
      for (auto v : values) {
        for (bool be : {false, true}) {
          if (be && w == 1) continue;
          Bytes m = in;
          put(m, p, w, be, static_cast<uint64_t>(static_cast<int64_t>(v)));
          out.push_back(m);
        }
      }
    }
  };
  interesting(1, kInteresting8);
  interesting(2, kInteresting16);
  interesting(4, kInteresting32);
  return out;
}

std::vector<Bytes> Drain(DeterministicStage& s) {
  std::vector<Bytes> out;
  while (const Bytes* m = s.Next()) out.push_back(*m);
  return out;
}

TEST(Deterministic, MatchesEnumerationOracle) {
  for (const Bytes& in : {Bytes{0x00}, Bytes{0x12, 0xFE, 0x80, 0x7F},
                          Bytes{'a', 'b', 'c', 'd', 'e'}}) {
    DeterministicStage s(in);
    const auto got = Drain(s);
    const auto want = EnumerateDeterministic(in);
    ASSERT_EQ(got.size(), want.size());
    for (size_t i = 0; i < got.size(); ++i) ASSERT_EQ(got[i], want[i]) << i;
    EXPECT_EQ(DeterministicStage::CountFor(in.size()), want.size());
  }
}

TEST(Deterministic, FourByteCount) {
  // 32+31+29 bit flips, 4+3+1 byte flips, 4*70+3*140+1*140 arith,
  // 4*9+3*38+1*54 interesting.
  EXPECT_EQ(DeterministicStage::CountFor(4),
            92u + 8u + 280u + 420u + 140u + 36u + 114u + 54u);
}

TEST(Deterministic, StartsWith8LSingleBitFlips) {
  const Bytes in = {0x00, 0xFF, 0x5A};
  DeterministicStage s(in);
  for (size_t i = 0; i < 8 * in.size(); ++i) {
    const Bytes* m = s.Next();
    ASSERT_NE(m, nullptr);
    EXPECT_EQ(s.current_op().kind, MutationKind::kBitFlip);
    EXPECT_EQ(s.current_op().width, 1);
  }
  s.Next();
  EXPECT_EQ(s.current_op().width, 2);
}

TEST(Deterministic, MsbFirst) {
  DeterministicStage s(Bytes{0x00, 0x00});
  const Bytes* m = s.Next();
  ASSERT_NE(m, nullptr);
  EXPECT_EQ((*m)[0], 0x80);
  EXPECT_EQ((*m)[1], 0x00);
}

TEST(Deterministic, RestoresInput) {
  const Bytes in = ToBytes("{\"k\":12}");
  DeterministicStage s(in);
  Drain(s);
  EXPECT_EQ(s.buffer(), in);
  EXPECT_EQ(s.Next(), nullptr);
}

TEST(Deterministic, EmptyInputEmitsNothing) {
  DeterministicStage s(Bytes{});
  EXPECT_EQ(s.Next(), nullptr);
  EXPECT_EQ(DeterministicStage::CountFor(0), 0u);
}

TEST(ApplyOp, ArithIsInvertible) {
  Bytes b = {0x01, 0xFF, 0x00, 0x10};
  const Bytes orig = b;
  MutationOp op{MutationKind::kArith, 2, 1, 35, true, false};
  ApplyOp(b, op);
  EXPECT_NE(b, orig);
  op.value = -35;
  ApplyOp(b, op);
  EXPECT_EQ(b, orig);
}

std::vector<Bytes> HavocStream(const Bytes& in, uint64_t seed, size_t budget,
                               const std::vector<Bytes>& pool,
                               HavocOptions opts = {}) {
  Rng rng(seed);
  HavocStage h(in, rng, pool, budget, opts);
  std::vector<Bytes> out;
  while (const Bytes* m = h.Next()) out.push_back(*m);
  return out;
}

TEST(Havoc, ZeroBudgetIsEmpty) {
  EXPECT_TRUE(HavocStream(ToBytes("abc"), 1, 0, {}).empty());
}

TEST(Havoc, Reproducible) {
  const std::vector<Bytes> pool = {ToBytes("{\"a\":1}"), ToBytes("[1,2,3]")};
  const Bytes in = ToBytes("{\"id\":1}");
  const auto a = HavocStream(in, 99, 300, pool);
  const auto b = HavocStream(in, 99, 300, pool);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 300u);
  EXPECT_NE(a, HavocStream(in, 100, 300, pool));
}

TEST(Havoc, RespectsLengthBounds) {
  HavocOptions opts;
  opts.max_len = 64;
  const std::vector<Bytes> pool = {Bytes(60, 'x'), Bytes(3, 'y')};
  for (const Bytes& m : HavocStream(Bytes(50, 'z'), 5, 2000, pool, opts)) {
    EXPECT_GE(m.size(), 1u);
    EXPECT_LE(m.size(), 64u);
  }
}

TEST(Havoc, StackDepthWithinRange) {
  Rng rng(3);
  const Bytes in = ToBytes("hello world");
  HavocStage h(in, rng, {}, 500);
  size_t max_depth = 0;
  while (h.Next()) {
    const size_t d = h.last_stack().size();
    EXPECT_GE(d, 1u);
    EXPECT_LE(d, 64u);
    EXPECT_EQ(d & (d - 1), 0u);  // power of two
    max_depth = std::max(max_depth, d);
  }
  EXPECT_EQ(max_depth, 64u);
}

TEST(Havoc, DeleteOnSingleByteIsSkipped) {
  // Mutants of a 1-byte input never vanish; a delete drawn while the buffer
  // has one byte is marked skipped.
  const Bytes in = {0x41};
  bool saw_skipped_delete = false;
  for (uint64_t seed = 0; seed < 200 && !saw_skipped_delete; ++seed) {
    Rng rng(seed);
    HavocOptions opts;
    opts.max_stack_log2 = 0;  // one op per mutant
    HavocStage h(in, rng, {}, 50, opts);
    while (const Bytes* m = h.Next()) {
      EXPECT_FALSE(m->empty());
      const MutationOp& op = h.last_stack().front();
      if (op.kind == MutationKind::kHavocDelete) {
        EXPECT_TRUE(op.skipped);
        EXPECT_EQ(m->size(), 1u);
        saw_skipped_delete = true;
      }
    }
  }
  EXPECT_TRUE(saw_skipped_delete);
}

TEST(Havoc, SmallBlocksOnlyAtRankOne) {
  HavocOptions opts;
  opts.block_size_ranks = 1;
  opts.max_stack_log2 = 0;
  const Bytes in(100, 'q');
  Rng rng(11);
  HavocStage h(in, rng, {}, 3000, opts);
  while (h.Next()) {
    const MutationOp& op = h.last_stack().front();
    if (op.kind == MutationKind::kHavocInsert && !op.skipped) {
      EXPECT_LE(op.value, 32);
    }
  }
}

TEST(Havoc, EmptyInputEmitsNothing) {
  EXPECT_TRUE(HavocStream(Bytes{}, 1, 10, {}).empty());
}

}  // namespace
}  // namespace advfuzz
