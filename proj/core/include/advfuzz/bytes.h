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

// Byte-buffer helpers shared by every module: hashing, base64, file I/O and
// the seedable random source used by mutators and training.
#ifndef ADVFUZZ_BYTES_H_
#define ADVFUZZ_BYTES_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace advfuzz {

using Bytes = std::vector<uint8_t>;

inline Bytes ToBytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string ToString(std::span<const uint8_t> b) {
  return std::string(b.begin(), b.end());
}

// 64-bit FNV-1a. Stable across runs and platforms, used for on-disk names.
uint64_t Fnv1a64(std::span<const uint8_t> data,
                 uint64_t basis = 0xcbf29ce484222325ULL);

std::string Base64Encode(std::span<const uint8_t> data);
// Returns nullopt on malformed input.
std::optional<Bytes> Base64Decode(std::string_view text);

// Lower-case fixed-width hex of a 64-bit value.
std::string Hex64(uint64_t v);

Bytes ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> data);

// Mixes two 64-bit values into a well-distributed seed (splitmix64 finalizer).
uint64_t MixSeed(uint64_t a, uint64_t b);

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }
  // Uniform in [0, n). n must be > 0.
  uint64_t Below(uint64_t n) { return engine_() % n; }
  // Uniform in [0, 1).
  double Uniform() { return (engine_() >> 11) * 0x1.0p-53; }
  bool Coin() { return engine_() & 1; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace advfuzz

#endif  // ADVFUZZ_BYTES_H_
