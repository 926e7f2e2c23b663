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

// Fixed-width encodings between raw inputs / coverage and surrogate vectors.
#ifndef ADVFUZZ_CODEC_H_
#define ADVFUZZ_CODEC_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "advfuzz/bytes.h"
#include "advfuzz/harness.h"

namespace advfuzz {

// Thrown when an input no longer fits the model; the surrogate has to be
// rebuilt at a larger width.
class InputTooWideError : public std::length_error {
 public:
  InputTooWideError(size_t len, size_t width);
  size_t length() const { return len_; }
  size_t width() const { return width_; }

 private:
  size_t len_;
  size_t width_;
};

struct EncodedInput {
  std::vector<double> values;  // byte / 255, zero-padded to the model width
  size_t original_len = 0;
};

// Model width for inputs up to `len` bytes: multiples of 16 up to 64, then
// doubling, so the network is rebuilt only a logarithmic number of times.
size_t PaddedWidth(size_t len);

EncodedInput EncodeInput(std::span<const uint8_t> input, size_t width);

// byte[i] = round-half-up(clamp(values[i], 0, 1) * 255) for i < original_len.
Bytes DecodeInput(std::span<const double> values, size_t original_len);

// Output label space: edges that were always co-activated over the training
// corpus share one label. Groups are ordered by their smallest edge id.
struct EdgeLabelSpace {
  std::vector<std::vector<uint32_t>> groups;
  std::unordered_map<uint32_t, uint32_t> edge_to_label;

  size_t n_labels() const { return groups.size(); }
  std::optional<uint32_t> LabelOf(uint32_t edge) const;
};

// `corpus` holds, per entry, its covered edge ids (any order, duplicates ok).
// Throws std::invalid_argument on an empty corpus.
EdgeLabelSpace BuildLabelSpace(std::span<const std::vector<uint32_t>> corpus);

// Multi-hot label vector: label j is 1 iff some edge of group j was hit.
std::vector<uint8_t> EncodeCoverage(const CoverageMap& cov,
                                    const EdgeLabelSpace& space);
std::vector<uint8_t> EncodeCoverage(std::span<const uint32_t> edges,
                                    const EdgeLabelSpace& space);

}  // namespace advfuzz

#endif  // ADVFUZZ_CODEC_H_
