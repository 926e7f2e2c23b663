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

#include "advfuzz/codec.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace advfuzz {

InputTooWideError::InputTooWideError(size_t len, size_t width)
    : std::length_error("input of " + std::to_string(len) +
                        " bytes exceeds model width " + std::to_string(width)),
      len_(len),
      width_(width) {}

EncodedInput EncodeInput(std::span<const uint8_t> input, size_t width) {
  if (input.size() > width) throw InputTooWideError(input.size(), width);
  EncodedInput enc;
  enc.values.assign(width, 0.0);
  enc.original_len = input.size();
  for (size_t i = 0; i < input.size(); ++i) enc.values[i] = input[i] / 255.0;
  return enc;
}

Bytes DecodeInput(std::span<const double> values, size_t original_len) {
  const size_t n = std::min(original_len, values.size());
  Bytes out(n);
  for (size_t i = 0; i < n; ++i) {
    double v = values[i];
    if (!(v > 0.0)) v = 0.0;  // also maps NaN to 0
    if (v > 1.0) v = 1.0;
    out[i] = static_cast<uint8_t>(std::floor(v * 255.0 + 0.5));
  }
  return out;
}

std::optional<uint32_t> EdgeLabelSpace::LabelOf(uint32_t edge) const {
  auto it = edge_to_label.find(edge);
  if (it == edge_to_label.end()) return std::nullopt;
  return it->second;
}

EdgeLabelSpace BuildLabelSpace(std::span<const std::vector<uint32_t>> corpus) {
  if (corpus.empty()) {
    throw std::invalid_argument("label space needs at least one corpus entry");
  }
  // Activation vector of each edge = ascending list of entry indices.
  std::map<uint32_t, std::vector<uint32_t>> activations;
  for (size_t i = 0; i < corpus.size(); ++i) {
    std::vector<uint32_t> edges = corpus[i];
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (uint32_t e : edges) activations[e].push_back(static_cast<uint32_t>(i));
  }
  // std::map iterates edges ascending, so each group's first member is its
  // smallest edge and groups come out ordered by it.
  std::map<std::vector<uint32_t>, uint32_t> group_of;
  EdgeLabelSpace space;
  for (const auto& [edge, act] : activations) {
    auto [it, inserted] =
        group_of.emplace(act, static_cast<uint32_t>(space.groups.size()));
    if (inserted) space.groups.emplace_back();
    space.groups[it->second].push_back(edge);
    space.edge_to_label.emplace(edge, it->second);
  }
  return space;
}

std::vector<uint8_t> EncodeCoverage(std::span<const uint32_t> edges,
                                    const EdgeLabelSpace& space) {
  std::vector<uint8_t> bits(space.n_labels(), 0);
  for (uint32_t e : edges) {
    if (auto label = space.LabelOf(e)) bits[*label] = 1;
  }
  return bits;
}

std::vector<uint8_t> EncodeCoverage(const CoverageMap& cov,
                                    const EdgeLabelSpace& space) {
  return EncodeCoverage(cov.CoveredEdges(), space);
}

size_t PaddedWidth(size_t len) {
  size_t w = 16;
  while (w < len) w = w < 64 ? w + 16 : w * 2;
  return std::min(w, std::max(len, size_t{4096}));
}

}  // namespace advfuzz
