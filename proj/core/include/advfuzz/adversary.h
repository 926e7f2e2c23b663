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

// Saliency-map attack against the surrogate, plus a one-step sign-gradient
// baseline used for footprint comparisons.
//
// The attack pushes a single target logit up. Each iteration takes the input
// gradient of that logit, zeroes every position at or beyond the seed length
// (and every position already saturated at 1.0), keeps only positive partials,
// and adds theta to the highest-scoring positions. It stops as soon as the
// target's sigmoid probability clears the success threshold; other labels are
// ignored entirely.
#ifndef ADVFUZZ_ADVERSARY_H_
#define ADVFUZZ_ADVERSARY_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "advfuzz/bytes.h"
#include "advfuzz/codec.h"
#include "advfuzz/corpus.h"
#include "advfuzz/surrogate.h"

namespace advfuzz {

struct AttackConfig {
  double theta = 0.25;
  int max_iters = 200;
  size_t n_targets = 50;
  double success_threshold = 0.9;
  size_t features_per_iter = 1;

  // Throws std::invalid_argument on out-of-range fields.
  void Validate() const;
};

struct SaliencyMap {
  std::vector<double> scores;
  size_t masked_len = 0;

  // Index of the largest score (lowest index on ties); scores.size() when all
  // scores are zero.
  size_t ArgMax() const;
  bool AllZero() const;
};

// Increase-direction saliency: scores[i] = max(gradient[i], 0) for
// i < masked_len, zero elsewhere.
SaliencyMap Saliency(std::span<const double> gradient, size_t masked_len);

enum class AttackStatus { kSuccess, kExhausted, kStalled };

struct AttackOutcome {
  AttackStatus status = AttackStatus::kStalled;
  Bytes candidate;        // same length as the seed
  int iterations = 0;
  double probability = 0;  // surrogate target probability of `candidate` state
};

AttackOutcome JsmaAttack(const SurrogateModel& model,
                         std::span<const uint8_t> seed, size_t target_label,
                         const AttackConfig& config);

// x' = clamp(x + epsilon * sign(d logit / d x)) over the full padded width.
// The candidate is the whole padded vector decoded back to bytes.
Bytes FgsmAttack(const SurrogateModel& model, std::span<const uint8_t> seed,
                 size_t target_label, double epsilon);

struct AdversarialCandidate {
  Bytes input;
  uint32_t target_edge = 0;
  uint32_t target_label = 0;
  uint64_t seed_id = 0;
  AttackStatus status = AttackStatus::kStalled;
  int iterations = 0;
};

struct AttackBatchOptions {
  // When non-empty these edges are attacked first, then the rarest edges of
  // the snapshot fill the remaining slots.
  std::span<const uint32_t> priority_targets;
  // Polled between attacks; returning true stops the batch.
  std::function<bool()> should_stop;
  // When set, receives every edge an attack was run for, kept or not.
  std::vector<uint32_t>* attempted = nullptr;
};

// For each of the config.n_targets rarest edges (one attack per label), picks
// the snapshot entry that does not yet hit the edge and has the highest
// predicted probability for it, runs the saliency attack, and returns the
// decoded candidates that differ from their seeds.
std::vector<AdversarialCandidate> AttackBatch(const SurrogateModel& model,
                                              const EdgeLabelSpace& space,
                                              const CorpusSnapshot& snapshot,
                                              const AttackConfig& config,
                                              const AttackBatchOptions& options = {});

}  // namespace advfuzz

#endif  // ADVFUZZ_ADVERSARY_H_
