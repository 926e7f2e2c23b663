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

#include <cmath>
#include <random>

#include "advfuzz/adversary.h"
#include "advfuzz/harness.h"

namespace advfuzz {
namespace {

TEST(Saliency, Examples) {
  EXPECT_TRUE(Saliency(std::vector<double>{-1, -2, -0.5}, 3).AllZero());
  const SaliencyMap m = Saliency(std::vector<double>{3, -1, 2}, 2);
  EXPECT_EQ(m.scores, (std::vector<double>{3, 0, 0}));
  EXPECT_EQ(m.masked_len, 2u);
  EXPECT_EQ(m.ArgMax(), 0u);
  EXPECT_EQ(Saliency(std::vector<double>{0, 0}, 2).ArgMax(), 2u);
  EXPECT_THROW(Saliency(std::vector<double>{1}, 2), std::invalid_argument);
}

TEST(Saliency, ArgMaxMatchesScan) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> g(1 + rng() % 40);
    for (double& v : g) v = n(rng);
    const size_t len = rng() % (g.size() + 1);
    const SaliencyMap m = Saliency(g, len);
    size_t want = g.size();
    double best = 0;
    for (size_t i = 0; i < len; ++i) {
      if (g[i] > best) {
        best = g[i];
        want = i;
      }
    }
    EXPECT_EQ(m.ArgMax(), want);
    for (size_t i = len; i < g.size(); ++i) EXPECT_EQ(m.scores[i], 0.0);
  }
}

TEST(AttackConfig, Validate) {
  AttackConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.theta = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.success_threshold = 1.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.max_iters = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

// Single linear layer: logit_0 = 10 * x0 - 5.
SurrogateModel LinearModel(size_t width) {
  SurrogateModel m = SurrogateModel::Zeros({width, 1});
  m.weights(0)(0, 0) = 10.0;
  m.biases(0)(0) = -5.0;
  return m;
}

TEST(Jsma, ConfidentSeedNeedsNoIterations) {
  const SurrogateModel m = LinearModel(4);
  const Bytes seed = {255, 1};
  const AttackOutcome o = JsmaAttack(m, seed, 0, {});
  EXPECT_EQ(o.status, AttackStatus::kSuccess);
  EXPECT_EQ(o.iterations, 0);
  EXPECT_EQ(o.candidate, seed);
}

TEST(Jsma, ZeroModelStalls) {
  const SurrogateModel m = SurrogateModel::Zeros({4, 3, 2});
  const AttackOutcome o = JsmaAttack(m, Bytes{9, 9}, 1, {});
  EXPECT_EQ(o.status, AttackStatus::kStalled);
  EXPECT_EQ(o.iterations, 0);
  EXPECT_EQ(o.candidate, (Bytes{9, 9}));
}

TEST(Jsma, LinearWalkMatchesClosedForm) {
  const SurrogateModel m = LinearModel(4);
  for (double theta : {0.05, 0.1, 0.25, 0.5, 1.0}) {
    AttackConfig c;
    c.theta = theta;
    // Smallest k with sigmoid(10 * min(k*theta, 1) - 5) > 0.9.
    int k = 0;
    double x = 0;
    while (1 / (1 + std::exp(-(10 * x - 5))) <= 0.9) {
      ++k;
      x = std::min(1.0, x + theta);
    }
    const AttackOutcome o = JsmaAttack(m, Bytes{0, 0}, 0, c);
    EXPECT_EQ(o.status, AttackStatus::kSuccess) << theta;
    EXPECT_EQ(o.iterations, k) << theta;
    EXPECT_EQ(o.candidate[0], static_cast<uint8_t>(std::floor(x * 255 + 0.5)));
    EXPECT_EQ(o.candidate[1], 0);
  }
}

TEST(Jsma, LinearLogitIsMonotone) {
  SurrogateModel m = SurrogateModel::Zeros({6, 1});
  for (int i = 0; i < 6; ++i) m.weights(0)(0, i) = 0.3 * (i - 2);
  m.biases(0)(0) = -20;
  AttackConfig c;
  c.theta = 0.1;
  double last = -INFINITY;
  for (int iters = 1; iters <= 20; ++iters) {
    c.max_iters = iters;
    const AttackOutcome o = JsmaAttack(m, Bytes{10, 10, 10, 10, 10}, 0, c);
    EXPECT_EQ(o.iterations, iters);
    EXPECT_GT(o.probability, last);
    last = o.probability;
  }
}

TEST(Jsma, Errors) {
  const SurrogateModel m = LinearModel(4);
  EXPECT_THROW(JsmaAttack(m, Bytes{1}, 1, {}), std::out_of_range);
  EXPECT_THROW(JsmaAttack(m, Bytes{}, 0, {}), std::invalid_argument);
}

TEST(Jsma, StructuralProperties) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    const size_t width = 8 + rng() % 57;
    const size_t labels = 2 + rng() % 15;
    const SurrogateModel m = SurrogateModel::Create({width, 16, 16, labels}, t);
    Bytes seed(1 + rng() % width);
    for (auto& b : seed) b = static_cast<uint8_t>(rng());
    AttackConfig c;
    c.max_iters = 1 + static_cast<int>(rng() % 30);
    c.features_per_iter = 1 + rng() % 2;
    const AttackOutcome o = JsmaAttack(m, seed, rng() % labels, c);
    ASSERT_EQ(o.candidate.size(), seed.size());
    size_t changed = 0;
    for (size_t i = 0; i < seed.size(); ++i) changed += o.candidate[i] != seed[i];
    EXPECT_LE(changed, c.features_per_iter * o.iterations);
    EXPECT_LE(o.iterations, c.max_iters);
  }
}

TEST(Fgsm, Examples) {
  const SurrogateModel zero = SurrogateModel::Zeros({4, 2});
  EXPECT_EQ(FgsmAttack(zero, Bytes{7, 8}, 0, 0.5), (Bytes{7, 8, 0, 0}));
  SurrogateModel pos = SurrogateModel::Zeros({4, 1});
  pos.weights(0).setConstant(0.5);
  EXPECT_EQ(FgsmAttack(pos, Bytes{7}, 0, 1.0), (Bytes{255, 255, 255, 255}));
  EXPECT_THROW(FgsmAttack(pos, Bytes{7}, 0, 0.0), std::invalid_argument);
}

CorpusSnapshot Snap(std::vector<CorpusSnapshot::Entry> entries) {
  CorpusSnapshot s;
  s.edge_frequency.assign(kMapSize, 0);
  for (const auto& e : entries) {
    for (uint32_t edge : e.edges) ++s.edge_frequency[edge];
  }
  s.entries = std::move(entries);
  return s;
}

TEST(AttackBatch, EmptySnapshot) {
  const SurrogateModel m = LinearModel(4);
  const EdgeLabelSpace space =
      BuildLabelSpace(std::vector<std::vector<uint32_t>>{{5}});
  EXPECT_TRUE(AttackBatch(m, space, Snap({}), {}).empty());
}

TEST(AttackBatch, OneRareEdgeOneSeed) {
  // Edge 6 is rare and only entry 1 misses it.
  const CorpusSnapshot snap =
      Snap({{0, Bytes{200, 1}, {5, 6}, 0}, {1, Bytes{3, 4}, {5}, 0}});
  std::vector<std::vector<uint32_t>> rows;
  for (const auto& e : snap.entries) rows.push_back(e.edges);
  const EdgeLabelSpace space = BuildLabelSpace(rows);
  ASSERT_EQ(space.n_labels(), 2u);
  SurrogateModel m = SurrogateModel::Zeros({4, 2});
  m.weights(0)(*space.LabelOf(6), 0) = 10.0;
  m.biases(0)(*space.LabelOf(6)) = -5.0;
  AttackConfig c;
  c.n_targets = 1;
  std::vector<uint32_t> attempted;
  AttackBatchOptions opts;
  opts.attempted = &attempted;
  const auto out = AttackBatch(m, space, snap, c, opts);
  ASSERT_LE(out.size(), 1u);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].target_edge, 6u);
  EXPECT_EQ(out[0].seed_id, 1u);
  EXPECT_EQ(out[0].input.size(), 2u);
  EXPECT_EQ(out[0].status, AttackStatus::kSuccess);
  EXPECT_EQ(attempted, (std::vector<uint32_t>{6}));
}

TEST(AttackBatch, PriorityTargetsComeFirst) {
  const CorpusSnapshot snap = Snap({{0, Bytes{1, 1}, {5, 6}, 0},
                                    {1, Bytes{2, 2}, {5}, 0},
                                    {2, Bytes{3, 3}, {7}, 0}});
  std::vector<std::vector<uint32_t>> rows;
  for (const auto& e : snap.entries) rows.push_back(e.edges);
  const EdgeLabelSpace space = BuildLabelSpace(rows);
  const SurrogateModel m =
      SurrogateModel::Create({4, 8, space.n_labels()}, 3);
  const uint32_t prio[] = {5};
  AttackConfig c;
  c.n_targets = 2;
  std::vector<uint32_t> attempted;
  AttackBatchOptions opts;
  opts.priority_targets = prio;
  opts.attempted = &attempted;
  AttackBatch(m, space, snap, c, opts);
  ASSERT_FALSE(attempted.empty());
  EXPECT_EQ(attempted[0], 5u);
  EXPECT_LE(attempted.size(), 2u);
}

TEST(AttackBatch, StopsWhenAsked) {
  const CorpusSnapshot snap =
      Snap({{0, Bytes{1, 1}, {5, 6}, 0}, {1, Bytes{2, 2}, {5}, 0}});
  const EdgeLabelSpace space = BuildLabelSpace(
      std::vector<std::vector<uint32_t>>{{5, 6}, {5}});
  const SurrogateModel m = SurrogateModel::Create({4, 8, space.n_labels()}, 3);
  AttackBatchOptions opts;
  opts.should_stop = [] { return true; };
  EXPECT_TRUE(AttackBatch(m, space, snap, {}, opts).empty());
}

}  // namespace
}  // namespace advfuzz
