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

#include "advfuzz/surrogate.h"
#include "oracles.h"
#include "test_util.h"

namespace advfuzz {
namespace {

EncodedInput Vec(std::vector<double> v) {
  EncodedInput e;
  e.original_len = v.size();
  e.values = std::move(v);
  return e;
}

TEST(Forward, ZeroModelIsHalf) {
  const SurrogateModel m = SurrogateModel::Zeros({6, 5, 5, 3});
  const ForwardResult r = m.Forward(Vec(std::vector<double>(6, 0.7)));
  for (double p : r.probs) EXPECT_EQ(p, 0.5);
}

TEST(Forward, OutputRowIsLinear) {
  SurrogateModel m = SurrogateModel::Create({8, 16, 16, 4}, 5);
  std::mt19937_64 rng(1);
  std::vector<double> x;
  ASSERT_TRUE(testing::DrawSmoothPoint(m, rng, x, 0.0));
  const double before = m.Logit(x, 2);
  const size_t last = m.num_layers() - 1;
  m.weights(last).row(2) *= 2.0;
  m.biases(last)(2) *= 2.0;
  EXPECT_NEAR(m.Logit(x, 2), 2 * before, 1e-12);
}

TEST(Forward, MatchesReference) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const SurrogateModel m = SurrogateModel::Create({12, 20, 9, 5}, t);
    std::vector<double> x(12);
    for (double& v : x) v = std::uniform_real_distribution<double>(0, 1)(rng);
    const ForwardResult r = m.Forward(Vec(x));
    const auto ref = testing::ReferenceLogits(m, x);
    for (size_t j = 0; j < ref.size(); ++j) {
      EXPECT_NEAR(r.logits[j], ref[j], 1e-6);
      EXPECT_NEAR(r.probs[j], 1 / (1 + std::exp(-ref[j])), 1e-6);
    }
    EXPECT_EQ(m.Forward(Vec(x)).logits, r.logits);  // bit-identical
  }
}

TEST(Forward, DimensionMismatchThrows) {
  const SurrogateModel m = SurrogateModel::Create({4, 3, 2}, 0);
  EXPECT_THROW(m.Forward(Vec({0.1, 0.2})), std::invalid_argument);
}

TEST(Gradient, ZeroModel) {
  const SurrogateModel m = SurrogateModel::Zeros({5, 4, 4, 2});
  for (double g : m.InputGradient(std::vector<double>(5, 0.3), 1)) {
    EXPECT_EQ(g, 0.0);
  }
}

TEST(Gradient, LinearEqualsWeightRow) {
  const SurrogateModel m = SurrogateModel::Create({7, 3}, 9);
  const auto g = m.InputGradient(std::vector<double>(7, 0.4), 1);
  for (size_t i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(g[i], m.weights(0)(1, i));
}

TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const SurrogateModel m = SurrogateModel::Create({8, 16, 16, 4}, 100 + t);
    std::vector<double> x;
    ASSERT_TRUE(testing::DrawSmoothPoint(m, rng, x, 1e-3));
    for (size_t label = 0; label < 4; ++label) {
      EXPECT_LT(testing::GradientRelError(m, x, label), 1e-4);
    }
  }
}

TEST(Gradient, BadLabelThrows) {
  const SurrogateModel m = SurrogateModel::Create({4, 2}, 0);
  EXPECT_THROW(m.InputGradient(std::vector<double>(4, 0), 2), std::out_of_range);
}

std::vector<TrainingSample> ThresholdDataset(size_t n, size_t width,
                                             uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TrainingSample> data;
  for (size_t s = 0; s < n; ++s) {
    Bytes in(width);
    for (auto& b : in) b = static_cast<uint8_t>(rng());
    TrainingSample t{EncodeInput(in, width), {}};
    for (size_t j = 0; j < width; ++j) t.labels.push_back(in[j] > 128);
    data.push_back(std::move(t));
  }
  return data;
}

TEST(Train, OverfitsSingleSample) {
  SurrogateModel m = SurrogateModel::Create({6, 16, 16, 5}, 1);
  TrainingSample s{EncodeInput(Bytes{1, 200, 3, 90, 50, 255}, 6),
                   {1, 0, 1, 1, 0}};
  TrainOptions opts;
  opts.epochs = 300;
  opts.learning_rate = 0.1;
  const TrainMetrics r = m.Train(std::span(&s, 1), opts);
  EXPECT_GE(r.bitwise_accuracy, 0.99);
}

TEST(Train, LinearLossIsMonotone) {
  SurrogateModel m = SurrogateModel::Create({4, 2}, 2);
  std::vector<TrainingSample> data;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 16; ++i) {
    Bytes in(4);
    for (auto& b : in) b = static_cast<uint8_t>(rng());
    data.push_back({EncodeInput(in, 4), {1, 0}});
  }
  std::vector<double> losses;
  TrainOptions opts;
  opts.epochs = 100;
  opts.batch_size = data.size();
  opts.learning_rate = 0.01;
  opts.on_epoch = [&](int, double loss, double) { losses.push_back(loss); };
  m.Train(data, opts);
  ASSERT_EQ(losses.size(), 100u);
  for (size_t i = 1; i < losses.size(); ++i) EXPECT_LT(losses[i], losses[i - 1]);
}

TEST(Train, Reproducible) {
  const auto data = ThresholdDataset(200, 8, 5);
  TrainOptions opts;
  opts.epochs = 5;
  opts.seed = 11;
  SurrogateModel a = SurrogateModel::Create({8, 32, 32, 8}, 3);
  SurrogateModel b = SurrogateModel::Create({8, 32, 32, 8}, 3);
  const double la = a.Train(data, opts).bce_loss;
  const double lb = b.Train(data, opts).bce_loss;
  EXPECT_NEAR(la, lb, 1e-9);
  EXPECT_TRUE(a == b);
}

TEST(Train, LearnsThresholdOracle) {
  const auto data = ThresholdDataset(1000, 8, 6);
  SurrogateModel m = SurrogateModel::Create({8, 64, 64, 8}, 4);
  TrainOptions opts;
  opts.epochs = 50;
  const TrainMetrics r = m.Train(data, opts);
  EXPECT_GE(r.bitwise_accuracy, 0.94);
  EXPECT_EQ(r.epochs_run, 50);
  EXPECT_EQ(m.train_meta().epochs_run, 50);
}

TEST(Train, AdamAlsoLearns) {
  const auto data = ThresholdDataset(1000, 8, 7);
  SurrogateModel m = SurrogateModel::Create({8, 64, 64, 8}, 4);
  TrainOptions opts;
  opts.optimizer = Optimizer::kAdam;
  opts.learning_rate = 0.001;
  opts.epochs = 20;
  EXPECT_GE(m.Train(data, opts).bitwise_accuracy, 0.94);
}

TEST(Train, DivergenceThrows) {
  SurrogateModel m = SurrogateModel::Create({4, 8, 2}, 0);
  std::vector<TrainingSample> data = {
      {EncodeInput(Bytes{255, 255, 255, 255}, 4), {1, 0}},
      {EncodeInput(Bytes{255, 0, 255, 0}, 4), {0, 1}}};
  TrainOptions opts;
  opts.learning_rate = 1e300;
  opts.epochs = 5;
  EXPECT_THROW(m.Train(data, opts), TrainingDivergedError);
}

TEST(Train, BadShapesThrow) {
  SurrogateModel m = SurrogateModel::Create({4, 2}, 0);
  EXPECT_THROW(m.Train({}, {}), std::invalid_argument);
  std::vector<TrainingSample> data = {{EncodeInput(Bytes{1}, 4), {1, 0, 1}}};
  EXPECT_THROW(m.Train(data, {}), std::invalid_argument);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  testing::TempDir dir;
  SurrogateModel m = SurrogateModel::Create({10, 7, 7, 3}, 8);
  m.train_meta().epochs_run = 17;
  m.train_meta().last_bitwise_accuracy = 0.953125;
  m.train_meta().corpus_snapshot_id = 42;
  m.Save(dir / "m.ckpt");
  const SurrogateModel back = SurrogateModel::Load(dir / "m.ckpt");
  EXPECT_TRUE(back == m);
  EXPECT_EQ(back.train_meta(), m.train_meta());
  EXPECT_EQ(back.layer_sizes(), m.layer_sizes());
}

TEST(Checkpoint, RejectsGarbage) {
  testing::TempDir dir;
  WriteFileBytes(dir / "bad", ToBytes("not a model"));
  EXPECT_THROW(SurrogateModel::Load(dir / "bad"), std::runtime_error);
  EXPECT_THROW(SurrogateModel::Load(dir / "missing"), std::runtime_error);
}

TEST(Retrain, Conditions) {
  RetrainState s;
  EXPECT_FALSE(s.ShouldRetrain());
  s.cycle_ended = true;
  EXPECT_TRUE(s.ShouldRetrain());
  s.Clear();
  s.new_cases_since_train = 99;
  EXPECT_FALSE(s.ShouldRetrain());
  s.new_cases_since_train = 100;
  EXPECT_TRUE(s.ShouldRetrain());
  s.Clear();
  s.saw_new_edge = true;
  EXPECT_TRUE(s.ShouldRetrain());
  s.Clear();
  s.saw_larger_input = true;
  EXPECT_TRUE(s.ShouldRetrain());
  s.Clear();
  EXPECT_FALSE(s.ShouldRetrain());
  EXPECT_EQ(s.new_cases_since_train, 0u);
}

TEST(Rebuild, Dimensions) {
  const SurrogateModel m = SurrogateModel::Create({64, 256, 256, 5}, 1);
  const EdgeLabelSpace space = BuildLabelSpace(
      std::vector<std::vector<uint32_t>>{{1, 2}, {2, 3}, {4}});
  const SurrogateModel same = RebuildForNewSize(m, 64, space, 2);
  EXPECT_EQ(same.layer_sizes(), (std::vector<size_t>{64, 256, 256, 4}));
  const SurrogateModel grown = RebuildForNewSize(m, 128, space, 2);
  EXPECT_EQ(grown.input_width(), 128u);
  EXPECT_TRUE(grown.AllFinite());
  EXPECT_THROW(RebuildForNewSize(m, 32, space, 2), std::invalid_argument);
}

}  // namespace
}  // namespace advfuzz
