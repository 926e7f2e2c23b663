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

// Dense rectifier network that approximates which edges an input covers.
//
// Layout is [input width, hidden..., n_labels]; hidden layers use max(0, x),
// the output layer is linear (logits) with an independent sigmoid per label.
// Training minimizes binary cross-entropy summed over labels and averaged over
// samples, with plain mini-batch gradient descent.
#ifndef ADVFUZZ_SURROGATE_H_
#define ADVFUZZ_SURROGATE_H_

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "advfuzz/codec.h"

namespace advfuzz {

inline constexpr size_t kDefaultHiddenWidth = 256;

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainingSample {
  EncodedInput input;
  std::vector<uint8_t> labels;  // 0/1 per label
};

enum class Optimizer { kSgd, kAdam };

struct TrainOptions {
  Optimizer optimizer = Optimizer::kSgd;
  int epochs = 50;
  size_t batch_size = 32;
  double learning_rate = 0.01;
  uint64_t seed = 0;
  // Called after every epoch with full-dataset metrics. Setting it costs one
  // extra forward pass per epoch.
  std::function<void(int epoch, double bce_loss, double bitwise_accuracy)>
      on_epoch;
  // Polled between batches; returning true ends training early.
  std::function<bool()> should_stop;
};

struct TrainMetrics {
  double bce_loss = 0;
  double bitwise_accuracy = 0;
  int epochs_run = 0;
};

struct TrainMeta {
  int epochs_run = 0;
  double last_bitwise_accuracy = 0;
  double last_bce_loss = 0;
  uint64_t corpus_snapshot_id = 0;

  friend bool operator==(const TrainMeta&, const TrainMeta&) = default;
};

struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> probs;
};

double Sigmoid(double z);

class SurrogateModel {
 public:
  // He-scaled normal weights, zero biases.
  static SurrogateModel Create(std::vector<size_t> layer_sizes, uint64_t seed);
  static SurrogateModel Zeros(std::vector<size_t> layer_sizes);
  static std::vector<size_t> Architecture(size_t width, size_t n_labels,
                                          size_t hidden = kDefaultHiddenWidth);

  const std::vector<size_t>& layer_sizes() const { return sizes_; }
  size_t input_width() const { return sizes_.front(); }
  size_t n_labels() const { return sizes_.back(); }
  size_t num_layers() const { return weights_.size(); }

  Eigen::MatrixXd& weights(size_t layer) { return weights_.at(layer); }
  const Eigen::MatrixXd& weights(size_t layer) const { return weights_.at(layer); }
  Eigen::VectorXd& biases(size_t layer) { return biases_.at(layer); }
  const Eigen::VectorXd& biases(size_t layer) const { return biases_.at(layer); }

  TrainMeta& train_meta() { return meta_; }
  const TrainMeta& train_meta() const { return meta_; }

  // Throws std::invalid_argument when the input length != input_width().
  ForwardResult Forward(const EncodedInput& x) const;
  Eigen::VectorXd Logits(std::span<const double> x) const;
  double Logit(std::span<const double> x, size_t label) const;
  // Column-per-sample batch; returns n_labels x batch logits.
  Eigen::MatrixXd LogitsBatch(const Eigen::MatrixXd& x) const;

  // d logit[label] / d x, exact reverse mode. At a rectifier kink the
  // derivative of max(0, z) is taken as 0.
  std::vector<double> InputGradient(std::span<const double> x,
                                    size_t label) const;
  std::vector<double> InputGradient(const EncodedInput& x, size_t label) const {
    return InputGradient(x.values, label);
  }

  TrainMetrics Train(std::span<const TrainingSample> dataset,
                     const TrainOptions& options);
  TrainMetrics Evaluate(std::span<const TrainingSample> dataset) const;

  bool AllFinite() const;

  // Versioned binary checkpoint; Load(Save(m)) is bit-identical to m.
  void Save(const std::filesystem::path& path) const;
  static SurrogateModel Load(const std::filesystem::path& path);

  friend bool operator==(const SurrogateModel& a, const SurrogateModel& b);

 private:
  explicit SurrogateModel(std::vector<size_t> sizes);
  void CheckInput(size_t len) const;

  std::vector<size_t> sizes_;
  std::vector<Eigen::MatrixXd> weights_;  // out x in
  std::vector<Eigen::VectorXd> biases_;
  TrainMeta meta_;
};

// Fresh model for a grown input width and a new label space. Hidden sizes are
// kept; no weights carry over.
SurrogateModel RebuildForNewSize(const SurrogateModel& model, size_t new_width,
                                 const EdgeLabelSpace& new_space, uint64_t seed);

// Retraining triggers: enough new cases, a new edge, a larger input, or the
// end of a fuzzing cycle.
struct RetrainState {
  size_t new_cases_since_train = 0;
  bool saw_new_edge = false;
  bool saw_larger_input = false;
  bool cycle_ended = false;
  size_t threshold_new_cases = 100;

  bool ShouldRetrain() const {
    return new_cases_since_train >= threshold_new_cases || saw_new_edge ||
           saw_larger_input || cycle_ended;
  }
  void Clear() {
    new_cases_since_train = 0;
    saw_new_edge = saw_larger_input = cycle_ended = false;
  }
};

}  // namespace advfuzz

#endif  // ADVFUZZ_SURROGATE_H_
