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

#include "advfuzz/surrogate.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "advfuzz/bytes.h"

namespace advfuzz {

namespace {

constexpr char kCheckpointMagic[8] = {'A', 'D', 'V', 'F', 'Z', 'M', 'D', 'L'};
constexpr uint32_t kCheckpointVersion = 1;

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// Sum of per-cell BCE and count of correct cells for logits vs targets.
std::pair<double, size_t> ScoreBatch(const Eigen::MatrixXd& logits,
                                     const Eigen::MatrixXd& targets) {
  double loss = 0;
  size_t correct = 0;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      const double z = logits(r, c);
      const double y = targets(r, c);
      loss += Softplus(z) - y * z;
      correct += ((z > 0) == (y > 0.5));
    }
  }
  return {loss, correct};
}

template <typename T>
void WritePod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated model checkpoint");
  return v;
}

}  // namespace

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

SurrogateModel::SurrogateModel(std::vector<size_t> sizes)
    : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) {
    throw std::invalid_argument("model needs at least input and output layers");
  }
  for (size_t s : sizes_) {
    if (s == 0) throw std::invalid_argument("layer sizes must be positive");
  }
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
  }
}

SurrogateModel SurrogateModel::Zeros(std::vector<size_t> layer_sizes) {
  return SurrogateModel(std::move(layer_sizes));
}

SurrogateModel SurrogateModel::Create(std::vector<size_t> layer_sizes,
                                      uint64_t seed) {
  SurrogateModel m(std::move(layer_sizes));
  Rng rng(seed);
  for (auto& w : m.weights_) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / w.cols()));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng.engine());
  }
  return m;
}

std::vector<size_t> SurrogateModel::Architecture(size_t width, size_t n_labels,
                                                 size_t hidden) {
  return {width, hidden, hidden, n_labels};
}

void SurrogateModel::CheckInput(size_t len) const {
  if (len != input_width()) {
    throw std::invalid_argument("input length " + std::to_string(len) +
                                " != model width " +
                                std::to_string(input_width()));
  }
}

Eigen::MatrixXd SurrogateModel::LogitsBatch(const Eigen::MatrixXd& x) const {
  if (static_cast<size_t>(x.rows()) != input_width()) CheckInput(x.rows());
  Eigen::MatrixXd a = x;
  for (size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (l + 1 < weights_.size()) {
      a = z.cwiseMax(0.0);
    } else {
      return z;
    }
  }
  return a;
}

Eigen::VectorXd SurrogateModel::Logits(std::span<const double> x) const {
  CheckInput(x.size());
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
      x.data(), static_cast<Eigen::Index>(x.size()));
  for (size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    a = (l + 1 < weights_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

double SurrogateModel::Logit(std::span<const double> x, size_t label) const {
  if (label >= n_labels()) throw std::out_of_range("label out of range");
  return Logits(x)(static_cast<Eigen::Index>(label));
}

ForwardResult SurrogateModel::Forward(const EncodedInput& x) const {
  const Eigen::VectorXd z = Logits(x.values);
  ForwardResult r;
  r.logits.assign(z.data(), z.data() + z.size());
  r.probs.resize(r.logits.size());
  for (size_t j = 0; j < r.logits.size(); ++j) r.probs[j] = Sigmoid(r.logits[j]);
  return r;
}

std::vector<double> SurrogateModel::InputGradient(std::span<const double> x,
                                                  size_t label) const {
  CheckInput(x.size());
  if (label >= n_labels()) throw std::out_of_range("label out of range");
  // Forward pass keeping pre-activations of hidden layers.
  std::vector<Eigen::VectorXd> pre;
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
      x.data(), static_cast<Eigen::Index>(x.size()));
  for (size_t l = 0; l + 1 < weights_.size(); ++l) {
    pre.push_back(weights_[l] * a + biases_[l]);
    a = pre.back().cwiseMax(0.0);
  }
  Eigen::VectorXd g = weights_.back().row(static_cast<Eigen::Index>(label)).transpose();
  for (size_t l = weights_.size() - 1; l-- > 0;) {
    g = g.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
    g = weights_[l].transpose() * g;
  }
  return std::vector<double>(g.data(), g.data() + g.size());
}

TrainMetrics SurrogateModel::Evaluate(
    std::span<const TrainingSample> dataset) const {
  TrainMetrics m;
  if (dataset.empty()) return m;
  const Eigen::Index width = static_cast<Eigen::Index>(input_width());
  const Eigen::Index labels = static_cast<Eigen::Index>(n_labels());
  constexpr size_t kChunk = 256;
  double loss = 0;
  size_t correct = 0;
  for (size_t start = 0; start < dataset.size(); start += kChunk) {
    const size_t n = std::min(kChunk, dataset.size() - start);
    Eigen::MatrixXd x(width, static_cast<Eigen::Index>(n));
    Eigen::MatrixXd y(labels, static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
      const TrainingSample& s = dataset[start + i];
      CheckInput(s.input.values.size());
      x.col(i) = Eigen::Map<const Eigen::VectorXd>(s.input.values.data(), width);
      for (Eigen::Index j = 0; j < labels; ++j) y(j, i) = s.labels[j];
    }
    auto [l, c] = ScoreBatch(LogitsBatch(x), y);
    loss += l;
    correct += c;
  }
  m.bce_loss = loss / static_cast<double>(dataset.size());
  m.bitwise_accuracy =
      static_cast<double>(correct) / (static_cast<double>(dataset.size()) * labels);
  return m;
}

TrainMetrics SurrogateModel::Train(std::span<const TrainingSample> dataset,
                                   const TrainOptions& options) {
  if (dataset.empty()) throw std::invalid_argument("empty training set");
  if (options.batch_size == 0) throw std::invalid_argument("batch size is 0");
  const Eigen::Index width = static_cast<Eigen::Index>(input_width());
  const Eigen::Index labels = static_cast<Eigen::Index>(n_labels());
  for (const TrainingSample& s : dataset) {
    CheckInput(s.input.values.size());
    if (s.labels.size() != n_labels()) {
      throw std::invalid_argument("label vector size != model output size");
    }
  }

  const size_t n = dataset.size();
  Eigen::MatrixXd x_all(width, static_cast<Eigen::Index>(n));
  Eigen::MatrixXd y_all(labels, static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i) {
    x_all.col(i) = Eigen::Map<const Eigen::VectorXd>(
        dataset[i].input.values.data(), width);
    for (Eigen::Index j = 0; j < labels; ++j) y_all(j, i) = dataset[i].labels[j];
  }

  Rng rng(options.seed);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t layers = weights_.size();
  std::vector<Eigen::MatrixXd> acts(layers + 1);  // acts[0] = input batch
  std::vector<Eigen::MatrixXd> pre(layers);

  // Adam moments, allocated only when used.
  const bool adam = options.optimizer == Optimizer::kAdam;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  if (adam) {
    for (size_t l = 0; l < layers; ++l) {
      mw.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
      vw.push_back(mw.back());
      mb.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
      vb.push_back(mb.back());
    }
  }
  double beta1_t = 1.0, beta2_t = 1.0;

  TrainMetrics metrics;
  int epoch = 0;
  bool stopped = false;
  for (; epoch < options.epochs && !stopped; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (size_t start = 0; start < n; start += options.batch_size) {
      if (options.should_stop && options.should_stop()) {
        stopped = true;
        break;
      }
      const size_t b = std::min(options.batch_size, n - start);
      Eigen::MatrixXd& xb = acts[0];
      xb.resize(width, static_cast<Eigen::Index>(b));
      Eigen::MatrixXd yb(labels, static_cast<Eigen::Index>(b));
      for (size_t i = 0; i < b; ++i) {
        xb.col(i) = x_all.col(order[start + i]);
        yb.col(i) = y_all.col(order[start + i]);
      }
      for (size_t l = 0; l < layers; ++l) {
        pre[l] = weights_[l] * acts[l];
        pre[l].colwise() += biases_[l];
        acts[l + 1] = (l + 1 < layers) ? Eigen::MatrixXd(pre[l].cwiseMax(0.0))
                                       : pre[l];
      }
      const double batch_loss = ScoreBatch(pre.back(), yb).first;
      if (!std::isfinite(batch_loss)) {
        throw TrainingDivergedError(
            "non-finite BCE loss at epoch " + std::to_string(epoch) +
            " (learning rate " + std::to_string(options.learning_rate) + ")");
      }
      // d(mean over batch of summed BCE)/d logits.
      Eigen::MatrixXd delta =
          (pre.back().unaryExpr([](double z) { return Sigmoid(z); }) - yb) /
          static_cast<double>(b);
      if (adam) {
        beta1_t *= kBeta1;
        beta2_t *= kBeta2;
      }
      const double step = adam ? options.learning_rate * std::sqrt(1.0 - beta2_t) /
                                     (1.0 - beta1_t)
                               : options.learning_rate;
      for (size_t l = layers; l-- > 0;) {
        Eigen::MatrixXd grad_w = delta * acts[l].transpose();
        Eigen::VectorXd grad_b = delta.rowwise().sum();
        if (l > 0) {
          delta = (weights_[l].transpose() * delta)
                      .cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
        if (adam) {
          mw[l] = kBeta1 * mw[l] + (1.0 - kBeta1) * grad_w;
          vw[l] = kBeta2 * vw[l] + (1.0 - kBeta2) * grad_w.cwiseAbs2();
          mb[l] = kBeta1 * mb[l] + (1.0 - kBeta1) * grad_b;
          vb[l] = kBeta2 * vb[l] + (1.0 - kBeta2) * grad_b.cwiseAbs2();
          weights_[l].array() -=
              step * mw[l].array() / (vw[l].array().sqrt() + kEps);
          biases_[l].array() -= step * mb[l].array() / (vb[l].array().sqrt() + kEps);
        } else {
          weights_[l] -= step * grad_w;
          biases_[l] -= step * grad_b;
        }
      }
    }
    if (options.on_epoch && !stopped) {
      const TrainMetrics m = Evaluate(dataset);
      options.on_epoch(epoch, m.bce_loss, m.bitwise_accuracy);
    }
  }
  metrics = Evaluate(dataset);
  if (!std::isfinite(metrics.bce_loss)) {
    throw TrainingDivergedError("non-finite BCE loss after training");
  }
  metrics.epochs_run = epoch;
  meta_.epochs_run += epoch;
  meta_.last_bitwise_accuracy = metrics.bitwise_accuracy;
  meta_.last_bce_loss = metrics.bce_loss;
  return metrics;
}

bool SurrogateModel::AllFinite() const {
  for (const auto& w : weights_) if (!w.allFinite()) return false;
  for (const auto& b : biases_) if (!b.allFinite()) return false;
  return true;
}

void SurrogateModel::Save(const std::filesystem::path& path) const {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    WritePod<uint32_t>(out, kCheckpointVersion);
    WritePod<uint32_t>(out, static_cast<uint32_t>(sizes_.size()));
    for (size_t s : sizes_) WritePod<uint64_t>(out, s);
    for (size_t l = 0; l < weights_.size(); ++l) {
      // Row-major so the file layout does not depend on Eigen's storage order.
      for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
        for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) {
          WritePod<double>(out, weights_[l](r, c));
        }
      }
      for (Eigen::Index r = 0; r < biases_[l].size(); ++r) {
        WritePod<double>(out, biases_[l](r));
      }
    }
    WritePod<int32_t>(out, meta_.epochs_run);
    WritePod<double>(out, meta_.last_bitwise_accuracy);
    WritePod<double>(out, meta_.last_bce_loss);
    WritePod<uint64_t>(out, meta_.corpus_snapshot_id);
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SurrogateModel SurrogateModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path.string() + " is not a model checkpoint");
  }
  const uint32_t version = ReadPod<uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  const uint32_t count = ReadPod<uint32_t>(in);
  if (count < 2 || count > 64) throw std::runtime_error("bad layer count");
  std::vector<size_t> sizes(count);
  for (auto& s : sizes) s = static_cast<size_t>(ReadPod<uint64_t>(in));
  SurrogateModel m(std::move(sizes));
  for (size_t l = 0; l < m.weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < m.weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < m.weights_[l].cols(); ++c) {
        m.weights_[l](r, c) = ReadPod<double>(in);
      }
    }
    for (Eigen::Index r = 0; r < m.biases_[l].size(); ++r) {
      m.biases_[l](r) = ReadPod<double>(in);
    }
  }
  m.meta_.epochs_run = ReadPod<int32_t>(in);
  m.meta_.last_bitwise_accuracy = ReadPod<double>(in);
  m.meta_.last_bce_loss = ReadPod<double>(in);
  m.meta_.corpus_snapshot_id = ReadPod<uint64_t>(in);
  return m;
}

bool operator==(const SurrogateModel& a, const SurrogateModel& b) {
  if (a.sizes_ != b.sizes_ || !(a.meta_ == b.meta_)) return false;
  for (size_t l = 0; l < a.weights_.size(); ++l) {
    const auto& wa = a.weights_[l];
    const auto& wb = b.weights_[l];
    if (std::memcmp(wa.data(), wb.data(), sizeof(double) * wa.size()) != 0) {
      return false;
    }
    if (std::memcmp(a.biases_[l].data(), b.biases_[l].data(),
                    sizeof(double) * a.biases_[l].size()) != 0) {
      return false;
    }
  }
  return true;
}

SurrogateModel RebuildForNewSize(const SurrogateModel& model, size_t new_width,
                                 const EdgeLabelSpace& new_space,
                                 uint64_t seed) {
  if (new_width < model.input_width()) {
    throw std::invalid_argument("surrogate width can only grow");
  }
  std::vector<size_t> sizes = model.layer_sizes();
  sizes.front() = new_width;
  sizes.back() = std::max<size_t>(1, new_space.n_labels());
  return SurrogateModel::Create(std::move(sizes), seed);
}

}  // namespace advfuzz
