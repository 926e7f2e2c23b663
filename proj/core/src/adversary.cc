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

#include "advfuzz/adversary.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace advfuzz {

void AttackConfig::Validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("theta must be in (0, 1]");
  }
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(success_threshold >= 0.5 && success_threshold < 1.0)) {
    throw std::invalid_argument("success_threshold must be in [0.5, 1)");
  }
  if (features_per_iter < 1) {
    throw std::invalid_argument("features_per_iter must be >= 1");
  }
  if (n_targets < 1) throw std::invalid_argument("n_targets must be >= 1");
}

size_t SaliencyMap::ArgMax() const {
  size_t best = scores.size();
  double best_score = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > best_score) {
      best_score = scores[i];
      best = i;
    }
  }
  return best;
}

bool SaliencyMap::AllZero() const {
  return std::all_of(scores.begin(), scores.end(),
                     [](double s) { return s == 0.0; });
}

SaliencyMap Saliency(std::span<const double> gradient, size_t masked_len) {
  if (masked_len > gradient.size()) {
    throw std::invalid_argument("masked_len exceeds gradient length");
  }
  SaliencyMap map;
  map.masked_len = masked_len;
  map.scores.assign(gradient.size(), 0.0);
  for (size_t i = 0; i < masked_len; ++i) {
    if (gradient[i] > 0.0) map.scores[i] = gradient[i];
  }
  return map;
}

AttackOutcome JsmaAttack(const SurrogateModel& model,
                         std::span<const uint8_t> seed, size_t target_label,
                         const AttackConfig& config) {
  config.Validate();
  if (target_label >= model.n_labels()) {
    throw std::out_of_range("target label " + std::to_string(target_label) +
                            " outside label space of " +
                            std::to_string(model.n_labels()));
  }
  if (seed.empty()) throw std::invalid_argument("attack seed is empty");

  EncodedInput x = EncodeInput(seed, model.input_width());
  const size_t len = seed.size();

  AttackOutcome out;
  double prob = Sigmoid(model.Logit(x.values, target_label));
  std::vector<double> best = x.values;
  double best_prob = prob;
  if (prob > config.success_threshold) {
    out.status = AttackStatus::kSuccess;
    out.candidate.assign(seed.begin(), seed.end());
    out.probability = prob;
    return out;
  }

  out.status = AttackStatus::kExhausted;
  int iter = 0;
  while (iter < config.max_iters) {
    const std::vector<double> grad = model.InputGradient(x.values, target_label);
    SaliencyMap map = Saliency(grad, len);
    for (size_t i = 0; i < len; ++i) {
      if (x.values[i] >= 1.0) map.scores[i] = 0.0;  // saturated
    }
    if (map.AllZero()) {
      out.status = AttackStatus::kStalled;
      break;
    }
    ++iter;
    for (size_t k = 0; k < config.features_per_iter; ++k) {
      const size_t i = map.ArgMax();
      if (i >= map.scores.size()) break;
      x.values[i] = std::min(1.0, x.values[i] + config.theta);
      map.scores[i] = 0.0;
    }
    prob = Sigmoid(model.Logit(x.values, target_label));
    if (prob > best_prob) {
      best_prob = prob;
      best = x.values;
    }
    if (prob > config.success_threshold) {
      out.status = AttackStatus::kSuccess;
      break;
    }
  }

  out.iterations = iter;
  if (out.status == AttackStatus::kSuccess) {
    out.candidate = DecodeInput(x.values, len);
    out.probability = prob;
  } else {
    out.candidate = DecodeInput(best, len);
    out.probability = best_prob;
  }
  return out;
}

Bytes FgsmAttack(const SurrogateModel& model, std::span<const uint8_t> seed,
                 size_t target_label, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  EncodedInput x = EncodeInput(seed, model.input_width());
  const std::vector<double> grad = model.InputGradient(x.values, target_label);
  for (size_t i = 0; i < x.values.size(); ++i) {
    const double sign = grad[i] > 0 ? 1.0 : (grad[i] < 0 ? -1.0 : 0.0);
    x.values[i] = std::clamp(x.values[i] + epsilon * sign, 0.0, 1.0);
  }
  return DecodeInput(x.values, x.values.size());
}

std::vector<AdversarialCandidate> AttackBatch(const SurrogateModel& model,
                                              const EdgeLabelSpace& space,
                                              const CorpusSnapshot& snapshot,
                                              const AttackConfig& config,
                                              const AttackBatchOptions& options) {
  config.Validate();
  std::vector<AdversarialCandidate> out;
  if (snapshot.entries.empty() || space.n_labels() == 0) return out;
  if (model.n_labels() != space.n_labels()) {
    throw std::invalid_argument("model and label space disagree on label count");
  }

  // Target list: priority edges first, then the rarest, one per label.
  std::vector<std::pair<uint32_t, uint32_t>> targets;  // (edge, label)
  std::unordered_set<uint32_t> labels_taken;
  auto consider = [&](uint32_t edge) {
    if (targets.size() >= config.n_targets) return;
    auto label = space.LabelOf(edge);
    if (!label || !labels_taken.insert(*label).second) return;
    targets.emplace_back(edge, *label);
  };
  for (uint32_t e : options.priority_targets) consider(e);
  if (targets.size() < config.n_targets) {
    // Ask for extra edges since several may collapse into one label.
    for (uint32_t e : snapshot.RarestEdges(config.n_targets * 4)) consider(e);
  }
  if (targets.empty()) return out;

  // Predicted logits for every usable entry, computed once.
  std::vector<size_t> usable;
  for (size_t i = 0; i < snapshot.entries.size(); ++i) {
    const Bytes& in = snapshot.entries[i].input;
    if (!in.empty() && in.size() <= model.input_width()) usable.push_back(i);
  }
  if (usable.empty()) return out;
  Eigen::MatrixXd x(model.input_width(), static_cast<Eigen::Index>(usable.size()));
  for (size_t k = 0; k < usable.size(); ++k) {
    const EncodedInput enc =
        EncodeInput(snapshot.entries[usable[k]].input, model.input_width());
    x.col(k) = Eigen::Map<const Eigen::VectorXd>(
        enc.values.data(), static_cast<Eigen::Index>(enc.values.size()));
  }
  const Eigen::MatrixXd logits = model.LogitsBatch(x);

  for (const auto& [edge, label] : targets) {
    if (options.should_stop && options.should_stop()) break;
    // Best seed: highest predicted logit among entries that miss the edge.
    size_t best = usable.size();
    double best_logit = -INFINITY;
    for (size_t k = 0; k < usable.size(); ++k) {
      const auto& edges = snapshot.entries[usable[k]].edges;
      if (std::binary_search(edges.begin(), edges.end(), edge)) continue;
      const double z = logits(label, static_cast<Eigen::Index>(k));
      if (z > best_logit) {
        best_logit = z;
        best = k;
      }
    }
    if (best == usable.size()) continue;
    const CorpusSnapshot::Entry& seed = snapshot.entries[usable[best]];
    if (options.attempted != nullptr) options.attempted->push_back(edge);
    AttackOutcome outcome = JsmaAttack(model, seed.input, label, config);
    if (outcome.candidate == seed.input) continue;
    AdversarialCandidate c;
    c.input = std::move(outcome.candidate);
    c.target_edge = edge;
    c.target_label = label;
    c.seed_id = seed.id;
    c.status = outcome.status;
    c.iterations = outcome.iterations;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace advfuzz
