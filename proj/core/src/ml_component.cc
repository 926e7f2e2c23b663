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

#include <sys/resource.h>
#include <sys/syscall.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <time.h>

#include "advfuzz/orchestrator.h"

namespace advfuzz {
namespace {

int64_t ThreadCpuNanos() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return int64_t{ts.tv_sec} * 1'000'000'000 + ts.tv_nsec;
}

}  // namespace

MlComponent::MlComponent(const FuzzTarget& target, const CampaignConfig& config,
                         SocketChannel channel)
    : target_(target),
      config_(config),
      channel_(std::move(channel)),
      executor_(target, config.exec_timeout) {
  retrain_.threshold_new_cases = config_.retrain_threshold;
}

MlComponent::~MlComponent() {
  stop_ = true;
  journal_.Close();
  if (control_.joinable()) control_.join();
  if (logger_.joinable()) logger_.join();
}

void MlComponent::Start() {
  start_ = std::chrono::steady_clock::now();
  std::optional<std::filesystem::path> log_path;
  if (config_.out_dir) log_path = *config_.out_dir / "signals.log";
  logger_ = std::thread([this, log_path] {
    std::ofstream out;
    if (log_path) out.open(*log_path, std::ios::trunc);
    while (auto line = journal_.Pop()) {
      if (out) out << *line << '\n';
    }
  });
  control_ = std::thread([this] {
    // Lower priority than the fuzz loop on the same cores.
    setpriority(PRIO_PROCESS, static_cast<id_t>(syscall(SYS_gettid)), 10);
    cpu_start_ns_ = ThreadCpuNanos();
    try {
      ControlLoop();
    } catch (const std::exception& e) {
      report_.failed = true;
      report_.error = e.what();
      std::cerr << "advfuzz: ML component failed: " << e.what() << "\n";
    }
    // Closing our end tells the fuzz loop we are gone.
    channel_ = SocketChannel();
    journal_.Close();
  });
}

MlReport MlComponent::Join() {
  if (control_.joinable()) control_.join();
  journal_.Close();
  if (logger_.joinable()) logger_.join();
  if (model_) {
    report_.input_width = model_->input_width();
    report_.n_labels = model_->n_labels();
  }
  return report_;
}

double MlComponent::Elapsed() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
      .count();
}

void MlComponent::Throttle() {
  const double share = config_.ml_cpu_share;
  if (share >= 1.0) return;
  for (;;) {
    if (stop_) return;
    const double cpu = static_cast<double>(ThreadCpuNanos() - cpu_start_ns_) * 1e-9;
    const double allowed = share * Elapsed();
    if (cpu <= allowed) return;
    const double wait = std::min((cpu - allowed) / share, 0.1);
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
  }
}

bool MlComponent::Stopping() {
  if (stop_) return true;
  if (config_.ml_fail_after_secs > 0 && Elapsed() >= config_.ml_fail_after_secs) {
    throw std::runtime_error("injected failure");
  }
  Throttle();
  return stop_;
}

void MlComponent::Journal(std::string_view dir, const Message& msg) {
  if (!config_.out_dir) return;
  std::string line = std::to_string(NowMicros());
  line += ' ';
  line += dir;
  line += ' ';
  std::string wire = EncodeWire(msg);
  wire.pop_back();
  line += wire;
  journal_.Push(std::move(line));
}

void MlComponent::Handle(const Message& msg) {
  ++report_.messages_received;
  Journal("recv", msg);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NewInput>) {
          Bytes input = p.input.Resolve();
          const ExecutionResult& r = executor_.Execute(input);
          if (input.empty()) return;
          if (input.size() > max_len_) {
            if (max_len_ > 0) retrain_.saw_larger_input = true;
            max_len_ = input.size();
          }
          entry_ids_.push_back(p.entry_id);
          edges_.push_back(r.coverage.CoveredEdges());
          inputs_.push_back(std::move(input));
          ++retrain_.new_cases_since_train;
        } else if constexpr (std::is_same_v<T, NewEdge>) {
          retrain_.saw_new_edge = true;
        } else if constexpr (std::is_same_v<T, CycleEnd>) {
          retrain_.cycle_ended = true;
          saw_cycle_end_ = true;
        } else if constexpr (std::is_same_v<T, PriorityTarget>) {
          if (std::find(priority_.begin(), priority_.end(), p.edge) ==
              priority_.end()) {
            priority_.push_back(p.edge);
          }
        } else if constexpr (std::is_same_v<T, Shutdown>) {
          shutdown_ = true;
        }
      },
      msg.payload);
}

void MlComponent::Retrain() {
  if (inputs_.empty()) return;
  const bool after_cycle_end = retrain_.cycle_ended;
  retrain_.Clear();

  EdgeLabelSpace space = BuildLabelSpace(edges_);
  if (space.n_labels() == 0) return;
  const size_t width = PaddedWidth(max_len_);

  std::vector<TrainingSample> data;
  data.reserve(inputs_.size());
  for (size_t i = 0; i < inputs_.size(); ++i) {
    if (inputs_[i].size() > width) continue;
    data.push_back({EncodeInput(inputs_[i], width), EncodeCoverage(edges_[i], space)});
  }

  const uint64_t seed = MixSeed(config_.seed, report_.retrain_events + 1);
  const auto arch = SurrogateModel::Architecture(width, space.n_labels(),
                                                 config_.hidden_width);
  // Same dimensions and same grouping: keep training the current weights.
  SurrogateModel next = (model_ && model_->layer_sizes() == arch &&
                         space.groups == space_.groups)
                            ? *model_
                            : SurrogateModel::Create(arch, seed);

  TrainOptions opts;
  opts.epochs = config_.epochs;
  opts.batch_size = config_.batch_size;
  opts.learning_rate = config_.learning_rate;
  opts.seed = seed;
  opts.should_stop = [this] { return Stopping(); };
  TrainMetrics m;
  try {
    m = next.Train(data, opts);
  } catch (const TrainingDivergedError& e) {
    std::cerr << "advfuzz: surrogate training diverged, keeping old model: "
              << e.what() << "\n";
    return;
  }
  next.train_meta().corpus_snapshot_id = inputs_.size();

  model_ = std::move(next);
  space_ = std::move(space);
  ++report_.retrain_events;
  if (after_cycle_end) ++report_.retrains_after_cycle_end;
  report_.last_accuracy = m.bitwise_accuracy;
  if (config_.out_dir) model_->Save(*config_.out_dir / "model.ckpt");
}

void MlComponent::Attack() {
  if (!model_ || inputs_.empty()) return;
  CorpusSnapshot snap;
  snap.snapshot_id = inputs_.size();
  snap.edge_frequency.assign(kMapSize, 0);
  for (size_t i = 0; i < inputs_.size(); ++i) {
    snap.entries.push_back({entry_ids_[i], inputs_[i], edges_[i], 0});
    for (uint32_t e : edges_[i]) ++snap.edge_frequency[e];
  }

  // Many edges tie on frequency; prefer the ones attacked least so far so
  // successive batches cover the whole rare set. Announced priority targets
  // that were never attacked go first.
  std::vector<uint32_t> order;
  for (uint32_t e : priority_) {
    if (attacked_[e] == 0) order.push_back(e);
  }
  std::vector<uint32_t> rare = snap.RarestEdges(config_.attack.n_targets * 8);
  std::stable_sort(rare.begin(), rare.end(), [&](uint32_t a, uint32_t b) {
    return attacked_[a] < attacked_[b];
  });
  order.insert(order.end(), rare.begin(), rare.end());

  AttackBatchOptions opts;
  opts.priority_targets = order;
  opts.should_stop = [this] { return Stopping(); };
  std::vector<uint32_t> attempted;
  opts.attempted = &attempted;
  auto candidates = AttackBatch(*model_, space_, snap, config_.attack, opts);
  priority_.clear();
  report_.attacks_run += candidates.size();

  const std::filesystem::path exchange =
      config_.out_dir ? *config_.out_dir / "exchange" : std::filesystem::path();
  for (uint32_t e : attempted) ++attacked_[e];
  for (auto& c : candidates) {
    const std::string stem = "cand_" + std::to_string(report_.candidates_sent);
    Candidate msg{MakeBlob(std::move(c.input), config_.inline_limit,
                           config_.out_dir ? &exchange : nullptr, stem),
                  c.target_edge, c.seed_id};
    const uint64_t seq = channel_.Send(msg);
    Journal("send", Message{seq, NowMicros(), std::move(msg)});
    ++report_.candidates_sent;
  }
}

void MlComponent::ControlLoop() {
  using std::chrono::milliseconds;
  while (!stop_ && !shutdown_) {
    if (config_.ml_wedge_after_secs > 0 && Elapsed() >= config_.ml_wedge_after_secs) {
      // Alive but deaf: stop reading until told to quit.
      while (!stop_) std::this_thread::sleep_for(milliseconds(10));
      return;
    }
    if (Stopping()) break;

    std::optional<Message> msg;
    try {
      msg = channel_.RecvFor(milliseconds(20));
    } catch (const ChannelClosedError&) {
      return;
    }
    // Drain what is already there before deciding to retrain.
    while (msg) {
      Handle(*msg);
      if (shutdown_) break;
      try {
        msg = channel_.TryRecv();
      } catch (const ChannelClosedError&) {
        shutdown_ = true;
        msg.reset();
      }
      if (Stopping()) break;
    }
    if (shutdown_ || stop_) break;
    if (retrain_.ShouldRetrain() && !inputs_.empty()) {
      Retrain();
      if (!stop_) Attack();
    }
  }

  // Leave a checkpoint behind even for very short campaigns.
  if (!model_ && !inputs_.empty() && config_.out_dir) {
    stop_ = false;
    const double saved = config_.ml_cpu_share;
    config_.ml_cpu_share = 1.0;
    Retrain();
    config_.ml_cpu_share = saved;
  }
}

}  // namespace advfuzz
