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

// Campaign runtime: the fuzz loop, the ML component, and the glue that runs
// them side by side over a socket channel.
#ifndef ADVFUZZ_ORCHESTRATOR_H_
#define ADVFUZZ_ORCHESTRATOR_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "advfuzz/adversary.h"
#include "advfuzz/bytes.h"
#include "advfuzz/channel.h"
#include "advfuzz/corpus.h"
#include "advfuzz/harness.h"
#include "advfuzz/mutators.h"
#include "advfuzz/surrogate.h"

namespace advfuzz {

enum class Mode { kBaseline, kAdversarial };

std::string_view ModeName(Mode mode);
std::optional<Mode> ParseMode(std::string_view name);

struct CampaignConfig {
  std::string target = "goat";
  Mode mode = Mode::kBaseline;
  uint64_t budget_execs = 0;  // 0 = unlimited
  double budget_secs = 0;     // 0 = unlimited
  uint64_t seed = 1;
  std::optional<std::filesystem::path> out_dir;

  // fuzz side
  std::chrono::microseconds exec_timeout = kDefaultExecTimeout;
  size_t havoc_budget = 256;
  HavocOptions havoc;
  double stats_interval_secs = 5;

  // ML side
  AttackConfig attack;
  size_t hidden_width = kDefaultHiddenWidth;
  int epochs = 50;
  size_t batch_size = 32;
  double learning_rate = 0.01;
  size_t retrain_threshold = 100;
  size_t inline_limit = kDefaultInlineLimit;
  double ml_cpu_share = 0.15;
  // Fault injection, 0 disables. A failed component exits and closes its
  // channel; a wedged one stops reading but stays alive.
  double ml_fail_after_secs = 0;
  double ml_wedge_after_secs = 0;

  // Throws std::invalid_argument.
  void Validate() const;
  // Applies one key=value setting (keys match the long CLI flags with '-'
  // replaced by '_'). Throws std::invalid_argument on unknown keys or
  // unparsable values.
  void Set(std::string_view key, std::string_view value);
};

// Flat `key = value` file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> ReadConfigFile(
    const std::filesystem::path& path);

class FuzzLoop {
 public:
  // `ml` may be null (baseline). The target must outlive the loop.
  FuzzLoop(const FuzzTarget& target, const CampaignConfig& config,
           SocketChannel* ml = nullptr);

  CampaignStats Run();

  // Executes each candidate right away; interesting ones are queued as
  // adversarial entries. Returns how many were queued.
  size_t InjectCandidates(std::span<const Bytes> candidates,
                          std::optional<uint64_t> parent = std::nullopt);

  const Corpus& corpus() const { return corpus_; }
  const CampaignStats& stats() const { return stats_; }

 private:
  // Executes one input and files the result. True if it was queued.
  bool RunOne(const Bytes& input, std::optional<uint64_t> parent, Source source);
  void PollMl();
  void SendMl(Payload payload);
  void MaybeTimeline(bool force);
  void CheckBudget();
  void FinishStats();
  double Elapsed() const;

  const FuzzTarget& target_;
  CampaignConfig config_;
  SocketChannel* ml_;
  Executor executor_;
  Corpus corpus_;
  CampaignStats stats_;
  std::optional<std::filesystem::path> exchange_dir_;
  std::chrono::steady_clock::time_point start_;
  double next_row_at_ = 0;
  uint64_t last_row_execs_ = 0;
  double last_row_t_ = 0;
  bool done_ = false;
  uint64_t cycle_ = 0;
};

struct MlReport {
  uint64_t retrain_events = 0;
  uint64_t retrains_after_cycle_end = 0;
  uint64_t candidates_sent = 0;
  uint64_t attacks_run = 0;
  uint64_t messages_received = 0;
  double last_accuracy = 0;
  size_t input_width = 0;
  size_t n_labels = 0;
  bool failed = false;
  std::string error;
};

// Control thread plus a journal thread. The control thread re-executes every
// announced queue entry, keeps the training set, retrains when a trigger
// fires, attacks the rarest edges and sends candidates back.
class MlComponent {
 public:
  MlComponent(const FuzzTarget& target, const CampaignConfig& config,
              SocketChannel channel);
  ~MlComponent();
  MlComponent(const MlComponent&) = delete;
  MlComponent& operator=(const MlComponent&) = delete;

  void Start();
  void RequestStop() { stop_ = true; }
  MlReport Join();

 private:
  void ControlLoop();
  void Handle(const Message& msg);
  void Retrain();
  void Attack();
  void Journal(std::string_view dir, const Message& msg);
  void Throttle();
  bool Stopping();
  double Elapsed() const;

  const FuzzTarget& target_;
  CampaignConfig config_;
  SocketChannel channel_;
  Executor executor_;
  std::atomic<bool> stop_{false};
  std::thread control_;
  std::thread logger_;
  BlockingQueue<std::string> journal_;
  std::chrono::steady_clock::time_point start_;
  int64_t cpu_start_ns_ = 0;

  std::vector<Bytes> inputs_;
  std::vector<uint64_t> entry_ids_;
  std::vector<std::vector<uint32_t>> edges_;
  std::vector<uint32_t> priority_;
  std::unordered_map<uint32_t, int> attacked_;  // edge -> batches targeted
  size_t max_len_ = 0;
  bool saw_cycle_end_ = false;
  bool shutdown_ = false;
  RetrainState retrain_;
  std::optional<SurrogateModel> model_;
  EdgeLabelSpace space_;
  MlReport report_;
};

// Runs one campaign end to end and, with an out dir, writes stats.csv and
// summary.json there.
CampaignStats RunCampaign(const CampaignConfig& config);

void WriteStatsCsv(const std::filesystem::path& path,
                   std::span<const TimelineRow> rows);
std::vector<TimelineRow> ReadStatsCsv(const std::filesystem::path& path);

}  // namespace advfuzz

#endif  // ADVFUZZ_ORCHESTRATOR_H_
