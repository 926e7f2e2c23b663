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

#include <algorithm>
#include <iostream>

#include "advfuzz/orchestrator.h"

namespace advfuzz {
namespace {

constexpr uint64_t kClockCheckEvery = 64;

}  // namespace

FuzzLoop::FuzzLoop(const FuzzTarget& target, const CampaignConfig& config,
                   SocketChannel* ml)
    : target_(target),
      config_(config),
      ml_(ml),
      executor_(target, config.exec_timeout),
      corpus_(Corpus::Options{config.out_dir}),
      start_(std::chrono::steady_clock::now()) {
  if (config_.out_dir) exchange_dir_ = *config_.out_dir / "exchange";
}

double FuzzLoop::Elapsed() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
      .count();
}

void FuzzLoop::SendMl(Payload payload) {
  if (ml_ == nullptr) return;
  try {
    ml_->Send(std::move(payload));
  } catch (const ChannelClosedError&) {
    std::cerr << "advfuzz: ML component went away, continuing without it\n";
    stats_.ml_degraded = true;
    ml_ = nullptr;
  }
}

void FuzzLoop::CheckBudget() {
  if (config_.budget_execs > 0 && stats_.execs_total >= config_.budget_execs) {
    done_ = true;
  }
  if (stats_.execs_total % kClockCheckEvery == 0) {
    const double t = Elapsed();
    if (config_.budget_secs > 0 && t >= config_.budget_secs) done_ = true;
    if (t >= next_row_at_) MaybeTimeline(false);
  }
}

void FuzzLoop::MaybeTimeline(bool force) {
  const double t = Elapsed();
  if (!force && t < next_row_at_) return;
  if (force && !stats_.timeline.empty() &&
      stats_.timeline.back().execs == stats_.execs_total) {
    return;  // nothing happened since the last row
  }
  TimelineRow row;
  row.t = t;
  row.execs = stats_.execs_total;
  const double dt = t - last_row_t_;
  row.execs_per_sec =
      dt > 0 ? static_cast<double>(row.execs - last_row_execs_) / dt : 0.0;
  row.paths = corpus_.size();
  row.crashes = corpus_.unique_crashes();
  row.edges = corpus_.global().edges_seen();
  row.max_depth = corpus_.max_depth();
  stats_.timeline.push_back(row);
  last_row_t_ = t;
  last_row_execs_ = row.execs;
  while (next_row_at_ <= t) next_row_at_ += config_.stats_interval_secs;
}

bool FuzzLoop::RunOne(const Bytes& input, std::optional<uint64_t> parent,
                      Source source) {
  const ExecutionResult& r = executor_.Execute(input);
  ++stats_.execs_total;
  bool queued = false;
  switch (r.outcome.kind) {
    case OutcomeKind::kCrash:
      ++stats_.total_crashes;
      corpus_.RecordCrash(input, r.outcome.bug_id, r.coverage);
      break;
    case OutcomeKind::kTimeout:
      ++stats_.timeouts;
      break;
    case OutcomeKind::kOk:
      if (source != Source::kSeed && !corpus_.IsInteresting(r.coverage)) break;
      {
        const auto at = std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::steady_clock::now() - start_);
        auto added = corpus_.AddEntry(input, parent, source, r, at);
        if (!added) break;
        queued = true;
        if (ml_ != nullptr) {
          const QueueEntry& e = *added->entry;
          Blob blob;
          if (config_.out_dir) {
            blob.file = corpus_.QueuePath(e).string();
          } else {
            blob.data = e.input;
          }
          const std::vector<uint32_t> new_edges = std::move(added->new_edges);
          SendMl(NewInput{e.id, std::move(blob)});
          for (uint32_t edge : new_edges) SendMl(NewEdge{edge});
        }
      }
      break;
  }
  CheckBudget();
  return queued;
}

size_t FuzzLoop::InjectCandidates(std::span<const Bytes> candidates,
                                  std::optional<uint64_t> parent) {
  size_t accepted = 0;
  for (const Bytes& c : candidates) {
    if (done_) break;
    std::optional<uint64_t> p = parent;
    if (p && *p >= corpus_.size()) p.reset();
    ++stats_.candidates_received;
    if (RunOne(c, p, Source::kAdversarial)) ++accepted;
  }
  stats_.candidates_accepted += accepted;
  return accepted;
}

void FuzzLoop::PollMl() {
  while (ml_ != nullptr && !done_) {
    std::optional<Message> msg;
    try {
      msg = ml_->TryRecv();
    } catch (const ChannelClosedError&) {
      std::cerr << "advfuzz: ML component went away, continuing without it\n";
      stats_.ml_degraded = true;
      ml_ = nullptr;
      return;
    }
    if (!msg) return;
    const auto* cand = std::get_if<Candidate>(&msg->payload);
    if (cand == nullptr) continue;
    Bytes bytes;
    try {
      bytes = cand->input.Resolve();
    } catch (const std::exception& e) {
      std::cerr << "advfuzz: dropping unreadable candidate: " << e.what() << "\n";
      continue;
    }
    if (bytes.empty()) continue;
    const Bytes one[] = {std::move(bytes)};
    InjectCandidates(one, cand->seed_id);
  }
}

CampaignStats FuzzLoop::Run() {
  start_ = std::chrono::steady_clock::now();
  next_row_at_ = config_.stats_interval_secs;
  MaybeTimeline(true);  // t = 0 row

  for (const Bytes& s : target_.seeds()) {
    if (done_) break;
    RunOne(s, std::nullopt, Source::kSeed);
  }
  if (corpus_.size() == 0 && !done_) {
    throw std::runtime_error("no seed of target '" + std::string(target_.name()) +
                             "' ran cleanly");
  }

  std::vector<bool> det_done;
  while (!done_) {
    for (size_t idx = 0; idx < corpus_.size() && !done_; ++idx) {
      PollMl();
      if (done_) break;
      if (det_done.size() < corpus_.size()) det_done.resize(corpus_.size(), false);
      const Bytes input = corpus_.entry(idx).input;

      if (!det_done[idx]) {
        det_done[idx] = true;
        DeterministicStage det(input);
        while (!done_) {
          const Bytes* m = det.Next();
          if (m == nullptr) break;
          RunOne(*m, idx, Source::kDeterministic);
        }
      }
      if (done_) break;

      Rng rng(MixSeed(config_.seed, Fnv1a64(input) ^ cycle_));
      const std::vector<Bytes> pool = corpus_.inputs();
      HavocOptions hopts = config_.havoc;
      // Small blocks only for the first ten minutes, then one more size class
      // per completed cycle.
      const int ranks = Elapsed() < 600.0 ? 1 : static_cast<int>(std::min<uint64_t>(cycle_ + 1, 3));
      hopts.block_size_ranks = std::min(hopts.block_size_ranks, ranks);
      HavocStage havoc(input, rng, pool, config_.havoc_budget, hopts);
      while (!done_) {
        const Bytes* m = havoc.Next();
        if (m == nullptr) break;
        RunOne(*m, idx, Source::kHavoc);
      }
    }
    if (done_) break;
    ++cycle_;
    ++stats_.cycles_done;
    if (ml_ != nullptr) {
      for (uint32_t e : corpus_.RarestEdges(config_.attack.n_targets)) {
        SendMl(PriorityTarget{e});
      }
      SendMl(CycleEnd{cycle_});
    }
  }

  FinishStats();
  return stats_;
}

void FuzzLoop::FinishStats() {
  MaybeTimeline(true);
  stats_.elapsed_secs = Elapsed();
  stats_.execs_per_sec = stats_.elapsed_secs > 0
                             ? static_cast<double>(stats_.execs_total) /
                                   stats_.elapsed_secs
                             : 0.0;
  stats_.paths_found = corpus_.size();
  stats_.unique_crashes = corpus_.unique_crashes();
  stats_.max_depth = corpus_.max_depth();
  stats_.edges_covered = corpus_.global().edges_seen();
}

}  // namespace advfuzz
