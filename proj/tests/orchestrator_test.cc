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

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "advfuzz/channel.h"
#include "advfuzz/message.h"
#include "advfuzz/orchestrator.h"
#include "test_util.h"

namespace advfuzz {
namespace {

using namespace std::chrono_literals;

TEST(Wire, RoundTripsEveryKind) {
  const std::vector<Payload> payloads = {
      NewInput{3, Blob{ToBytes("a|b,c\n\x01"), ""}},
      NewInput{4, Blob{{}, "/tmp/x,y/queue/id_4"}},
      NewEdge{65535},
      CycleEnd{12},
      PriorityTarget{7},
      Candidate{Blob{Bytes{0, 255, 10}, ""}, 99, 5},
      Candidate{Blob{{}, "out/exchange/cand_1"}, 1, 0},
      Shutdown{}};
  uint64_t seq = 1;
  for (const Payload& p : payloads) {
    const Message m{seq++, 1700000000123456, p};
    const std::string wire = EncodeWire(m);
    ASSERT_EQ(wire.back(), '\n');
    EXPECT_EQ(std::count(wire.begin(), wire.end(), '\n'), 1);
    EXPECT_EQ(DecodeWire(wire), m);
  }
}

TEST(Wire, RejectsMalformed) {
  for (const char* bad : {"", "1|", "x|NEW_EDGE|1,2", "1|BOGUS|1",
                          "1|NEW_EDGE|", "1|NEW_EDGE|1,notanumber",
                          "1|CANDIDATE|1,2,3,inline,!!!"}) {
    EXPECT_THROW(DecodeWire(bad), WireFormatError) << bad;
  }
}

TEST(Wire, LargeBlobsGoToFiles) {
  testing::TempDir dir;
  const std::filesystem::path ex = dir.path();
  const Blob small = MakeBlob(Bytes(10, 1), 16, &ex, "s");
  EXPECT_FALSE(small.is_file());
  const Blob big = MakeBlob(Bytes(17, 2), 16, &ex, "b");
  ASSERT_TRUE(big.is_file());
  EXPECT_EQ(big.Resolve(), Bytes(17, 2));
  EXPECT_FALSE(MakeBlob(Bytes(17, 2), 16, nullptr, "b").is_file());
}

TEST(Channel, DeliversInOrder) {
  auto [a, b] = SocketChannel::Pair();
  EXPECT_EQ(a.Send(NewEdge{1}), 1u);
  EXPECT_EQ(a.Send(NewEdge{2}), 2u);
  const Message first = b.Recv();
  const Message second = b.Recv();
  EXPECT_EQ(std::get<NewEdge>(first.payload).edge, 1u);
  EXPECT_EQ(std::get<NewEdge>(second.payload).edge, 2u);
  EXPECT_EQ(first.seq, 1u);
  EXPECT_EQ(second.seq, 2u);
  EXPECT_FALSE(b.TryRecv().has_value());
  EXPECT_FALSE(b.RecvFor(10ms).has_value());
}

TEST(Channel, ClosedIsAnErrorNotAHang) {
  auto [a, b] = SocketChannel::Pair();
  a.Send(CycleEnd{1});
  a.Close();
  EXPECT_EQ(std::get<CycleEnd>(b.Recv().payload).cycle, 1u);
  EXPECT_THROW(b.Recv(), ChannelClosedError);
  EXPECT_THROW(b.TryRecv(), ChannelClosedError);
}

TEST(Channel, OutboxAbsorbsBursts) {
  auto [a, b] = SocketChannel::Pair();
  const Bytes big(3000, 'z');
  for (int i = 0; i < 2000; ++i) a.Send(Candidate{Blob{big, ""}, 1, 0});
  EXPECT_GT(a.outbox_bytes(), 0u);  // kernel buffer is far smaller than 8 MB
  int got = 0;
  while (got < 2000) {
    a.Flush();
    if (auto m = b.RecvFor(100ms)) {
      EXPECT_EQ(m->seq, static_cast<uint64_t>(++got));
    }
  }
  EXPECT_TRUE(a.Flush());
}

TEST(Channel, TwoSenderStress) {
  testing::TempDir dir;
  UnixListener listener(dir / "sock");
  constexpr int kPerSender = 5000;
  auto sender = [&](uint32_t tag) {
    SocketChannel c = SocketChannel::Connect(listener.path());
    for (int i = 0; i < kPerSender; ++i) c.Send(NewEdge{tag * 100000 + i});
    c.FlushFor(10s);
    c.Close();
  };
  std::thread t1(sender, 1);
  std::thread t2(sender, 2);
  SocketChannel r1 = listener.Accept();
  SocketChannel r2 = listener.Accept();
  ChannelMux mux;
  mux.Add(&r1);
  mux.Add(&r2);
  std::map<size_t, std::vector<Message>> by_channel;
  try {
    for (;;) {
      if (auto m = mux.RecvFor(1s)) by_channel[m->first].push_back(m->second);
    }
  } catch (const ChannelClosedError&) {
  }
  t1.join();
  t2.join();
  ASSERT_EQ(by_channel.size(), 2u);
  std::set<uint32_t> tags;
  for (const auto& [idx, msgs] : by_channel) {
    ASSERT_EQ(msgs.size(), static_cast<size_t>(kPerSender));
    const uint32_t tag = std::get<NewEdge>(msgs[0].payload).edge / 100000;
    tags.insert(tag);
    for (int i = 0; i < kPerSender; ++i) {
      EXPECT_EQ(msgs[i].seq, static_cast<uint64_t>(i + 1));
      EXPECT_EQ(std::get<NewEdge>(msgs[i].payload).edge, tag * 100000 + i);
    }
  }
  EXPECT_EQ(tags, (std::set<uint32_t>{1, 2}));
}

TEST(BlockingQueue, DrainsThenEnds) {
  BlockingQueue<int> q;
  std::thread producer([&] {
    for (int i = 0; i < 1000; ++i) q.Push(i);
    q.Close();
  });
  int expect = 0;
  while (auto v = q.Pop()) EXPECT_EQ(*v, expect++);
  producer.join();
  EXPECT_EQ(expect, 1000);
}

TEST(Config, SetAndValidate) {
  CampaignConfig c;
  EXPECT_THROW(c.Validate(), std::invalid_argument);  // no budget
  c.Set("budget_execs", "1000");
  c.Set("mode", "adversarial");
  c.Set("theta", "0.5");
  c.Set("n_targets", "7");
  EXPECT_NO_THROW(c.Validate());
  EXPECT_EQ(c.mode, Mode::kAdversarial);
  EXPECT_EQ(c.attack.theta, 0.5);
  EXPECT_EQ(c.attack.n_targets, 7u);
  EXPECT_THROW(c.Set("no_such_key", "1"), std::invalid_argument);
  EXPECT_THROW(c.Set("seed", "abc"), std::invalid_argument);
  EXPECT_THROW(c.Set("mode", "turbo"), std::invalid_argument);
}

TEST(Config, ReadsFlatFile) {
  testing::TempDir dir;
  std::ofstream(dir / "c.cfg") << "# comment\nseed = 9\n\n  mode=baseline  # trailing\n";
  const auto kv = ReadConfigFile(dir / "c.cfg");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"seed", "9"}));
  EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"mode", "baseline"}));
}

TEST(StatsCsv, RoundTrip) {
  testing::TempDir dir;
  const std::vector<TimelineRow> rows = {{0, 0, 0, 5, 0, 40, 0},
                                         {1.5, 1000, 666.5, 9, 2, 61, 3}};
  WriteStatsCsv(dir / "s.csv", rows);
  const auto back = ReadStatsCsv(dir / "s.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].execs, 1000u);
  EXPECT_EQ(back[1].crashes, 2u);
  EXPECT_EQ(back[1].max_depth, 3);
  EXPECT_DOUBLE_EQ(back[1].t, 1.5);
}

CampaignConfig Budgeted(uint64_t execs) {
  CampaignConfig c;
  c.budget_execs = execs;
  c.seed = 7;
  return c;
}

TEST(Campaign, BaselineWritesNoModel) {
  testing::TempDir dir;
  CampaignConfig c = Budgeted(100000);
  c.out_dir = dir.path();
  const CampaignStats s = RunCampaign(c);
  EXPECT_GE(s.paths_found, 1u);
  EXPECT_EQ(s.execs_total, 100000u);
  EXPECT_EQ(s.retrain_events, 0u);
  EXPECT_TRUE(std::filesystem::exists(dir / "stats.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "model.ckpt"));
  EXPECT_FALSE(std::filesystem::exists(dir / "signals.log"));
  EXPECT_FALSE(std::filesystem::is_empty(dir / "queue"));
}

TEST(Campaign, BaselineIsDeterministic) {
  const CampaignStats a = RunCampaign(Budgeted(100000));
  const CampaignStats b = RunCampaign(Budgeted(100000));
  EXPECT_EQ(a.paths_found, b.paths_found);
  EXPECT_EQ(a.unique_crashes, b.unique_crashes);
  EXPECT_EQ(a.edges_covered, b.edges_covered);
}

TEST(Campaign, UnknownTargetThrows) {
  CampaignConfig c = Budgeted(10);
  c.target = "nope";
  EXPECT_THROW(RunCampaign(c), std::invalid_argument);
}

// Parses signals.log into per-direction seq lists.
std::map<std::string, std::vector<uint64_t>> JournalSeqs(
    const std::filesystem::path& path) {
  std::map<std::string, std::vector<uint64_t>> seqs;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string ts, dir, wire;
    ls >> ts >> dir;
    std::getline(ls >> std::ws, wire);
    seqs[dir].push_back(DecodeWire(wire).seq);
  }
  return seqs;
}

TEST(Campaign, AdversarialRetrainsAfterCycleEnd) {
  testing::TempDir dir;
  CampaignConfig c;
  c.target = "loop";
  c.mode = Mode::kAdversarial;
  c.budget_secs = 6;
  c.out_dir = dir.path();
  c.hidden_width = 32;
  c.epochs = 5;
  c.stats_interval_secs = 1;
  const CampaignStats s = RunCampaign(c);
  EXPECT_GE(s.cycles_done, 1u);
  EXPECT_GE(s.retrains_after_cycle_end, 1u);
  EXPECT_FALSE(s.ml_degraded);
  EXPECT_TRUE(std::filesystem::exists(dir / "model.ckpt"));
  ASSERT_TRUE(std::filesystem::exists(dir / "signals.log"));
  const auto seqs = JournalSeqs(dir / "signals.log");
  ASSERT_TRUE(seqs.count("recv"));
  for (const auto& [direction, list] : seqs) {
    for (size_t i = 0; i < list.size(); ++i) {
      ASSERT_EQ(list[i], i + 1) << direction;
    }
  }
  const SurrogateModel m = SurrogateModel::Load(dir / "model.ckpt");
  EXPECT_EQ(m.layer_sizes()[1], 32u);
}

TEST(Campaign, FuzzingSurvivesMlFailure) {
  CampaignConfig c;
  c.mode = Mode::kAdversarial;
  c.budget_secs = 4;
  c.stats_interval_secs = 1;
  c.ml_fail_after_secs = 1;
  const CampaignStats s = RunCampaign(c);
  EXPECT_TRUE(s.ml_degraded);
  ASSERT_GE(s.timeline.size(), 4u);
  for (size_t i = 1; i < s.timeline.size(); ++i) {
    EXPECT_GT(s.timeline[i].execs, s.timeline[i - 1].execs) << i;
  }
}

TEST(Campaign, FuzzingSurvivesWedgedMl) {
  CampaignConfig c;
  c.mode = Mode::kAdversarial;
  c.budget_secs = 4;
  c.stats_interval_secs = 1;
  c.ml_wedge_after_secs = 0.5;
  const CampaignStats s = RunCampaign(c);
  ASSERT_GE(s.timeline.size(), 4u);
  for (size_t i = 1; i < s.timeline.size(); ++i) {
    EXPECT_GT(s.timeline[i].execs, s.timeline[i - 1].execs) << i;
  }
}

TEST(Inject, Contract) {
  const CampaignConfig c = Budgeted(1000);
  FuzzLoop loop(BuiltinGoat(), c);
  EXPECT_EQ(loop.InjectCandidates({}), 0u);
  const std::vector<Bytes> one = {ToBytes("{\"a\":[1,2]}")};
  EXPECT_EQ(loop.InjectCandidates(one), 1u);
  EXPECT_EQ(loop.InjectCandidates(one), 0u);  // already queued
  EXPECT_EQ(loop.corpus().entries().back().source, Source::kAdversarial);

  const uint64_t before = loop.corpus().unique_crashes();
  const std::vector<Bytes> bug = {BuiltinGoat().manifest().front().trigger};
  loop.InjectCandidates(bug);
  EXPECT_EQ(loop.corpus().unique_crashes(), before + 1);
}

}  // namespace
}  // namespace advfuzz
