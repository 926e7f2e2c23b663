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
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "advfuzz/orchestrator.h"
#include "cli.h"
#include "test_util.h"

namespace advfuzz {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result RunCli(std::vector<std::string> args) {
  args.insert(args.begin(), "advfuzz");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::Run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> ReadLines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

TEST(Cli, FuzzBaseline) {
  testing::TempDir dir;
  const Result r = RunCli({"fuzz", "--target", "goat", "--mode", "baseline",
                           "--budget-execs", "100000", "--seed", "7", "--out",
                           dir.path().string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "stats.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  EXPECT_TRUE(std::filesystem::is_directory(dir / "crashes"));
  EXPECT_FALSE(std::filesystem::exists(dir / "model.ckpt"));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(RunCli({"fuzz", "--budget-execs", "10"}).code, cli::kExitUsage);
  EXPECT_EQ(RunCli({"fuzz", "--target", "nope", "--budget-execs", "10"}).code,
            cli::kExitUsage);
  EXPECT_EQ(RunCli({"fuzz", "--target", "goat"}).code, cli::kExitUsage);
  EXPECT_EQ(RunCli({"fuzz", "--target", "goat", "--budget-execs", "10",
                    "--mode", "fast"}).code,
            cli::kExitUsage);
  EXPECT_EQ(RunCli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(RunCli({}).code, cli::kExitUsage);
}

TEST(Cli, AdversarialAddsModelAndJournal) {
  testing::TempDir dir;
  const Result r = RunCli({"fuzz", "--target", "goat", "--mode", "adversarial",
                           "--budget-secs", "3", "--out", dir.path().string(),
                           "--set", "hidden_width=32", "--set", "epochs=5"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "model.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "signals.log"));
}

TEST(Cli, ConfigFilePrecedence) {
  testing::TempDir dir;
  std::ofstream(dir / "run.cfg") << "target = goat\nbudget_execs = 5000\n"
                                    "seed = 3\nmode = adversarial\n";
  // --set beats the file, explicit flags beat --set.
  const Result r = RunCli({"fuzz", "--config", (dir / "run.cfg").string(),
                           "--set", "mode=baseline", "--set", "seed=4",
                           "--seed", "5", "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::ifstream in(dir / "o" / "summary.json");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string json = ss.str();
  EXPECT_NE(json.find("\"mode\": \"baseline\""), std::string::npos) << json;
  EXPECT_NE(json.find("\"seed\": 5"), std::string::npos) << json;
  EXPECT_NE(json.find("\"budget_execs\": 5000"), std::string::npos) << json;
}

TEST(Cli, BenchAndReport) {
  testing::TempDir dir;
  const Result b = RunCli({"bench", "--target", "goat", "--trials", "2",
                           "--budget-execs", "20000", "--out",
                           dir.path().string(), "--set", "hidden_width=32",
                           "--set", "epochs=3"});
  ASSERT_EQ(b.code, cli::kExitOk) << b.err;
  const auto table = ReadLines(dir / "bench.csv");
  ASSERT_EQ(table.size(), 3u);  // header + one row per mode
  for (const char* col : {"Average Executions Per Second", "Paths Found",
                          "Unique Crashes Found", "Levels of Mutation",
                          "Edges Covered"}) {
    EXPECT_NE(table[0].find(col), std::string::npos) << col;
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "bench.txt"));

  const auto out = dir / "long.csv";
  const Result r = RunCli({"report", dir.path().string(), "-o", out.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto lines = ReadLines(out);
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines[0], "t,mode,trial,paths,crashes,edges");

  // Row count equals the sum of the input timelines.
  size_t expected = 0;
  std::set<std::string> trials, modes;
  for (const char* mode : {"baseline", "adversarial"}) {
    for (int k = 0; k < 2; ++k) {
      expected += ReadStatsCsv(dir / mode / ("trial_" + std::to_string(k)) /
                               "stats.csv")
                      .size();
    }
  }
  EXPECT_EQ(lines.size() - 1, expected);
  for (size_t i = 1; i < lines.size(); ++i) {
    std::stringstream ls(lines[i]);
    std::string t, mode, trial;
    std::getline(ls, t, ',');
    std::getline(ls, mode, ',');
    std::getline(ls, trial, ',');
    modes.insert(mode);
    trials.insert(mode + "/" + trial);
  }
  EXPECT_EQ(modes, (std::set<std::string>{"adversarial", "baseline"}));
  EXPECT_EQ(trials.size(), 4u);
}

TEST(Cli, ReportSingleRunAndMissingInput) {
  testing::TempDir dir;
  ASSERT_EQ(RunCli({"fuzz", "--target", "goat", "--budget-execs", "5000",
                    "--out", (dir / "run").string()})
                .code,
            cli::kExitOk);
  const Result r = RunCli({"report", (dir / "run").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::stringstream ss(r.out);
  std::set<std::string> modes;
  std::string line;
  std::getline(ss, line);
  while (std::getline(ss, line)) {
    modes.insert(line.substr(line.find(',') + 1,
                             line.find(',', line.find(',') + 1) - line.find(',') - 1));
  }
  EXPECT_EQ(modes, (std::set<std::string>{"baseline"}));
  EXPECT_EQ(RunCli({"report", (dir / "missing").string()}).code,
            cli::kExitUsage);
}

}  // namespace
}  // namespace advfuzz
