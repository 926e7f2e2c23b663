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

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "advfuzz/orchestrator.h"

namespace advfuzz::cli {
namespace fs = std::filesystem;
namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Campaign flags shared by fuzz and bench. Each maps to a config key.
struct CampaignFlags {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::string config_file;
  std::vector<std::string> sets;

  void Register(CLI::App* app) {
    auto add = [&](const std::string& flag, const std::string& key,
                   const std::string& help) {
      options.emplace_back(key, app->add_option(flag, values[key], help));
    };
    add("--target", "target", "built-in target name (goat, loop)");
    add("--mode", "mode", "baseline or adversarial");
    add("--budget-secs", "budget_secs", "wall-clock budget in seconds");
    add("--budget-execs", "budget_execs", "execution budget");
    add("--seed", "seed", "rng seed");
    add("--out", "out", "output directory");
    add("--n-targets", "n_targets", "rare edges attacked per batch");
    add("--theta", "theta", "perturbation per selected feature");
    add("--max-iters", "max_iters", "attack iterations per target");
    add("--retrain-threshold", "retrain_threshold",
        "new queue entries that trigger retraining");
    add("--stats-interval", "stats_interval_secs", "seconds between stats rows");
    app->add_option("--config", config_file, "flat key = value config file");
    app->add_option("--set", sets, "extra key=value setting (repeatable)");
  }

  // Defaults, then the config file, then --set, then dedicated flags.
  CampaignConfig Build(const std::string& default_out) const {
    CampaignConfig c;
    c.target.clear();
    c.out_dir = fs::path(default_out);
    try {
      if (!config_file.empty()) {
        for (const auto& [k, v] : ReadConfigFile(config_file)) c.Set(k, v);
      }
      for (const std::string& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value");
        c.Set(s.substr(0, eq), s.substr(eq + 1));
      }
      for (const auto& [key, opt] : options) {
        if (opt->count() > 0) c.Set(key, values.at(key));
      }
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
    if (c.target.empty()) throw UsageError("missing target name (--target)");
    if (FindTarget(c.target) == nullptr) {
      throw UsageError("unknown target '" + c.target + "'");
    }
    c.Validate();
    return c;
  }
};

void PrintStats(std::ostream& out, const CampaignStats& s) {
  out << "execs " << s.execs_total << "  execs/s " << std::fixed
      << std::setprecision(0) << s.execs_per_sec << "  paths " << s.paths_found
      << "  crashes " << s.unique_crashes << "  edges " << s.edges_covered
      << "  depth " << s.max_depth << "  cycles " << s.cycles_done;
  if (s.retrain_events > 0 || s.candidates_received > 0) {
    out << "  retrains " << s.retrain_events << "  candidates "
        << s.candidates_accepted << "/" << s.candidates_received;
  }
  if (s.ml_degraded) out << "  (ML component lost)";
  out << "\n";
}

int CmdFuzz(const CampaignFlags& flags, std::ostream& out) {
  CampaignConfig c = flags.Build("out");
  const CampaignStats s = RunCampaign(c);
  PrintStats(out, s);
  return kExitOk;
}

const char* const kTableColumns[] = {
    "Average Executions Per Second", "Total Executions (Millions)",
    "Levels of Mutation",            "Paths Found",
    "Unique Crashes Found",          "Edges Covered"};

std::vector<double> Metrics(const CampaignStats& s) {
  return {s.execs_per_sec, static_cast<double>(s.execs_total) / 1e6,
          static_cast<double>(s.max_depth), static_cast<double>(s.paths_found),
          static_cast<double>(s.unique_crashes),
          static_cast<double>(s.edges_covered)};
}

std::string Csv(std::string s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

int CmdBench(const CampaignFlags& flags, int trials, int jobs, std::ostream& out) {
  if (trials < 1) throw UsageError("--trials must be >= 1");
  if (jobs < 1) throw UsageError("--jobs must be >= 1");
  const CampaignConfig base = flags.Build("bench_out");
  const fs::path root = *base.out_dir;
  fs::create_directories(root);

  const Mode modes[] = {Mode::kBaseline, Mode::kAdversarial};
  std::vector<CampaignStats> results(2 * static_cast<size_t>(trials));
  std::vector<CampaignConfig> configs;
  for (int k = 0; k < trials; ++k) {
    for (Mode m : modes) {
      CampaignConfig c = base;
      c.mode = m;
      c.seed = base.seed + static_cast<uint64_t>(k);  // matched per pair
      c.out_dir = root / std::string(ModeName(m)) / ("trial_" + std::to_string(k));
      fs::create_directories(*c.out_dir);
      configs.push_back(c);
    }
  }

  // Pairs run back to back; --jobs > 1 runs that many campaigns at once.
  std::atomic<size_t> next{0};
  std::vector<std::string> errors(configs.size());
  auto worker = [&] {
    for (size_t i; (i = next++) < configs.size();) {
      try {
        results[i] = RunCampaign(configs[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }

  // Means per mode.
  std::vector<std::vector<double>> mean(2, std::vector<double>(6, 0.0));
  for (size_t i = 0; i < results.size(); ++i) {
    const auto m = Metrics(results[i]);
    for (size_t c = 0; c < m.size(); ++c) mean[i % 2][c] += m[c] / trials;
  }

  {
    std::ofstream csv(root / "bench.csv", std::ios::trunc);
    csv << "mode";
    for (const char* col : kTableColumns) csv << ',' << Csv(col);
    csv << '\n';
    for (int r = 0; r < 2; ++r) {
      csv << ModeName(modes[r]);
      for (double v : mean[r]) csv << ',' << v;
      csv << '\n';
    }
  }
  int paths_wins = 0, crash_wins = 0;
  {
    std::ofstream csv(root / "bench_trials.csv", std::ios::trunc);
    csv << "trial,seed,mode,execs_per_sec,execs,levels,paths,crashes,edges,"
           "retrain_events,candidates_accepted\n";
    for (size_t i = 0; i < results.size(); ++i) {
      const auto& s = results[i];
      csv << i / 2 << ',' << configs[i].seed << ',' << ModeName(configs[i].mode)
          << ',' << s.execs_per_sec << ',' << s.execs_total << ',' << s.max_depth
          << ',' << s.paths_found << ',' << s.unique_crashes << ','
          << s.edges_covered << ',' << s.retrain_events << ','
          << s.candidates_accepted << '\n';
    }
    std::ofstream deltas(root / "bench_deltas.csv", std::ios::trunc);
    deltas << "trial,d_paths,d_crashes,d_edges\n";
    for (int k = 0; k < trials; ++k) {
      const auto& b = results[2 * k];
      const auto& a = results[2 * k + 1];
      const auto dp = static_cast<int64_t>(a.paths_found) - static_cast<int64_t>(b.paths_found);
      const auto dc = static_cast<int64_t>(a.unique_crashes) -
                      static_cast<int64_t>(b.unique_crashes);
      const auto de = static_cast<int64_t>(a.edges_covered) -
                      static_cast<int64_t>(b.edges_covered);
      paths_wins += dp >= 0;
      crash_wins += dc >= 0;
      deltas << k << ',' << dp << ',' << dc << ',' << de << '\n';
    }
  }

  std::ostringstream table;
  size_t w0 = 12;
  table << std::left << std::setw(static_cast<int>(w0)) << "";
  for (const char* col : kTableColumns) table << " | " << col;
  table << "\n";
  for (int r = 0; r < 2; ++r) {
    table << std::left << std::setw(static_cast<int>(w0)) << ModeName(modes[r]);
    for (size_t c = 0; c < 6; ++c) {
      const int w = static_cast<int>(std::string(kTableColumns[c]).size());
      table << " | " << std::right << std::setw(w) << std::fixed
            << std::setprecision(c == 1 ? 3 : (c == 0 ? 0 : 1)) << mean[r][c];
    }
    table << "\n";
  }
  table << "\ntrials " << trials << "; adversarial >= baseline: paths " << paths_wins
        << "/" << trials << ", crashes " << crash_wins << "/" << trials << "\n";
  std::ofstream(root / "bench.txt", std::ios::trunc) << table.str();
  out << table.str();
  return kExitOk;
}

struct RunRef {
  fs::path stats;
  std::string mode;
  int trial;
};

std::string ModeFromSummary(const fs::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) return "unknown";
  try {
    return nlohmann::json::parse(in).value("mode", "unknown");
  } catch (const std::exception&) {
    return "unknown";
  }
}

std::vector<RunRef> FindRuns(const fs::path& input) {
  std::vector<RunRef> runs;
  if (fs::is_regular_file(input) && input.filename() == "stats.csv") {
    runs.push_back({input, ModeFromSummary(input.parent_path()), 0});
    return runs;
  }
  if (fs::exists(input / "stats.csv")) {
    int trial = 0;
    const std::string name = input.filename().string();
    if (name.rfind("trial_", 0) == 0) trial = std::atoi(name.c_str() + 6);
    runs.push_back({input / "stats.csv", ModeFromSummary(input), trial});
    return runs;
  }
  for (const char* mode : {"baseline", "adversarial"}) {
    const fs::path md = input / mode;
    if (!fs::is_directory(md)) continue;
    std::vector<std::pair<int, fs::path>> trials;
    for (const auto& e : fs::directory_iterator(md)) {
      const std::string name = e.path().filename().string();
      if (name.rfind("trial_", 0) == 0 && fs::exists(e.path() / "stats.csv")) {
        trials.emplace_back(std::atoi(name.c_str() + 6), e.path() / "stats.csv");
      }
    }
    std::sort(trials.begin(), trials.end());
    for (auto& [k, p] : trials) runs.push_back({p, mode, k});
  }
  return runs;
}

int CmdReport(const std::vector<std::string>& inputs, const std::string& output,
              std::ostream& out) {
  std::vector<RunRef> runs;
  for (const auto& in : inputs) {
    auto found = FindRuns(in);
    if (found.empty()) throw UsageError("no stats.csv found under " + in);
    runs.insert(runs.end(), found.begin(), found.end());
  }
  std::ostringstream csv;
  csv << "t,mode,trial,paths,crashes,edges\n";
  size_t rows = 0;
  for (const auto& r : runs) {
    for (const auto& row : ReadStatsCsv(r.stats)) {
      csv << row.t << ',' << r.mode << ',' << r.trial << ',' << row.paths << ','
          << row.crashes << ',' << row.edges << '\n';
      ++rows;
    }
  }
  if (output.empty() || output == "-") {
    out << csv.str();
  } else {
    std::ofstream f(output, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + output);
    f << csv.str();
    out << "wrote " << rows << " rows from " << runs.size() << " runs to "
        << output << "\n";
  }
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"adversarial coverage-guided fuzzer"};
  app.name("advfuzz");
  app.require_subcommand(1);

  CampaignFlags fuzz_flags;
  auto* fuzz = app.add_subcommand("fuzz", "run one campaign");
  fuzz_flags.Register(fuzz);

  CampaignFlags bench_flags;
  int trials = 5;
  int jobs = 1;
  auto* bench = app.add_subcommand("bench", "paired baseline/adversarial trials");
  bench_flags.Register(bench);
  bench->add_option("--trials", trials, "paired trials")->capture_default_str();
  bench->add_option("--jobs", jobs, "campaigns run at once")->capture_default_str();

  std::vector<std::string> inputs;
  std::string output;
  auto* report = app.add_subcommand("report", "merge stats timelines into long CSV");
  report->add_option("inputs", inputs, "run or bench output directories")
      ->required();
  report->add_option("-o,--output", output, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fuzz) return CmdFuzz(fuzz_flags, out);
    if (*bench) return CmdBench(bench_flags, trials, jobs, out);
    if (*report) return CmdReport(inputs, output, out);
  } catch (const std::invalid_argument& e) {
    err << "advfuzz: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "advfuzz: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace advfuzz::cli
